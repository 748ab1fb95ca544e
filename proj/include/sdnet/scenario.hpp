#pragma once

// Scenario files (JSON), model dispatch and output writers for the CLI.
// File formats are described in docs/formats.md.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "sdnet/core.hpp"

namespace sdnet {

enum class ModelId { hk, hk_restricted, hk_01, nn_async, nn_sync, stackelberg_ex1, stackelberg_ex2 };

std::string to_string(ModelId m);
/// Throws ScenarioError for an unknown id.
ModelId parse_model_id(const std::string& s);

/// Parse or validation failure. The message names the offending field.
class ScenarioError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct UniformSource {
  std::uint64_t seed = 0;
  double lo = 0.0;
  double hi = 1.0;
  bool operator==(const UniformSource&) const = default;
};

struct EdgeBound {
  std::size_t i = 0;
  std::size_t j = 0;
  double epsilon = 0.0;
  bool operator==(const EdgeBound&) const = default;
};

struct Scenario {
  ModelId model = ModelId::hk;
  std::size_t n = 0;
  std::size_t d = 1;

  // exactly one initial source
  std::optional<std::vector<std::vector<double>>> explicit_profile;
  std::optional<UniformSource> uniform;

  // model parameters; which ones are required depends on the model
  std::optional<double> epsilon;  // hk, hk-01, hk-restricted (uniform), stackelberg-ex1
  std::optional<std::vector<std::pair<std::size_t, std::size_t>>> restriction;
  std::optional<std::vector<EdgeBound>> edge_bounds;  // hk-restricted
  std::optional<std::vector<std::size_t>> stubborn;   // hk-01
  std::optional<std::vector<double>> mu;              // nn-*
  std::optional<std::string> selection;               // nn-async
  std::optional<std::string> leader;                  // stackelberg-ex2
  std::optional<double> eq_epsilon;                   // nn-*: absolute
  std::optional<double> eq_epsilon_rel;               // nn-*: fraction of D0

  // run controls
  std::size_t max_iters = 10000;
  double tol = 1e-12;
  std::size_t trials = 1;
  std::uint64_t seed = 0;

  bool operator==(const Scenario&) const = default;
};

Scenario parse_scenario_text(const std::string& text);
Scenario parse_scenario(const std::filesystem::path& path);
/// Canonical JSON text; parse_scenario_text(emit_scenario(s)) == s.
std::string emit_scenario(const Scenario& s);

/// Initial profile of trial k (trial 0 for single runs).
OpinionProfile initial_profile(const Scenario& s, std::size_t trial = 0);

struct CertificateOutcome {
  std::string name;
  bool pass = true;
  std::string detail;
};

struct RunSummary {
  std::string model;
  std::string status;  // "converged", "max_iters" or "equilibrium"
  bool converged = false;
  std::size_t iterations = 0;
  std::string final_lyapunov;
  std::vector<CertificateOutcome> certificates;
  std::optional<std::uint64_t> seed;
  double seconds = 0.0;  // wall time; reported on stdout only

  bool certificates_pass() const;
  /// 0 = converged and certified, 2 = max_iters, 3 = certificate violation.
  int exit_code() const;
};

/// Runs the scenario and writes trajectory.csv, lyapunov.csv and
/// certificate.json (plus trials.csv for batches) into out_dir.
RunSummary run_scenario(const Scenario& s, const std::filesystem::path& out_dir);

/// Measured-versus-bound report as JSON text.
struct BoundReport {
  std::string json;
  bool pass = true;
};
BoundReport verify_bounds(const Scenario& s);

/// Random brute-force comparisons at size n; JSON report.
BoundReport oracle_check(std::size_t n, std::size_t instances, std::uint64_t seed);

}  // namespace sdnet
