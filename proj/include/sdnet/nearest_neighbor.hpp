#pragma once

// Nearest-neighbor opinion dynamics. Each updating agent i moves to
// mu_i x_i + (1 - mu_i) x_{r(i)}, where r(i) is its closest other agent
// (lowest index wins ties). Asynchronous mode updates one agent per step,
// synchronous mode updates all agents against the same pre-step profile.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "sdnet/bcd.hpp"
#include "sdnet/core.hpp"
#include "sdnet/hk.hpp"

namespace sdnet {

enum class NNMode { async, sync };
enum class Selection { uniform_random, round_robin };

struct NNModelSpec {
  std::vector<double> mu;  // one mixing weight per agent, each in (0,1)
  NNMode mode = NNMode::async;
  Selection selection = Selection::uniform_random;
  std::uint64_t seed = 0;
};

void validate(const NNModelSpec& spec, std::size_t n);
bool uniform_mu(const NNModelSpec& spec);

std::size_t nearest(const OpinionProfile& x, std::size_t i);
std::vector<std::size_t> nearest_all(const OpinionProfile& x);

/// Binary matrix with exactly one 1 per row, at column r(i).
NetworkMatrix nn_network(const OpinionProfile& x);

/// sort(sum_j lambda_ij ||y_i - y_j||) for a network in the row-stochastic,
/// zero-diagonal constraint set.
LexValue nn_objective(const NetworkMatrix& lambda, const OpinionProfile& y);

OpinionProfile async_step(const OpinionProfile& x, std::size_t agent, const NNModelSpec& spec);
OpinionProfile sync_step(const OpinionProfile& x, const NNModelSpec& spec);

/// Sorted nearest-neighbor distances.
LexValue lex_lyapunov(const OpinionProfile& x);

/// Largest n for which vhat's weights 2^(n-i) are used.
inline constexpr std::size_t kMaxVhatAgents = 50;

/// sum_i (i-th smallest nearest-neighbor distance) * 2^(n-i).
/// Throws std::domain_error for n > kMaxVhatAgents.
double vhat(const OpinionProfile& x);

/// lhs = vhat(x) - vhat(x'), rhs = (1 - mu_l) ||x_l - x_{r'(l)}|| with r'
/// the nearest neighbor of l in the updated profile, both points taken
/// before the update.
DriftCertificate async_drift_check(const OpinionProfile& x, std::size_t agent,
                                   const NNModelSpec& spec);

struct SyncDrift {
  double lhs = 0.0;
  double rhs = 0.0;
  double longest = 0.0;   // D_t
  double shortest = 0.0;  // d_t within the component holding D_t
  bool holds(double tol = kLyapunovTol) const { return lhs >= rhs - tol; }
};

/// lhs = sum_i ||x_i - x_r(i)|| minus the same sum after a synchronous step;
/// rhs = (1 - mu)(D_t - d_t). Requires uniform mu.
SyncDrift sync_drift_check(const OpinionProfile& x, const NNModelSpec& spec);

struct EpsEquilibriumReport {
  double epsilon = 0.0;
  std::optional<std::size_t> t_eps;
  /// max_i ||x_i(t) - x_r(i)(t)|| for t = 0 .. iterations.
  std::vector<double> max_nn_trace;
  double d0 = 0.0;
  std::size_t iterations = 0;
  std::uint64_t seed = 0;
  std::optional<OpinionProfile> final_state;  // x(iterations)

  // Per-step certificate tallies (zero means every step passed).
  std::size_t lex_violations = 0;
  std::size_t drift_violations = 0;
  std::size_t componentwise_violations = 0;  // synchronous mode only
  std::size_t hull_violations = 0;
  double min_drift_slack = 0.0;  // min over steps of lhs - rhs

  bool reached() const { return t_eps.has_value(); }
  bool certificates_ok() const {
    return lex_violations == 0 && drift_violations == 0 && componentwise_violations == 0 &&
           hull_violations == 0;
  }
};

/// Simulates from x0 until max_i ||x_i - x_r(i)|| <= epsilon or max_iters
/// steps. Per-step certificates are evaluated when `check` is set.
EpsEquilibriumReport run_to_eps_equilibrium(const OpinionProfile& x0, double epsilon,
                                            const NNModelSpec& spec, std::size_t max_iters,
                                            bool check = true);

/// n 2^n D0 / ((1 - mu_max) eps).
double async_time_bound(std::size_t n, double d0, double mu_max, double eps);
/// n (2 D0 / eps + log_{|1-2mu|}(eps / (2 D0))); the log term is 0 at mu = 1/2.
double sync_time_bound(std::size_t n, double d0, double mu, double eps);

/// BCD instantiation with lexicographic objective. Asynchronous models carry
/// their own selection stream, so the returned model is stateful.
CoupledModel make_nn_model(const NNModelSpec& spec);

/// Membership in {row-stochastic, zero diagonal}.
bool in_row_stochastic_set(const NetworkMatrix& lambda, double tol = 1e-12);

}  // namespace sdnet
