// Command-line harness: run scenarios, verify bounds, compare against oracles.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "sdnet/scenario.hpp"

namespace {

constexpr const char* kOutEnv = "SDNET_OUT_DIR";

std::string default_out() {
  const char* env = std::getenv(kOutEnv);
  return env && *env ? env : "sdnet_out";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"state-dependent network dynamics"};
  app.require_subcommand(1);

  std::string scenario_path;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> max_iters;
  std::optional<double> tol;
  auto* run_cmd = app.add_subcommand("run", "run a scenario and write trajectory, Lyapunov and certificate files");
  run_cmd->add_option("scenario", scenario_path, "scenario file (JSON)")->required();
  run_cmd->add_option("--out", out_dir, std::string("output directory (default $") + kOutEnv + " or ./sdnet_out)");
  run_cmd->add_option("--seed", seed, "override run.seed");
  run_cmd->add_option("--max-iters", max_iters, "override run.max_iters");
  run_cmd->add_option("--tol", tol, "override run.tol");

  std::string verify_path;
  auto* verify_cmd = app.add_subcommand("verify", "check measured convergence against closed-form bounds");
  verify_cmd->add_option("scenario", verify_path, "scenario file (JSON)")->required();

  std::size_t oracle_n = 5;
  std::size_t instances = 100;
  std::uint64_t oracle_seed = 0;
  auto* oracle_cmd = app.add_subcommand("oracle-check", "compare fast minimizers with brute-force enumeration");
  oracle_cmd->add_option("--n", oracle_n, "agents, at most 5")->check(CLI::Range(2, 5));
  oracle_cmd->add_option("--instances", instances, "random instances");
  oracle_cmd->add_option("--seed", oracle_seed, "batch seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    // usage errors share exit 1 with bad input; 2 and 3 stay reserved
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  try {
    if (*run_cmd) {
      sdnet::Scenario s = sdnet::parse_scenario(scenario_path);
      if (seed) s.seed = *seed;
      if (max_iters) s.max_iters = *max_iters;
      if (tol) s.tol = *tol;
      const std::filesystem::path out = out_dir.empty() ? default_out() : out_dir;
      const sdnet::RunSummary sum = sdnet::run_scenario(s, out);
      std::printf("model=%s status=%s iterations=%zu final_lyapunov=%s seconds=%.3f\n", sum.model.c_str(),
                  sum.status.c_str(), sum.iterations, sum.final_lyapunov.c_str(), sum.seconds);
      if (sum.seed) std::printf("seed=%llu\n", static_cast<unsigned long long>(*sum.seed));
      for (const auto& c : sum.certificates) {
        std::printf("%s %s %s\n", c.pass ? "PASS" : "FAIL", c.name.c_str(), c.detail.c_str());
      }
      std::printf("output: %s\n", out.string().c_str());
      return sum.exit_code();
    }
    if (*verify_cmd) {
      const sdnet::BoundReport rep = sdnet::verify_bounds(sdnet::parse_scenario(verify_path));
      std::cout << rep.json;
      return rep.pass ? 0 : 3;
    }
    const sdnet::BoundReport rep = sdnet::oracle_check(oracle_n, instances, oracle_seed);
    std::cout << rep.json;
    return rep.pass ? 0 : 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
