// Acceptance harness: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "sdnet/bcd.hpp"
#include "sdnet/core.hpp"
#include "sdnet/graph.hpp"
#include "sdnet/hk.hpp"
#include "sdnet/nearest_neighbor.hpp"
#include "sdnet/scenario.hpp"
#include "sdnet/stackelberg.hpp"

using namespace sdnet;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

std::size_t draw_between(RngStream& rng, std::size_t lo, std::size_t hi) {
  return lo + rng.index(hi - lo + 1);
}

RestrictionGraph random_restriction(RngStream& rng, std::size_t n, double p) {
  std::vector<RestrictionGraph::Edge> edges;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (rng.uniform01() < p) edges.emplace_back(i, j);
  return RestrictionGraph(n, edges);
}

ZeroOnePartition random_partition(RngStream& rng, std::size_t n) {
  std::vector<std::size_t> s0;
  for (std::size_t i = 0; i < n; ++i)
    if (rng.uniform01() < 0.3) s0.push_back(i);
  return ZeroOnePartition(n, s0);
}

// 1 ------------------------------------------------------------------------
Outcome lyapunov_monotonicity() {
  const char* names[] = {"homogeneous", "restricted", "zero-one"};
  std::size_t failures[3] = {0, 0, 0};
  std::size_t steps = 0;
  for (int family = 0; family < 3; ++family) {
    for (std::uint64_t k = 0; k < 500; ++k) {
      RngStream rng = RngStream::derive(1000 + family, k);
      const std::size_t n = draw_between(rng, 2, 20);
      const std::size_t d = draw_between(rng, 1, 3);
      const OpinionProfile x0 = uniform_profile(rng, n, d);
      CoupledModel model;
      if (family == 0) {
        model = make_hk_model({Homogeneous{rng.uniform(0.05, 0.5)}, std::nullopt, std::nullopt});
      } else if (family == 1) {
        Matrix eps(n, n);
        for (std::size_t i = 0; i < n; ++i)
          for (std::size_t j = i; j < n; ++j) eps(i, j) = eps(j, i) = rng.uniform(0.05, 0.5);
        model = make_hk_model({EdgeHeterogeneous{eps}, random_restriction(rng, n, 0.5), std::nullopt});
      } else {
        model = make_zero_one_model(random_partition(rng, n), rng.uniform(0.1, 0.6));
      }
      const TrajectoryRecord traj = run(model, x0, RunConfig{5000, 1e-12, true});
      const MonotoneReport rep = certify_monotone(traj, model, 1e-9);
      steps += rep.checked_steps;
      if (!rep.ok) ++failures[family];
    }
  }
  Outcome o;
  o.pass = failures[0] + failures[1] + failures[2] == 0;
  o.detail = "1500 runs, " + std::to_string(steps) + " steps; failures";
  for (int f = 0; f < 3; ++f) o.detail += std::string(" ") + names[f] + "=" + std::to_string(failures[f]);
  return o;
}

// 2 ------------------------------------------------------------------------
Outcome drift_inequality() {
  std::size_t violations = 0, steps = 0;
  double min_slack = std::numeric_limits<double>::infinity();
  for (std::uint64_t k = 0; k < 200; ++k) {
    RngStream rng = RngStream::derive(2000, k);
    const std::size_t n = draw_between(rng, 2, 20);
    const std::size_t d = draw_between(rng, 1, 3);
    const OpinionProfile x0 = uniform_profile(rng, n, d);
    const HKModelSpec spec{Homogeneous{rng.uniform(0.05, 0.5)}, random_restriction(rng, n, 0.5),
                           std::nullopt};
    const TrajectoryRecord traj = run(make_hk_model(spec), x0, RunConfig{5000, 1e-12, false});
    for (std::size_t t = 0; t + 1 < traj.size(); ++t) {
      const DriftCertificate c = drift_certificate_restricted(traj.steps[t].x, spec);
      min_slack = std::min(min_slack, c.lhs - c.rhs);
      ++steps;
      if (!c.holds(1e-9)) ++violations;
    }
  }
  return {violations == 0, std::to_string(steps) + " steps, " + std::to_string(violations) +
                               " violations, min slack " + fmt("%.3g", min_slack)};
}

// 3 ------------------------------------------------------------------------
Outcome drift_identity() {
  std::size_t violations = 0, steps = 0;
  double worst = 0.0;
  for (std::uint64_t k = 0; k < 200; ++k) {
    RngStream rng = RngStream::derive(3000, k);
    const std::size_t n = draw_between(rng, 2, 12);
    const std::size_t d = draw_between(rng, 1, 3);
    const OpinionProfile x0 = uniform_profile(rng, n, d);
    const ZeroOnePartition part = random_partition(rng, n);
    const double eps = rng.uniform(0.1, 0.6);
    const TrajectoryRecord traj = run(make_zero_one_model(part, eps), x0, RunConfig{5000, 1e-12, false});
    for (std::size_t t = 0; t + 1 < traj.size(); ++t) {
      const DriftIdentity id = zero_one_drift_identity(traj.steps[t].x, part, eps);
      worst = std::max(worst, std::abs(id.lhs - id.rhs));
      ++steps;
      if (std::abs(id.lhs - id.rhs) > 1e-9) ++violations;
    }
  }
  return {violations == 0, std::to_string(steps) + " steps, max gap " + fmt("%.3g", worst)};
}

// 4 ------------------------------------------------------------------------
Outcome worked_example() {
  const OpinionProfile x0 = OpinionProfile::scalar({-15.0 / 16.0, 0.0, 1.0});
  const ZeroOnePartition part(3, {0, 1});
  const TrajectoryRecord traj = run(make_zero_one_model(part, 1.0), x0, RunConfig{60, 0.0, false});
  Outcome o;
  for (std::size_t t = 0; t <= 4; ++t) {
    if (traj.steps[t].x(2, 0) != std::ldexp(1.0, -static_cast<int>(t))) {
      o.pass = false;
      o.detail += "x3(" + std::to_string(t) + ") != 2^-t; ";
    }
  }
  std::optional<std::size_t> first_change;
  for (std::size_t t = 1; t < traj.size() && !first_change; ++t)
    if (!(traj.steps[t].lambda == traj.steps[t - 1].lambda)) first_change = t;
  if (first_change != std::optional<std::size_t>(4)) {
    o.pass = false;
    o.detail += "first network change at " + (first_change ? std::to_string(*first_change) : "none") + "; ";
  }
  const HKModelSpec spec{part.as_confidence(1.0), std::nullopt, std::nullopt};
  std::vector<double> drift;
  for (std::size_t t = 0; t < 4; ++t) {
    drift.push_back(hk_lyapunov(traj.steps[t].x, spec) - hk_lyapunov(traj.steps[t + 1].x, spec));
  }
  for (std::size_t t = 0; t + 1 < drift.size(); ++t) {
    if (drift[t + 1] / drift[t] != 0.25) {
      o.pass = false;
      o.detail += "drift ratio at t=" + std::to_string(t) + " is " + fmt("%.17g", drift[t + 1] / drift[t]) + "; ";
    }
  }
  if (o.pass) o.detail = "x3(t)=2^-t for t<=4, first change at t=4, drift ratio 1/4";
  return o;
}

// 5 ------------------------------------------------------------------------
Outcome network_freeze() {
  std::size_t no_freeze = 0, changed = 0, slow = 0, uncertified = 0;
  double worst_rate = 0.0;
  for (std::uint64_t k = 0; k < 100; ++k) {
    RngStream rng = RngStream::derive(5000, k);
    const std::size_t n = draw_between(rng, 2, 12);
    const std::size_t d = draw_between(rng, 1, 2);
    const OpinionProfile x0 = uniform_profile(rng, n, d, 0.0, static_cast<double>(n) / 2.0);
    const TrajectoryRecord traj =
        run(make_hk_model({Homogeneous{1.0}, std::nullopt, std::nullopt}), x0, RunConfig{100000, 1e-14, false});
    const double delta = 1.0 / (2.0 * static_cast<double>(n * n));
    const FreezeReport fr = detect_network_freeze(traj, delta);
    if (!fr.freeze_index) {
      ++no_freeze;
      continue;
    }
    if (!fr.tail_certified) ++uncertified;
    if (fr.change_after) ++changed;
    const double rate = post_freeze_rate(traj, *fr.freeze_index);
    worst_rate = std::max(worst_rate, rate);
    if (!(rate < 1.0)) ++slow;
  }
  return {no_freeze + changed + slow + uncertified == 0,
          "no-freeze=" + std::to_string(no_freeze) + " change-after=" + std::to_string(changed) +
              " ratio>=1:" + std::to_string(slow) + " uncertified=" + std::to_string(uncertified) +
              ", worst post-freeze ratio " + fmt("%.3g", worst_rate)};
}

// 6 ------------------------------------------------------------------------
Outcome async_bound() {
  bool pass = true;
  std::string detail;
  for (std::size_t n : {4, 6, 8}) {
    for (std::size_t d : {1, 2}) {
      double sum_t = 0.0, min_bound = std::numeric_limits<double>::infinity();
      std::size_t bad_certs = 0, unreached = 0;
      for (std::uint64_t k = 0; k < 100; ++k) {
        RngStream rng = RngStream::derive(6000 + 10 * n + d, k);
        const OpinionProfile x0 = uniform_profile(rng, n, d);
        NNModelSpec spec;
        for (std::size_t i = 0; i < n; ++i) spec.mu.push_back(rng.uniform(0.1, 0.9));
        spec.seed = rng.next_u64();
        const double d0 = diameter(x0);
        const double eps = 0.05 * d0;
        const double mu_max = *std::max_element(spec.mu.begin(), spec.mu.end());
        const EpsEquilibriumReport rep = run_to_eps_equilibrium(x0, eps, spec, 2000000);
        if (!rep.reached()) ++unreached;
        else sum_t += static_cast<double>(*rep.t_eps);
        if (!rep.certificates_ok()) ++bad_certs;
        min_bound = std::min(min_bound, async_time_bound(n, d0, mu_max, eps));
      }
      const double mean = sum_t / 100.0;
      const bool ok = unreached == 0 && bad_certs == 0 && mean <= min_bound;
      pass = pass && ok;
      detail += "n=" + std::to_string(n) + ",d=" + std::to_string(d) + ": mean " + fmt("%.1f", mean) +
                " <= " + fmt("%.0f", min_bound) + (bad_certs ? " (cert failures)" : "") + "; ";
    }
  }
  return {pass, detail};
}

// 7 ------------------------------------------------------------------------
Outcome sync_bound() {
  bool pass = true;
  std::string detail;
  for (double mu : {0.3, 0.5, 0.7}) {
    double worst_ratio = 0.0;
    std::size_t failures = 0;
    for (std::uint64_t k = 0; k < 100; ++k) {
      RngStream rng = RngStream::derive(7000 + static_cast<std::uint64_t>(mu * 10), k);
      const std::size_t n = draw_between(rng, 2, 10);
      const std::size_t d = draw_between(rng, 1, 2);
      const OpinionProfile x0 = uniform_profile(rng, n, d);
      NNModelSpec spec{std::vector<double>(n, mu), NNMode::sync, Selection::round_robin, 0};
      const double d0 = diameter(x0);
      const double eps = 0.05 * d0;
      const EpsEquilibriumReport rep = run_to_eps_equilibrium(x0, eps, spec, 1000000);
      const double bound = sync_time_bound(n, d0, mu, eps);
      if (!rep.reached() || !rep.certificates_ok() || static_cast<double>(*rep.t_eps) > bound) {
        ++failures;
        continue;
      }
      worst_ratio = std::max(worst_ratio, static_cast<double>(*rep.t_eps) / bound);
    }
    pass = pass && failures == 0;
    detail += "mu=" + fmt("%.1f", mu) + ": failures " + std::to_string(failures) + ", max t/bound " +
              fmt("%.3f", worst_ratio) + "; ";
  }
  return {pass, detail};
}

// 8 ------------------------------------------------------------------------
Outcome example1_equivalence() {
  std::size_t mismatched = 0, cost_bad = 0;
  std::size_t steps = 0;
  for (std::uint64_t k = 0; k < 50; ++k) {
    RngStream rng = RngStream::derive(8000, k);
    const std::size_t n = draw_between(rng, 2, 20);
    const std::size_t d = draw_between(rng, 1, 3);
    const double eps = rng.uniform(0.1, 0.5);
    const OpinionProfile x0 = uniform_profile(rng, n, d);
    const StackelbergTrace tr = run_stackelberg(x0, example1_game(n, eps), LeaderMethod::edge_threshold, 10000, 1e-12);
    const TrajectoryRecord hk =
        run(make_hk_model({Homogeneous{eps}, std::nullopt, std::nullopt}), x0, RunConfig{10000, 1e-12, false});
    bool same = hk.size() == tr.steps.size();
    for (std::size_t t = 0; same && t < hk.size(); ++t)
      same = hk.steps[t].x == tr.steps[t].x && hk.steps[t].lambda == tr.steps[t].lambda;
    if (!same) ++mismatched;
    if (!tr.certificates_ok()) ++cost_bad;
    steps += tr.steps.size();
  }
  return {mismatched + cost_bad == 0, "50 instances, " + std::to_string(steps) + " steps, mismatched " +
                                          std::to_string(mismatched) + ", certificate failures " +
                                          std::to_string(cost_bad)};
}

// 9 ------------------------------------------------------------------------
Outcome example2_consensus() {
  std::size_t disconnected = 0, cost_bad = 0, no_consensus = 0, non_tree = 0;
  std::size_t max_actions = 0, max_steps = 0;
  const std::size_t max_iters = 200000;
  for (std::uint64_t k = 0; k < 50; ++k) {
    RngStream rng = RngStream::derive(9000, k);
    const std::size_t n = draw_between(rng, 2, 8);
    const std::size_t d = draw_between(rng, 1, 3);
    const OpinionProfile x0 = uniform_profile(rng, n, d);
    const StackelbergTrace tr =
        run_stackelberg(x0, example2_game(n), LeaderMethod::mst_integral, max_iters, 1e-12);
    bool connected = true, trees = true, reached = false;
    for (const auto& st : tr.steps) {
      connected = connected && is_connected(st.lambda.entries());
      trees = trees && is_spanning_tree(st.lambda.entries());
      reached = reached || diameter(st.x) < 1e-6;
    }
    if (!connected) ++disconnected;
    if (!trees) ++non_tree;
    if (!tr.certificates_ok()) ++cost_bad;
    if (!reached) ++no_consensus;
    max_actions = std::max(max_actions, tr.distinct_leader_actions);
    max_steps = std::max(max_steps, tr.steps.size() - 1);
  }
  return {disconnected + cost_bad + no_consensus + non_tree == 0,
          "disconnected=" + std::to_string(disconnected) + " non-tree=" + std::to_string(non_tree) +
              " cost/chain failures=" + std::to_string(cost_bad) + " no-consensus=" +
              std::to_string(no_consensus) + ", max distinct leader actions " + std::to_string(max_actions) +
              ", max steps " + std::to_string(max_steps)};
}

// 10 -----------------------------------------------------------------------
Outcome oracle_equivalence() {
  bool pass = true;
  std::string detail;
  for (std::size_t n = 2; n <= 5; ++n) {
    const BoundReport rep = oracle_check(n, 25, 10000 + n);
    pass = pass && rep.pass;
    detail += "n=" + std::to_string(n) + (rep.pass ? " ok; " : " MISMATCH; ");
  }
  return {pass, detail + "100 instances per oracle"};
}

// 11 -----------------------------------------------------------------------
Outcome min_symmetric() {
  RngStream rng(11000);
  std::size_t violations = 0, samples = 0;
  for (int game = 0; game < 2; ++game) {
    const std::size_t n = 6;
    const OpinionProfile x = uniform_profile(rng, n, 2);
    const GameSpec g = game == 0 ? example1_game(n, 0.4) : example2_game(n);
    const NetworkMatrix lambda = leader_best_response(x, g, default_leader(g));
    const MinSymmetricReport rep = min_symmetric_check(g, lambda, 100, rng, 2);
    violations += rep.violations;
    samples += rep.samples;
  }
  return {violations == 0, std::to_string(samples) + " samples over both games, " + std::to_string(violations) +
                               " violations"};
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    std::function<Outcome()> fn;
  };
  const std::vector<Criterion> criteria = {
      {1, "Lyapunov monotonicity (homogeneous, restricted, 0-1 HK)", lyapunov_monotonicity},
      {2, "restricted HK drift inequality", drift_inequality},
      {3, "0-1 HK drift identity", drift_identity},
      {4, "0-1 worked example (m = 2)", worked_example},
      {5, "network freeze and post-freeze geometric decay", network_freeze},
      {6, "asynchronous nearest-neighbor time bound", async_bound},
      {7, "synchronous nearest-neighbor time bound", sync_bound},
      {8, "threshold game equals homogeneous HK", example1_equivalence},
      {9, "connectivity game reaches consensus", example2_consensus},
      {10, "oracle equivalence", oracle_equivalence},
      {11, "min-symmetric check", min_symmetric},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("%s criterion %d: %s [%s] (%.2fs)\n", o.pass ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str(),
                secs);
    std::fflush(stdout);
    if (!o.pass) ++failed;
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
