#include "sdnet/scenario.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "sdnet/bcd.hpp"
#include "sdnet/graph.hpp"
#include "sdnet/hk.hpp"
#include "sdnet/nearest_neighbor.hpp"
#include "sdnet/oracles.hpp"
#include "sdnet/stackelberg.hpp"

namespace sdnet {

using json = nlohmann::ordered_json;

namespace {

constexpr double kConsensusDiameter = 1e-6;

const std::vector<std::pair<ModelId, const char*>> kModelNames = {
    {ModelId::hk, "hk"},
    {ModelId::hk_restricted, "hk-restricted"},
    {ModelId::hk_01, "hk-01"},
    {ModelId::nn_async, "nn-async"},
    {ModelId::nn_sync, "nn-sync"},
    {ModelId::stackelberg_ex1, "stackelberg-ex1"},
    {ModelId::stackelberg_ex2, "stackelberg-ex2"},
};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

[[noreturn]] void fail(const std::string& field, const std::string& msg) {
  throw ScenarioError(field + ": " + msg);
}

// ---------------------------------------------------------------------------
// JSON field readers

void reject_unknown(const json& obj, const std::string& where, std::initializer_list<const char*> known) {
  for (const auto& [key, _] : obj.items()) {
    if (std::none_of(known.begin(), known.end(), [&](const char* k) { return key == k; })) {
      fail(where.empty() ? key : where + "." + key, "unknown field");
    }
  }
}

const json& require_object(const json& j, const std::string& field) {
  if (!j.is_object()) fail(field, "must be an object");
  return j;
}

double read_number(const json& j, const std::string& field) {
  if (!j.is_number()) fail(field, "must be a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) fail(field, "must be finite");
  return v;
}

std::uint64_t read_unsigned(const json& j, const std::string& field) {
  if (!j.is_number_integer() || (j.is_number_integer() && !j.is_number_unsigned() && j.get<std::int64_t>() < 0)) {
    fail(field, "must be a nonnegative integer");
  }
  return j.get<std::uint64_t>();
}

std::string read_string(const json& j, const std::string& field) {
  if (!j.is_string()) fail(field, "must be a string");
  return j.get<std::string>();
}

const json& require_array(const json& j, const std::string& field) {
  if (!j.is_array()) fail(field, "must be an array");
  return j;
}

std::string at(const std::string& field, std::size_t k) { return field + "[" + std::to_string(k) + "]"; }

std::pair<std::size_t, std::size_t> read_pair(const json& j, const std::string& field, std::size_t n) {
  require_array(j, field);
  if (j.size() != 2) fail(field, "must be a pair [i, j]");
  const auto a = static_cast<std::size_t>(read_unsigned(j[0], at(field, 0)));
  const auto b = static_cast<std::size_t>(read_unsigned(j[1], at(field, 1)));
  if (a >= n || b >= n) fail(field, "node index out of range for n = " + std::to_string(n));
  if (a == b) fail(field, "self pair is not an edge");
  return {std::min(a, b), std::max(a, b)};
}

std::string pair_name(std::size_t i, std::size_t j) {
  return "(" + std::to_string(i) + "," + std::to_string(j) + ")";
}

bool is_hk_family(ModelId m) {
  return m == ModelId::hk || m == ModelId::hk_restricted || m == ModelId::hk_01;
}
bool is_nn(ModelId m) { return m == ModelId::nn_async || m == ModelId::nn_sync; }

// ---------------------------------------------------------------------------
// Semantic validation shared by the parser and run_scenario.

void check_scenario(const Scenario& s) {
  if (s.n < 1) fail("n", "must be at least 1");
  if (s.d < 1) fail("d", "must be at least 1");
  if (s.explicit_profile.has_value() == s.uniform.has_value()) {
    fail("initial", "exactly one of 'explicit' or 'uniform' is required");
  }
  if (s.explicit_profile) {
    const auto& p = *s.explicit_profile;
    if (p.size() != s.n) fail("initial.explicit", "expected " + std::to_string(s.n) + " rows");
    for (std::size_t i = 0; i < p.size(); ++i) {
      if (p[i].size() != s.d) fail(at("initial.explicit", i), "expected " + std::to_string(s.d) + " coordinates");
      for (double v : p[i])
        if (!std::isfinite(v)) fail(at("initial.explicit", i), "entries must be finite");
    }
  }
  if (s.uniform && !(s.uniform->lo < s.uniform->hi)) fail("initial.uniform", "needs lo < hi");

  auto forbid = [&](bool present, const char* field) {
    if (present) fail(std::string("params.") + field, "not used by model " + to_string(s.model));
  };

  const bool needs_eps = s.model == ModelId::hk || s.model == ModelId::stackelberg_ex1;
  if (needs_eps && !s.epsilon) fail("params.epsilon", "required for model " + to_string(s.model));
  if (s.epsilon && !(*s.epsilon > 0.0)) fail("params.epsilon", "must be positive");

  forbid(s.restriction && s.model != ModelId::hk_restricted, "restriction");
  forbid(s.edge_bounds && s.model != ModelId::hk_restricted, "epsilon_edges");
  forbid(s.stubborn && s.model != ModelId::hk_01, "stubborn");
  forbid(s.mu && !is_nn(s.model), "mu");
  forbid(s.selection && s.model != ModelId::nn_async, "selection");
  forbid(s.leader && s.model != ModelId::stackelberg_ex2, "leader");
  forbid(s.eq_epsilon && !is_nn(s.model), "equilibrium_epsilon");
  forbid(s.eq_epsilon_rel && !is_nn(s.model), "equilibrium_epsilon_rel");
  forbid(s.epsilon && (is_nn(s.model) || s.model == ModelId::stackelberg_ex2), "epsilon");

  if (s.model == ModelId::hk_restricted) {
    std::set<std::pair<std::size_t, std::size_t>> edges;
    if (s.restriction) {
      for (std::size_t k = 0; k < s.restriction->size(); ++k) {
        auto [a, b] = (*s.restriction)[k];
        if (a >= s.n || b >= s.n || a == b) fail(at("params.restriction", k), "invalid edge");
        if (!edges.insert({std::min(a, b), std::max(a, b)}).second) {
          fail(at("params.restriction", k), "duplicate edge " + pair_name(a, b));
        }
      }
    } else {
      for (std::size_t i = 0; i < s.n; ++i)
        for (std::size_t j = i + 1; j < s.n; ++j) edges.insert({i, j});
    }
    if (s.epsilon.has_value() == s.edge_bounds.has_value()) {
      fail("params", "hk-restricted needs exactly one of 'epsilon' or 'epsilon_edges'");
    }
    if (s.edge_bounds) {
      std::set<std::pair<std::size_t, std::size_t>> covered;
      for (std::size_t k = 0; k < s.edge_bounds->size(); ++k) {
        const auto& eb = (*s.edge_bounds)[k];
        const std::pair<std::size_t, std::size_t> p{std::min(eb.i, eb.j), std::max(eb.i, eb.j)};
        const std::string f = at("params.epsilon_edges", k);
        if (!edges.count(p)) fail(f, "pair " + pair_name(p.first, p.second) + " is not a restriction edge");
        if (!(eb.epsilon > 0.0)) fail(f, "epsilon must be positive");
        if (!covered.insert(p).second) fail(f, "duplicate bound for pair " + pair_name(p.first, p.second));
      }
      for (const auto& p : edges)
        if (!covered.count(p)) {
          fail("params.epsilon_edges", "missing bound for pair " + pair_name(p.first, p.second));
        }
    }
  }
  if (s.model == ModelId::hk_01) {
    if (!s.stubborn) fail("params.stubborn", "required for model hk-01");
    std::set<std::size_t> seen;
    for (std::size_t k = 0; k < s.stubborn->size(); ++k) {
      const std::size_t v = (*s.stubborn)[k];
      if (v >= s.n) fail(at("params.stubborn", k), "agent index out of range");
      if (!seen.insert(v).second) fail(at("params.stubborn", k), "duplicate agent");
    }
  }
  if (is_nn(s.model)) {
    if (s.n < 2) fail("n", "nearest-neighbor models need at least 2 agents");
    if (!s.mu) fail("params.mu", "required for model " + to_string(s.model));
    if (s.mu->size() != 1 && s.mu->size() != s.n) {
      fail("params.mu", "needs 1 or n = " + std::to_string(s.n) + " entries");
    }
    for (std::size_t k = 0; k < s.mu->size(); ++k) {
      const double m = (*s.mu)[k];
      if (!(m > 0.0 && m < 1.0)) fail(at("params.mu", k), "μ must lie in (0,1)");
    }
    if (s.selection && *s.selection != "uniform_random" && *s.selection != "round_robin") {
      fail("params.selection", "must be 'uniform_random' or 'round_robin'");
    }
    if (s.eq_epsilon.has_value() == s.eq_epsilon_rel.has_value()) {
      fail("params", "nearest-neighbor models need exactly one of 'equilibrium_epsilon' or "
                     "'equilibrium_epsilon_rel'");
    }
    if (s.eq_epsilon && !(*s.eq_epsilon > 0.0)) fail("params.equilibrium_epsilon", "must be positive");
    if (s.eq_epsilon_rel && !(*s.eq_epsilon_rel > 0.0)) {
      fail("params.equilibrium_epsilon_rel", "must be positive");
    }
    if (s.model == ModelId::nn_sync) {
      const auto& mu = *s.mu;
      if (std::any_of(mu.begin(), mu.end(), [&](double m) { return m != mu.front(); })) {
        fail("params.mu", "nn-sync needs a uniform μ");
      }
    }
  }
  if (s.leader && *s.leader != "mst_integral" && *s.leader != "cutting_plane_lp") {
    fail("params.leader", "must be 'mst_integral' or 'cutting_plane_lp'");
  }
  if (s.max_iters < 1) fail("run.max_iters", "must be at least 1");
  if (!(s.tol >= 0.0) || !std::isfinite(s.tol)) fail("run.tol", "must be finite and nonnegative");
  if (s.trials < 1) fail("run.trials", "must be at least 1");
}

// ---------------------------------------------------------------------------
// Model construction

HKModelSpec hk_spec(const Scenario& s) {
  HKModelSpec spec;
  if (s.model == ModelId::hk) {
    spec.confidence = Homogeneous{*s.epsilon};
  } else if (s.model == ModelId::hk_01) {
    std::vector<bool> mask(s.n, false);
    for (std::size_t v : *s.stubborn) mask[v] = true;
    spec.confidence = NodeBinary{mask, s.epsilon.value_or(1.0)};
  } else {
    std::vector<RestrictionGraph::Edge> edges;
    if (s.restriction) {
      edges.assign(s.restriction->begin(), s.restriction->end());
    } else {
      for (std::size_t i = 0; i < s.n; ++i)
        for (std::size_t j = i + 1; j < s.n; ++j) edges.emplace_back(i, j);
    }
    spec.restriction = RestrictionGraph(s.n, edges);
    // bounds outside the restriction graph are never read
    Matrix eps = Matrix::Constant(s.n, s.n, s.epsilon.value_or(1.0));
    if (s.edge_bounds)
      for (const auto& eb : *s.edge_bounds) eps(eb.i, eb.j) = eps(eb.j, eb.i) = eb.epsilon;
    spec.confidence = EdgeHeterogeneous{eps};
  }
  return spec;
}

std::uint64_t selection_seed(const Scenario& s, std::size_t trial) {
  return RngStream::derive(s.seed, trial).next_u64();
}

NNModelSpec nn_spec(const Scenario& s, std::size_t trial) {
  NNModelSpec spec;
  spec.mu = s.mu->size() == 1 ? std::vector<double>(s.n, s.mu->front()) : *s.mu;
  spec.mode = s.model == ModelId::nn_sync ? NNMode::sync : NNMode::async;
  spec.selection = s.selection.value_or("uniform_random") == "round_robin" ? Selection::round_robin
                                                                            : Selection::uniform_random;
  spec.seed = selection_seed(s, trial);
  return spec;
}

double nn_epsilon(const Scenario& s, const OpinionProfile& x0) {
  return s.eq_epsilon ? *s.eq_epsilon : *s.eq_epsilon_rel * diameter(x0);
}

bool stochastic(const Scenario& s) {
  return s.uniform.has_value() ||
         (s.model == ModelId::nn_async && s.selection.value_or("uniform_random") == "uniform_random");
}

// ---------------------------------------------------------------------------
// Output writers

struct TraceRow {
  std::size_t t;
  const OpinionProfile* x;
  std::string value;
};

void write_trajectory(const std::filesystem::path& file, const std::vector<TraceRow>& rows,
                      std::size_t d) {
  std::ofstream out(file);
  if (!out) throw std::runtime_error("cannot write " + file.string());
  out << "t,agent";
  for (std::size_t k = 0; k < d; ++k) out << ",coord_" << k;
  out << '\n';
  for (const auto& r : rows)
    for (std::size_t i = 0; i < r.x->n(); ++i) {
      out << r.t << ',' << i;
      for (std::size_t k = 0; k < d; ++k) out << ',' << fmt((*r.x)(i, k));
      out << '\n';
    }
  if (!out) throw std::runtime_error("write failed for " + file.string());
}

void write_lyapunov(const std::filesystem::path& file, const std::vector<TraceRow>& rows) {
  std::ofstream out(file);
  if (!out) throw std::runtime_error("cannot write " + file.string());
  out << "t,value\n";
  for (const auto& r : rows) out << r.t << ',' << r.value << '\n';
  if (!out) throw std::runtime_error("write failed for " + file.string());
}

void write_text(const std::filesystem::path& file, const std::string& text) {
  std::ofstream out(file);
  if (!out) throw std::runtime_error("cannot write " + file.string());
  out << text;
  if (!out) throw std::runtime_error("write failed for " + file.string());
}

// Runs fn(k) for k in [0, count) on a small worker pool.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& fn) {
  const std::size_t workers =
      std::min<std::size_t>(count, std::max(1u, std::thread::hardware_concurrency()));
  if (workers <= 1) {
    for (std::size_t k = 0; k < count; ++k) fn(k);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(count);
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t k = next++; k < count; k = next++) {
        try {
          fn(k);
        } catch (...) {
          errors[k] = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

// ---------------------------------------------------------------------------
// Per-model runners. Each fills the summary and the rows of trial 0.

struct TrialOutcome {
  std::size_t iterations = 0;
  bool converged = false;
  std::string final_value;
  std::vector<CertificateOutcome> certs;
  std::vector<std::pair<std::string, std::string>> extra;  // trials.csv columns
};

struct HKTrial {
  TrialOutcome outcome;
  TrajectoryRecord traj;
};

HKTrial run_hk_trial(const Scenario& s, const OpinionProfile& x0) {
  const HKModelSpec spec = hk_spec(s);
  const CoupledModel model = make_hk_model(spec);
  HKTrial out;
  out.traj = run(model, x0, RunConfig{s.max_iters, s.tol, true});
  TrialOutcome& o = out.outcome;
  o.iterations = out.traj.size() - 1;
  o.converged = out.traj.stop == StopReason::converged;
  o.final_value = to_string(*out.traj.back().lyapunov);

  const MonotoneReport mono = certify_monotone(out.traj, model);
  o.certs.push_back({"lyapunov_monotone", mono.ok,
                     "checked " + std::to_string(mono.checked_steps) + " steps, max increase " +
                         fmt(mono.max_increase)});

  const auto& steps = out.traj.steps;
  if (s.model == ModelId::hk_restricted && !s.edge_bounds) {
    std::size_t bad = 0;
    double slack = std::numeric_limits<double>::infinity();
    for (std::size_t t = 0; t + 1 < steps.size(); ++t) {
      const DriftCertificate c = drift_certificate_restricted(steps[t].x, spec);
      slack = std::min(slack, c.lhs - c.rhs);
      if (!c.holds()) ++bad;
    }
    o.certs.push_back({"drift_inequality", bad == 0,
                       std::to_string(bad) + " violations, min slack " +
                           (steps.size() > 1 ? fmt(slack) : std::string("n/a"))});
  }
  if (s.model == ModelId::hk_01) {
    const ZeroOnePartition part(std::get<NodeBinary>(spec.confidence));
    const double eps = std::get<NodeBinary>(spec.confidence).epsilon;
    std::size_t bad = 0;
    double worst = 0.0;
    for (std::size_t t = 0; t + 1 < steps.size(); ++t) {
      const DriftIdentity id = zero_one_drift_identity(steps[t].x, part, eps);
      worst = std::max(worst, std::abs(id.lhs - id.rhs));
      if (!id.holds()) ++bad;
    }
    o.certs.push_back({"drift_identity", bad == 0,
                       std::to_string(bad) + " violations, max gap " + fmt(worst)});
  } else {
    const double delta = 1.0 / (2.0 * static_cast<double>(s.n * s.n));
    const FreezeReport fr = detect_network_freeze(out.traj, delta);
    std::string detail = fr.freeze_index ? "freeze at t=" + std::to_string(*fr.freeze_index)
                                         : std::string("no freeze detected");
    if (fr.change_after) detail += ", network change at t=" + std::to_string(*fr.change_index);
    if (!fr.tail_certified) detail += ", tail not certified (max_iters)";
    o.certs.push_back({"network_freeze", !fr.change_after, detail});
    o.extra.emplace_back("freeze_index", fr.freeze_index ? std::to_string(*fr.freeze_index) : "");
  }
  return out;
}

struct NNTrial {
  TrialOutcome outcome;
  EpsEquilibriumReport report;
  OpinionProfile x0;
  double bound = 0.0;
};

NNTrial run_nn_trial(const Scenario& s, std::size_t trial) {
  const OpinionProfile x0 = initial_profile(s, trial);
  const NNModelSpec spec = nn_spec(s, trial);
  const double eps = nn_epsilon(s, x0);
  NNTrial out{{}, run_to_eps_equilibrium(x0, eps, spec, s.max_iters), x0, 0.0};
  const auto& r = out.report;
  const double mu_max = *std::max_element(spec.mu.begin(), spec.mu.end());
  out.bound = spec.mode == NNMode::async ? async_time_bound(s.n, r.d0, mu_max, eps)
                                         : sync_time_bound(s.n, r.d0, spec.mu.front(), eps);
  TrialOutcome& o = out.outcome;
  o.iterations = r.iterations;
  o.converged = r.reached();
  o.final_value = to_string(lex_lyapunov(*r.final_state));
  o.certs.push_back({"lex_monotone", r.lex_violations == 0,
                     std::to_string(r.lex_violations) + " violations"});
  o.certs.push_back({"drift", r.drift_violations == 0,
                     std::to_string(r.drift_violations) + " violations, min slack " +
                         fmt(r.min_drift_slack)});
  if (spec.mode == NNMode::sync) {
    o.certs.push_back({"componentwise_contraction", r.componentwise_violations == 0,
                       std::to_string(r.componentwise_violations) + " violations"});
  }
  o.certs.push_back({"convex_hull", r.hull_violations == 0,
                     std::to_string(r.hull_violations) + " violations"});
  o.extra.emplace_back("seed", std::to_string(spec.seed));
  o.extra.emplace_back("d0", fmt(r.d0));
  o.extra.emplace_back("epsilon", fmt(eps));
  o.extra.emplace_back("t_eps", r.t_eps ? std::to_string(*r.t_eps) : "");
  o.extra.emplace_back("bound", fmt(out.bound));
  return out;
}

LeaderMethod scenario_leader(const Scenario& s) {
  if (s.model == ModelId::stackelberg_ex1) return LeaderMethod::edge_threshold;
  return s.leader.value_or("mst_integral") == "cutting_plane_lp" ? LeaderMethod::cutting_plane_lp
                                                                 : LeaderMethod::mst_integral;
}

GameSpec scenario_game(const Scenario& s) {
  return s.model == ModelId::stackelberg_ex1 ? example1_game(s.n, *s.epsilon) : example2_game(s.n);
}

struct GameTrial {
  TrialOutcome outcome;
  StackelbergTrace trace;
};

GameTrial run_game_trial(const Scenario& s, const OpinionProfile& x0) {
  const GameSpec g = scenario_game(s);
  const LeaderMethod lm = scenario_leader(s);
  GameTrial out{{}, run_stackelberg(x0, g, lm, s.max_iters, s.tol)};
  const auto& tr = out.trace;
  TrialOutcome& o = out.outcome;
  o.iterations = tr.steps.size() - 1;
  o.converged = tr.converged;
  o.final_value = fmt(tr.steps.back().cost);
  o.certs.push_back({"social_cost_monotone", tr.cost_violations == 0,
                     std::to_string(tr.cost_violations) + " violations, max increase " +
                         fmt(tr.max_cost_increase)});
  o.certs.push_back({"best_response_chain", tr.chain_violations == 0,
                     std::to_string(tr.chain_violations) + " violations"});
  o.certs.push_back({"leader_feasible", tr.actions_feasible, ""});
  o.extra.emplace_back("leader_actions", std::to_string(tr.distinct_leader_actions));

  if (s.model == ModelId::stackelberg_ex1) {
    HKModelSpec spec{Homogeneous{*s.epsilon}, std::nullopt, std::nullopt};
    const TrajectoryRecord hk = run(make_hk_model(spec), x0, RunConfig{s.max_iters, s.tol, false});
    std::size_t mismatch = 0;
    const std::size_t common = std::min(hk.size(), tr.steps.size());
    for (std::size_t t = 0; t < common; ++t)
      if (!(hk.steps[t].x == tr.steps[t].x) || !(hk.steps[t].lambda == tr.steps[t].lambda)) ++mismatch;
    const bool same_len = hk.size() == tr.steps.size();
    o.certs.push_back({"hk_equivalence", mismatch == 0 && same_len,
                       std::to_string(mismatch) + " differing steps over " + std::to_string(common) +
                           (same_len ? "" : ", lengths differ")});
  } else {
    bool connected = true, trees = true;
    for (const auto& st : tr.steps) {
      connected = connected && is_connected(st.lambda.entries());
      trees = trees && is_spanning_tree(st.lambda.entries());
    }
    o.certs.push_back({"connected", connected, ""});
    if (lm == LeaderMethod::mst_integral) o.certs.push_back({"spanning_trees", trees, ""});
    const double diam = diameter(tr.steps.back().x);
    // only a converged run claims consensus
    if (tr.converged) {
      o.certs.push_back({"consensus", diam < kConsensusDiameter, "final diameter " + fmt(diam)});
    } else {
      o.certs.push_back({"consensus", true, "not checked before convergence, diameter " + fmt(diam)});
    }
  }
  return out;
}

std::string certificate_json(const Scenario& s, const RunSummary& sum,
                             const std::vector<std::pair<std::string, std::string>>& extra) {
  json j;
  j["model"] = sum.model;
  j["status"] = sum.status;
  j["converged"] = sum.converged;
  j["iterations"] = sum.iterations;
  j["final_lyapunov"] = sum.final_lyapunov;
  j["trials"] = s.trials;
  if (sum.seed) j["seed"] = *sum.seed;
  else j["seed"] = nullptr;
  json certs = json::array();
  for (const auto& c : sum.certificates) {
    certs.push_back({{"name", c.name}, {"pass", c.pass}, {"detail", c.detail}});
  }
  j["certificates"] = certs;
  for (const auto& [k, v] : extra) j[k] = v;
  j["all_pass"] = sum.certificates_pass();
  j["exit_code"] = sum.exit_code();
  return j.dump(2) + "\n";
}

// Collapses per-trial certificates into one entry per name.
std::vector<CertificateOutcome> merge_certs(const std::vector<TrialOutcome>& trials) {
  std::vector<CertificateOutcome> merged;
  for (const auto& c : trials.front().certs) {
    CertificateOutcome m{c.name, true, ""};
    std::size_t failed = 0;
    for (std::size_t k = 0; k < trials.size(); ++k)
      for (const auto& tc : trials[k].certs)
        if (tc.name == c.name && !tc.pass) {
          if (failed == 0) m.detail = "trial " + std::to_string(k) + ": " + tc.detail;
          ++failed;
        }
    m.pass = failed == 0;
    if (trials.size() > 1) {
      m.detail = std::to_string(trials.size() - failed) + "/" + std::to_string(trials.size()) +
                 " trials pass" + (failed ? "; first failure " + m.detail : "");
    } else {
      m.detail = c.detail;
    }
    merged.push_back(m);
  }
  return merged;
}

void write_trials_csv(const std::filesystem::path& file, const std::vector<TrialOutcome>& trials) {
  std::ostringstream out;
  out << "trial,iterations,converged,final_value,all_pass";
  for (const auto& [k, _] : trials.front().extra) out << ',' << k;
  out << '\n';
  for (std::size_t k = 0; k < trials.size(); ++k) {
    const auto& t = trials[k];
    const bool ok = std::all_of(t.certs.begin(), t.certs.end(), [](const auto& c) { return c.pass; });
    out << k << ',' << t.iterations << ',' << (t.converged ? 1 : 0) << ',' << t.final_value << ','
        << (ok ? 1 : 0);
    for (const auto& [_, v] : t.extra) out << ',' << v;
    out << '\n';
  }
  write_text(file, out.str());
}

}  // namespace

// ---------------------------------------------------------------------------

std::string to_string(ModelId m) {
  for (const auto& [id, name] : kModelNames)
    if (id == m) return name;
  return "unknown";
}

ModelId parse_model_id(const std::string& s) {
  for (const auto& [id, name] : kModelNames)
    if (s == name) return id;
  fail("model", "unknown model id '" + s + "'");
}

Scenario parse_scenario_text(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ScenarioError(std::string("syntax error: ") + e.what());
  }
  require_object(root, "(root)");
  reject_unknown(root, "", {"model", "n", "d", "initial", "params", "run"});
  Scenario s;
  if (!root.contains("model")) fail("model", "missing");
  s.model = parse_model_id(read_string(root["model"], "model"));
  if (!root.contains("n")) fail("n", "missing");
  s.n = static_cast<std::size_t>(read_unsigned(root["n"], "n"));
  if (root.contains("d")) s.d = static_cast<std::size_t>(read_unsigned(root["d"], "d"));

  if (!root.contains("initial")) fail("initial", "missing");
  const json& init = require_object(root["initial"], "initial");
  reject_unknown(init, "initial", {"explicit", "uniform"});
  if (init.contains("explicit")) {
    const json& rows = require_array(init["explicit"], "initial.explicit");
    std::vector<std::vector<double>> p;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const std::string f = at("initial.explicit", i);
      std::vector<double> row;
      if (rows[i].is_number()) {
        row.push_back(read_number(rows[i], f));
      } else {
        const json& r = require_array(rows[i], f);
        for (std::size_t k = 0; k < r.size(); ++k) row.push_back(read_number(r[k], at(f, k)));
      }
      p.push_back(std::move(row));
    }
    s.explicit_profile = std::move(p);
  }
  if (init.contains("uniform")) {
    const json& u = require_object(init["uniform"], "initial.uniform");
    reject_unknown(u, "initial.uniform", {"seed", "lo", "hi"});
    UniformSource src;
    if (u.contains("seed")) src.seed = read_unsigned(u["seed"], "initial.uniform.seed");
    if (u.contains("lo")) src.lo = read_number(u["lo"], "initial.uniform.lo");
    if (u.contains("hi")) src.hi = read_number(u["hi"], "initial.uniform.hi");
    s.uniform = src;
  }

  if (root.contains("params")) {
    const json& p = require_object(root["params"], "params");
    reject_unknown(p, "params",
                   {"epsilon", "restriction", "epsilon_edges", "stubborn", "mu", "selection",
                    "leader", "equilibrium_epsilon", "equilibrium_epsilon_rel"});
    if (p.contains("epsilon")) s.epsilon = read_number(p["epsilon"], "params.epsilon");
    if (p.contains("restriction")) {
      const json& r = require_array(p["restriction"], "params.restriction");
      std::vector<std::pair<std::size_t, std::size_t>> edges;
      for (std::size_t k = 0; k < r.size(); ++k) edges.push_back(read_pair(r[k], at("params.restriction", k), s.n));
      s.restriction = std::move(edges);
    }
    if (p.contains("epsilon_edges")) {
      const json& r = require_array(p["epsilon_edges"], "params.epsilon_edges");
      std::vector<EdgeBound> bounds;
      for (std::size_t k = 0; k < r.size(); ++k) {
        const std::string f = at("params.epsilon_edges", k);
        require_object(r[k], f);
        reject_unknown(r[k], f, {"i", "j", "epsilon"});
        for (const char* key : {"i", "j", "epsilon"})
          if (!r[k].contains(key)) fail(f + "." + key, "missing");
        EdgeBound eb;
        eb.i = static_cast<std::size_t>(read_unsigned(r[k]["i"], f + ".i"));
        eb.j = static_cast<std::size_t>(read_unsigned(r[k]["j"], f + ".j"));
        if (eb.i >= s.n || eb.j >= s.n || eb.i == eb.j) fail(f, "invalid pair " + pair_name(eb.i, eb.j));
        eb.epsilon = read_number(r[k]["epsilon"], f + ".epsilon");
        bounds.push_back(eb);
      }
      s.edge_bounds = std::move(bounds);
    }
    if (p.contains("stubborn")) {
      const json& r = require_array(p["stubborn"], "params.stubborn");
      std::vector<std::size_t> v;
      for (std::size_t k = 0; k < r.size(); ++k) v.push_back(static_cast<std::size_t>(read_unsigned(r[k], at("params.stubborn", k))));
      s.stubborn = std::move(v);
    }
    if (p.contains("mu")) {
      std::vector<double> v;
      if (p["mu"].is_number()) {
        v.push_back(read_number(p["mu"], "params.mu"));
      } else {
        const json& r = require_array(p["mu"], "params.mu");
        for (std::size_t k = 0; k < r.size(); ++k) v.push_back(read_number(r[k], at("params.mu", k)));
      }
      s.mu = std::move(v);
    }
    if (p.contains("selection")) s.selection = read_string(p["selection"], "params.selection");
    if (p.contains("leader")) s.leader = read_string(p["leader"], "params.leader");
    if (p.contains("equilibrium_epsilon")) {
      s.eq_epsilon = read_number(p["equilibrium_epsilon"], "params.equilibrium_epsilon");
    }
    if (p.contains("equilibrium_epsilon_rel")) {
      s.eq_epsilon_rel = read_number(p["equilibrium_epsilon_rel"], "params.equilibrium_epsilon_rel");
    }
  }

  if (root.contains("run")) {
    const json& r = require_object(root["run"], "run");
    reject_unknown(r, "run", {"max_iters", "tol", "trials", "seed"});
    if (r.contains("max_iters")) s.max_iters = static_cast<std::size_t>(read_unsigned(r["max_iters"], "run.max_iters"));
    if (r.contains("tol")) s.tol = read_number(r["tol"], "run.tol");
    if (r.contains("trials")) s.trials = static_cast<std::size_t>(read_unsigned(r["trials"], "run.trials"));
    if (r.contains("seed")) s.seed = read_unsigned(r["seed"], "run.seed");
  }
  check_scenario(s);
  return s;
}

Scenario parse_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ScenarioError(path.string() + ": cannot open");
  std::stringstream buf;
  buf << in.rdbuf();
  try {
    return parse_scenario_text(buf.str());
  } catch (const ScenarioError& e) {
    throw ScenarioError(path.string() + ": " + e.what());
  }
}

std::string emit_scenario(const Scenario& s) {
  json j;
  j["model"] = to_string(s.model);
  j["n"] = s.n;
  j["d"] = s.d;
  json init = json::object();
  if (s.explicit_profile) init["explicit"] = *s.explicit_profile;
  if (s.uniform) init["uniform"] = {{"seed", s.uniform->seed}, {"lo", s.uniform->lo}, {"hi", s.uniform->hi}};
  j["initial"] = init;
  json p = json::object();
  if (s.epsilon) p["epsilon"] = *s.epsilon;
  if (s.restriction) {
    json r = json::array();
    for (auto [a, b] : *s.restriction) r.push_back({a, b});
    p["restriction"] = r;
  }
  if (s.edge_bounds) {
    json r = json::array();
    for (const auto& eb : *s.edge_bounds) r.push_back({{"i", eb.i}, {"j", eb.j}, {"epsilon", eb.epsilon}});
    p["epsilon_edges"] = r;
  }
  if (s.stubborn) p["stubborn"] = *s.stubborn;
  if (s.mu) p["mu"] = *s.mu;
  if (s.selection) p["selection"] = *s.selection;
  if (s.leader) p["leader"] = *s.leader;
  if (s.eq_epsilon) p["equilibrium_epsilon"] = *s.eq_epsilon;
  if (s.eq_epsilon_rel) p["equilibrium_epsilon_rel"] = *s.eq_epsilon_rel;
  j["params"] = p;
  j["run"] = {{"max_iters", s.max_iters}, {"tol", s.tol}, {"trials", s.trials}, {"seed", s.seed}};
  return j.dump(2) + "\n";
}

OpinionProfile initial_profile(const Scenario& s, std::size_t trial) {
  if (s.explicit_profile) {
    Matrix m(s.n, s.d);
    for (std::size_t i = 0; i < s.n; ++i)
      for (std::size_t k = 0; k < s.d; ++k) m(i, k) = (*s.explicit_profile)[i][k];
    return OpinionProfile(std::move(m));
  }
  RngStream rng = RngStream::derive(s.uniform->seed, trial);
  return uniform_profile(rng, s.n, s.d, s.uniform->lo, s.uniform->hi);
}

bool RunSummary::certificates_pass() const {
  return std::all_of(certificates.begin(), certificates.end(), [](const auto& c) { return c.pass; });
}

int RunSummary::exit_code() const {
  if (!certificates_pass()) return 3;
  return converged ? 0 : 2;
}

RunSummary run_scenario(const Scenario& s, const std::filesystem::path& out_dir) {
  check_scenario(s);
  const auto started = std::chrono::steady_clock::now();
  std::filesystem::create_directories(out_dir);

  RunSummary sum;
  sum.model = to_string(s.model);
  if (stochastic(s)) sum.seed = s.uniform && !is_nn(s.model) ? s.uniform->seed : s.seed;

  std::vector<TrialOutcome> outcomes(s.trials);
  std::vector<std::pair<std::string, std::string>> extra;

  if (is_hk_family(s.model)) {
    std::vector<HKTrial> trials(s.trials);
    parallel_for(s.trials, [&](std::size_t k) { trials[k] = run_hk_trial(s, initial_profile(s, k)); });
    std::vector<TraceRow> rows;
    for (const auto& st : trials[0].traj.steps) rows.push_back({st.t, &st.x, to_string(*st.lyapunov)});
    write_trajectory(out_dir / "trajectory.csv", rows, s.d);
    write_lyapunov(out_dir / "lyapunov.csv", rows);
    for (std::size_t k = 0; k < s.trials; ++k) outcomes[k] = trials[k].outcome;
  } else if (is_nn(s.model)) {
    std::vector<std::optional<NNTrial>> trials(s.trials);
    parallel_for(s.trials, [&](std::size_t k) { trials[k] = run_nn_trial(s, k); });
    // replay trial 0 through the coupled-model interface for the output files
    const NNTrial& first = *trials[0];
    const TrajectoryRecord traj =
        run(make_nn_model(nn_spec(s, 0)), first.x0, RunConfig{first.report.iterations, -1.0, true});
    std::vector<TraceRow> rows;
    for (const auto& st : traj.steps) rows.push_back({st.t, &st.x, to_string(lex_lyapunov(st.x))});
    write_trajectory(out_dir / "trajectory.csv", rows, s.d);
    write_lyapunov(out_dir / "lyapunov.csv", rows);
    std::size_t reached = 0;
    double sum_t = 0.0, sum_bound = 0.0, max_ratio = 0.0;
    for (std::size_t k = 0; k < s.trials; ++k) {
      const NNTrial& tk = *trials[k];
      outcomes[k] = tk.outcome;
      if (tk.report.t_eps) {
        ++reached;
        sum_t += static_cast<double>(*tk.report.t_eps);
        max_ratio = std::max(max_ratio, static_cast<double>(*tk.report.t_eps) / tk.bound);
      }
      sum_bound += tk.bound;
    }
    const double trials_d = static_cast<double>(s.trials);
    const bool bound_ok = s.model == ModelId::nn_async ? reached == s.trials && sum_t / trials_d <= sum_bound / trials_d
                                                       : reached == s.trials && max_ratio <= 1.0;
    extra.emplace_back("mean_t_eps", reached ? fmt(sum_t / static_cast<double>(reached)) : "");
    extra.emplace_back("mean_bound", fmt(sum_bound / trials_d));
    outcomes[0].certs.push_back({"time_bound", bound_ok,
                                 std::to_string(reached) + "/" + std::to_string(s.trials) +
                                     " trials reached the epsilon-equilibrium"});
    for (std::size_t k = 1; k < s.trials; ++k) outcomes[k].certs.push_back({"time_bound", bound_ok, ""});
  } else {
    std::vector<GameTrial> trials(s.trials);
    parallel_for(s.trials, [&](std::size_t k) { trials[k] = run_game_trial(s, initial_profile(s, k)); });
    std::vector<TraceRow> rows;
    for (const auto& st : trials[0].trace.steps) rows.push_back({st.t, &st.x, fmt(st.cost)});
    write_trajectory(out_dir / "trajectory.csv", rows, s.d);
    write_lyapunov(out_dir / "lyapunov.csv", rows);
    for (std::size_t k = 0; k < s.trials; ++k) outcomes[k] = trials[k].outcome;
    extra.emplace_back("label", trials[0].trace.label);
  }

  sum.certificates = merge_certs(outcomes);
  sum.converged = std::all_of(outcomes.begin(), outcomes.end(), [](const auto& o) { return o.converged; });
  sum.iterations = outcomes[0].iterations;
  sum.final_lyapunov = outcomes[0].final_value;
  sum.status = sum.converged ? (is_nn(s.model) ? "equilibrium" : "converged") : "max_iters";
  if (s.trials > 1) write_trials_csv(out_dir / "trials.csv", outcomes);
  write_text(out_dir / "certificate.json", certificate_json(s, sum, extra));
  sum.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return sum;
}

BoundReport verify_bounds(const Scenario& s) {
  check_scenario(s);
  json j;
  j["model"] = to_string(s.model);
  BoundReport rep;
  if (is_nn(s.model)) {
    std::vector<std::optional<NNTrial>> opt(s.trials);
    parallel_for(s.trials, [&](std::size_t k) { opt[k] = run_nn_trial(s, k); });
    std::vector<NNTrial> trials;
    for (auto& t : opt) trials.push_back(std::move(*t));
    json rows = json::array();
    std::size_t reached = 0;
    double sum_t = 0.0, sum_bound = 0.0;
    bool each_ok = true, certs_ok = true;
    for (std::size_t k = 0; k < s.trials; ++k) {
      const auto& r = trials[k].report;
      sum_bound += trials[k].bound;
      certs_ok = certs_ok && r.certificates_ok();
      if (r.t_eps) {
        ++reached;
        sum_t += static_cast<double>(*r.t_eps);
        each_ok = each_ok && static_cast<double>(*r.t_eps) <= trials[k].bound;
      } else {
        each_ok = false;
      }
      rows.push_back({{"trial", k},
                      {"seed", trials[k].report.seed},
                      {"t_eps", r.t_eps ? json(*r.t_eps) : json(nullptr)},
                      {"bound", trials[k].bound}});
    }
    const double td = static_cast<double>(s.trials);
    const bool async = s.model == ModelId::nn_async;
    j["bound"] = async ? "n 2^n D0 / ((1 - mu_max) eps)" : "n (2 D0 / eps + log_|1-2mu| (eps / (2 D0)))";
    j["statistic"] = async ? "mean t_eps" : "max t_eps / bound";
    j["trials"] = s.trials;
    j["reached"] = reached;
    j["mean_t_eps"] = reached ? json(sum_t / static_cast<double>(reached)) : json(nullptr);
    j["mean_bound"] = sum_bound / td;
    j["per_step_certificates"] = certs_ok;
    rep.pass = certs_ok && reached == s.trials && (async ? sum_t / td <= sum_bound / td : each_ok);
    j["per_trial"] = rows;
  } else if (is_hk_family(s.model)) {
    const HKTrial t = run_hk_trial(s, initial_profile(s, 0));
    const double delta = 1.0 / (2.0 * static_cast<double>(s.n * s.n));
    const FreezeReport fr = detect_network_freeze(t.traj, delta);
    const double rate = fr.freeze_index ? post_freeze_rate(t.traj, *fr.freeze_index) : 1.0;
    j["bound"] = "geometric convergence after the network freezes";
    j["delta"] = delta;
    j["freeze_index"] = fr.freeze_index ? json(*fr.freeze_index) : json(nullptr);
    j["network_change_after_freeze"] = fr.change_after;
    j["tail_certified"] = fr.tail_certified;
    j["post_freeze_ratio"] = rate;
    j["iterations"] = t.outcome.iterations;
    bool certs_ok = true;
    for (const auto& c : t.outcome.certs) certs_ok = certs_ok && c.pass;
    j["per_step_certificates"] = certs_ok;
    rep.pass = certs_ok && fr.freeze_index.has_value() && !fr.change_after && rate < 1.0;
  } else {
    j["bound"] = nullptr;
    j["note"] = "no closed-form time bound for this model";
  }
  j["pass"] = rep.pass;
  rep.json = j.dump(2) + "\n";
  return rep;
}

BoundReport oracle_check(std::size_t n, std::size_t instances, std::uint64_t seed) {
  if (n < 2 || n > OracleBudget{}.max_n) throw std::invalid_argument("oracle-check: n must lie in [2, 5]");
  struct Tally {
    std::size_t mismatches = 0;
    double max_gap = 0.0;
  } hk, lex, mst;
  for (std::size_t k = 0; k < instances; ++k) {
    RngStream rng = RngStream::derive(seed, k);
    const bool dyadic = k % 2 == 0;  // exact arithmetic on even instances
    const std::size_t d = 1 + rng.index(2);
    Matrix m(n, d);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t c = 0; c < d; ++c)
        m(i, c) = dyadic ? static_cast<double>(rng.index(33)) / 16.0 : rng.uniform(0.0, 2.0);
    const OpinionProfile x(m);
    const double tol = dyadic ? 0.0 : 1e-12;

    HKModelSpec spec{Homogeneous{0.25 * static_cast<double>(1 + rng.index(6))}, std::nullopt, std::nullopt};
    if (rng.index(2) == 1) {
      std::vector<RestrictionGraph::Edge> edges;
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
          if (rng.index(3) != 0) edges.emplace_back(i, j);
      spec.restriction = RestrictionGraph(n, edges);
    }
    const double fast = hk_objective(x, hk_lambda_minimizer(x, spec), spec);
    const double slow = brute_hk_lambda(x, spec).value;
    hk.max_gap = std::max(hk.max_gap, std::abs(fast - slow));
    if (std::abs(fast - slow) > tol) ++hk.mismatches;

    const LexValue lv = nn_objective(nn_network(x), x);
    const LexValue bv = brute_lex_network(x).value;
    for (std::size_t i = 0; i < n; ++i) lex.max_gap = std::max(lex.max_gap, std::abs(lv[i] - bv[i]));
    if (lex_compare(lv, bv, tol) != Ordering::equal) ++lex.mismatches;

    const Matrix w = squared_distance_weights(x);
    double tree = 0.0;
    for (auto [i, j] : minimum_spanning_tree(w)) tree += w(i, j);
    const double best = brute_connected_subgraph(w).cost;
    mst.max_gap = std::max(mst.max_gap, std::abs(tree - best));
    if (std::abs(tree - best) > tol) ++mst.mismatches;
  }
  json j;
  j["n"] = n;
  j["instances"] = instances;
  j["seed"] = seed;
  auto put = [&](const char* name, const Tally& t) {
    j[name] = {{"mismatches", t.mismatches}, {"max_gap", t.max_gap}};
  };
  put("hk_lambda_minimizer", hk);
  put("nn_network", lex);
  put("mst_integral", mst);
  BoundReport rep;
  rep.pass = hk.mismatches == 0 && lex.mismatches == 0 && mst.mismatches == 0;
  j["pass"] = rep.pass;
  rep.json = j.dump(2) + "\n";
  return rep;
}

}  // namespace sdnet
