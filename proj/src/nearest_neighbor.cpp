#include "sdnet/nearest_neighbor.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <numeric>
#include <stdexcept>
#include <string>

namespace sdnet {

void validate(const NNModelSpec& spec, std::size_t n) {
  if (n < 2) throw std::invalid_argument("nearest-neighbor dynamics need n >= 2");
  if (spec.mu.size() != n) {
    throw std::invalid_argument("mu has " + std::to_string(spec.mu.size()) + " entries, need " +
                                std::to_string(n));
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (!(spec.mu[i] > 0.0 && spec.mu[i] < 1.0)) {
      throw std::invalid_argument("mu[" + std::to_string(i) + "] must lie in (0,1)");
    }
  }
}

bool uniform_mu(const NNModelSpec& spec) {
  return std::all_of(spec.mu.begin(), spec.mu.end(),
                     [&](double m) { return m == spec.mu.front(); });
}

std::size_t nearest(const OpinionProfile& x, std::size_t i) {
  const std::size_t n = x.n();
  if (n < 2) throw std::invalid_argument("nearest: need at least two agents");
  std::size_t best = (i == 0) ? 1 : 0;
  double best_d = x.squared_distance(i, best);
  for (std::size_t j = best + 1; j < n; ++j) {
    if (j == i) continue;
    const double dj = x.squared_distance(i, j);
    if (dj < best_d) {
      best = j;
      best_d = dj;
    }
  }
  return best;
}

std::vector<std::size_t> nearest_all(const OpinionProfile& x) {
  std::vector<std::size_t> r(x.n());
  for (std::size_t i = 0; i < x.n(); ++i) r[i] = nearest(x, i);
  return r;
}

NetworkMatrix nn_network(const OpinionProfile& x) {
  const std::size_t n = x.n();
  Matrix a = Matrix::Zero(n, n);
  for (std::size_t i = 0; i < n; ++i) a(i, nearest(x, i)) = 1.0;
  return NetworkMatrix(std::move(a), {.symmetric = false, .binary = true, .self_loops = false});
}

LexValue nn_objective(const NetworkMatrix& lambda, const OpinionProfile& y) {
  const std::size_t n = y.n();
  std::vector<double> rows(n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (lambda(i, j) != 0.0) rows[i] += lambda(i, j) * y.distance(i, j);
  return LexValue::from_unsorted(std::move(rows));
}

OpinionProfile async_step(const OpinionProfile& x, std::size_t agent, const NNModelSpec& spec) {
  validate(spec, x.n());
  if (agent >= x.n()) throw std::invalid_argument("async_step: agent out of range");
  const std::size_t r = nearest(x, agent);
  const double mu = spec.mu[agent];
  Matrix out = x.values();
  out.row(agent) += (1.0 - mu) * (x.values().row(r) - x.values().row(agent));
  return OpinionProfile(std::move(out));
}

OpinionProfile sync_step(const OpinionProfile& x, const NNModelSpec& spec) {
  validate(spec, x.n());
  const auto r = nearest_all(x);
  Matrix out(x.n(), x.d());
  for (std::size_t i = 0; i < x.n(); ++i) {
    const double mu = spec.mu[i];
    out.row(i) = x.values().row(i) + (1.0 - mu) * (x.values().row(r[i]) - x.values().row(i));
  }
  return OpinionProfile(std::move(out));
}

namespace {

std::vector<double> nn_distances(const OpinionProfile& x) {
  std::vector<double> out(x.n());
  for (std::size_t i = 0; i < x.n(); ++i) out[i] = x.distance(i, nearest(x, i));
  return out;
}

double max_nn_distance(const OpinionProfile& x) {
  const auto d = nn_distances(x);
  return *std::max_element(d.begin(), d.end());
}

}  // namespace

LexValue lex_lyapunov(const OpinionProfile& x) { return LexValue::from_unsorted(nn_distances(x)); }

double vhat(const OpinionProfile& x) {
  const std::size_t n = x.n();
  if (n > kMaxVhatAgents) {
    throw std::domain_error("vhat: n = " + std::to_string(n) + " exceeds " +
                            std::to_string(kMaxVhatAgents) + " agents");
  }
  const LexValue v = lex_lyapunov(x);
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += v[i] * std::ldexp(1.0, static_cast<int>(n - 1 - i));
  return s;
}

DriftCertificate async_drift_check(const OpinionProfile& x, std::size_t agent,
                                   const NNModelSpec& spec) {
  const OpinionProfile next = async_step(x, agent, spec);
  const std::size_t r_next = nearest(next, agent);
  return {vhat(x) - vhat(next), (1.0 - spec.mu[agent]) * x.distance(agent, r_next)};
}

SyncDrift sync_drift_check(const OpinionProfile& x, const NNModelSpec& spec) {
  validate(spec, x.n());
  if (!uniform_mu(spec)) throw std::invalid_argument("sync_drift_check needs a uniform mu");
  const std::size_t n = x.n();
  const double mu = spec.mu.front();
  const auto r = nearest_all(x);
  const auto dist = nn_distances(x);
  const OpinionProfile next = sync_step(x, spec);
  const auto dist_next = nn_distances(next);

  SyncDrift out;
  out.lhs = std::accumulate(dist.begin(), dist.end(), 0.0) -
            std::accumulate(dist_next.begin(), dist_next.end(), 0.0);

  // Weak components of the functional graph i -> r(i).
  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t u) {
    while (parent[u] != u) u = parent[u] = parent[parent[u]];
    return u;
  };
  for (std::size_t i = 0; i < n; ++i) parent[find(i)] = find(r[i]);

  const std::size_t longest =
      static_cast<std::size_t>(std::max_element(dist.begin(), dist.end()) - dist.begin());
  out.longest = dist[longest];
  out.shortest = out.longest;
  const std::size_t root = find(longest);
  for (std::size_t i = 0; i < n; ++i)
    if (find(i) == root) out.shortest = std::min(out.shortest, dist[i]);
  out.rhs = (1.0 - mu) * (out.longest - out.shortest);
  return out;
}

EpsEquilibriumReport run_to_eps_equilibrium(const OpinionProfile& x0, double epsilon,
                                            const NNModelSpec& spec, std::size_t max_iters,
                                            bool check) {
  if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon must be positive");
  validate(spec, x0.n());
  const bool sync = spec.mode == NNMode::sync;
  if (sync && check && !uniform_mu(spec)) {
    throw std::invalid_argument("synchronous certificates need a uniform mu");
  }

  EpsEquilibriumReport rep;
  rep.epsilon = epsilon;
  rep.d0 = diameter(x0);
  rep.seed = spec.seed;
  rep.min_drift_slack = std::numeric_limits<double>::infinity();

  const Eigen::RowVectorXd lo = x0.values().colwise().minCoeff();
  const Eigen::RowVectorXd hi = x0.values().colwise().maxCoeff();
  RngStream rng(spec.seed);
  const std::size_t n = x0.n();

  OpinionProfile x = x0;
  double m = max_nn_distance(x);
  rep.max_nn_trace.push_back(m);
  if (m <= epsilon) rep.t_eps = 0;

  for (std::size_t t = 0; !rep.t_eps && t < max_iters; ++t) {
    OpinionProfile next = x;
    if (sync) {
      if (check) {
        const SyncDrift drift = sync_drift_check(x, spec);
        rep.min_drift_slack = std::min(rep.min_drift_slack, drift.lhs - drift.rhs);
        if (!drift.holds()) ++rep.drift_violations;
      }
      next = sync_step(x, spec);
      if (check) {
        const auto r = nearest_all(x);
        for (std::size_t i = 0; i < n; ++i) {
          if (next.distance(i, r[i]) > x.distance(i, r[i]) + kLyapunovTol) {
            ++rep.componentwise_violations;
            break;
          }
        }
      }
    } else {
      const std::size_t agent =
          spec.selection == Selection::round_robin ? t % n : rng.index(n);
      if (check) {
        const DriftCertificate drift = async_drift_check(x, agent, spec);
        rep.min_drift_slack = std::min(rep.min_drift_slack, drift.lhs - drift.rhs);
        if (!drift.holds()) ++rep.drift_violations;
      }
      next = async_step(x, agent, spec);
    }
    if (check) {
      if (lex_compare(lex_lyapunov(next), lex_lyapunov(x), kLyapunovTol) == Ordering::greater) {
        ++rep.lex_violations;
      }
      const Eigen::RowVectorXd nlo = next.values().colwise().minCoeff();
      const Eigen::RowVectorXd nhi = next.values().colwise().maxCoeff();
      if (((nlo - lo).array() < -1e-12).any() || ((nhi - hi).array() > 1e-12).any()) {
        ++rep.hull_violations;
      }
    }
    x = std::move(next);
    ++rep.iterations;
    m = max_nn_distance(x);
    rep.max_nn_trace.push_back(m);
    if (m <= epsilon) rep.t_eps = t + 1;
  }
  if (rep.iterations == 0 || !check) rep.min_drift_slack = 0.0;
  rep.final_state = std::move(x);
  return rep;
}

double async_time_bound(std::size_t n, double d0, double mu_max, double eps) {
  return static_cast<double>(n) * std::ldexp(1.0, static_cast<int>(n)) * d0 /
         ((1.0 - mu_max) * eps);
}

double sync_time_bound(std::size_t n, double d0, double mu, double eps) {
  const double base = std::abs(1.0 - 2.0 * mu);
  const double log_term = base == 0.0 ? 0.0 : std::log(eps / (2.0 * d0)) / std::log(base);
  return static_cast<double>(n) * (2.0 * d0 / eps + log_term);
}

bool in_row_stochastic_set(const NetworkMatrix& lambda, double tol) {
  const Matrix& a = lambda.entries();
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    if (a(i, i) != 0.0) return false;
    if (std::abs(a.row(i).sum() - 1.0) > tol) return false;
  }
  return true;
}

CoupledModel make_nn_model(const NNModelSpec& spec) {
  CoupledModel m;
  m.name = spec.mode == NNMode::sync ? "nn-sync" : "nn-async";
  m.kind = ValueKind::lexicographic;
  if (spec.mode == NNMode::sync) {
    m.state_update = [spec](const OpinionProfile& x, const NetworkMatrix& l) {
      validate(spec, x.n());
      Matrix out = x.values();
      for (std::size_t i = 0; i < x.n(); ++i) {
        Eigen::RowVectorXd target = Eigen::RowVectorXd::Zero(x.d());
        for (std::size_t j = 0; j < x.n(); ++j)
          if (l(i, j) != 0.0) target += l(i, j) * x.values().row(j);
        out.row(i) += (1.0 - spec.mu[i]) * (target - x.values().row(i));
      }
      return OpinionProfile(std::move(out));
    };
  } else {
    struct Selector {
      RngStream rng;
      std::size_t t = 0;
    };
    auto sel = std::make_shared<Selector>(Selector{RngStream(spec.seed)});
    m.state_update = [spec, sel](const OpinionProfile& x, const NetworkMatrix& l) {
      validate(spec, x.n());
      const std::size_t n = x.n();
      const std::size_t agent =
          spec.selection == Selection::round_robin ? sel->t % n : sel->rng.index(n);
      ++sel->t;
      Eigen::RowVectorXd target = Eigen::RowVectorXd::Zero(x.d());
      for (std::size_t j = 0; j < n; ++j)
        if (l(agent, j) != 0.0) target += l(agent, j) * x.values().row(j);
      Matrix out = x.values();
      out.row(agent) += (1.0 - spec.mu[agent]) * (target - x.values().row(agent));
      return OpinionProfile(std::move(out));
    };
  }
  m.network_update = [](const OpinionProfile& x) { return nn_network(x); };
  m.potential = [](const OpinionProfile& y, const NetworkMatrix& l) -> OrderedValue {
    return nn_objective(l, y);
  };
  m.in_constraint_set = [](const NetworkMatrix& l) { return in_row_stochastic_set(l); };
  return m;
}

}  // namespace sdnet
