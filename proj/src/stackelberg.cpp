#include "sdnet/stackelberg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>
#include <stdexcept>

#include "sdnet/graph.hpp"

namespace sdnet {

namespace {

constexpr std::size_t kMaxCuttingRounds = 500;

NetworkMatrix with_self_loops(Matrix m, bool binary) {
  m.diagonal().setOnes();
  return NetworkMatrix(std::move(m), {true, binary, true});
}

// Snap LP output onto [0,1] and the nearest endpoint when within tol.
double snap(double v) {
  if (std::abs(v) < 1e-9) return 0.0;
  if (std::abs(v - 1.0) < 1e-9) return 1.0;
  return std::clamp(v, 0.0, 1.0);
}

NetworkMatrix threshold_leader(const OpinionProfile& x, double epsilon) {
  const std::size_t n = x.n();
  const double eps_sq = epsilon * epsilon;
  Matrix m = Matrix::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (i == j || x.squared_distance(i, j) <= eps_sq) m(i, j) = 1.0;
  return NetworkMatrix(std::move(m), {true, true, true});
}

NetworkMatrix mst_leader(const OpinionProfile& x) {
  const auto n = static_cast<Eigen::Index>(x.n());
  Matrix m = Matrix::Zero(n, n);
  for (const auto& [i, j] : minimum_spanning_tree(squared_distance_weights(x))) {
    m(i, j) = 1.0;
    m(j, i) = 1.0;
  }
  return with_self_loops(std::move(m), true);
}

// min sum_e 2 w_e z_e over {0 <= z <= 1, z(delta(S)) >= 1 for every cut S},
// generating violated cuts with a global min-cut oracle.
NetworkMatrix cutting_plane_leader(const OpinionProfile& x) {
  const std::size_t n = x.n();
  const Matrix w = squared_distance_weights(x);
  std::vector<std::pair<std::size_t, std::size_t>> edges;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) edges.emplace_back(i, j);
  const std::size_t ne = edges.size();

  std::vector<std::vector<bool>> cuts;
  for (std::size_t v = 0; v < n; ++v) {
    std::vector<bool> side(n, false);
    side[v] = true;
    cuts.push_back(side);
  }

  Matrix z_mat = Matrix::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  if (n < 2) return with_self_loops(std::move(z_mat), false);

  for (std::size_t round = 0; round < kMaxCuttingRounds; ++round) {
    const std::size_t nc = cuts.size();
    // columns: z (ne), u (ne), s (nc)
    const auto rows = static_cast<Eigen::Index>(ne + nc);
    const auto cols = static_cast<Eigen::Index>(2 * ne + nc);
    Matrix a = Matrix::Zero(rows, cols);
    Vector b = Vector::Ones(rows);
    Vector c = Vector::Zero(cols);
    for (std::size_t e = 0; e < ne; ++e) {
      a(e, e) = 1.0;
      a(e, ne + e) = 1.0;
      c(e) = 2.0 * w(edges[e].first, edges[e].second);
    }
    for (std::size_t k = 0; k < nc; ++k) {
      const auto r = static_cast<Eigen::Index>(ne + k);
      for (std::size_t e = 0; e < ne; ++e)
        if (cuts[k][edges[e].first] != cuts[k][edges[e].second]) a(r, e) = 1.0;
      a(r, 2 * ne + k) = -1.0;
    }
    const auto sol = solve_standard_lp(a, b, c);
    if (!sol) throw std::logic_error("cutting-plane leader: relaxation infeasible");

    z_mat.setZero();
    for (std::size_t e = 0; e < ne; ++e) {
      const double v = snap((*sol)(e));
      z_mat(edges[e].first, edges[e].second) = v;
      z_mat(edges[e].second, edges[e].first) = v;
    }
    const MinCut cut = global_min_cut(z_mat);
    if (cut.weight >= 1.0 - 1e-9) {
      bool binary = true;
      for (std::size_t e = 0; e < ne; ++e) {
        const double v = z_mat(edges[e].first, edges[e].second);
        binary = binary && (v == 0.0 || v == 1.0);
      }
      return with_self_loops(std::move(z_mat), binary);
    }
    cuts.push_back(cut.side);
  }
  throw std::runtime_error("cutting-plane leader: round limit reached");
}

bool symmetric_in_box(const Matrix& m, double tol) {
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      const double v = m(i, j);
      if (v < -tol || v > 1.0 + tol || std::abs(v - m(j, i)) > tol) return false;
    }
  return true;
}

std::string key_of(const NetworkMatrix& lambda) {
  const Matrix& m = lambda.entries();
  return std::string(reinterpret_cast<const char*>(m.data()),
                     static_cast<std::size_t>(m.size()) * sizeof(double));
}

}  // namespace

void validate(const GameSpec& g) {
  if (g.n < 1) throw std::invalid_argument("game needs at least one follower");
  if (!std::isfinite(g.offset_sq) || g.offset_sq < 0.0) {
    throw std::invalid_argument("game offset must be finite and nonnegative");
  }
  if (!(std::isfinite(g.box_lo) && std::isfinite(g.box_hi) && g.box_lo <= g.box_hi)) {
    throw std::invalid_argument("follower box must be finite with lo <= hi");
  }
  if (const auto* b = std::get_if<BoxSymmetricSelfLoops>(&g.polytope)) {
    if (!(std::isfinite(b->epsilon) && b->epsilon >= 0.0)) {
      throw std::invalid_argument("threshold epsilon must be finite and nonnegative");
    }
  }
}

GameSpec example1_game(std::size_t n, double epsilon) {
  GameSpec g;
  g.n = n;
  g.offset_sq = epsilon * epsilon;
  g.polytope = BoxSymmetricSelfLoops{epsilon};
  validate(g);
  return g;
}

GameSpec example2_game(std::size_t n) {
  GameSpec g;
  g.n = n;
  g.polytope = ConnectivityPolytope{};
  validate(g);
  return g;
}

std::string to_string(LeaderMethod m) {
  switch (m) {
    case LeaderMethod::edge_threshold:
      return "edge_threshold";
    case LeaderMethod::mst_integral:
      return "mst_integral";
    case LeaderMethod::cutting_plane_lp:
      return "cutting_plane_lp";
  }
  return "unknown";
}

LeaderMethod default_leader(const GameSpec& g) {
  if (std::holds_alternative<BoxSymmetricSelfLoops>(g.polytope)) return LeaderMethod::edge_threshold;
  if (std::holds_alternative<ConnectivityPolytope>(g.polytope)) return LeaderMethod::mst_integral;
  throw std::invalid_argument("no leader response for the row-stochastic descriptor");
}

bool in_polytope(const NetworkMatrix& lambda, const GameSpec& g, double tol) {
  const Matrix& m = lambda.entries();
  if (lambda.n() != g.n) return false;
  if (std::holds_alternative<BoxSymmetricSelfLoops>(g.polytope)) {
    if (!symmetric_in_box(m, tol)) return false;
    for (std::size_t i = 0; i < g.n; ++i)
      if (m(i, i) != 1.0) return false;
    return true;
  }
  if (std::holds_alternative<ConnectivityPolytope>(g.polytope)) {
    if (!symmetric_in_box(m, tol)) return false;
    if (g.n < 2) return true;
    Matrix off = m;
    off.diagonal().setZero();
    return global_min_cut(off).weight >= 1.0 - tol;
  }
  for (std::size_t i = 0; i < g.n; ++i) {
    if (m(i, i) != 0.0) return false;
    if (std::abs(m.row(i).sum() - 1.0) > tol) return false;
  }
  return true;
}

double rho(const OpinionProfile& x, const OpinionProfile& y, const Matrix& weights,
           double offset_sq) {
  const std::size_t n = x.n();
  if (y.n() != n || y.d() != x.d() || static_cast<std::size_t>(weights.rows()) != n ||
      static_cast<std::size_t>(weights.cols()) != n) {
    throw std::invalid_argument("rho: size mismatch");
  }
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      const double wij = weights(i, j);
      if (wij == 0.0) continue;
      const double sq = (y.values().row(i) - x.values().row(j)).squaredNorm();
      total += wij * (sq - offset_sq);
    }
  return total;
}

double rho(const OpinionProfile& x, const OpinionProfile& y, const NetworkMatrix& lambda,
           const GameSpec& g) {
  return rho(x, y, lambda.entries(), g.offset_sq);
}

double social_cost(const OpinionProfile& x, const NetworkMatrix& lambda, const GameSpec& g) {
  if (x.n() != g.n) throw std::invalid_argument("social_cost: profile size differs from game");
  if (!in_polytope(lambda, g)) throw std::invalid_argument("social_cost: lambda outside the game's polytope");
  return rho(x, x, lambda, g);
}

OpinionProfile averaging_response(const OpinionProfile& x, const Matrix& weights, double lo,
                                  double hi) {
  const std::size_t n = x.n();
  const std::size_t d = x.d();
  if (static_cast<std::size_t>(weights.rows()) != n || static_cast<std::size_t>(weights.cols()) != n) {
    throw std::invalid_argument("averaging_response: size mismatch");
  }
  Matrix out(n, d);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < d; ++k) {
      double num = 0.0;
      double mass = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        const double c = weights(i, j);
        num += c * x(j, k);
        mass += c;
      }
      out(i, k) = mass > 0.0 ? std::clamp(num / mass, lo, hi) : x(i, k);
    }
  }
  return OpinionProfile(std::move(out));
}

OpinionProfile follower_best_response(const OpinionProfile& x, const NetworkMatrix& lambda,
                                      const GameSpec& g) {
  if (x.n() != g.n || lambda.n() != g.n) {
    throw std::invalid_argument("follower_best_response: size mismatch");
  }
  return averaging_response(x, lambda.entries(), g.box_lo, g.box_hi);
}

Matrix squared_distance_weights(const OpinionProfile& x) {
  const auto n = static_cast<Eigen::Index>(x.n());
  Matrix w = Matrix::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      if (i != j) w(i, j) = x.squared_distance(i, j);
  return w;
}

NetworkMatrix leader_best_response(const OpinionProfile& x, const GameSpec& g, LeaderMethod m) {
  validate(g);
  if (x.n() != g.n) throw std::invalid_argument("leader_best_response: profile size differs from game");
  if (std::holds_alternative<RowStochasticNoSelf>(g.polytope)) {
    throw std::invalid_argument("no leader response for the row-stochastic descriptor");
  }
  const bool box = std::holds_alternative<BoxSymmetricSelfLoops>(g.polytope);
  if (box != (m == LeaderMethod::edge_threshold)) {
    throw std::invalid_argument("leader method " + to_string(m) + " does not match the game's polytope");
  }
  switch (m) {
    case LeaderMethod::edge_threshold:
      return threshold_leader(x, std::get<BoxSymmetricSelfLoops>(g.polytope).epsilon);
    case LeaderMethod::mst_integral:
      return mst_leader(x);
    case LeaderMethod::cutting_plane_lp:
      return cutting_plane_leader(x);
  }
  throw std::logic_error("unreachable leader method");
}

MinSymmetricReport min_symmetric_check(const Matrix& weights, double offset_sq,
                                       std::size_t trials, RngStream& rng, std::size_t d,
                                       double tol) {
  const auto n = static_cast<std::size_t>(weights.rows());
  MinSymmetricReport rep;
  const double inf = std::numeric_limits<double>::infinity();
  for (std::size_t s = 0; s < trials; ++s) {
    const OpinionProfile x = uniform_profile(rng, n, d);
    const OpinionProfile z = averaging_response(x, weights, -inf, inf);
    const double excess = rho(z, z, weights, offset_sq) - rho(x, z, weights, offset_sq);
    rep.max_excess = std::max(rep.max_excess, excess);
    if (excess > tol) ++rep.violations;
    ++rep.samples;
  }
  return rep;
}

MinSymmetricReport min_symmetric_check(const GameSpec& g, const NetworkMatrix& lambda,
                                       std::size_t trials, RngStream& rng, std::size_t d,
                                       double tol) {
  if (!in_polytope(lambda, g)) {
    throw std::invalid_argument("min_symmetric_check: lambda outside the game's polytope");
  }
  return min_symmetric_check(lambda.entries(), g.offset_sq, trials, rng, d, tol);
}

StackelbergTrace run_stackelberg(const OpinionProfile& x0, const GameSpec& g, LeaderMethod m,
                                 std::size_t max_iters, double tol, double cert_tol) {
  StackelbergTrace tr;
  std::set<std::string> seen;

  OpinionProfile x = x0;
  NetworkMatrix lambda = leader_best_response(x, g, m);
  tr.actions_feasible = in_polytope(lambda, g);
  double cost = rho(x, x, lambda, g);
  tr.steps.push_back({0, x, lambda, cost});
  seen.insert(key_of(lambda));

  for (std::size_t t = 1; t <= max_iters; ++t) {
    OpinionProfile next = follower_best_response(x, lambda, g);
    const double lower = rho(next, next, lambda, g);
    const double mid = rho(x, next, lambda, g);
    if (lower > mid + cert_tol || mid > cost + cert_tol) ++tr.chain_violations;

    NetworkMatrix next_lambda = leader_best_response(next, g, m);
    if (!in_polytope(next_lambda, g)) tr.actions_feasible = false;
    const double next_cost = rho(next, next, next_lambda, g);
    const double inc = next_cost - cost;
    tr.max_cost_increase = std::max(tr.max_cost_increase, inc);
    if (inc > cert_tol) ++tr.cost_violations;

    const bool same_lambda = next_lambda == lambda;
    const double moved = movement(x, next);
    seen.insert(key_of(next_lambda));
    tr.steps.push_back({t, next, next_lambda, next_cost});
    x = std::move(next);
    lambda = std::move(next_lambda);
    cost = next_cost;
    if (same_lambda && moved < tol) {
      tr.converged = true;
      break;
    }
  }
  tr.distinct_leader_actions = seen.size();
  char buf[96];
  if (tr.converged) {
    std::snprintf(buf, sizeof buf, "approximate Stackelberg equilibrium (tol=%.3g)", tol);
  } else {
    std::snprintf(buf, sizeof buf, "max_iters reached (%zu)", max_iters);
  }
  tr.label = buf;
  return tr;
}

}  // namespace sdnet
