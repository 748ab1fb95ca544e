#include "sdnet/oracles.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <string>

namespace sdnet {

namespace {

void check_n(std::size_t n, const OracleBudget& budget) {
  if (n > budget.max_n) {
    throw BudgetExceeded("oracle: n = " + std::to_string(n) + " exceeds max_n = " +
                         std::to_string(budget.max_n));
  }
}

void check_count(long double count, const OracleBudget& budget) {
  if (count > static_cast<long double>(budget.max_enumeration)) {
    throw BudgetExceeded("oracle: enumeration too large");
  }
}

std::size_t root(std::vector<std::size_t>& p, std::size_t a) {
  while (p[a] != a) a = p[a];
  return a;
}

}  // namespace

HKOracleResult brute_hk_lambda(const OpinionProfile& x, const HKModelSpec& spec,
                               const OracleBudget& budget) {
  validate(spec, x.n());
  const std::size_t n = x.n();
  check_n(n, budget);
  std::vector<std::pair<std::size_t, std::size_t>> free_pairs;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (!spec.restriction || spec.restriction->contains(i, j)) free_pairs.emplace_back(i, j);
  const std::size_t m = free_pairs.size();
  check_count(std::ldexp(1.0L, static_cast<int>(m)), budget);

  const bool ordered = convention(spec) == SumConvention::ordered_pairs;
  auto value_of = [&](const Matrix& a) {
    double f = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        if (!ordered && j <= i) continue;
        if (a(i, j) == 0.0) continue;
        const double w = spec.weights ? (*spec.weights)(i, j) : 1.0;
        const double eps = pair_bound(spec.confidence, i, j);
        const Eigen::RowVectorXd diff = x.values().row(i) - x.values().row(j);
        f += w * (diff.squaredNorm() - eps * eps);
      }
    return f;
  };

  double best = std::numeric_limits<double>::infinity();
  Matrix best_a;
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << m); ++mask) {
    Matrix a = Matrix::Identity(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    for (std::size_t e = 0; e < m; ++e)
      if ((mask >> e) & 1U) {
        a(free_pairs[e].first, free_pairs[e].second) = 1.0;
        a(free_pairs[e].second, free_pairs[e].first) = 1.0;
      }
    const double v = value_of(a);
    if (v < best) {
      best = v;
      best_a = a;
    }
  }
  return {best, NetworkMatrix(best_a, {true, true, true})};
}

LexOracleResult brute_lex_network(const OpinionProfile& x, const OracleBudget& budget) {
  const std::size_t n = x.n();
  if (n < 2) throw std::invalid_argument("brute_lex_network: need at least two agents");
  check_n(n, budget);
  check_count(std::pow(static_cast<long double>(n - 1), static_cast<long double>(n)), budget);

  std::vector<std::size_t> choice(n, 0);  // index among the n-1 others
  std::optional<LexValue> best;
  std::vector<std::size_t> best_choice;
  for (;;) {
    std::vector<double> row_cost(n);
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t j = choice[i] < i ? choice[i] : choice[i] + 1;
      row_cost[i] = (x.values().row(i) - x.values().row(j)).norm();
    }
    LexValue v = LexValue::from_unsorted(row_cost);
    if (!best || lex_compare(v, *best) == Ordering::less) {
      best = std::move(v);
      best_choice = choice;
    }
    std::size_t k = 0;
    while (k < n && ++choice[k] == n - 1) choice[k++] = 0;
    if (k == n) break;
  }
  Matrix a = Matrix::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t j = best_choice[i] < i ? best_choice[i] : best_choice[i] + 1;
    a(i, j) = 1.0;
  }
  return {*best, NetworkMatrix(a, {false, true, false})};
}

SubgraphOracleResult brute_connected_subgraph(const Matrix& weights, const OracleBudget& budget) {
  if (weights.rows() != weights.cols()) {
    throw std::invalid_argument("brute_connected_subgraph: matrix not square");
  }
  const auto n = static_cast<std::size_t>(weights.rows());
  check_n(n, budget);
  std::vector<std::pair<std::size_t, std::size_t>> all;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      if (weights(i, j) < 0.0 || weights(i, j) != weights(j, i)) {
        throw std::invalid_argument("brute_connected_subgraph: weights must be symmetric and nonnegative");
      }
      all.emplace_back(i, j);
    }
  const std::size_t m = all.size();
  check_count(std::ldexp(1.0L, static_cast<int>(m)), budget);

  SubgraphOracleResult best{std::numeric_limits<double>::infinity(), {}};
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << m); ++mask) {
    std::vector<std::size_t> parent(n);
    std::iota(parent.begin(), parent.end(), 0);
    std::size_t parts = n;
    double cost = 0.0;
    for (std::size_t e = 0; e < m; ++e) {
      if (!((mask >> e) & 1U)) continue;
      cost += weights(all[e].first, all[e].second);
      const std::size_t a = root(parent, all[e].first), b = root(parent, all[e].second);
      if (a != b) {
        parent[a] = b;
        --parts;
      }
    }
    if (parts > 1 || cost >= best.cost) continue;
    best.cost = cost;
    best.edges.clear();
    for (std::size_t e = 0; e < m; ++e)
      if ((mask >> e) & 1U) best.edges.push_back(all[e]);
  }
  return best;
}

}  // namespace sdnet
