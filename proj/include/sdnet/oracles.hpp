#pragma once

// Exhaustive reference solvers for small instances. They share no code with
// the optimized routines they are compared against.

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <utility>
#include <vector>

#include "sdnet/core.hpp"
#include "sdnet/hk.hpp"

namespace sdnet {

struct OracleBudget {
  std::size_t max_n = 5;
  std::uint64_t max_enumeration = std::uint64_t{1} << 22;
};

class BudgetExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct HKOracleResult {
  double value;
  NetworkMatrix minimizer;
};

/// Minimum of f(x, .) over symmetric binary networks with unit diagonal and
/// no edges outside the restriction graph.
HKOracleResult brute_hk_lambda(const OpinionProfile& x, const HKModelSpec& spec,
                               const OracleBudget& budget = {});

struct LexOracleResult {
  LexValue value;
  NetworkMatrix minimizer;
};

/// Lexicographic minimum of sort(sum_j lambda_ij ||x_i - x_j||) over all
/// single-selection networks (one 1 per row, zero diagonal).
LexOracleResult brute_lex_network(const OpinionProfile& x, const OracleBudget& budget = {});

struct SubgraphOracleResult {
  double cost;  // per unordered edge
  std::vector<std::pair<std::size_t, std::size_t>> edges;
};

/// Cheapest connected spanning edge set under symmetric nonnegative weights.
SubgraphOracleResult brute_connected_subgraph(const Matrix& weights,
                                              const OracleBudget& budget = {});

}  // namespace sdnet
