#pragma once

// Small dense graph and LP routines backing the Stackelberg leader.

#include <cstddef>
#include <optional>
#include <utility>
#include <vector>

#include "sdnet/core.hpp"

namespace sdnet {

/// Connectivity of the undirected graph with an edge wherever w(i,j) > threshold.
bool is_connected(const Matrix& w, double threshold = 0.0);

/// Number of unordered off-diagonal pairs with w(i,j) != 0.
std::size_t edge_count(const Matrix& w);

/// Off-diagonal part is a spanning tree (connected, n-1 edges).
bool is_spanning_tree(const Matrix& w);

struct MinCut {
  double weight = 0.0;
  std::vector<bool> side;  // one shore of the cut
};

/// Global minimum cut of a symmetric nonnegative weight matrix (Stoer-Wagner).
/// Requires n >= 2.
MinCut global_min_cut(const Matrix& w);

/// Kruskal over weights w(i,j), i < j. Ties are broken by (i, j)
/// lexicographically. Returns the tree edges with i < j.
std::vector<std::pair<std::size_t, std::size_t>> minimum_spanning_tree(const Matrix& w);

/// min c^T x  s.t.  A x = b, x >= 0, via a dense two-phase simplex with
/// Bland's rule. Returns nullopt when infeasible; throws std::runtime_error
/// when unbounded.
std::optional<Vector> solve_standard_lp(const Matrix& a, const Vector& b, const Vector& c);

}  // namespace sdnet
