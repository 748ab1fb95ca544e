#pragma once

// Leader-follower best-response dynamics with quadratic couplings
//   rho(x, y, lambda) = sum_{i,j} lambda_ij (||y_i - x_j||^2 - offset),
// social cost c(x, lambda) = rho(x, x, lambda). Sums run over ordered pairs,
// so an undirected edge of a symmetric lambda is counted twice.

#include <cstddef>
#include <cstdint>
#include <limits>
#include <string>
#include <variant>
#include <vector>

#include "sdnet/core.hpp"

namespace sdnet {

/// {lambda in [0,1]^{n x n}: symmetric, lambda_ii = 1}; leader threshold eps.
struct BoxSymmetricSelfLoops {
  double epsilon = 1.0;
};
/// {lambda in [0,1]^{n x n}: symmetric, every cut carries weight >= 1}.
/// The diagonal is unconstrained.
struct ConnectivityPolytope {};
/// {row-stochastic, zero diagonal}. Descriptor only: no leader response.
struct RowStochasticNoSelf {};

using PolytopeSpec = std::variant<BoxSymmetricSelfLoops, ConnectivityPolytope, RowStochasticNoSelf>;

struct GameSpec {
  std::size_t n = 0;
  /// Subtracted from every coupling term (eps^2 in the threshold game).
  double offset_sq = 0.0;
  PolytopeSpec polytope;
  /// Follower action box, shared by all coordinates.
  double box_lo = -1e6;
  double box_hi = 1e6;
};

void validate(const GameSpec& g);

/// Threshold game whose leader response is the HK neighbor graph.
GameSpec example1_game(std::size_t n, double epsilon);
/// Connectivity game: the leader keeps the followers connected at least cost.
GameSpec example2_game(std::size_t n);

enum class LeaderMethod { edge_threshold, mst_integral, cutting_plane_lp };

std::string to_string(LeaderMethod m);
/// Default leader method for the game's polytope.
LeaderMethod default_leader(const GameSpec& g);

bool in_polytope(const NetworkMatrix& lambda, const GameSpec& g, double tol = 1e-9);

/// Throws std::invalid_argument when lambda is outside the game's polytope.
double social_cost(const OpinionProfile& x, const NetworkMatrix& lambda, const GameSpec& g);

/// rho for arbitrary nonnegative weights; no polytope check.
double rho(const OpinionProfile& x, const OpinionProfile& y, const Matrix& weights,
           double offset_sq);
double rho(const OpinionProfile& x, const OpinionProfile& y, const NetworkMatrix& lambda,
           const GameSpec& g);

/// x'_i = sum_j w_ij x_j / sum_j w_ij clamped to [lo, hi]; zero-mass rows stay put.
OpinionProfile averaging_response(const OpinionProfile& x, const Matrix& weights, double lo,
                                  double hi);
OpinionProfile follower_best_response(const OpinionProfile& x, const NetworkMatrix& lambda,
                                      const GameSpec& g);

/// Exact minimizer of c(x, .) over the game's polytope for the chosen method.
/// mst_integral and cutting_plane_lp set the cost-free diagonal to 1.
NetworkMatrix leader_best_response(const OpinionProfile& x, const GameSpec& g, LeaderMethod m);

/// Weights (x_i - x_j)^2 used by the connectivity leader.
Matrix squared_distance_weights(const OpinionProfile& x);

struct MinSymmetricReport {
  std::size_t samples = 0;
  std::size_t violations = 0;
  /// max over samples of rho(Z, Z) - rho(x, Z).
  double max_excess = -std::numeric_limits<double>::infinity();
  bool ok() const { return violations == 0; }
};

/// Samples x uniform in [0,1]^{n x d}, sets Z = averaging response and counts
/// samples with rho(Z, Z) > rho(x, Z) + tol.
MinSymmetricReport min_symmetric_check(const Matrix& weights, double offset_sq,
                                       std::size_t trials, RngStream& rng, std::size_t d = 1,
                                       double tol = 1e-9);
/// Same, for a lambda of the game's polytope.
MinSymmetricReport min_symmetric_check(const GameSpec& g, const NetworkMatrix& lambda,
                                       std::size_t trials, RngStream& rng, std::size_t d = 1,
                                       double tol = 1e-9);

struct StackelbergStep {
  std::size_t t;
  OpinionProfile x;
  NetworkMatrix lambda;
  double cost;  // c(x(t), lambda_t)
};

struct StackelbergTrace {
  std::vector<StackelbergStep> steps;
  bool converged = false;
  std::string label;
  /// Steps with c(x(t+1), lambda_{t+1}) > c(x(t), lambda_t) + tol.
  std::size_t cost_violations = 0;
  double max_cost_increase = 0.0;
  /// Steps where c(x', lambda) <= rho(x, x', lambda) <= c(x, lambda) fails.
  std::size_t chain_violations = 0;
  std::size_t distinct_leader_actions = 0;
  /// Every recorded lambda lies in the game's polytope.
  bool actions_feasible = true;

  bool certificates_ok() const {
    return cost_violations == 0 && chain_violations == 0 && actions_feasible;
  }
};

/// Alternates follower and leader best responses from lambda_0 = leader(x0).
/// Stops when lambda repeats exactly and ||x(t+1) - x(t)|| < tol.
StackelbergTrace run_stackelberg(const OpinionProfile& x0, const GameSpec& g, LeaderMethod m,
                                 std::size_t max_iters, double tol, double cert_tol = 1e-9);

}  // namespace sdnet
