#pragma once

// Hegselmann-Krause family: homogeneous, restricted edge-heterogeneous and
// 0-1 node-heterogeneous bounded-confidence dynamics.
//
// Neighborhood membership is inclusive: j is a neighbor of i iff
// ||x_i - x_j||^2 <= eps_ij^2. Squared distances are compared so that the
// network minimizer, the HK update and the Stackelberg leader all agree bit
// for bit at the boundary.
//
// Two summation conventions are used for the objective
//   f(y, lambda) = sum lambda_ij w_ij (||y_i - y_j||^2 - eps_ij^2):
//   ordered_pairs    - over all ordered (i, j) including i == j
//                      (homogeneous and 0-1 models without restriction);
//   restricted_edges - over unordered {i, j} in the restriction graph E
//                      (E is complete when no restriction is given).
// They differ by constants and a factor of two, never in monotonicity.

#include <cstddef>
#include <optional>
#include <vector>

#include "sdnet/bcd.hpp"
#include "sdnet/core.hpp"

namespace sdnet {

struct HKModelSpec {
  ConfidenceSpec confidence;
  std::optional<RestrictionGraph> restriction;
  /// Symmetric positive update weights, diagonal included.
  std::optional<Matrix> weights;
};

enum class SumConvention { ordered_pairs, restricted_edges };

void validate(const HKModelSpec& spec, std::size_t n);
SumConvention convention(const HKModelSpec& spec);

/// Binary symmetric adjacency with self-loops of the communication graph.
NetworkMatrix neighbor_network(const OpinionProfile& x, const HKModelSpec& spec);

/// Minimizer of the linear objective f(x, .) over the box constraint set,
/// taken at the extreme point that sets every nonpositive coefficient to 1.
NetworkMatrix hk_lambda_minimizer(const OpinionProfile& x, const HKModelSpec& spec);

/// f(y, lambda) under the spec's summation convention.
double hk_objective(const OpinionProfile& y, const NetworkMatrix& lambda, const HKModelSpec& spec);

/// Row-stochastic update matrix (diag(w.lambda 1))^{-1} (w.lambda).
Matrix hk_update_matrix(const NetworkMatrix& lambda, const HKModelSpec& spec);

/// x'_i = sum_j w_ij lambda_ij x_j / sum_j w_ij lambda_ij.
OpinionProfile hk_step(const OpinionProfile& x, const NetworkMatrix& lambda,
                       const HKModelSpec& spec);

/// V(y) = min over lambda of f(y, lambda).
double hk_lyapunov(const OpinionProfile& x, const HKModelSpec& spec);

struct DriftCertificate {
  double lhs = 0.0;
  double rhs = 0.0;
  bool holds(double tol = kLyapunovTol) const { return lhs >= rhs - tol; }
};

/// lhs = V(x) - V(x'), rhs = ||x - x'||^2 for one HK step x -> x'.
/// Requires identical confidence bounds and unit weights.
DriftCertificate drift_certificate_restricted(const OpinionProfile& x, const HKModelSpec& spec);

/// Node partition of the 0-1 model into stubborn (S0) and moving (S1) agents.
class ZeroOnePartition {
 public:
  ZeroOnePartition(std::size_t n, std::vector<std::size_t> stubborn);
  explicit ZeroOnePartition(const NodeBinary& nb);

  std::size_t n() const { return n_; }
  const std::vector<std::size_t>& stubborn() const { return s0_; }
  const std::vector<std::size_t>& moving() const { return s1_; }
  bool is_stubborn(std::size_t i) const { return mask_[i]; }

  NodeBinary as_confidence(double epsilon = 1.0) const { return {mask_, epsilon}; }

 private:
  std::size_t n_;
  std::vector<bool> mask_;
  std::vector<std::size_t> s0_;
  std::vector<std::size_t> s1_;
};

/// Block decomposition of a symmetric network over (S0, S1).
/// D0, D1 hold the full row sums of lambda over each block's rows, so the
/// Laplacian restricted to S1 rows is [-M, D1 - R1].
struct ZeroOneBlocks {
  Matrix r0, r1, m, d0, d1;
  Matrix q;  // D1 + R1
};

ZeroOneBlocks zero_one_blocks(const NetworkMatrix& lambda, const ZeroOnePartition& part);

/// Strict diagonal dominance with a positive diagonal, which implies
/// positive definiteness for a symmetric matrix.
bool strictly_diagonally_dominant(const Matrix& q);

/// Directed graph actually used by the 0-1 model: stubborn rows keep only
/// their self-loop.
NetworkMatrix zero_one_actual_network(const OpinionProfile& x, const ZeroOnePartition& part,
                                      double epsilon = 1.0);

/// One 0-1 update given a symmetric network: S0 rows fixed, S1 rows averaged.
OpinionProfile zero_one_apply(const OpinionProfile& x, const NetworkMatrix& lambda,
                              const ZeroOnePartition& part);

/// One 0-1 update with the network taken at x.
OpinionProfile zero_one_step(const OpinionProfile& x, const ZeroOnePartition& part,
                             double epsilon = 1.0);

struct DriftIdentity {
  double lhs = 0.0;
  double rhs = 0.0;
  bool holds(double tol = kLyapunovTol) const;
};

/// lhs = x^T L x - x'^T L x' with L the Laplacian of the symmetrized network
/// at x; rhs = ||x_1 - x'_1||^2_Q over the moving block.
DriftIdentity zero_one_drift_identity(const OpinionProfile& x, const ZeroOnePartition& part,
                                      double epsilon = 1.0);

struct FreezeReport {
  /// First t with sum_{tau >= t} ||x(tau+1) - x(tau)||^2 < delta^2.
  std::optional<std::size_t> freeze_index;
  double tail_sum = 0.0;
  /// A network change lambda(t) != lambda(t+1) at some t >= freeze_index.
  bool change_after = false;
  std::optional<std::size_t> change_index;
  /// False when the run stopped on max_iters, so the recorded tail may not
  /// bound the infinite one.
  bool tail_certified = false;
};

/// Empirical network-freeze check on a recorded run.
FreezeReport detect_network_freeze(const TrajectoryRecord& traj, double delta);

/// Geometric-mean contraction ratio of ||x(t) - x(T)|| over t >= from, where
/// x(T) is the last recorded state. Pairs whose errors fall below `floor` are
/// skipped; returns 0 when none remain.
double post_freeze_rate(const TrajectoryRecord& traj, std::size_t from, double floor = 1e-12);

/// BCD instantiation of the homogeneous/restricted model.
CoupledModel make_hk_model(const HKModelSpec& spec);
/// BCD instantiation of the 0-1 model (network recorded is the symmetrized one).
CoupledModel make_zero_one_model(const ZeroOnePartition& part, double epsilon = 1.0);

}  // namespace sdnet
