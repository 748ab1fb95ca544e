#pragma once

// Coupled state/network iteration
//
//   x(t+1)      = g1(x(t), lambda(t))
//   lambda(t+1) = g2(x(t+1))
//
// viewed as block coordinate descent on f(y, lambda) = Phi(y, lambda) + f1(lambda).
// If Phi(., lambda*) is nonincreasing under g1 for each fixed lambda* and g2(y)
// minimizes f(y, .) over the constraint set, then f is nonincreasing along the
// trajectory. certify_monotone checks exactly that on recorded runs.

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <utility>

#include "sdnet/core.hpp"

namespace sdnet {

enum class ValueKind { scalar, lexicographic };

struct CoupledModel {
  using StateUpdate = std::function<OpinionProfile(const OpinionProfile&, const NetworkMatrix&)>;
  using NetworkUpdate = std::function<NetworkMatrix(const OpinionProfile&)>;
  using Potential = std::function<OrderedValue(const OpinionProfile&, const NetworkMatrix&)>;
  using NetworkCost = std::function<double(const NetworkMatrix&)>;
  using Constraint = std::function<bool(const NetworkMatrix&)>;

  std::string name;
  ValueKind kind = ValueKind::scalar;
  StateUpdate state_update;
  NetworkUpdate network_update;
  Potential potential;
  /// f1. Only meaningful for scalar models; empty means zero.
  NetworkCost network_cost;
  /// Membership test for the constraint set Lambda.
  Constraint in_constraint_set;

  /// f(y, lambda) = Phi(y, lambda) + f1(lambda).
  OrderedValue objective(const OpinionProfile& y, const NetworkMatrix& lambda) const;
};

struct RunConfig {
  std::size_t max_iters = 10000;
  /// Stop once the per-step movement drops below this.
  double tol = 1e-12;
  bool record_lyapunov = true;
};

/// Returns (g1(x, lambda), g2(g1(x, lambda))). Throws std::domain_error when
/// lambda or the new network is outside the model's constraint set.
std::pair<OpinionProfile, NetworkMatrix> step(const CoupledModel& model, const OpinionProfile& x,
                                              const NetworkMatrix& lambda);

/// Iterates from lambda(0) = g2(x0). Recorded Lyapunov values are f(x(t), lambda(t)).
TrajectoryRecord run(const CoupledModel& model, const OpinionProfile& x0, const RunConfig& cfg);

struct MonotoneReport {
  bool ok = true;
  std::optional<std::size_t> first_violation;  // index t+1 of the offending step
  std::size_t checked_steps = 0;
  /// Largest scalar increase observed (0 for lexicographic models).
  double max_increase = 0.0;
};

/// Checks f(x(t+1), lambda(t+1)) <= f(x(t), lambda(t)) + tol at every step.
/// Uses recorded values when present and recomputes them otherwise.
MonotoneReport certify_monotone(const TrajectoryRecord& traj, const CoupledModel& model,
                                double tol = kLyapunovTol);

}  // namespace sdnet
