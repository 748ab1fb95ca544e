#include "sdnet/bcd.hpp"

#include <algorithm>
#include <stdexcept>

namespace sdnet {

OrderedValue CoupledModel::objective(const OpinionProfile& y, const NetworkMatrix& lambda) const {
  OrderedValue phi = potential(y, lambda);
  if (!network_cost) return phi;
  if (auto* scalar = std::get_if<double>(&phi)) {
    *scalar += network_cost(lambda);
    return phi;
  }
  throw std::logic_error("model '" + name + "': lexicographic potential with a network cost");
}

std::pair<OpinionProfile, NetworkMatrix> step(const CoupledModel& model, const OpinionProfile& x,
                                              const NetworkMatrix& lambda) {
  if (model.in_constraint_set && !model.in_constraint_set(lambda)) {
    throw std::domain_error("model '" + model.name + "': network outside the constraint set");
  }
  OpinionProfile next = model.state_update(x, lambda);
  NetworkMatrix next_lambda = model.network_update(next);
  if (model.in_constraint_set && !model.in_constraint_set(next_lambda)) {
    throw std::domain_error("model '" + model.name +
                            "': network update left the constraint set");
  }
  return {std::move(next), std::move(next_lambda)};
}

TrajectoryRecord run(const CoupledModel& model, const OpinionProfile& x0, const RunConfig& cfg) {
  if (cfg.max_iters < 1) throw std::invalid_argument("run: max_iters must be >= 1");

  TrajectoryRecord traj;
  NetworkMatrix lambda0 = model.network_update(x0);
  if (model.in_constraint_set && !model.in_constraint_set(lambda0)) {
    throw std::domain_error("model '" + model.name + "': initial network outside Lambda");
  }
  std::optional<OrderedValue> v0;
  if (cfg.record_lyapunov) v0 = model.objective(x0, lambda0);
  traj.append({0, x0, std::move(lambda0), std::move(v0), 0.0});

  for (std::size_t it = 0; it < cfg.max_iters; ++it) {
    const auto& cur = traj.back();
    auto [x, lambda] = step(model, cur.x, cur.lambda);
    const double moved = movement(cur.x, x);
    std::optional<OrderedValue> v;
    if (cfg.record_lyapunov) v = model.objective(x, lambda);
    traj.append({cur.t + 1, std::move(x), std::move(lambda), std::move(v), moved});
    if (moved < cfg.tol) {
      traj.stop = StopReason::converged;
      return traj;
    }
  }
  traj.stop = StopReason::max_iters;
  return traj;
}

MonotoneReport certify_monotone(const TrajectoryRecord& traj, const CoupledModel& model,
                                double tol) {
  MonotoneReport report;
  auto value_at = [&](const TrajectoryStep& s) {
    return s.lyapunov ? *s.lyapunov : model.objective(s.x, s.lambda);
  };
  if (traj.steps.empty()) return report;

  OrderedValue prev = value_at(traj.steps.front());
  for (std::size_t k = 1; k < traj.steps.size(); ++k) {
    OrderedValue cur = value_at(traj.steps[k]);
    ++report.checked_steps;
    if (const auto* c = std::get_if<double>(&cur)) {
      report.max_increase = std::max(report.max_increase, *c - std::get<double>(prev));
    }
    if (compare(cur, prev, tol) == Ordering::greater && report.ok) {
      report.ok = false;
      report.first_violation = k;
    }
    prev = std::move(cur);
  }
  return report;
}

}  // namespace sdnet
