#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "sdnet/bcd.hpp"
#include "sdnet/hk.hpp"

using namespace sdnet;

namespace {

HKModelSpec homogeneous(double eps) { return {Homogeneous{eps}, std::nullopt, std::nullopt}; }

Matrix block_network() {
  Matrix m(3, 3);
  m << 1, 1, 0, 1, 1, 0, 0, 0, 1;
  return m;
}

}  // namespace

TEST_CASE("step on the three-agent HK example") {
  const CoupledModel model = make_hk_model(homogeneous(1.0));
  const OpinionProfile x = OpinionProfile::scalar({0.0, 0.5, 2.0});
  const auto [next, lambda] = step(model, x, model.network_update(x));
  CHECK(next == OpinionProfile::scalar({0.25, 0.25, 2.0}));
  CHECK(lambda.entries() == block_network());
}

TEST_CASE("step on an evenly spaced profile") {
  const CoupledModel model = make_hk_model(homogeneous(1.0));
  const OpinionProfile x = OpinionProfile::scalar({0.0, 1.0, 2.0});
  const auto [next, lambda] = step(model, x, model.network_update(x));
  CHECK(next == OpinionProfile::scalar({0.5, 1.0, 1.5}));
}

TEST_CASE("consensus is a fixed point and stops after one step") {
  const CoupledModel model = make_hk_model(homogeneous(0.3));
  const OpinionProfile x = OpinionProfile::scalar({2.0, 2.0, 2.0, 2.0});
  const TrajectoryRecord traj = run(model, x, RunConfig{});
  CHECK(traj.size() == 2);
  CHECK(traj.stop == StopReason::converged);
  CHECK(traj.back().x == x);
  CHECK(traj.back().movement == 0.0);
}

TEST_CASE("run on the three-agent HK example settles at t = 1") {
  const CoupledModel model = make_hk_model(homogeneous(1.0));
  const TrajectoryRecord traj = run(model, OpinionProfile::scalar({0.0, 0.5, 2.0}), RunConfig{});
  CHECK(traj.stop == StopReason::converged);
  CHECK(traj.steps[0].movement == 0.0);
  for (std::size_t t = 1; t < traj.size(); ++t) {
    CHECK(traj.steps[t].x(0, 0) == 0.25);
    CHECK(traj.steps[t].x(1, 0) == 0.25);
  }
  CHECK(certify_monotone(traj, model).ok);
}

TEST_CASE("step rejects networks outside the constraint set") {
  const CoupledModel model = make_hk_model(homogeneous(1.0));
  const OpinionProfile x = OpinionProfile::scalar({0.0, 0.5, 2.0});
  const NetworkMatrix no_loops(Matrix::Zero(3, 3), {true, true, false});
  CHECK_THROWS_AS(step(model, x, no_loops), std::domain_error);
}

TEST_CASE("certify_monotone accepts a constant trajectory") {
  const CoupledModel model = make_hk_model(homogeneous(1.0));
  const OpinionProfile x = OpinionProfile::scalar({1.0, 1.0});
  TrajectoryRecord traj;
  for (std::size_t t = 0; t < 4; ++t) traj.append({t, x, model.network_update(x), std::nullopt, 0.0});
  const MonotoneReport rep = certify_monotone(traj, model);
  CHECK(rep.ok);
  CHECK(rep.checked_steps == 3);
  CHECK(rep.max_increase == 0.0);
}

TEST_CASE("certify_monotone flags an injected increase") {
  const CoupledModel model = make_hk_model(homogeneous(1.0));
  TrajectoryRecord traj = run(model, OpinionProfile::scalar({0.0, 0.5, 2.0}), RunConfig{});
  // jump the cluster apart: the recomputed objective rises
  const OpinionProfile spread = OpinionProfile::scalar({0.0, 0.9, 2.0});
  const std::size_t t = traj.back().t + 1;
  traj.append({t, spread, model.network_update(spread), std::nullopt, 0.9});
  const MonotoneReport rep = certify_monotone(traj, model);
  CHECK_FALSE(rep.ok);
  REQUIRE(rep.first_violation.has_value());
  CHECK(*rep.first_violation == t);
  CHECK(rep.max_increase > 0.0);
}

TEST_CASE("objective refuses a network cost on a lexicographic potential") {
  CoupledModel m;
  m.name = "bad";
  m.kind = ValueKind::lexicographic;
  m.potential = [](const OpinionProfile&, const NetworkMatrix&) -> OrderedValue { return LexValue({1.0}); };
  m.network_cost = [](const NetworkMatrix&) { return 1.0; };
  const NetworkMatrix l(Matrix::Ones(1, 1), {true, true, true});
  CHECK_THROWS_AS(m.objective(OpinionProfile::scalar({0.0}), l), std::logic_error);
}

TEST_CASE("max_iters stop is recorded") {
  const CoupledModel model = make_hk_model(homogeneous(0.4));
  const TrajectoryRecord traj = run(model, OpinionProfile::scalar({0.0, 0.3, 0.6, 0.9}), RunConfig{1, 1e-12, true});
  CHECK(traj.size() == 2);
  CHECK(traj.stop == StopReason::max_iters);
  CHECK_THROWS(run(model, OpinionProfile::scalar({0.0}), RunConfig{0, 1e-12, true}));
}
