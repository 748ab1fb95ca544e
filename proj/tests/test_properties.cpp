#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "sdnet/graph.hpp"
#include "sdnet/hk.hpp"
#include "sdnet/nearest_neighbor.hpp"
#include "sdnet/stackelberg.hpp"

using namespace sdnet;

namespace {

NetworkMatrix random_symmetric(RngStream& rng, std::size_t n, bool unit_diag) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j) m(i, j) = m(j, i) = rng.uniform01();
  if (unit_diag) m.diagonal().setOnes(); else m.diagonal().setZero();
  return NetworkMatrix(m, {true, false, unit_diag});
}

double random_epsilon(RngStream& rng) { return 0.05 + 0.6 * rng.uniform01(); }

}  // namespace

TEST_CASE("laplacian annihilates constants and its form is nonnegative") {
  RngStream rng(100);
  for (int k = 0; k < 500; ++k) {
    const std::size_t n = 1 + rng.index(8);
    const NetworkMatrix l = random_symmetric(rng, n, rng.index(2) == 0);
    const Matrix lap = laplacian(l);
    CHECK((lap * Vector::Ones(n)).cwiseAbs().maxCoeff() <= 1e-12);
    const OpinionProfile y = uniform_profile(rng, n, 1 + rng.index(3), -5.0, 5.0);
    CHECK(quadratic_form(y, lap) >= -1e-9);
  }
}

TEST_CASE("lex comparison is a total order") {
  RngStream rng(101);
  auto draw = [&rng] {
    std::vector<double> v(3);
    for (double& e : v) e = static_cast<double>(rng.index(4));
    return LexValue::from_unsorted(v);
  };
  auto flip = [](Ordering o) {
    return o == Ordering::less ? Ordering::greater : o == Ordering::greater ? Ordering::less : Ordering::equal;
  };
  for (int k = 0; k < 2000; ++k) {
    const LexValue a = draw(), b = draw(), c = draw();
    CHECK(lex_compare(a, a) == Ordering::equal);
    CHECK(lex_compare(b, a) == flip(lex_compare(a, b)));
    CHECK((lex_compare(a, b) == Ordering::equal) == (a == b));
    if (lex_compare(a, b) != Ordering::greater && lex_compare(b, c) != Ordering::greater) {
      CHECK(lex_compare(a, c) != Ordering::greater);
    }
  }
}

TEST_CASE("rng streams reproduce their draws") {
  RngStream a(77), b(77), c(78);
  bool any_diff = false;
  for (int k = 0; k < 10000; ++k) {
    const std::uint64_t x = a.next_u64();
    CHECK(x == b.next_u64());
    any_diff = any_diff || x != c.next_u64();
  }
  CHECK(any_diff);
  RngStream d1 = RngStream::derive(5, 3), d2 = RngStream::derive(5, 3), d3 = RngStream::derive(5, 4);
  const double u = d1.uniform01();
  CHECK(u == d2.uniform01());
  CHECK(u != d3.uniform01());
}

TEST_CASE("hk minimizer beats random feasible networks") {
  RngStream rng(102);
  for (int k = 0; k < 100; ++k) {
    const std::size_t n = 2 + rng.index(7);
    const OpinionProfile x = uniform_profile(rng, n, 1 + rng.index(2));
    const HKModelSpec spec{Homogeneous{random_epsilon(rng)}, std::nullopt, std::nullopt};
    const double best = hk_objective(x, hk_lambda_minimizer(x, spec), spec);
    CHECK(best <= hk_objective(x, random_symmetric(rng, n, true), spec) + 1e-12);
  }
}

TEST_CASE("leader responses beat random feasible networks") {
  RngStream rng(103);
  for (int k = 0; k < 100; ++k) {
    const std::size_t n = 2 + rng.index(6);
    const OpinionProfile x = uniform_profile(rng, n, 2);

    const GameSpec g1 = example1_game(n, random_epsilon(rng));
    const NetworkMatrix l1 = leader_best_response(x, g1, LeaderMethod::edge_threshold);
    CHECK(social_cost(x, l1, g1) <= social_cost(x, random_symmetric(rng, n, true), g1) + 1e-12);

    // a random spanning tree plus random extra weight stays in the polytope
    const GameSpec g2 = example2_game(n);
    Matrix m = random_symmetric(rng, n, true).entries();
    for (std::size_t v = 1; v < n; ++v) {
      const std::size_t u = rng.index(v);
      m(u, v) = m(v, u) = 1.0;
    }
    const NetworkMatrix cand(m, {true, false, true});
    REQUIRE(in_polytope(cand, g2));
    const NetworkMatrix l2 = leader_best_response(x, g2, LeaderMethod::mst_integral);
    CHECK(social_cost(x, l2, g2) <= social_cost(x, cand, g2) + 1e-12);
  }
}

TEST_CASE("hk update matrices are row-stochastic") {
  RngStream rng(104);
  for (int k = 0; k < 300; ++k) {
    const std::size_t n = 1 + rng.index(10);
    const OpinionProfile x = uniform_profile(rng, n, 1 + rng.index(3));
    const HKModelSpec spec{Homogeneous{random_epsilon(rng)}, std::nullopt, std::nullopt};
    const Matrix a = hk_update_matrix(neighbor_network(x, spec), spec);
    CHECK(a.minCoeff() >= 0.0);
    for (std::size_t i = 0; i < n; ++i) CHECK(std::abs(a.row(i).sum() - 1.0) <= 1e-12);
  }
}

TEST_CASE("asynchronous drift inequality on random draws") {
  RngStream rng(105);
  for (int k = 0; k < 500; ++k) {
    const std::size_t n = 2 + rng.index(7);
    const OpinionProfile x = uniform_profile(rng, n, 1 + rng.index(2));
    std::vector<double> mu(n);
    for (double& m : mu) m = 0.05 + 0.9 * rng.uniform01();
    const NNModelSpec spec{mu, NNMode::async, Selection::uniform_random, 0};
    const DriftCertificate c = async_drift_check(x, rng.index(n), spec);
    CHECK(c.lhs >= c.rhs - 1e-9);
  }
}

TEST_CASE("synchronous drift inequality on random draws") {
  RngStream rng(106);
  for (int k = 0; k < 500; ++k) {
    const std::size_t n = 2 + rng.index(7);
    const OpinionProfile x = uniform_profile(rng, n, 1 + rng.index(2));
    const NNModelSpec spec{std::vector<double>(n, 0.05 + 0.9 * rng.uniform01()), NNMode::sync,
                           Selection::round_robin, 0};
    const SyncDrift c = sync_drift_check(x, spec);
    CHECK(c.lhs >= c.rhs - 1e-9);
  }
}

TEST_CASE("nearest-neighbor updates stay in the convex hull") {
  RngStream rng(107);
  for (int k = 0; k < 200; ++k) {
    const std::size_t n = 2 + rng.index(8);
    const std::size_t d = 1 + rng.index(2);
    OpinionProfile x = uniform_profile(rng, n, d);
    const NNModelSpec spec{std::vector<double>(n, 0.05 + 0.9 * rng.uniform01()),
                           rng.index(2) == 0 ? NNMode::sync : NNMode::async, Selection::uniform_random, 0};
    for (int t = 0; t < 20; ++t) {
      const OpinionProfile next = spec.mode == NNMode::sync ? sync_step(x, spec) : async_step(x, rng.index(n), spec);
      // the hull of x(t+1) lies in the hull of x(t); boxes are a projection of that
      for (std::size_t c = 0; c < d; ++c) {
        CHECK(next.values().col(c).minCoeff() >= x.values().col(c).minCoeff());
        CHECK(next.values().col(c).maxCoeff() <= x.values().col(c).maxCoeff());
      }
      x = next;
    }
  }
}

TEST_CASE("mutual nearest pairs contract by |1 - 2 mu|") {
  RngStream rng(108);
  std::size_t pairs = 0;
  for (int k = 0; k < 300; ++k) {
    const std::size_t n = 2 + rng.index(8);
    const OpinionProfile x = uniform_profile(rng, n, 1 + rng.index(2));
    const double mu = 0.05 + 0.9 * rng.uniform01();
    const NNModelSpec spec{std::vector<double>(n, mu), NNMode::sync, Selection::round_robin, 0};
    const auto r = nearest_all(x);
    const OpinionProfile next = sync_step(x, spec);
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t j = r[i];
      if (j > i && r[j] == i) {
        ++pairs;
        CHECK(next.distance(i, j) == doctest::Approx(std::abs(1.0 - 2.0 * mu) * x.distance(i, j)).epsilon(1e-9));
      }
    }
  }
  CHECK(pairs > 100);
}
