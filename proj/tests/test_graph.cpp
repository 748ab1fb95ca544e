#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "sdnet/graph.hpp"

using namespace sdnet;

TEST_CASE("connectivity and tree checks") {
  Matrix path(3, 3);
  path << 1, 1, 0, 1, 1, 1, 0, 1, 1;
  CHECK(is_connected(path));
  CHECK(is_spanning_tree(path));
  CHECK(edge_count(path) == 2);
  Matrix split = Matrix::Identity(3, 3);
  split(0, 1) = split(1, 0) = 1.0;
  CHECK_FALSE(is_connected(split));
  CHECK_FALSE(is_spanning_tree(split));
  CHECK_FALSE(is_spanning_tree(Matrix::Ones(3, 3)));
}

TEST_CASE("minimum spanning tree on a line of three points") {
  Matrix w(3, 3);
  w << 0, 1, 9, 1, 0, 4, 9, 4, 0;
  const auto tree = minimum_spanning_tree(w);
  REQUIRE(tree.size() == 2);
  CHECK(tree[0] == std::pair<std::size_t, std::size_t>{0, 1});
  CHECK(tree[1] == std::pair<std::size_t, std::size_t>{1, 2});
}

TEST_CASE("spanning tree ties are broken by edge index") {
  const auto tree = minimum_spanning_tree(Matrix::Zero(4, 4));
  REQUIRE(tree.size() == 3);
  CHECK(tree[0] == std::pair<std::size_t, std::size_t>{0, 1});
  CHECK(tree[1] == std::pair<std::size_t, std::size_t>{0, 2});
  CHECK(tree[2] == std::pair<std::size_t, std::size_t>{0, 3});
}

TEST_CASE("global min cut") {
  Matrix w = Matrix::Zero(4, 4);
  w(0, 1) = w(1, 0) = 3.0;
  w(2, 3) = w(3, 2) = 3.0;
  w(1, 2) = w(2, 1) = 0.5;
  const MinCut cut = global_min_cut(w);
  CHECK(cut.weight == doctest::Approx(0.5));
  CHECK(cut.side[0] == cut.side[1]);
  CHECK(cut.side[2] == cut.side[3]);
  CHECK(cut.side[0] != cut.side[2]);
  CHECK_THROWS(global_min_cut(Matrix::Zero(1, 1)));
}

TEST_CASE("simplex solves a small LP") {
  // min -x1 - x2  s.t. x1 + 2 x2 + s1 = 4, 3 x1 + x2 + s2 = 6
  Matrix a(2, 4);
  a << 1, 2, 1, 0, 3, 1, 0, 1;
  Vector b(2);
  b << 4, 6;
  Vector c(4);
  c << -1, -1, 0, 0;
  const auto x = solve_standard_lp(a, b, c);
  REQUIRE(x.has_value());
  CHECK((*x)(0) == doctest::Approx(1.6));
  CHECK((*x)(1) == doctest::Approx(1.2));
}

TEST_CASE("simplex reports infeasible and unbounded problems") {
  Matrix a(1, 1);
  a << 1;
  Vector b(1);
  b << -1;
  Vector c(1);
  c << 1;
  CHECK_FALSE(solve_standard_lp(a, b, c).has_value());

  Matrix a2(1, 2);
  a2 << 1, -1;
  Vector b2(1);
  b2 << 0;
  Vector c2(2);
  c2 << -1, 0;
  CHECK_THROWS_AS(solve_standard_lp(a2, b2, c2), std::runtime_error);
}

TEST_CASE("simplex handles redundant equality rows") {
  Matrix a(2, 2);
  a << 1, 1, 2, 2;
  Vector b(2);
  b << 1, 2;
  Vector c(2);
  c << 1, 3;
  const auto x = solve_standard_lp(a, b, c);
  REQUIRE(x.has_value());
  CHECK((*x)(0) == doctest::Approx(1.0));
  CHECK((*x)(1) == doctest::Approx(0.0));
}
