#include "evodyn/strategy_space.hpp"

#include <doctest.h>

#include <random>

using namespace evodyn;

TEST_CASE("make_uniform_grid examples") {
  const auto g2 = make_uniform_grid(2, 0.0, 2.0);
  CHECK(g2.size() == 2);
  CHECK(g2[0] == 0.0);
  CHECK(g2[1] == 2.0);

  const auto g3 = make_uniform_grid(3, 0.0, 2.0);
  CHECK(g3[1] == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(g3[2] == 2.0);

  const auto g5 = make_uniform_grid(5, 0.0, 1.0);
  for (Index i = 1; i < 5; ++i) CHECK(g5[i] - g5[i - 1] == doctest::Approx(0.25).epsilon(1e-14));
}

TEST_CASE("make_uniform_grid rejects bad input") {
  CHECK_THROWS_AS(make_uniform_grid(1, 0.0, 1.0), ValidationError);
  CHECK_THROWS_AS(make_uniform_grid(4, 1.0, 1.0), ValidationError);
  CHECK_THROWS_AS(make_uniform_grid(4, 2.0, 1.0), ValidationError);
}

TEST_CASE("explicit grids must be strictly increasing") {
  Vector bad(3);
  bad << 0.0, 1.0, 1.0;
  CHECK_THROWS_AS((void)StrategyGrid(bad), ValidationError);
  bad << 0.0, 2.0, 1.0;
  CHECK_THROWS_AS((void)StrategyGrid(bad), ValidationError);
  CHECK_THROWS_AS((void)StrategyGrid(Vector()), ValidationError);
}

TEST_CASE("random grids: sorted, endpoints, metric axioms") {
  std::mt19937_64 gen(7);
  std::uniform_int_distribution<int> count(2, 60);
  std::uniform_real_distribution<double> bound(-5.0, 5.0);
  for (int trial = 0; trial < 50; ++trial) {
    double a = bound(gen), b = bound(gen);
    if (a == b) continue;
    if (a > b) std::swap(a, b);
    const auto g = make_uniform_grid(count(gen), a, b);
    CHECK(g[0] == a);
    CHECK(g[g.size() - 1] == b);
    CHECK(g.lower() == a);
    CHECK(g.upper() == b);
    for (Index i = 1; i < g.size(); ++i) CHECK(g[i] > g[i - 1]);
    std::uniform_int_distribution<Index> pick(0, g.size() - 1);
    for (int k = 0; k < 20; ++k) {
      const Index i = pick(gen), j = pick(gen), l = pick(gen);
      CHECK(g.distance(i, j) == g.distance(j, i));
      CHECK((g.distance(i, j) == 0.0) == (i == j));
      CHECK(g.distance(i, l) <= g.distance(i, j) + g.distance(j, l) + 1e-12);
    }
  }
}

TEST_CASE("find, nearest and union") {
  const auto g = make_uniform_grid(5, 0.0, 2.0);
  CHECK(g.find(1.5).value() == 3);
  CHECK_FALSE(g.find(1.4).has_value());
  CHECK(g.nearest(1.4) == 3);
  CHECK(g.nearest(-3.0) == 0);
  CHECK(g.nearest(9.0) == 4);
  const auto u = union_grid(make_uniform_grid(3, 0.0, 2.0), make_uniform_grid(5, 0.0, 2.0));
  CHECK(u.size() == 5);
  const auto v = union_grid(make_uniform_grid(3, 0.0, 2.0), make_uniform_grid(4, 0.0, 2.0));
  CHECK(v.size() == 5);
  CHECK(g == make_uniform_grid(5, 0.0, 2.0));
  CHECK(g != make_uniform_grid(6, 0.0, 2.0));
}

TEST_CASE("make_uniform_reference examples") {
  const auto r4 = make_uniform_reference(make_uniform_grid(4, 0.0, 1.0));
  for (Index i = 0; i < 4; ++i) CHECK(r4[i] == 0.25);
  const auto r2 = make_uniform_reference(make_uniform_grid(2, 0.0, 1.0));
  CHECK(r2[0] == 0.5);
  CHECK(r2[1] == 0.5);
  // One-point grids are rejected before a reference can exist.
  CHECK_THROWS_AS(make_uniform_grid(1, 0.0, 1.0), ValidationError);
}

TEST_CASE("make_reference normalizes and validates") {
  const auto g3 = make_uniform_grid(3, 0.0, 2.0);
  Vector w(3);
  w << 1.0, 1.0, 2.0;
  const auto r = make_reference(g3, w);
  CHECK(r[0] == 0.25);
  CHECK(r[1] == 0.25);
  CHECK(r[2] == 0.5);
  CHECK(r.normalization_factor() == doctest::Approx(0.25));

  const auto g2 = make_uniform_grid(2, 0.0, 1.0);
  Vector bad(2);
  bad << 0.0, 1.0;
  CHECK_THROWS_AS(make_reference(g2, bad), ValidationError);
  bad << -1.0, 1.0;
  CHECK_THROWS_AS(make_reference(g2, bad), ValidationError);
  CHECK_THROWS_AS(make_reference(g3, Vector::Ones(2)), ValidationError);

  Vector half(2);
  half << 0.5, 0.5;
  const auto same = make_reference(g2, half);
  CHECK(same[0] == 0.5);
  CHECK(same[1] == 0.5);
  CHECK(same.normalization_factor() == 1.0);
}

TEST_CASE("reference invariants on random weights") {
  std::mt19937_64 gen(11);
  std::uniform_real_distribution<double> u(1e-6, 10.0);
  for (int trial = 0; trial < 100; ++trial) {
    const Index n = 2 + trial % 40;
    const auto g = make_uniform_grid(n, 0.0, 1.0);
    Vector w(n);
    for (Index i = 0; i < n; ++i) w(i) = u(gen);
    const auto r = make_reference(g, w);
    CHECK(std::abs(r.weights().sum() - 1.0) <= 1e-12);
    CHECK(r.weights().minCoeff() > 0.0);
  }
}
