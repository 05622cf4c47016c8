#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <set>

#include "incsolve/order.hpp"
#include "incsolve/rng.hpp"
#include "incsolve/schedule.hpp"

using namespace incsolve;

TEST_CASE("constant schedule reproduces 1/(m sqrt(N+1))") {
  REQUIRE(constant_schedule(10, 99).step(0) == 0.01);
  REQUIRE(constant_schedule(1, 0).step(5) == 1.0);
  REQUIRE(constant_schedule(5, 24).step(3) == 0.04);
  REQUIRE_THROWS_AS(constant_schedule(0, 10), std::invalid_argument);
  REQUIRE_THROWS_AS(constant_schedule(3, -1), std::invalid_argument);
}

TEST_CASE("geometric schedule defaults hit the closed forms") {
  const auto s = geometric_schedule(1.0, 1.0, 1.0, 1);
  REQUIRE(s.mu0 == 0.2);
  REQUIRE(s.rho == std::sqrt(1.0 - 1.0 / 5.0));
  REQUIRE(s.step(0) == s.mu0);
  REQUIRE(s.step(2) == Catch::Approx(s.mu0 * s.rho * s.rho));

  const auto supplied = geometric_schedule(1.0, 1.0, 1.0, 1, 0.2);
  REQUIRE(supplied.rho == Catch::Approx(std::sqrt(0.8)).epsilon(1e-15));

  // general formula at an interior mu0
  const auto interior = geometric_schedule(1.0, 1.0, 1.0, 1, 0.1);
  REQUIRE(interior.rho == Catch::Approx(std::sqrt(1.0 - 0.2 + 0.05)).epsilon(1e-15));
}

TEST_CASE("geometric schedule rejects invalid parameters") {
  REQUIRE_THROWS_AS(geometric_schedule(2.0, 1.0, 1.0, 1), std::invalid_argument);  // L < alpha
  REQUIRE_THROWS_AS(geometric_schedule(1.0, 1.0, 1.0, 1, 0.5), std::invalid_argument);
  REQUIRE_THROWS_AS(geometric_schedule(1.0, 1.0, 1.0, 1, -0.1), std::invalid_argument);
  REQUIRE_THROWS_AS(geometric_schedule(1.0, 1.0, 1.0, 1, 0.2, 0.5), std::invalid_argument);
  REQUIRE_THROWS_AS(geometric_schedule(1.0, 1.0, 1.0, 1, 0.2, 1.0), std::invalid_argument);
  REQUIRE_THROWS_AS(geometric_schedule(1.0, 0.0, 1.0, 1), std::invalid_argument);
}

TEST_CASE("rho_bar lies in (0,1) whenever L >= alpha") {
  CounterRng rng(17, 0);
  for (int trial = 0; trial < 1000; ++trial) {
    const double alpha = std::exp(2.0 * rng.next_gaussian());
    const double L = alpha * (1.0 + 3.0 * rng.next_uniform());
    const double tau = std::exp(2.0 * rng.next_gaussian());
    const int m = 1 + static_cast<int>(rng.next_below(2000));
    const auto s = geometric_schedule(alpha, tau, L, m);
    REQUIRE(s.rho > 0.0);
    REQUIRE(s.rho < 1.0);
    // supplied mu0 strictly inside the admissible interval
    const double mu0 = rng.next_uniform_open() * alpha * alpha / (5.0 * m * tau * L * L);
    const auto s2 = geometric_schedule(alpha, tau, L, m, mu0);
    REQUIRE(s2.rho > 0.0);
    REQUIRE(s2.rho < 1.0);
  }
}

TEST_CASE("cyclic order touches every index once, in order") {
  OrderPolicy p;
  const auto order = p.epoch_order(4, 6);
  for (int i = 0; i < 6; ++i) REQUIRE(order[static_cast<std::size_t>(i)] == i);
}

TEST_CASE("shuffled order is a permutation that changes across epochs") {
  OrderPolicy p{OrderPolicy::Kind::ShuffledPerEpoch, 5};
  const auto e0 = p.epoch_order(0, 40);
  const auto e1 = p.epoch_order(1, 40);
  REQUIRE(std::set<int>(e0.begin(), e0.end()).size() == 40);
  REQUIRE(std::set<int>(e1.begin(), e1.end()).size() == 40);
  REQUIRE(e0 != e1);
  REQUIRE(p.epoch_order(0, 40) == e0);  // reproducible
}

TEST_CASE("iid order indices look uniform (chi-square at desk scale)") {
  OrderPolicy p{OrderPolicy::Kind::IID, 12};
  const int m = 10;
  const int epochs = 1000;
  std::vector<int> counts(static_cast<std::size_t>(m), 0);
  for (int e = 0; e < epochs; ++e)
    for (const int i : p.epoch_order(e, m)) ++counts[static_cast<std::size_t>(i)];
  const double expected = static_cast<double>(epochs * m) / m;
  double chi2 = 0.0;
  for (const int c : counts) chi2 += (c - expected) * (c - expected) / expected;
  // df = 9; 27.88 is the 0.1% critical value
  REQUIRE(chi2 < 27.88);
}
