#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "incsolve/prox.hpp"
#include "incsolve/rng.hpp"

using namespace incsolve;

namespace {

// Independent oracle: dense grid over the step coefficient s (the minimizer
// lies on center - s a), evaluating the full subproblem objective at each
// candidate, then golden-section refinement of the bracketing interval.
Vector prox_oracle(const Vector& a, double b, const Vector& center, double mu) {
  const auto objective = [&](double s) {
    const Vector x = center - s * a;
    return std::abs(a.dot(x) + b) + (x - center).squaredNorm() / (2.0 * mu);
  };
  const double span = 1.5 * mu;
  const int grid = 3000;
  double best_s = 0.0, best_v = objective(0.0);
  for (int i = 0; i <= grid; ++i) {
    const double s = -span + 2.0 * span * i / grid;
    const double v = objective(s);
    if (v < best_v) {
      best_v = v;
      best_s = s;
    }
  }
  double lo = best_s - 2.0 * span / grid;
  double hi = best_s + 2.0 * span / grid;
  const double golden = 0.6180339887498949;
  double s1 = hi - golden * (hi - lo), s2 = lo + golden * (hi - lo);
  double f1 = objective(s1), f2 = objective(s2);
  for (int it = 0; it < 120; ++it) {
    if (f1 < f2) {
      hi = s2;
      s2 = s1;
      f2 = f1;
      s1 = hi - golden * (hi - lo);
      f1 = objective(s1);
    } else {
      lo = s1;
      s1 = s2;
      f1 = f2;
      s2 = lo + golden * (hi - lo);
      f2 = objective(s2);
    }
  }
  return center - 0.5 * (lo + hi) * a;
}

}  // namespace

TEST_CASE("closed-form prox: clipped, interior and degenerate cases") {
  Vector a(2), center(2);
  a << 1.0, 0.0;

  center << 2.0, 0.0;
  Vector x = prox_scalar_affine(a, 0.0, center, 1.0);
  REQUIRE(x[0] == Catch::Approx(1.0));
  REQUIRE(x[1] == 0.0);

  center << 0.3, 0.0;
  x = prox_scalar_affine(a, 0.0, center, 1.0);
  REQUIRE(x[0] == Catch::Approx(0.0).margin(1e-15));

  x = prox_scalar_affine(Vector::Zero(2), 5.0, center, 1.0);
  REQUIRE((x - center).norm() == 0.0);

  REQUIRE_THROWS_AS(prox_scalar_affine(a, 0.0, center, 0.0), std::invalid_argument);
  REQUIRE_THROWS_AS(prox_scalar_affine(a, 0.0, Vector::Zero(3), 1.0), std::invalid_argument);
}

TEST_CASE("closed-form prox agrees with the grid + golden-section oracle") {
  CounterRng rng(2024, 0);
  for (int trial = 0; trial < 1000; ++trial) {
    const int n = 1 + static_cast<int>(rng.next_below(8));
    Vector a(n), center(n);
    for (int j = 0; j < n; ++j) {
      a[j] = rng.next_gaussian();
      center[j] = rng.next_gaussian();
    }
    if (trial % 97 == 0) a.setZero();
    const double b = rng.next_gaussian();
    const double mu = std::exp(rng.next_uniform() * std::log(1e3) - std::log(10.0)) * 0.1;
    const Vector closed = prox_scalar_affine(a, b, center, mu);
    const Vector grid = prox_oracle(a, b, center, mu);
    REQUIRE((closed - grid).norm() <= 1e-8 * (1.0 + center.norm()));
  }
}

TEST_CASE("scalar affine residual uses the sign interval at kinks") {
  Vector a(1), x(1), v(1);
  a << 2.0;
  x << 1.0;
  v << -1.0;
  // t = 2 != 0: residual ||sign(t) a + v|| = |2 - 1| = 1
  REQUIRE(scalar_affine_residual(a, -2.0 + 2.0, x, v) == Catch::Approx(1.0));
  // t = 0: best s = clamp(2/4) = 1/2, residual 0
  REQUIRE(scalar_affine_residual(a, -2.0, x, v) == Catch::Approx(0.0).margin(1e-15));
}
