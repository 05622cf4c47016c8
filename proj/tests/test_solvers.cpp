#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "helpers.hpp"
#include "incsolve/instances.hpp"
#include "incsolve/solvers.hpp"

using namespace incsolve;
using test_helpers::abs_problem;

namespace {

std::vector<int> iota_order(int m) {
  std::vector<int> o(static_cast<std::size_t>(m));
  for (int i = 0; i < m; ++i) o[static_cast<std::size_t>(i)] = i;
  return o;
}

}  // namespace

TEST_CASE("igd epoch on |x|: single step, two steps, kink") {
  const auto one = abs_problem({0.0});
  REQUIRE(igd_epoch(one, Vector::Constant(1, 1.0), 0.5, iota_order(1))[0] == 0.5);

  const auto two = abs_problem({0.0, 0.0});
  REQUIRE(igd_epoch(two, Vector::Constant(1, 1.0), 0.4, iota_order(2))[0] ==
          Catch::Approx(0.2));

  REQUIRE(igd_epoch(two, Vector::Zero(1), 0.5, iota_order(2))[0] == 0.0);
}

TEST_CASE("gd step: averaged subgradient and cancellation") {
  const auto p = abs_problem({0.0, 0.0, 0.0});
  REQUIRE(gd_step(p, Vector::Constant(1, 1.0), 0.5)[0] == 0.5);
  REQUIRE(gd_step(p, Vector::Zero(1), 0.5)[0] == 0.0);

  const auto mixed = abs_problem({0.0, 2.0});
  // at x = 1 the two subgradients are +1 and -1 and cancel
  REQUIRE(gd_step(mixed, Vector::Constant(1, 1.0), 0.5)[0] == 1.0);
}

TEST_CASE("ipl epoch: fixed point at a model minimizer") {
  const auto p = abs_problem({0.0});
  const Vector x = ipl_epoch(p, Vector::Zero(1), 0.7, iota_order(1));
  REQUIRE(x[0] == 0.0);
}

TEST_CASE("ipl two-step trajectory equals composed closed-form steps") {
  // f(x) = |x^2 - 1| starting at 2 with mu = 0.3
  const auto inst = test_helpers::manual_rpr(Vector::Ones(1), 1.0);
  const auto p = inst.problem();
  const double mu = 0.3;

  Vector x = Vector::Constant(1, 2.0);
  for (int step = 0; step < 2; ++step) x = ipl_epoch(p, x, mu, iota_order(1));

  Vector manual = Vector::Constant(1, 2.0);
  for (int step = 0; step < 2; ++step) {
    const auto model = p.local_model(0, manual);
    manual = prox_scalar_affine(model.a, model.b, manual, mu);
  }
  REQUIRE(x[0] == manual[0]);
  REQUIRE(x[0] == Catch::Approx(1.025));  // 2 -> 1.25 -> 1.025 by hand
}

TEST_CASE("ipl inner steps satisfy the rewritten-update fixed point relation") {
  const auto inst = generate_rpr(6, 25, 0.3, 19);
  const auto p = inst.problem();
  const double mu = 0.01;
  Vector x = gaussian_point(6, 5);
  for (int i = 0; i < p.component_count(); ++i) {
    const auto model = p.local_model(i, x);
    const Vector xn = prox_scalar_affine(model.a, model.b, x, mu);
    // (x - xn)/mu must be a subgradient of the local model at xn
    const Vector v = (xn - x) / mu;
    REQUIRE(scalar_affine_residual(model.a, model.b, xn, v, kink_tolerance(model, xn)) <= 1e-8);
    x = xn;
  }
}

TEST_CASE("ipl step length obeys the bounded-subgradient bound") {
  const auto inst = generate_rpr(5, 20, 0.3, 23);
  const auto p = inst.problem();
  const double mu = 0.05;
  Vector x = gaussian_point(5, 6);
  double total = 0.0;
  const Vector x_start = x;
  for (int i = 0; i < p.component_count(); ++i) {
    const auto model = p.local_model(i, x);
    const Vector xn = prox_scalar_affine(model.a, model.b, x, mu);
    const double observed = model.a.norm();
    REQUIRE((xn - x).norm() <= mu * observed + 1e-14);
    total += mu * observed;
    x = xn;
  }
  REQUIRE((x - x_start).norm() <= total + 1e-12);
}

TEST_CASE("igd step length equals mu times the realized subgradient norm") {
  const auto inst = generate_rpr(5, 20, 0.3, 29);
  const auto p = inst.problem();
  const double mu = 0.05;
  Vector x = gaussian_point(5, 8);
  for (int i = 0; i < p.component_count(); ++i) {
    const Vector g = p.component_subgradient(i, x);
    const Vector xn = x - mu * g;
    REQUIRE((xn - x).norm() == Catch::Approx(mu * g.norm()).margin(1e-15));
    x = xn;
  }
}

TEST_CASE("ipp inner solve matches the soft-threshold closed form on |x|") {
  const auto p = abs_problem({0.0});
  const Vector a = prox_point_step(p, 0, Vector::Constant(1, 2.0), 0.5, 1e-10);
  REQUIRE(a[0] == Catch::Approx(1.5).margin(1e-9));
  const Vector b = prox_point_step(p, 0, Vector::Constant(1, 0.3), 0.5, 1e-10);
  REQUIRE(b[0] == Catch::Approx(0.0).margin(1e-9));
  // center already the subproblem minimizer
  const Vector c = prox_point_step(p, 0, Vector::Zero(1), 0.5, 1e-10);
  REQUIRE(c[0] == 0.0);
}

TEST_CASE("ipp rejects stepsizes that break subproblem convexity") {
  auto inst = generate_rpr(4, 10, 0.2, 31);
  const auto p = inst.problem();
  const double tau = p.regularity().tau;
  REQUIRE(tau > 0.0);
  REQUIRE_THROWS_AS(
      ipp_epoch(p, Vector::Zero(4), 1.5 / tau, iota_order(p.component_count()), 1e-7),
      std::invalid_argument);
}

TEST_CASE("ipp inner steps certify the fixed-point residual") {
  const auto inst = generate_rpr(6, 30, 0.3, 37);
  const auto p = inst.problem();
  const double mu = 0.5 / p.regularity().tau;
  CounterRng rng(55, 0);
  for (int trial = 0; trial < 50; ++trial) {
    Vector center(6);
    for (int j = 0; j < 6; ++j) center[j] = rng.next_gaussian();
    const int i = static_cast<int>(rng.next_below(30));
    const Vector x = prox_point_step(p, i, center, mu, 1e-8);
    REQUIRE(prox_point_residual(p, i, x, (x - center) / mu) <= 1e-8);
    // subproblem descent relative to the center
    const double at_center = p.component_value(i, center);
    const double at_solution =
        p.component_value(i, x) + (x - center).squaredNorm() / (2.0 * mu);
    REQUIRE(at_solution <= at_center + 1e-12 * (1.0 + std::abs(at_center)));
  }
}

TEST_CASE("divergence guard aborts runaway iterates") {
  const auto inst = generate_rpr(4, 12, 0.0, 41);
  const auto p = inst.problem();
  const auto schedule = StepSchedule::constant(1e5);
  OrderPolicy order;
  RunMetrics metrics;
  metrics.distance = [&](const Vector& x) { return inst.distance(x); };
  const auto trace = run(SolverKind::Igd, p, schedule, order, gaussian_point(4, 3), 50, metrics);
  REQUIRE(trace.status == RunStatus::Diverged);
  REQUIRE(static_cast<int>(trace.records.size()) < 50);
}

TEST_CASE("run with N=1 equals one epoch call") {
  const auto inst = generate_rpr(5, 15, 0.2, 43);
  const auto p = inst.problem();
  const Vector x0 = gaussian_point(5, 11);
  const auto schedule = StepSchedule::constant(0.01);
  OrderPolicy order;
  RunMetrics metrics;
  metrics.distance = [&](const Vector& x) { return inst.distance(x); };
  const auto trace = run(SolverKind::Igd, p, schedule, order, x0, 1, metrics);
  const Vector direct = igd_epoch(p, x0, 0.01, order.epoch_order(0, 15));
  REQUIRE(trace.records.size() == 1);
  REQUIRE(*trace.records[0].dist == inst.distance(direct));
}

TEST_CASE("identical configurations produce bit-identical traces") {
  const auto inst = generate_rms(6, 2, 20, 0.3, 47);
  const auto p = inst.problem();
  const Vector x0 = gaussian_point(12, 13);
  const auto schedule = StepSchedule::geometric(0.02, 0.9);
  OrderPolicy order{OrderPolicy::Kind::ShuffledPerEpoch, 17};
  RunMetrics metrics;
  metrics.distance = [&](const Vector& x) { return inst.distance(x); };
  metrics.full_value = true;
  const auto t1 = run(SolverKind::Igd, p, schedule, order, x0, 30, metrics);
  const auto t2 = run(SolverKind::Igd, p, schedule, order, x0, 30, metrics);
  REQUIRE(t1.records.size() == t2.records.size());
  for (std::size_t i = 0; i < t1.records.size(); ++i) {
    REQUIRE(*t1.records[i].dist == *t2.records[i].dist);
    REQUIRE(*t1.records[i].fval == *t2.records[i].fval);
    REQUIRE(t1.records[i].step_size == t2.records[i].step_size);
  }
}

TEST_CASE("stochastic kinds demand the IID order policy") {
  const auto inst = generate_rpr(4, 10, 0.2, 51);
  const auto p = inst.problem();
  OrderPolicy cyclic;
  RunMetrics metrics;
  REQUIRE_THROWS_AS(run(SolverKind::Sgd, p, StepSchedule::constant(0.01), cyclic,
                        gaussian_point(4, 1), 3, metrics),
                    std::invalid_argument);
  OrderPolicy iid{OrderPolicy::Kind::IID, 5};
  REQUIRE_NOTHROW(run(SolverKind::Sgd, p, StepSchedule::constant(0.01), iid,
                      gaussian_point(4, 1), 3, metrics));
}

TEST_CASE("stepsizes recorded in the trace match the schedule exactly") {
  const auto inst = generate_rpr(4, 10, 0.2, 53);
  const auto p = inst.problem();
  const auto schedule = StepSchedule::geometric(0.05, 0.8);
  OrderPolicy order;
  RunMetrics metrics;
  const auto trace = run(SolverKind::Ipl, p, schedule, order, gaussian_point(4, 2), 20, metrics);
  for (const auto& rec : trace.records) REQUIRE(rec.step_size == schedule.step(rec.epoch - 1));
}

TEST_CASE("small-stepsize epochs move at most m mu L") {
  const auto inst = generate_rpr(5, 20, 0.3, 59);
  const auto p = inst.problem();
  const Vector x0 = gaussian_point(5, 21);
  const double L = estimate_lipschitz(p, x0, 1.0, 30, 9);
  const double mu = 1e-6;
  const Vector x1 = ipl_epoch(p, x0, mu, iota_order(20));
  REQUIRE((x1 - x0).norm() <= 20 * mu * L);
}
