#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "incsolve/order.hpp"
#include "incsolve/problem.hpp"
#include "incsolve/prox.hpp"
#include "incsolve/schedule.hpp"

namespace incsolve {

enum class SolverKind { Igd, Ipp, Ipl, Gd, Sgd, Spl };

inline const char* to_string(SolverKind k) {
  switch (k) {
    case SolverKind::Igd: return "igd";
    case SolverKind::Ipp: return "ipp";
    case SolverKind::Ipl: return "ipl";
    case SolverKind::Gd: return "gd";
    case SolverKind::Sgd: return "sgd";
    case SolverKind::Spl: return "spl";
  }
  return "?";
}

// Raised when an iterate leaves the divergence guard region.
struct DivergedError : std::runtime_error {
  explicit DivergedError(double norm)
      : std::runtime_error("iterate norm " + std::to_string(norm) + " exceeded divergence guard") {}
};

namespace detail {
inline void guard_divergence(const Vector& x, double limit) {
  const double n2 = x.squaredNorm();
  if (!(n2 <= limit * limit)) throw DivergedError(std::sqrt(n2));
}
}  // namespace detail

inline constexpr double kDivergenceLimit = 1e8;

// One incremental (sub)gradient epoch: x <- x - mu * g_i for each index in
// the given order.
inline Vector igd_epoch(const FiniteSumProblem& problem, Vector x, double mu,
                        std::span<const int> order, double divergence_limit = kDivergenceLimit) {
  if (!(mu > 0.0)) throw std::invalid_argument("igd_epoch: stepsize must be positive");
  for (const int i : order) {
    x -= mu * problem.component_subgradient(i, x);
    detail::guard_divergence(x, divergence_limit);
  }
  return x;
}

// One incremental prox-linear epoch: each inner step minimizes the convex
// local model plus (1/(2 mu)) ||x - x_prev||^2 in closed form.
inline Vector ipl_epoch(const FiniteSumProblem& problem, Vector x, double mu,
                        std::span<const int> order, double divergence_limit = kDivergenceLimit) {
  if (!(mu > 0.0)) throw std::invalid_argument("ipl_epoch: stepsize must be positive");
  for (const int i : order) {
    const ScalarAffineModel model = problem.local_model(i, x);
    x = prox_scalar_affine(model.a, model.b, x, mu);
    detail::guard_divergence(x, divergence_limit);
  }
  return x;
}

// Kink-detection width for subgradient sign intervals: |c| below this is
// treated as sitting on the kink of |.|.
inline double kink_tolerance(const ScalarAffineModel& model, const Vector& x) {
  return 1e-10 * (1.0 + model.a.norm() * x.norm() + std::abs(model.b));
}

// Norm of the minimal-norm element of d f_i(x) + v for a composite
// component, using the sign interval [-1, 1] at kinks.
inline double prox_point_residual(const FiniteSumProblem& problem, int i, const Vector& x,
                                  const Vector& v) {
  const ScalarAffineModel model = problem.local_model(i, x);
  return scalar_affine_residual(model.a, model.b, x, v, kink_tolerance(model, x));
}

// Solves the proximal-point subproblem
//   min_x f_i(x) + (1/(2 mu)) ||x - center||^2
// by iterated prox-linear steps: relinearize f_i at the current point and
// take the closed-form prox of the scalar-affine model with the center
// quadratic. Each pass decreases the subproblem objective by at least
// (1/(2 mu) - tau/2) ||step||^2, so for mu < 1/tau the iteration converges
// to the unique minimizer; termination is certified by the fixed-point
// residual dist(0, d f_i(x) + (x - center)/mu) <= inner_tol.
inline Vector prox_point_step(const FiniteSumProblem& problem, int i, const Vector& center,
                              double mu, double inner_tol, int max_iterations = 200) {
  if (!(mu > 0.0)) throw std::invalid_argument("prox_point_step: mu must be positive");
  if (!(inner_tol > 0.0)) throw std::invalid_argument("prox_point_step: inner_tol must be positive");
  Vector x = center;
  for (int it = 0; it < max_iterations; ++it) {
    const ScalarAffineModel model = problem.local_model(i, x);
    x = prox_scalar_affine(model.a, model.b, center, mu);
    const Vector v = (x - center) / mu;
    if (prox_point_residual(problem, i, x, v) <= inner_tol) return x;
  }
  throw std::runtime_error("prox_point_step: inner solver hit the iteration cap");
}

// One incremental proximal-point epoch. Requires mu < 1/tau so every
// subproblem is strongly convex (tau from the problem's regularity data).
inline Vector ipp_epoch(const FiniteSumProblem& problem, Vector x, double mu,
                        std::span<const int> order, double inner_tol,
                        double divergence_limit = kDivergenceLimit) {
  if (!(mu > 0.0)) throw std::invalid_argument("ipp_epoch: stepsize must be positive");
  const double tau = problem.regularity().tau;
  if (tau > 0.0 && !(mu < 1.0 / tau))
    throw std::invalid_argument("ipp_epoch: requires mu < 1/tau");
  for (const int i : order) {
    x = prox_point_step(problem, i, x, mu, inner_tol);
    detail::guard_divergence(x, divergence_limit);
  }
  return x;
}

// One full (sub)gradient descent step x <- x - mu * (1/m) sum_i g_i.
inline Vector gd_step(const FiniteSumProblem& problem, Vector x, double mu,
                      double divergence_limit = kDivergenceLimit) {
  if (!(mu > 0.0)) throw std::invalid_argument("gd_step: stepsize must be positive");
  x -= mu * problem.full_subgradient(x);
  detail::guard_divergence(x, divergence_limit);
  return x;
}

// ---------------------------------------------------------------------------
// Run driver
// ---------------------------------------------------------------------------

enum class RunStatus { Converged, Stalled, Diverged };

inline const char* to_string(RunStatus s) {
  switch (s) {
    case RunStatus::Converged: return "converged";
    case RunStatus::Stalled: return "stalled";
    case RunStatus::Diverged: return "diverged";
  }
  return "?";
}

struct TraceRecord {
  int epoch = 0;        // 1-based: record e describes the state after epoch e
  double step_size = 0.0;
  std::optional<double> dist;
  std::optional<double> fval;
  std::optional<double> moreau_grad_norm;
};

struct RunTrace {
  std::vector<TraceRecord> records;
  RunStatus status = RunStatus::Stalled;
  int epochs_requested = 0;
  double initial_distance = std::numeric_limits<double>::quiet_NaN();
  std::string config_snapshot;  // optional provenance blob attached by callers
};

// Metric evaluation hooks for run(). Distance is problem-family specific and
// is supplied by the caller; full-value and Moreau logging are opt-in since
// both cost a full pass over the components per epoch (and a prox solve for
// Moreau).
struct RunMetrics {
  std::function<double(const Vector&)> distance;
  bool full_value = false;
  std::function<double(const Vector&)> moreau_grad_norm;
};

struct RunOptions {
  double success_threshold = 1e-8;
  int success_window = 5;
  double ipp_inner_tol = 1e-7;
  double divergence_limit = kDivergenceLimit;
};

// Runs `epochs` outer iterations of the chosen solver with mu_k from the
// schedule (frozen within an epoch) and records requested metrics after each
// epoch. Stochastic kinds (SGD/SPL) are IGD/IPL restricted to the IID order
// policy, which keeps the epoch-fair iteration accounting: one epoch is m
// inner updates for every solver except GD, whose epoch is a single full
// step.
inline RunTrace run(SolverKind kind, const FiniteSumProblem& problem, const StepSchedule& schedule,
                    const OrderPolicy& order, const Vector& x0, int epochs,
                    const RunMetrics& metrics, const RunOptions& options = {}) {
  if (epochs < 1) throw std::invalid_argument("run: epochs must be >= 1");
  if (x0.size() != problem.dimension()) throw std::invalid_argument("run: x0 dimension mismatch");
  if (!x0.allFinite()) throw std::invalid_argument("run: x0 must be finite");
  if ((kind == SolverKind::Sgd || kind == SolverKind::Spl) &&
      order.kind != OrderPolicy::Kind::IID)
    throw std::invalid_argument("run: stochastic solvers require the IID order policy");

  RunTrace trace;
  trace.epochs_requested = epochs;
  if (metrics.distance) trace.initial_distance = metrics.distance(x0);

  const int m = problem.component_count();
  Vector x = x0;
  for (int k = 0; k < epochs; ++k) {
    const double mu = schedule.step(k);
    bool diverged = false;
    try {
      switch (kind) {
        case SolverKind::Igd:
        case SolverKind::Sgd:
          x = igd_epoch(problem, std::move(x), mu, order.epoch_order(k, m),
                        options.divergence_limit);
          break;
        case SolverKind::Ipl:
        case SolverKind::Spl:
          x = ipl_epoch(problem, std::move(x), mu, order.epoch_order(k, m),
                        options.divergence_limit);
          break;
        case SolverKind::Ipp:
          x = ipp_epoch(problem, std::move(x), mu, order.epoch_order(k, m),
                        options.ipp_inner_tol, options.divergence_limit);
          break;
        case SolverKind::Gd:
          x = gd_step(problem, std::move(x), mu, options.divergence_limit);
          break;
      }
    } catch (const DivergedError&) {
      diverged = true;
    }
    if (diverged) {
      trace.status = RunStatus::Diverged;
      return trace;
    }
    TraceRecord rec;
    rec.epoch = k + 1;
    rec.step_size = mu;
    if (metrics.distance) rec.dist = metrics.distance(x);
    if (metrics.full_value) rec.fval = problem.full_value(x);
    if (metrics.moreau_grad_norm) rec.moreau_grad_norm = metrics.moreau_grad_norm(x);
    trace.records.push_back(std::move(rec));
  }

  trace.status = RunStatus::Stalled;
  const int w = options.success_window;
  if (metrics.distance && static_cast<int>(trace.records.size()) >= w) {
    double acc = 0.0;
    for (int j = 0; j < w; ++j)
      acc += *trace.records[trace.records.size() - 1 - static_cast<std::size_t>(j)].dist;
    if (acc / w <= options.success_threshold) trace.status = RunStatus::Converged;
  }
  return trace;
}

}  // namespace incsolve
