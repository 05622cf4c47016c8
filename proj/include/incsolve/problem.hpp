#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <functional>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "incsolve/rng.hpp"

namespace incsolve {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// Convex local model x -> |<a, x> + b| of one component around a base point.
struct ScalarAffineModel {
  Vector a;
  double b = 0.0;

  double value(const Vector& x) const { return std::abs(a.dot(x) + b); }
};

// Regularity metadata attached to a finite-sum problem.
//   tau:       weak-convexity modulus (>= 0)
//   lipschitz: subgradient-norm bound valid on a ball of radius
//              region_radius around the region center used to estimate it
//   sharpness: lower growth slope away from the solution set, if known
struct RegularityParams {
  double tau = 0.0;
  double lipschitz = 0.0;  // 0 means "not estimated"
  std::optional<double> sharpness;
  double region_radius = 0.0;
};

// One component f_i of the finite sum. All oracles are pure functions of
// (captured instance data, x); nothing is cached between calls.
struct Component {
  std::function<double(const Vector&)> value;
  std::function<Vector(const Vector&)> subgradient;
  // Null when the component has no composite structure.
  std::function<ScalarAffineModel(const Vector&)> local_model;
};

// Sign with the minimal-norm tie-break: 0 when the residual is exactly 0,
// so iterates sitting on an exact solution stay put.
inline double sign0(double t) { return t > 0.0 ? 1.0 : (t < 0.0 ? -1.0 : 0.0); }

// Builds f(x) = |c(x)| from the inner map and its gradient. The local model
// at y is |<grad_c(y), x> + c(y) - <grad_c(y), y>|, which interpolates f
// at y exactly.
inline Component make_abs_component(std::function<double(const Vector&)> inner,
                                    std::function<Vector(const Vector&)> inner_grad) {
  Component comp;
  comp.value = [inner](const Vector& x) { return std::abs(inner(x)); };
  comp.subgradient = [inner, inner_grad](const Vector& x) -> Vector {
    const double c = inner(x);
    const double s = sign0(c);
    if (s == 0.0) return Vector::Zero(x.size());
    return s * inner_grad(x);
  };
  comp.local_model = [inner, inner_grad](const Vector& base) {
    ScalarAffineModel m;
    m.a = inner_grad(base);
    m.b = inner(base) - m.a.dot(base);
    return m;
  };
  return comp;
}

// Oracle bundle for f(x) = (1/m) sum_i f_i(x). Per-component oracles return
// unaveraged f_i values; the 1/m factor applies to full-function evaluation
// only. Indices are 0-based.
class FiniteSumProblem {
 public:
  FiniteSumProblem(int dimension, std::vector<Component> components,
                   RegularityParams regularity = {})
      : dimension_(dimension),
        components_(std::move(components)),
        regularity_(regularity) {
    if (dimension_ < 1) throw std::invalid_argument("problem dimension must be positive");
    if (components_.empty()) throw std::invalid_argument("need at least one component");
  }

  int dimension() const { return dimension_; }
  int component_count() const { return static_cast<int>(components_.size()); }

  const RegularityParams& regularity() const { return regularity_; }
  void set_regularity(const RegularityParams& r) { regularity_ = r; }

  double component_value(int i, const Vector& x) const {
    check_access(i, x);
    return components_[static_cast<std::size_t>(i)].value(x);
  }

  Vector component_subgradient(int i, const Vector& x) const {
    check_access(i, x);
    return components_[static_cast<std::size_t>(i)].subgradient(x);
  }

  bool has_composite_structure(int i) const {
    check_index(i);
    return static_cast<bool>(components_[static_cast<std::size_t>(i)].local_model);
  }

  ScalarAffineModel local_model(int i, const Vector& base) const {
    check_access(i, base);
    const auto& c = components_[static_cast<std::size_t>(i)];
    if (!c.local_model)
      throw std::invalid_argument("component has no composite local model");
    return c.local_model(base);
  }

  // f(x) = (1/m) sum_i f_i(x).
  double full_value(const Vector& x) const {
    check_dim(x);
    double s = 0.0;
    for (const auto& c : components_) s += c.value(x);
    return s / static_cast<double>(components_.size());
  }

  // (1/m) sum_i g_i with g_i the per-component subgradient choice.
  Vector full_subgradient(const Vector& x) const {
    check_dim(x);
    Vector g = Vector::Zero(dimension_);
    for (const auto& c : components_) g += c.subgradient(x);
    return g / static_cast<double>(components_.size());
  }

 private:
  void check_index(int i) const {
    if (i < 0 || i >= component_count())
      throw std::out_of_range("component index out of range");
  }
  void check_dim(const Vector& x) const {
    if (x.size() != dimension_)
      throw std::invalid_argument("point dimension mismatch");
  }
  void check_access(int i, const Vector& x) const {
    check_index(i);
    check_dim(x);
  }

  int dimension_;
  std::vector<Component> components_;
  RegularityParams regularity_;
};

// Samples max subgradient norm over the ball of given radius around the
// center, over all components, inflated by a 1.2 safety factor. Assumption
// (A1) only asserts that such a bound exists; this makes it reproducible.
inline double estimate_lipschitz(const FiniteSumProblem& problem, const Vector& region_center,
                                 double region_radius, int samples, std::uint64_t seed) {
  if (!(region_radius > 0.0))
    throw std::invalid_argument("estimate_lipschitz: region radius must be positive");
  if (samples < 1) throw std::invalid_argument("estimate_lipschitz: samples must be >= 1");
  if (region_center.size() != problem.dimension())
    throw std::invalid_argument("estimate_lipschitz: center dimension mismatch");

  CounterRng rng(seed, 0);
  const int n = problem.dimension();
  double max_norm = 0.0;
  for (int s = 0; s < samples; ++s) {
    Vector dir(n);
    for (int j = 0; j < n; ++j) dir[j] = rng.next_gaussian();
    const double dn = dir.norm();
    // radius scaled by u^(1/n) gives uniform sampling of the ball
    const double radius = region_radius * std::pow(rng.next_uniform_open(), 1.0 / n);
    Vector x = region_center;
    if (dn > 0.0) x += (radius / dn) * dir;
    for (int i = 0; i < problem.component_count(); ++i)
      max_norm = std::max(max_norm, problem.component_subgradient(i, x).norm());
  }
  const double inflated = 1.2 * max_norm;
  if (!(inflated > 0.0))
    throw std::runtime_error("estimate_lipschitz: sampled subgradients are all zero");
  return inflated;
}

}  // namespace incsolve
