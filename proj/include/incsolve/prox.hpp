#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "incsolve/problem.hpp"

namespace incsolve {

// Exact minimizer of |<a, x> + b| + (1/(2 mu)) ||x - center||^2.
//
// The minimizer lies on the line x = center - s * a; optimizing the scalar
// objective |t0 - s q| + (q / (2 mu)) s^2 with t0 = <a, center> + b and
// q = ||a||^2 gives s = clip(t0 / q, -mu, mu). With mu = 1 this is the
// projection-onto-[-1,1] form of the prox-linear update.
inline Vector prox_scalar_affine(const Vector& a, double b, const Vector& center, double mu) {
  if (!(mu > 0.0)) throw std::invalid_argument("prox_scalar_affine: mu must be positive");
  if (a.size() != center.size())
    throw std::invalid_argument("prox_scalar_affine: dimension mismatch");
  const double q = a.squaredNorm();
  if (q == 0.0) return center;  // objective constant in x up to the quadratic
  const double t0 = a.dot(center) + b;
  const double s = std::clamp(t0 / q, -mu, mu);
  return center - s * a;
}

// Norm of the minimal-norm element of s * a + v over the subgradient signs
// s of |<a, .> + b| at x. Components whose affine value lies within
// kink_tol of zero contribute the full interval [-1, 1].
inline double scalar_affine_residual(const Vector& a, double b, const Vector& x, const Vector& v,
                                     double kink_tol = 0.0) {
  const double t = a.dot(x) + b;
  if (std::abs(t) > kink_tol) return (sign0(t) * a + v).norm();
  const double q = a.squaredNorm();
  if (q == 0.0) return v.norm();
  const double s = std::clamp(-a.dot(v) / q, -1.0, 1.0);
  return (s * a + v).norm();
}

}  // namespace incsolve
