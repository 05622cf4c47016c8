#pragma once

#include <vector>

#include "incsolve/instances.hpp"
#include "incsolve/problem.hpp"

namespace test_helpers {

using incsolve::Component;
using incsolve::FiniteSumProblem;
using incsolve::Matrix;
using incsolve::RegularityParams;
using incsolve::Vector;

// Scalar finite sum with components f_i(x) = |x - shift_i|.
inline FiniteSumProblem abs_problem(const std::vector<double>& shifts, double tau = 0.0) {
  std::vector<Component> comps;
  for (const double shift : shifts) {
    comps.push_back(incsolve::make_abs_component(
        [shift](const Vector& x) { return x[0] - shift; },
        [](const Vector&) { return Vector::Ones(1); }));
  }
  RegularityParams reg;
  reg.tau = tau;
  return FiniteSumProblem(1, std::move(comps), reg);
}

// Single-component phase-retrieval-style problem, f(x) = |<a,x>^2 - b|.
inline incsolve::RprInstance manual_rpr(const Vector& a, double b) {
  incsolve::RprInstance inst;
  inst.n = static_cast<int>(a.size());
  inst.m = 1;
  inst.measurement_matrix = a.transpose();
  inst.measurements = Vector::Constant(1, b);
  inst.signal = Vector::Zero(inst.n);
  inst.outliers = Vector::Zero(1);
  return inst;
}

// Single-component matrix-sensing-style problem, f(U) = |y - <A, U U^T>|.
inline incsolve::RmsInstance manual_rms(const Matrix& a, double y, int r) {
  incsolve::RmsInstance inst;
  inst.n = static_cast<int>(a.rows());
  inst.r = r;
  inst.m = 1;
  inst.sensing = {a};
  inst.measurements = Vector::Constant(1, y);
  inst.ground_truth = Matrix::Zero(inst.n, r);
  inst.outliers = Vector::Zero(1);
  return inst;
}

}  // namespace test_helpers
