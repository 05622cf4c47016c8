#pragma once

#include <Eigen/Dense>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <memory>
#include <stdexcept>
#include <vector>

#include "incsolve/problem.hpp"
#include "incsolve/rng.hpp"

namespace incsolve {

inline Vector flatten(const Matrix& m) {
  return Eigen::Map<const Vector>(m.data(), m.size());
}

inline Matrix unflatten(const Vector& v, int rows, int cols) {
  if (v.size() != static_cast<Eigen::Index>(rows) * cols)
    throw std::invalid_argument("unflatten: size mismatch");
  return Eigen::Map<const Matrix>(v.data(), rows, cols);
}

// <X, Y>_F accumulated column by column. Generators and oracles share this
// so stored measurements can be reproduced bit-exactly from ground truth.
inline double frob_inner(const Matrix& x, const Matrix& y) {
  double acc = 0.0;
  for (Eigen::Index j = 0; j < x.cols(); ++j) acc += x.col(j).dot(y.col(j));
  return acc;
}

namespace detail {

inline Matrix gaussian_matrix_rowwise(CounterRng& rng, int rows, int cols) {
  Matrix m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) m(i, j) = rng.next_gaussian();
  return m;
}

// round(p * count) distinct locations, then mean-0 variance-10 Gaussian
// values on them.
inline Vector sparse_outliers(int count, double p, CounterRng support_rng, CounterRng value_rng) {
  const auto k = static_cast<int>(std::llround(p * count));
  std::vector<int> idx(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) idx[static_cast<std::size_t>(i)] = i;
  for (int i = count - 1; i > 0; --i) {
    const auto j = static_cast<int>(support_rng.next_below(static_cast<std::uint64_t>(i) + 1));
    std::swap(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(j)]);
  }
  Vector s = Vector::Zero(count);
  const double sd = std::sqrt(10.0);
  for (int t = 0; t < k; ++t) s[idx[static_cast<std::size_t>(t)]] = sd * value_rng.next_gaussian();
  return s;
}

inline void check_ratio(double p) {
  if (!(p >= 0.0 && p < 1.0)) throw std::invalid_argument("outlier ratio must lie in [0,1)");
}

}  // namespace detail

// Distance to the orthogonal orbit {Ustar R : R R^T = I}, computed by
// Procrustes: with M = Ustar^T U = P S Q^T, the closest orbit point has
// <U, Ustar R> = sum of singular values of M.
inline double procrustes_distance(const Matrix& u, const Matrix& ustar) {
  if (u.rows() != ustar.rows() || u.cols() != ustar.cols())
    throw std::invalid_argument("procrustes_distance: dimension mismatch");
  const Matrix m = ustar.transpose() * u;
  Eigen::JacobiSVD<Matrix> svd(m);
  const double cross = svd.singularValues().sum();
  const double d2 = u.squaredNorm() + ustar.squaredNorm() - 2.0 * cross;
  return std::sqrt(std::max(0.0, d2));
}

// ---------------------------------------------------------------------------
// Robust matrix sensing: y_i = <A_i, U* U*^T> + s*_i, components
// f_i(U) = |y_i - <A_i, U U^T>|.
// ---------------------------------------------------------------------------

struct RmsInstance {
  int n = 0, r = 0, m = 0;
  double p = 0.0;
  std::uint64_t seed = 0;

  std::vector<Matrix> sensing;  // A_i, n x n
  Matrix ground_truth;          // U*, n x r
  Vector measurements;          // y
  Vector outliers;              // s*

  double clean_measurement(int i) const {
    Matrix g = sensing[static_cast<std::size_t>(i)] * ground_truth;
    return frob_inner(ground_truth, g);
  }

  Vector ground_truth_point() const { return flatten(ground_truth); }

  double distance(const Vector& u_flat) const {
    return procrustes_distance(unflatten(u_flat, n, r), ground_truth);
  }

  FiniteSumProblem problem() const;
};

inline double estimate_tau(const RmsInstance& inst) {
  double max_spec = 0.0;
  for (const auto& a : inst.sensing) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(a.transpose() * a, Eigen::EigenvaluesOnly);
    max_spec = std::max(max_spec, std::sqrt(std::max(0.0, es.eigenvalues().maxCoeff())));
  }
  return 2.0 * max_spec;
}

inline RmsInstance generate_rms(int n, int r, int m, double p, std::uint64_t seed) {
  if (n < 1 || r < 1 || m < 1 || r > n) throw std::invalid_argument("generate_rms: invalid sizes");
  detail::check_ratio(p);
  RmsInstance inst;
  inst.n = n;
  inst.r = r;
  inst.m = m;
  inst.p = p;
  inst.seed = seed;
  // stream 0: sensing matrices (row-major entry order, matrix by matrix)
  // stream 1: ground truth, stream 2: outlier support, stream 3: outlier values
  CounterRng sensing_rng(seed, 0);
  inst.sensing.reserve(static_cast<std::size_t>(m));
  for (int i = 0; i < m; ++i)
    inst.sensing.push_back(detail::gaussian_matrix_rowwise(sensing_rng, n, n));
  CounterRng gt_rng(seed, 1);
  inst.ground_truth = detail::gaussian_matrix_rowwise(gt_rng, n, r);
  inst.outliers = detail::sparse_outliers(m, p, CounterRng(seed, 2), CounterRng(seed, 3));
  inst.measurements.resize(m);
  for (int i = 0; i < m; ++i) inst.measurements[i] = inst.clean_measurement(i) + inst.outliers[i];
  return inst;
}

inline FiniteSumProblem RmsInstance::problem() const {
  auto data = std::make_shared<const RmsInstance>(*this);
  std::vector<Component> comps;
  comps.reserve(static_cast<std::size_t>(m));
  const int nn = n, rr = r;
  for (int i = 0; i < m; ++i) {
    Component c;
    c.value = [data, i, nn, rr](const Vector& x) {
      const Matrix u = unflatten(x, nn, rr);
      Matrix g = data->sensing[static_cast<std::size_t>(i)] * u;
      return std::abs(frob_inner(u, g) - data->measurements[i]);
    };
    c.subgradient = [data, i, nn, rr](const Vector& x) -> Vector {
      const Matrix u = unflatten(x, nn, rr);
      const Matrix& a = data->sensing[static_cast<std::size_t>(i)];
      Matrix g = a * u;
      const double s = sign0(frob_inner(u, g) - data->measurements[i]);
      if (s == 0.0) return Vector::Zero(x.size());
      g += a.transpose() * u;  // (A + A^T) U
      g *= s;
      return flatten(g);
    };
    c.local_model = [data, i, nn, rr](const Vector& x) {
      const Matrix u = unflatten(x, nn, rr);
      const Matrix& a = data->sensing[static_cast<std::size_t>(i)];
      Matrix g = a * u;
      const double cval = frob_inner(u, g) - data->measurements[i];
      g += a.transpose() * u;
      ScalarAffineModel model;
      model.a = flatten(g);
      model.b = cval - model.a.dot(x);
      return model;
    };
    comps.push_back(std::move(c));
  }
  RegularityParams reg;
  reg.tau = estimate_tau(*data);
  return FiniteSumProblem(n * r, std::move(comps), reg);
}

// ---------------------------------------------------------------------------
// Robust phase retrieval: b_i = <a_i, x*>^2 + s*_i, components
// f_i(x) = |<a_i, x>^2 - b_i|.
// ---------------------------------------------------------------------------

struct RprInstance {
  int n = 0, m = 0;
  double p = 0.0;
  std::uint64_t seed = 0;

  Matrix measurement_matrix;  // m x n, rows a_i
  Vector signal;              // x*
  Vector measurements;        // b
  Vector outliers;            // s*

  double clean_measurement(int i) const {
    const double t = measurement_matrix.row(i).dot(signal);
    return t * t;
  }

  Vector ground_truth_point() const { return signal; }

  double distance(const Vector& x) const {
    if (x.size() != n) throw std::invalid_argument("dist_rpr: dimension mismatch");
    return std::min((x - signal).norm(), (x + signal).norm());
  }

  FiniteSumProblem problem() const;
};

inline double estimate_tau(const RprInstance& inst) {
  double max_sq = 0.0;
  for (int i = 0; i < inst.m; ++i)
    max_sq = std::max(max_sq, inst.measurement_matrix.row(i).squaredNorm());
  return 2.0 * max_sq;
}

inline RprInstance generate_rpr(int n, int m, double p, std::uint64_t seed) {
  if (n < 1 || m < 1) throw std::invalid_argument("generate_rpr: invalid sizes");
  detail::check_ratio(p);
  RprInstance inst;
  inst.n = n;
  inst.m = m;
  inst.p = p;
  inst.seed = seed;
  // stream 0: measurement rows, stream 1: signal, streams 2/3: outliers
  CounterRng a_rng(seed, 0);
  inst.measurement_matrix = detail::gaussian_matrix_rowwise(a_rng, m, n);
  CounterRng sig_rng(seed, 1);
  inst.signal.resize(n);
  for (int j = 0; j < n; ++j) inst.signal[j] = sig_rng.next_gaussian();
  inst.outliers = detail::sparse_outliers(m, p, CounterRng(seed, 2), CounterRng(seed, 3));
  inst.measurements.resize(m);
  for (int i = 0; i < m; ++i) inst.measurements[i] = inst.clean_measurement(i) + inst.outliers[i];
  return inst;
}

inline FiniteSumProblem RprInstance::problem() const {
  auto data = std::make_shared<const RprInstance>(*this);
  std::vector<Component> comps;
  comps.reserve(static_cast<std::size_t>(m));
  for (int i = 0; i < m; ++i) {
    Component c;
    c.value = [data, i](const Vector& x) {
      const double t = data->measurement_matrix.row(i).dot(x);
      return std::abs(t * t - data->measurements[i]);
    };
    c.subgradient = [data, i](const Vector& x) -> Vector {
      const double t = data->measurement_matrix.row(i).dot(x);
      const double s = sign0(t * t - data->measurements[i]);
      if (s == 0.0) return Vector::Zero(x.size());
      return (s * 2.0 * t) * data->measurement_matrix.row(i).transpose();
    };
    c.local_model = [data, i](const Vector& x) {
      const double t = data->measurement_matrix.row(i).dot(x);
      ScalarAffineModel model;
      model.a = (2.0 * t) * data->measurement_matrix.row(i).transpose();
      model.b = (t * t - data->measurements[i]) - 2.0 * t * t;
      return model;
    };
    comps.push_back(std::move(c));
  }
  RegularityParams reg;
  reg.tau = estimate_tau(*data);
  return FiniteSumProblem(n, std::move(comps), reg);
}

// ---------------------------------------------------------------------------
// Robust blind deconvolution: y_i = <a_i, w*> <c_i, x*> + s*_i over the
// stacked variable z = [w; x], components f_i(z) = |<a_i,w><c_i,x> - y_i|.
// ---------------------------------------------------------------------------

struct BdInstance {
  int n1 = 0, n2 = 0, m = 0;
  double p = 0.0;
  std::uint64_t seed = 0;

  Matrix left_rows;   // m x n1, rows a_i
  Matrix right_rows;  // m x n2, rows c_i
  Vector left_truth;  // w*
  Vector right_truth; // x*
  Vector measurements;
  Vector outliers;

  double clean_measurement(int i) const {
    return left_rows.row(i).dot(left_truth) * right_rows.row(i).dot(right_truth);
  }

  Vector ground_truth_point() const {
    Vector z(n1 + n2);
    z.head(n1) = left_truth;
    z.tail(n2) = right_truth;
    return z;
  }

  double distance(const Vector& z) const;

  FiniteSumProblem problem() const;
};

inline double estimate_tau(const BdInstance& inst) {
  double max_prod = 0.0;
  for (int i = 0; i < inst.m; ++i)
    max_prod = std::max(max_prod, inst.left_rows.row(i).norm() * inst.right_rows.row(i).norm());
  return max_prod;
}

inline BdInstance generate_bd(int n1, int n2, int m, double p, std::uint64_t seed) {
  if (n1 < 1 || n2 < 1 || m < 1) throw std::invalid_argument("generate_bd: invalid sizes");
  detail::check_ratio(p);
  BdInstance inst;
  inst.n1 = n1;
  inst.n2 = n2;
  inst.m = m;
  inst.p = p;
  inst.seed = seed;
  // streams 0/1: measurement rows, stream 2: ground truth pair, 3/4: outliers
  CounterRng a_rng(seed, 0);
  inst.left_rows = detail::gaussian_matrix_rowwise(a_rng, m, n1);
  CounterRng c_rng(seed, 1);
  inst.right_rows = detail::gaussian_matrix_rowwise(c_rng, m, n2);
  CounterRng gt_rng(seed, 2);
  inst.left_truth.resize(n1);
  for (int j = 0; j < n1; ++j) inst.left_truth[j] = gt_rng.next_gaussian();
  inst.right_truth.resize(n2);
  for (int j = 0; j < n2; ++j) inst.right_truth[j] = gt_rng.next_gaussian();
  inst.outliers = detail::sparse_outliers(m, p, CounterRng(seed, 3), CounterRng(seed, 4));
  inst.measurements.resize(m);
  for (int i = 0; i < m; ++i) inst.measurements[i] = inst.clean_measurement(i) + inst.outliers[i];
  return inst;
}

// Distance to the scaling orbit {(alpha w*, x*/alpha) : alpha != 0}: a
// log-spaced grid over |alpha| in [1e-3, 1e3] for both signs, refined by
// golden-section search on log|alpha| around the best grid point.
inline double BdInstance::distance(const Vector& z) const {
  if (z.size() != n1 + n2) throw std::invalid_argument("dist_bd: dimension mismatch");
  const Vector w = z.head(n1);
  const Vector x = z.tail(n2);
  const auto objective = [&](double alpha) {
    return std::sqrt((w - alpha * left_truth).squaredNorm() +
                     (x - right_truth / alpha).squaredNorm());
  };

  constexpr double kLogLo = -3.0 * 2.302585092994046;  // ln(1e-3)
  constexpr double kLogHi = 3.0 * 2.302585092994046;
  constexpr int kGridPoints = 121;
  constexpr double kGolden = 0.6180339887498949;

  double best = std::numeric_limits<double>::infinity();
  for (const double sgn : {1.0, -1.0}) {
    const auto value_at = [&](double t) { return objective(sgn * std::exp(t)); };
    int best_idx = 0;
    double best_val = std::numeric_limits<double>::infinity();
    const double dt = (kLogHi - kLogLo) / (kGridPoints - 1);
    for (int i = 0; i < kGridPoints; ++i) {
      const double v = value_at(kLogLo + i * dt);
      if (v < best_val) {
        best_val = v;
        best_idx = i;
      }
    }
    double lo = kLogLo + std::max(0, best_idx - 1) * dt;
    double hi = kLogLo + std::min(kGridPoints - 1, best_idx + 1) * dt;
    double t1 = hi - kGolden * (hi - lo);
    double t2 = lo + kGolden * (hi - lo);
    double f1 = value_at(t1);
    double f2 = value_at(t2);
    for (int it = 0; it < 90; ++it) {
      if (f1 < f2) {
        hi = t2;
        t2 = t1;
        f2 = f1;
        t1 = hi - kGolden * (hi - lo);
        f1 = value_at(t1);
      } else {
        lo = t1;
        t1 = t2;
        f1 = f2;
        t2 = lo + kGolden * (hi - lo);
        f2 = value_at(t2);
      }
    }
    best = std::min({best, best_val, f1, f2});
  }
  return best;
}

inline FiniteSumProblem BdInstance::problem() const {
  auto data = std::make_shared<const BdInstance>(*this);
  std::vector<Component> comps;
  comps.reserve(static_cast<std::size_t>(m));
  const int d1 = n1, d2 = n2;
  for (int i = 0; i < m; ++i) {
    Component c;
    c.value = [data, i, d1, d2](const Vector& z) {
      const double tw = data->left_rows.row(i).dot(z.head(d1));
      const double tx = data->right_rows.row(i).dot(z.tail(d2));
      return std::abs(tw * tx - data->measurements[i]);
    };
    c.subgradient = [data, i, d1, d2](const Vector& z) -> Vector {
      const double tw = data->left_rows.row(i).dot(z.head(d1));
      const double tx = data->right_rows.row(i).dot(z.tail(d2));
      const double s = sign0(tw * tx - data->measurements[i]);
      if (s == 0.0) return Vector::Zero(z.size());
      Vector g(d1 + d2);
      g.head(d1) = (s * tx) * data->left_rows.row(i).transpose();
      g.tail(d2) = (s * tw) * data->right_rows.row(i).transpose();
      return g;
    };
    c.local_model = [data, i, d1, d2](const Vector& z) {
      const double tw = data->left_rows.row(i).dot(z.head(d1));
      const double tx = data->right_rows.row(i).dot(z.tail(d2));
      ScalarAffineModel model;
      model.a.resize(d1 + d2);
      model.a.head(d1) = tx * data->left_rows.row(i).transpose();
      model.a.tail(d2) = tw * data->right_rows.row(i).transpose();
      model.b = (tw * tx - data->measurements[i]) - model.a.dot(z);
      return model;
    };
    comps.push_back(std::move(c));
  }
  RegularityParams reg;
  reg.tau = estimate_tau(*data);
  return FiniteSumProblem(n1 + n2, std::move(comps), reg);
}

// ---------------------------------------------------------------------------
// Robust PCA (PSD case): Y = U* U*^T + S*, one component per entry,
// f_{ij}(U) = |Y_ij - (U U^T)_ij|. Component k corresponds to entry
// (i, j) = (k / n, k % n), i.e. row-major over Y.
// ---------------------------------------------------------------------------

struct RpcaInstance {
  int n = 0, r = 0;
  double p = 0.0;
  std::uint64_t seed = 0;

  Matrix ground_truth;  // U*, n x r
  Matrix observation;   // Y, n x n
  Matrix sparse_part;   // S*, n x n

  double clean_entry(int i, int j) const {
    return ground_truth.row(i).dot(ground_truth.row(j));
  }

  Vector ground_truth_point() const { return flatten(ground_truth); }

  double distance(const Vector& u_flat) const {
    return procrustes_distance(unflatten(u_flat, n, r), ground_truth);
  }

  FiniteSumProblem problem() const;
};

inline double estimate_tau(const RpcaInstance&) { return 2.0; }

inline RpcaInstance generate_rpca(int n, int r, double p, std::uint64_t seed) {
  if (n < 1 || r < 1 || r > n) throw std::invalid_argument("generate_rpca: invalid sizes");
  detail::check_ratio(p);
  RpcaInstance inst;
  inst.n = n;
  inst.r = r;
  inst.p = p;
  inst.seed = seed;
  // stream 0: ground truth, streams 1/2: outlier support/values
  CounterRng gt_rng(seed, 0);
  inst.ground_truth = detail::gaussian_matrix_rowwise(gt_rng, n, r);
  const Vector s = detail::sparse_outliers(n * n, p, CounterRng(seed, 1), CounterRng(seed, 2));
  inst.sparse_part.resize(n, n);
  inst.observation.resize(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      inst.sparse_part(i, j) = s[i * n + j];
      inst.observation(i, j) = inst.clean_entry(i, j) + inst.sparse_part(i, j);
    }
  return inst;
}

inline FiniteSumProblem RpcaInstance::problem() const {
  auto data = std::make_shared<const RpcaInstance>(*this);
  std::vector<Component> comps;
  comps.reserve(static_cast<std::size_t>(n) * static_cast<std::size_t>(n));
  const int nn = n, rr = r;
  for (int k = 0; k < n * n; ++k) {
    const int i = k / n;
    const int j = k % n;
    Component c;
    c.value = [data, i, j, nn, rr](const Vector& x) {
      const Matrix u = unflatten(x, nn, rr);
      return std::abs(u.row(i).dot(u.row(j)) - data->observation(i, j));
    };
    c.subgradient = [data, i, j, nn, rr](const Vector& x) -> Vector {
      const Matrix u = unflatten(x, nn, rr);
      const double s = sign0(u.row(i).dot(u.row(j)) - data->observation(i, j));
      if (s == 0.0) return Vector::Zero(x.size());
      Matrix g = Matrix::Zero(nn, rr);
      g.row(i) += s * u.row(j);
      g.row(j) += s * u.row(i);
      return flatten(g);
    };
    c.local_model = [data, i, j, nn, rr](const Vector& x) {
      const Matrix u = unflatten(x, nn, rr);
      Matrix g = Matrix::Zero(nn, rr);
      g.row(i) += u.row(j);
      g.row(j) += u.row(i);
      ScalarAffineModel model;
      model.a = flatten(g);
      model.b = (u.row(i).dot(u.row(j)) - data->observation(i, j)) - model.a.dot(x);
      return model;
    };
    comps.push_back(std::move(c));
  }
  RegularityParams reg;
  reg.tau = estimate_tau(*data);
  return FiniteSumProblem(n * r, std::move(comps), reg);
}

// Free-function distance wrappers matching the per-family metrics.
inline double dist_rms(const Vector& u_flat, const RmsInstance& inst) { return inst.distance(u_flat); }
inline double dist_rpr(const Vector& x, const RprInstance& inst) { return inst.distance(x); }
inline double dist_bd(const Vector& w, const Vector& x, const BdInstance& inst) {
  Vector z(inst.n1 + inst.n2);
  z.head(inst.n1) = w;
  z.tail(inst.n2) = x;
  return inst.distance(z);
}
inline double dist_rpca(const Vector& u_flat, const RpcaInstance& inst) { return inst.distance(u_flat); }

}  // namespace incsolve
