#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>
#include <thread>
#include <vector>

#include "incsolve/instances.hpp"
#include "incsolve/solvers.hpp"

namespace incsolve {

// True iff the mean distance over the last `window` records is at or below
// the threshold (defaults elsewhere: threshold 1e-8, window 5).
inline bool success_metric(const RunTrace& trace, double threshold, int window) {
  if (window < 1) throw std::invalid_argument("success_metric: window must be >= 1");
  if (static_cast<int>(trace.records.size()) < window)
    throw std::invalid_argument("success_metric: trace shorter than window");
  double acc = 0.0;
  for (int j = 0; j < window; ++j) {
    const auto& rec = trace.records[trace.records.size() - 1 - static_cast<std::size_t>(j)];
    if (!rec.dist) throw std::invalid_argument("success_metric: trace lacks distance records");
    acc += *rec.dist;
  }
  return acc / window <= threshold;
}

// Boolean success matrix over the (rho, mu0) grid, mu0 stored in units of
// 1/m. final_avg_dist holds the averaged last-window distance per cell and
// is NaN for cells whose run diverged or was rejected (e.g. an IPP stepsize
// violating mu < 1/tau).
struct SuccessMap {
  std::vector<double> rho_grid;
  std::vector<double> mu0_times_m_grid;
  std::vector<std::vector<std::uint8_t>> success;       // [rho index][mu0 index]
  std::vector<std::vector<double>> final_avg_dist;

  std::size_t rows() const { return rho_grid.size(); }
  std::size_t cols() const { return mu0_times_m_grid.size(); }
};

inline std::vector<double> default_rho_grid() {
  std::vector<double> g(15);
  for (int i = 0; i < 15; ++i) g[static_cast<std::size_t>(i)] = 0.65 + (0.99 - 0.65) * i / 14.0;
  return g;
}

inline std::vector<double> default_mu0_times_m_grid() {
  std::vector<double> g(15);
  for (int i = 0; i < 15; ++i) g[static_cast<std::size_t>(i)] = 1.0 + (210.0 - 1.0) * i / 14.0;
  return g;
}

struct GridOptions {
  double threshold = 1e-8;
  int window = 5;
  int threads = 1;
  std::uint64_t order_seed = 0;  // used by the stochastic solvers' IID policy
  double ipp_inner_tol = 1e-7;
};

inline Vector gaussian_point(int dimension, std::uint64_t seed) {
  CounterRng rng(seed, 0);
  Vector x(dimension);
  for (int j = 0; j < dimension; ++j) x[j] = rng.next_gaussian();
  return x;
}

// One run per grid cell, every cell initialized at the same Gaussian point
// drawn from x0_seed. Cells are independent and evaluated by a small worker
// pool; results land in fixed slots, so the map does not depend on
// evaluation order.
inline SuccessMap grid_search(SolverKind kind, const FiniteSumProblem& problem,
                              const std::function<double(const Vector&)>& distance,
                              std::vector<double> rho_grid, std::vector<double> mu0_times_m_grid,
                              int epochs, std::uint64_t x0_seed, const GridOptions& options = {}) {
  if (rho_grid.empty() || mu0_times_m_grid.empty())
    throw std::invalid_argument("grid_search: grids must be nonempty");
  if (epochs < options.window) throw std::invalid_argument("grid_search: epochs < window");
  std::sort(rho_grid.begin(), rho_grid.end());
  std::sort(mu0_times_m_grid.begin(), mu0_times_m_grid.end());

  SuccessMap map;
  map.rho_grid = std::move(rho_grid);
  map.mu0_times_m_grid = std::move(mu0_times_m_grid);
  const std::size_t nr = map.rows(), nc = map.cols();
  map.success.assign(nr, std::vector<std::uint8_t>(nc, 0));
  map.final_avg_dist.assign(nr, std::vector<double>(nc, std::numeric_limits<double>::quiet_NaN()));

  const Vector x0 = gaussian_point(problem.dimension(), x0_seed);
  const double m = static_cast<double>(problem.component_count());
  const bool stochastic = kind == SolverKind::Sgd || kind == SolverKind::Spl;
  OrderPolicy order;
  order.kind = stochastic ? OrderPolicy::Kind::IID : OrderPolicy::Kind::Cyclic;
  order.seed = options.order_seed;

  RunMetrics metrics;
  metrics.distance = distance;
  RunOptions ropt;
  ropt.success_threshold = options.threshold;
  ropt.success_window = options.window;
  ropt.ipp_inner_tol = options.ipp_inner_tol;

  const auto eval_cell = [&](std::size_t ri, std::size_t ci) {
    const double rho = map.rho_grid[ri];
    const double mu0 = map.mu0_times_m_grid[ci] / m;
    try {
      const auto schedule = StepSchedule::geometric(mu0, rho);
      const RunTrace trace = run(kind, problem, schedule, order, x0, epochs, metrics, ropt);
      if (trace.status == RunStatus::Diverged) return;
      double acc = 0.0;
      for (int j = 0; j < options.window; ++j)
        acc += *trace.records[trace.records.size() - 1 - static_cast<std::size_t>(j)].dist;
      map.final_avg_dist[ri][ci] = acc / options.window;
      map.success[ri][ci] = success_metric(trace, options.threshold, options.window) ? 1 : 0;
    } catch (const std::exception&) {
      // infeasible or failed cell (e.g. IPP with mu >= 1/tau) counts as failure
    }
  };

  const std::size_t total = nr * nc;
  const int workers = std::max(1, std::min<int>(options.threads, static_cast<int>(total)));
  if (workers == 1) {
    for (std::size_t c = 0; c < total; ++c) eval_cell(c / nc, c % nc);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int t = 0; t < workers; ++t)
      pool.emplace_back([&] {
        for (std::size_t c = next.fetch_add(1); c < total; c = next.fetch_add(1))
          eval_cell(c / nc, c % nc);
      });
    for (auto& th : pool) th.join();
  }
  return map;
}

// Least-squares fit of log10(distance) against epoch index.
struct RateFit {
  double slope_log10 = 0.0;
  double r_squared = 0.0;
  bool degenerate = false;  // flat trace: slope reported as 0
};

inline RateFit fit_linear_rate(const RunTrace& trace, int skip) {
  if (skip < 0) throw std::invalid_argument("fit_linear_rate: skip must be >= 0");
  constexpr double kFloor = 1e-12;  // floating-point floor; fit stops here
  std::vector<double> xs, ys;
  for (std::size_t i = static_cast<std::size_t>(skip); i < trace.records.size(); ++i) {
    const auto& rec = trace.records[i];
    if (!rec.dist) throw std::invalid_argument("fit_linear_rate: trace lacks distance records");
    const double d = *rec.dist;
    if (std::isnan(d) || d < 0.0)
      throw std::invalid_argument("fit_linear_rate: nonpositive or invalid distance");
    if (d < kFloor) break;
    xs.push_back(static_cast<double>(rec.epoch));
    ys.push_back(std::log10(d));
  }
  if (xs.size() < 3) throw std::invalid_argument("fit_linear_rate: fewer than 3 usable records");

  const auto n = static_cast<double>(xs.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, syy = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double dx = xs[i] - mx, dy = ys[i] - my;
    sxx += dx * dx;
    syy += dy * dy;
    sxy += dx * dy;
  }
  RateFit fit;
  if (syy <= 1e-24 * n) {
    fit.degenerate = true;
    return fit;  // constant trace: slope 0, R^2 undefined -> reported 0
  }
  fit.slope_log10 = sxy / sxx;
  fit.r_squared = (sxy * sxy) / (sxx * syy);
  return fit;
}

// ---------------------------------------------------------------------------
// Baseline comparison
// ---------------------------------------------------------------------------

struct BaselineEntry {
  SolverKind kind = SolverKind::Igd;
  bool any_success = false;
  double smallest_rho = std::numeric_limits<double>::infinity();
  SuccessMap map;
};

struct BaselineReport {
  std::vector<BaselineEntry> entries;

  const BaselineEntry& entry(SolverKind kind) const {
    for (const auto& e : entries)
      if (e.kind == kind) return e;
    throw std::out_of_range("baseline report: solver kind not present");
  }
};

// Smallest rho per algorithm over a shared grid. Deterministic solvers get
// one run per cell; stochastic solvers are decided per cell by majority over
// the given order seeds.
inline BaselineReport compare_baselines(const FiniteSumProblem& problem,
                                        const std::function<double(const Vector&)>& distance,
                                        const std::vector<SolverKind>& kinds,
                                        std::vector<double> rho_grid,
                                        std::vector<double> mu0_times_m_grid, int epochs,
                                        std::uint64_t x0_seed,
                                        const std::vector<std::uint64_t>& stochastic_seeds,
                                        const GridOptions& base_options = {}) {
  BaselineReport report;
  for (const SolverKind kind : kinds) {
    const bool stochastic = kind == SolverKind::Sgd || kind == SolverKind::Spl;
    BaselineEntry entry;
    entry.kind = kind;
    if (!stochastic) {
      entry.map = grid_search(kind, problem, distance, rho_grid, mu0_times_m_grid, epochs,
                              x0_seed, base_options);
    } else {
      if (stochastic_seeds.empty())
        throw std::invalid_argument("compare_baselines: stochastic solver needs order seeds");
      std::vector<SuccessMap> maps;
      maps.reserve(stochastic_seeds.size());
      for (const auto seed : stochastic_seeds) {
        GridOptions opt = base_options;
        opt.order_seed = seed;
        maps.push_back(grid_search(kind, problem, distance, rho_grid, mu0_times_m_grid, epochs,
                                   x0_seed, opt));
      }
      entry.map = maps.front();
      for (std::size_t ri = 0; ri < entry.map.rows(); ++ri)
        for (std::size_t ci = 0; ci < entry.map.cols(); ++ci) {
          int votes = 0;
          double dist_acc = 0.0;
          int dist_count = 0;
          for (const auto& sm : maps) {
            votes += sm.success[ri][ci];
            if (std::isfinite(sm.final_avg_dist[ri][ci])) {
              dist_acc += sm.final_avg_dist[ri][ci];
              ++dist_count;
            }
          }
          entry.map.success[ri][ci] = 2 * votes > static_cast<int>(maps.size()) ? 1 : 0;
          entry.map.final_avg_dist[ri][ci] =
              dist_count > 0 ? dist_acc / dist_count : std::numeric_limits<double>::quiet_NaN();
        }
    }
    for (std::size_t ri = 0; ri < entry.map.rows(); ++ri)
      for (std::size_t ci = 0; ci < entry.map.cols(); ++ci)
        if (entry.map.success[ri][ci]) {
          entry.any_success = true;
          entry.smallest_rho = std::min(entry.smallest_rho, entry.map.rho_grid[ri]);
        }
    report.entries.push_back(std::move(entry));
  }
  return report;
}

// ---------------------------------------------------------------------------
// Sharpness calibration
// ---------------------------------------------------------------------------

struct AlphaEstimate {
  double alpha_hat = 0.0;
  bool not_sharp = false;   // growth looks sub-linear near the solution set
  double median_ratio = 0.0;
};

// Empirical sharpness constant: minimum of (f(x) - f*) / dist(x, X) over
// probe points in a ball around the ground truth, with f* = f(ground truth).
// Probe radii are uniform in (0, radius] so vanishing ratios at small radii
// (quadratic growth) are visible; such instances are flagged not sharp.
inline AlphaEstimate calibrate_alpha(const FiniteSumProblem& problem,
                                     const std::function<double(const Vector&)>& distance,
                                     const Vector& ground_truth, double radius, int probes,
                                     std::uint64_t seed) {
  if (!(radius > 0.0)) throw std::invalid_argument("calibrate_alpha: radius must be positive");
  if (probes < 1) throw std::invalid_argument("calibrate_alpha: probes must be >= 1");
  if (ground_truth.size() != problem.dimension())
    throw std::invalid_argument("calibrate_alpha: ground truth dimension mismatch");

  const double f_star = problem.full_value(ground_truth);
  CounterRng rng(seed, 0);
  const int n = problem.dimension();
  std::vector<double> ratios;
  ratios.reserve(static_cast<std::size_t>(probes));
  int attempts = 0;
  while (static_cast<int>(ratios.size()) < probes) {
    if (++attempts > 100 * probes)
      throw std::runtime_error("calibrate_alpha: probes keep landing on the solution set");
    Vector dir(n);
    for (int j = 0; j < n; ++j) dir[j] = rng.next_gaussian();
    const double dn = dir.norm();
    if (dn == 0.0) continue;
    const Vector x = ground_truth + (radius * rng.next_uniform_open() / dn) * dir;
    const double d = distance(x);
    if (!(d > 0.0)) continue;  // on the solution set: resample
    ratios.push_back((problem.full_value(x) - f_star) / d);
  }
  AlphaEstimate est;
  est.alpha_hat = *std::min_element(ratios.begin(), ratios.end());
  std::nth_element(ratios.begin(), ratios.begin() + static_cast<std::ptrdiff_t>(ratios.size() / 2),
                   ratios.end());
  est.median_ratio = ratios[ratios.size() / 2];
  est.not_sharp = est.alpha_hat < 0.2 * est.median_ratio || !(est.alpha_hat > 0.0);
  return est;
}

}  // namespace incsolve
