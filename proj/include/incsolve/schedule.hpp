#pragma once

#include <cmath>
#include <optional>
#include <stdexcept>

namespace incsolve {

// Stepsize policy: either a constant mu for every epoch, or the
// geometrically diminishing rule mu_k = rho^k * mu_0.
struct StepSchedule {
  enum class Kind { Constant, Geometric };

  Kind kind = Kind::Constant;
  double mu0 = 0.0;
  double rho = 1.0;  // unused for Constant

  double step(int k) const {
    if (k < 0) throw std::invalid_argument("schedule epoch index must be >= 0");
    return kind == Kind::Constant ? mu0 : mu0 * std::pow(rho, k);
  }

  static StepSchedule constant(double mu) {
    if (!(mu > 0.0)) throw std::invalid_argument("constant stepsize must be positive");
    return {Kind::Constant, mu, 1.0};
  }

  static StepSchedule geometric(double mu0, double rho) {
    if (!(mu0 > 0.0)) throw std::invalid_argument("initial stepsize must be positive");
    if (!(rho > 0.0 && rho < 1.0))
      throw std::invalid_argument("geometric decay factor must lie in (0,1)");
    return {Kind::Geometric, mu0, rho};
  }
};

// Constant rule mu = 1 / (m sqrt(N+1)) for a run of N total epochs.
inline StepSchedule constant_schedule(int m, int total_epochs) {
  if (m < 1) throw std::invalid_argument("constant_schedule: m must be >= 1");
  if (total_epochs < 0) throw std::invalid_argument("constant_schedule: N must be >= 0");
  return StepSchedule::constant(
      1.0 / (static_cast<double>(m) * std::sqrt(static_cast<double>(total_epochs) + 1.0)));
}

// Geometric rule from the intrinsic problem parameters:
//   0 < mu_0 <= alpha^2 / (5 m tau L^2)
//   rho >= rho_bar = sqrt(1 - 2 m tau mu_0 + 5 m^2 tau^2 L^2 mu_0^2 / alpha^2)
// Omitted parameters default to the fastest admissible choice
// mu_0 = alpha^2 / (5 m tau L^2), where rho_bar = sqrt(1 - alpha^2 / (5 L^2)).
inline StepSchedule geometric_schedule(double alpha, double tau, double L, int m,
                                       std::optional<double> mu0 = std::nullopt,
                                       std::optional<double> rho = std::nullopt) {
  if (!(alpha > 0.0)) throw std::invalid_argument("geometric_schedule: alpha must be positive");
  if (!(tau > 0.0)) throw std::invalid_argument("geometric_schedule: tau must be positive");
  if (m < 1) throw std::invalid_argument("geometric_schedule: m must be >= 1");
  if (!(L >= alpha))
    throw std::invalid_argument("geometric_schedule: requires L >= alpha");

  const double mu0_max = alpha * alpha / (5.0 * m * tau * L * L);
  const double mu0_v = mu0.value_or(mu0_max);
  if (!(mu0_v > 0.0) || mu0_v > mu0_max * (1.0 + 1e-12))
    throw std::invalid_argument("geometric_schedule: mu0 outside (0, alpha^2/(5 m tau L^2)]");

  double rho_bar;
  if (mu0_v == mu0_max) {
    // closed form at the optimum initial stepsize
    rho_bar = std::sqrt(1.0 - alpha * alpha / (5.0 * L * L));
  } else {
    const double mt = static_cast<double>(m) * tau * mu0_v;
    rho_bar = std::sqrt(1.0 - 2.0 * mt + 5.0 * mt * mt * (L / alpha) * (L / alpha));
  }
  const double rho_v = rho.value_or(rho_bar);
  if (rho_v < rho_bar * (1.0 - 1e-12) || !(rho_v < 1.0))
    throw std::invalid_argument("geometric_schedule: rho outside [rho_bar, 1)");
  return StepSchedule::geometric(mu0_v, rho_v);
}

}  // namespace incsolve
