#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>

namespace incsolve {

// Counter-based pseudo-random generator.
//
// Output i of stream s under seed k is mix64(key(k, s) + (i+1) * GAMMA),
// where mix64 is the SplitMix64 finalizer and GAMMA its Weyl increment.
// Draws depend only on (seed, stream, counter), so consumers can be split
// into independent named substreams without sharing mutable state, and a
// generated sequence is reproducible across platforms and thread layouts.
//
// Stream layout conventions used by the generators in this library are
// documented at each call site (e.g. instance generators reserve stream 0
// for measurement operators, stream 1 for ground truth, ...).
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed, std::uint64_t stream = 0)
      : key_(derive_key(seed, stream)) {}

  // Child generator for a named substream. Independent of this generator's
  // counter position.
  CounterRng split(std::uint64_t label) const {
    CounterRng child(0, 0);
    child.key_ = mix64(key_ ^ mix64(label + 0xD1B54A32D192ED03ULL));
    return child;
  }

  std::uint64_t next_u64() { return mix64(key_ + (++counter_) * kGamma); }

  // Uniform on [0, 1) with 53 random bits.
  double next_uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // Uniform on the open interval (0, 1); both endpoints excluded.
  double next_uniform_open() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  // Uniform integer on [0, n). Scaled-double method; the selection bias of
  // at most n * 2^-53 is irrelevant at the range sizes used here.
  std::uint64_t next_below(std::uint64_t n) {
    if (n == 0) throw std::invalid_argument("next_below: n must be positive");
    auto v = static_cast<std::uint64_t>(next_uniform() * static_cast<double>(n));
    return v < n ? v : n - 1;
  }

  // Standard normal deviate via the inverse normal CDF applied to a uniform
  // draw on (0, 1). The inverse CDF uses Acklam's rational approximation
  // (relative error < 1.2e-9), which needs only +, *, /, sqrt and log, so
  // streams are stable across standard libraries.
  double next_gaussian() { return inverse_normal_cdf(next_uniform_open()); }

  static double inverse_normal_cdf(double u) {
    // Coefficients of P. Acklam's approximation.
    static constexpr double a[6] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                    -2.759285104469687e+02, 1.383577518672690e+02,
                                    -3.066479806614716e+01, 2.506628277459239e+00};
    static constexpr double b[5] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                    -1.556989798598866e+02, 6.680131188771972e+01,
                                    -1.328068155288572e+01};
    static constexpr double c[6] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                    -2.400758277161838e+00, -2.549732539343734e+00,
                                    4.374664141464968e+00,  2.938163982698783e+00};
    static constexpr double d[4] = {7.784695709041462e-03, 3.224671290700398e-01,
                                    2.445134137142996e+00, 3.754408661907416e+00};
    static constexpr double p_low = 0.02425;

    if (!(u > 0.0) || !(u < 1.0))
      throw std::invalid_argument("inverse_normal_cdf: u must lie in (0,1)");
    if (u < p_low) {
      const double q = std::sqrt(-2.0 * std::log(u));
      return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
             ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    if (u <= 1.0 - p_low) {
      const double q = u - 0.5;
      const double r = q * q;
      return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
             (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
    }
    const double q = std::sqrt(-2.0 * std::log(1.0 - u));
    return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }

 private:
  static constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ULL;

  static std::uint64_t mix64(std::uint64_t z) {
    z ^= z >> 30;
    z *= 0xBF58476D1CE4E5B9ULL;
    z ^= z >> 27;
    z *= 0x94D049BB133111EBULL;
    z ^= z >> 31;
    return z;
  }

  static std::uint64_t derive_key(std::uint64_t seed, std::uint64_t stream) {
    return mix64(mix64(seed + kGamma) ^ mix64(stream + 0x8CB92BA72F3D8DD7ULL));
  }

  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace incsolve
