#pragma once

#include <cmath>
#include <cstdint>
#include <sstream>

#include "permcert/errors.hpp"

namespace permcert {

/// Euler-Mascheroni constant to double precision.
inline constexpr double kEulerGamma = 0.57721566490153286061;

namespace detail {

// Neumaier's variant of Kahan summation.
class CompensatedSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      carry_ += (sum_ - t) + x;
    } else {
      carry_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + carry_; }

 private:
  double sum_ = 0.0;
  double carry_ = 0.0;
};

}  // namespace detail

/// H_r = 1 + 1/2 + ... + 1/r, with H_0 = 0.
inline double harmonic(std::int64_t r) {
  if (r < 0) throw DomainError("harmonic: r must be non-negative");
  detail::CompensatedSum sum;
  // Smallest terms first.
  for (std::int64_t k = r; k >= 1; --k) sum.add(1.0 / static_cast<double>(k));
  return sum.value();
}

/// Per-factor loss of rank-r Gaussian rounding: H_{r-1} - log r.
/// Zero at r = 1 and increasing towards the Euler-Mascheroni constant.
inline double rounding_loss(std::int64_t r) {
  if (r < 1) throw DomainError("rounding_loss: r must be at least 1");
  return harmonic(r - 1) - std::log(static_cast<double>(r));
}

/// psi(r) = H_{r-1} - gamma for positive integers.
inline double digamma_integer(std::int64_t r) {
  if (r < 1) throw DomainError("digamma_integer: r must be at least 1");
  return harmonic(r - 1) - kEulerGamma;
}

inline double log_factorial(std::int64_t n) {
  return std::lgamma(static_cast<double>(n) + 1.0);
}

/// Multiplicative factor (n!/n^n) exp(-n L_r) of the certified sandwich,
/// carried as a logarithm.
struct ApproxFactor {
  std::int64_t n = 1;
  std::int64_t r = 1;
  double log_value = 0.0;
};

inline ApproxFactor approx_factor(std::int64_t n, std::int64_t r) {
  if (n < 1) throw DomainError("approx_factor: n must be at least 1");
  if (r < 1 || r > n) {
    std::ostringstream msg;
    msg << "approx_factor: rank " << r << " outside [1, " << n << "]";
    throw DomainError(msg.str());
  }
  const double nd = static_cast<double>(n);
  const double log_base = log_factorial(n) - nd * std::log(nd);
  return {n, r, r == 1 ? log_base : log_base - nd * rounding_loss(r)};
}

struct LrBoundsCheck {
  std::int64_t r = 1;
  double gamma_minus_loss = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  bool holds = false;
};

namespace detail {

inline LrBoundsCheck evaluate_lr_bounds(std::int64_t r, double harmonic_prev) {
  const double rd = static_cast<double>(r);
  LrBoundsCheck out;
  out.r = r;
  out.gamma_minus_loss = kEulerGamma - harmonic_prev + std::log(rd);
  out.lower = 1.0 / (2.0 * rd);
  out.upper = (rd + 2.0) / (2.0 * rd * (rd + 1.0));
  out.holds = out.lower < out.gamma_minus_loss && out.gamma_minus_loss < out.upper;
  return out;
}

}  // namespace detail

/// 1/(2r) < gamma - L_r < (r+2)/(2r(r+1)), evaluated directly.
inline LrBoundsCheck check_Lr_bounds(std::int64_t r) {
  if (r < 1) throw DomainError("check_Lr_bounds: r must be at least 1");
  return detail::evaluate_lr_bounds(r, harmonic(r - 1));
}

/// Runs check_Lr_bounds for every r in [1, r_max] with a running
/// compensated harmonic sum. Returns the first failing r, or 0.
inline std::int64_t sweep_Lr_bounds(std::int64_t r_max) {
  detail::CompensatedSum h;  // holds H_{r-1}
  for (std::int64_t r = 1; r <= r_max; ++r) {
    if (!detail::evaluate_lr_bounds(r, h.value()).holds) return r;
    h.add(1.0 / static_cast<double>(r));
  }
  return 0;
}

}  // namespace permcert
