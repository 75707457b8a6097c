#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <sstream>
#include <thread>
#include <vector>

#include <Eigen/Dense>

#include "permcert/constants.hpp"
#include "permcert/errors.hpp"
#include "permcert/hermitian.hpp"
#include "permcert/rng.hpp"

namespace permcert {

inline constexpr int kExactPermanentCap = 20;

/// Ryser's inclusion-exclusion formula with Gray-code subset order,
/// O(2^n n). Accumulates in extended precision.
inline Complex permanent_ryser(const Eigen::MatrixXcd& a) {
  if (a.rows() != a.cols()) throw DimensionError("permanent needs a square matrix");
  const int n = static_cast<int>(a.rows());
  if (n > kExactPermanentCap) {
    std::ostringstream msg;
    msg << "exact permanent capped at n = " << kExactPermanentCap << ", got " << n;
    throw SizeError(msg.str());
  }
  if (n == 0) return 1.0;
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    if (!std::isfinite(a(i).real()) || !std::isfinite(a(i).imag())) {
      throw ParseError("permanent: matrix has non-finite entries");
    }
  }

  using Wide = std::complex<long double>;
  std::vector<Wide> row_sums(n, Wide(0.0L, 0.0L));
  Wide total(0.0L, 0.0L);
  const std::uint64_t subsets = std::uint64_t{1} << n;
  std::uint64_t gray = 0;
  for (std::uint64_t k = 1; k < subsets; ++k) {
    const std::uint64_t next = k ^ (k >> 1);
    const std::uint64_t flipped = next ^ gray;
    const int col = std::countr_zero(flipped);
    const bool added = (next & flipped) != 0;
    for (int i = 0; i < n; ++i) {
      const Wide entry(a(i, col).real(), a(i, col).imag());
      row_sums[i] += added ? entry : -entry;
    }
    gray = next;
    Wide prod(1.0L, 0.0L);
    for (int i = 0; i < n; ++i) prod *= row_sums[i];
    // sign (-1)^{|S|}
    if (std::popcount(gray) % 2 == 1) {
      total -= prod;
    } else {
      total += prod;
    }
  }
  if (n % 2 == 1) total = -total;
  return {static_cast<double>(total.real()), static_cast<double>(total.imag())};
}

struct ExactPermanent {
  double value = 0.0;  // real part
  double imag = 0.0;   // reported; ~0 for Hermitian input
};

inline ExactPermanent permanent_exact(const Eigen::MatrixXcd& a) {
  const Complex p = permanent_ryser(a);
  return {p.real(), p.imag()};
}

inline ExactPermanent permanent_exact(const HermitianMatrix& a) {
  return permanent_exact(a.matrix());
}

/// per(v v^H) = n! prod |v_i|^2, evaluated in log space.
inline double permanent_rank_one(const Eigen::VectorXcd& v) {
  double log_prod = log_factorial(v.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    const double mag2 = std::norm(v(i));
    if (mag2 == 0.0) return 0.0;
    log_prod += std::log(mag2);
  }
  return std::exp(log_prod);
}

/// Monte Carlo estimate of per(A). When log_domain is set the true values
/// are out of double range and mean/std_error hold natural logarithms.
struct PermanentEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  std::int64_t samples = 0;
  bool log_domain = false;
};

namespace detail {

inline constexpr std::int64_t kMcBlock = 4096;

struct Moments {
  std::int64_t count = 0;
  double mean = 0.0;
  double m2 = 0.0;

  void push(double x) {
    ++count;
    const double delta = x - mean;
    mean += delta / static_cast<double>(count);
    m2 += delta * (x - mean);
  }

  // Chan et al. pairwise update.
  void merge(const Moments& other) {
    if (other.count == 0) return;
    const std::int64_t total = count + other.count;
    const double delta = other.mean - mean;
    const double wa = static_cast<double>(count);
    const double wb = static_cast<double>(other.count);
    mean += delta * wb / static_cast<double>(total);
    m2 += other.m2 + delta * delta * wa * wb / static_cast<double>(total);
    count = total;
  }
};

// Sum of log |<v_i, x>|^2, -inf when some factor vanishes.
inline double log_product_of_forms(const Eigen::MatrixXcd& columns,
                                   const Eigen::VectorXcd& x) {
  const Eigen::VectorXcd forms = columns.adjoint() * x;
  double acc = 0.0;
  for (Eigen::Index i = 0; i < forms.size(); ++i) {
    const double mag2 = std::norm(forms(i));
    if (mag2 == 0.0) return -std::numeric_limits<double>::infinity();
    acc += std::log(mag2);
  }
  return acc;
}

}  // namespace detail

/// Unbiased estimator per(A) = E prod_i |<v_i, x>|^2, x ~ CN(0, I).
/// Samples are grouped in fixed blocks, block b drawing from substream
/// (seed, b); blocks are spread over `workers` threads and pooled in block
/// order, so the result depends only on (V, samples, seed).
inline PermanentEstimate permanent_mc_gaussian(const GramFactor& v,
                                               std::int64_t samples,
                                               std::uint64_t seed,
                                               int workers = 1) {
  if (samples < 1) throw DomainError("permanent_mc_gaussian: samples must be >= 1");
  const int n = v.n();
  PermanentEstimate out;
  out.samples = samples;

  // Each factor has mean ||v_i||^2; rescale by their product to keep the
  // accumulated values near unity.
  double log_scale = 0.0;
  for (int i = 0; i < n; ++i) {
    const double sq = v.column(i).squaredNorm();
    if (sq == 0.0) return out;  // per = 0 exactly
    log_scale += std::log(sq);
  }

  const std::int64_t blocks = (samples + detail::kMcBlock - 1) / detail::kMcBlock;
  std::vector<detail::Moments> block_moments(static_cast<std::size_t>(blocks));
  auto run_block = [&](std::int64_t b) {
    CounterRng rng(seed, static_cast<std::uint64_t>(b));
    const std::int64_t begin = b * detail::kMcBlock;
    const std::int64_t end = std::min(samples, begin + detail::kMcBlock);
    Eigen::VectorXcd x(n);
    detail::Moments m;
    for (std::int64_t s = begin; s < end; ++s) {
      for (int i = 0; i < n; ++i) x(i) = rng.complex_normal();
      m.push(std::exp(detail::log_product_of_forms(v.matrix(), x) - log_scale));
    }
    block_moments[static_cast<std::size_t>(b)] = m;
  };

  workers = std::max(1, std::min<int>(workers, static_cast<int>(blocks)));
  if (workers == 1) {
    for (std::int64_t b = 0; b < blocks; ++b) run_block(b);
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        for (std::int64_t b = w; b < blocks; b += workers) run_block(b);
      });
    }
    for (auto& t : pool) t.join();
  }

  detail::Moments total;
  for (const auto& m : block_moments) total.merge(m);
  const double se = samples > 1
      ? std::sqrt(total.m2 / static_cast<double>(samples - 1) /
                  static_cast<double>(samples))
      : 0.0;

  if (std::abs(log_scale) > 700.0) {
    out.log_domain = true;
    out.mean = std::log(total.mean) + log_scale;
    out.std_error = std::log(se) + log_scale;
  } else {
    const double scale = std::exp(log_scale);
    out.mean = total.mean * scale;
    out.std_error = se * scale;
  }
  return out;
}

/// log of (n+d-1)! / (n^n (n-1)!), the Gaussian-to-sphere correction for
/// degree-d homogeneous polynomials. d = n gives the permanent's factor.
inline double sphere_correction(std::int64_t n, std::int64_t d) {
  if (n < 1 || d < 0) throw DomainError("sphere_correction: need n >= 1, d >= 0");
  const double nd = static_cast<double>(n);
  return std::lgamma(nd + static_cast<double>(d)) - nd * std::log(nd) -
         std::lgamma(nd);
}

}  // namespace permcert
