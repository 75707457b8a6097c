#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "permcert/constants.hpp"
#include "permcert/errors.hpp"
#include "permcert/hermitian.hpp"
#include "permcert/rank_reduction.hpp"
#include "permcert/relaxation.hpp"
#include "permcert/rng.hpp"

namespace permcert {

inline constexpr double kSphereTol = 1e-8;

/// Point on the sphere ||y||^2 = n with its objective sum log |<v_i, y>|^2.
struct RoundedVector {
  Eigen::VectorXcd y;
  double objective_log = -std::numeric_limits<double>::infinity();
  std::int64_t draw_index = 0;
};

/// sum_i log |<v_i, x>|^2; -inf when some inner product vanishes.
inline double objective_product(const GramFactor& v, const Eigen::VectorXcd& x) {
  if (x.size() != v.n()) throw DimensionError("objective_product: length mismatch");
  return detail::log_product_of_forms(v.matrix(), x);
}

/// One Gaussian rounding of P = U U^H: z ~ CN(0, I_r), y = sqrt(n) Uz/||Uz||.
inline RoundedVector round_once(const Eigen::MatrixXcd& u, const GramFactor& v,
                                CounterRng& rng) {
  const Eigen::Index r = u.cols();
  Eigen::VectorXcd z(r);
  for (Eigen::Index j = 0; j < r; ++j) z(j) = rng.complex_normal();
  const Eigen::VectorXcd uz = u * z;
  const double norm = uz.norm();
  if (!(norm > 0.0)) throw NumericError("round_once: U z vanished");
  RoundedVector out;
  out.y = (std::sqrt(static_cast<double>(u.rows())) / norm) * uz;
  out.objective_log = objective_product(v, out.y);
  return out;
}

/// Draw j uses substream (seed, j); the best objective wins, ties going to
/// the lowest index. Draws with a vanishing form are discarded unless all
/// of them vanish, in which case draw 0 is returned.
inline RoundedVector best_of_k_rounding(const Eigen::MatrixXcd& u,
                                        const GramFactor& v, std::int64_t k,
                                        std::uint64_t seed) {
  if (k < 1) throw DomainError("best_of_k_rounding: k must be >= 1");
  RoundedVector best;
  bool have_best = false;
  for (std::int64_t j = 0; j < k; ++j) {
    CounterRng rng(seed, static_cast<std::uint64_t>(j));
    RoundedVector draw = round_once(u, v, rng);
    draw.draw_index = j;
    if (!have_best || draw.objective_log > best.objective_log) {
      best = std::move(draw);
      have_best = true;
    }
  }
  return best;
}

struct RoundingEstimate {
  double log_mean = 0.0;
  double rel_std_error = 0.0;  // std_error / mean
  std::int64_t samples = 0;
};

/// Monte Carlo mean of prod |<v_i, y>|^2 over rounded y, pooled through a
/// running log-sum-exp shift. Sample j uses substream (seed, j).
inline RoundingEstimate expected_rounding_value(const Eigen::MatrixXcd& u,
                                                const GramFactor& v,
                                                std::int64_t samples,
                                                std::uint64_t seed) {
  if (samples < 1) throw DomainError("expected_rounding_value: samples must be >= 1");
  std::vector<double> logs(static_cast<std::size_t>(samples));
  double shift = -std::numeric_limits<double>::infinity();
  for (std::int64_t j = 0; j < samples; ++j) {
    CounterRng rng(seed, static_cast<std::uint64_t>(j));
    logs[static_cast<std::size_t>(j)] = round_once(u, v, rng).objective_log;
    shift = std::max(shift, logs[static_cast<std::size_t>(j)]);
  }
  RoundingEstimate out;
  out.samples = samples;
  if (!std::isfinite(shift)) {
    out.log_mean = shift;
    return out;
  }
  detail::Moments m;
  for (double l : logs) m.push(std::exp(l - shift));
  out.log_mean = std::log(m.mean) + shift;
  if (samples > 1) {
    const double se = std::sqrt(m.m2 / static_cast<double>(samples - 1) /
                                static_cast<double>(samples));
    out.rel_std_error = se / m.mean;
  }
  return out;
}

struct SphereLowerBound {
  double log_value = -std::numeric_limits<double>::infinity();
  bool renormalized = false;
};

/// log(n!/n^n) + sum log |<v_i, y>|^2, a lower bound on log per(A) for any
/// y with ||y||^2 = n. Off-sphere input is projected back and flagged.
inline SphereLowerBound lower_bound_from_vector(const GramFactor& v,
                                                const Eigen::VectorXcd& y) {
  const double n = static_cast<double>(v.n());
  SphereLowerBound out;
  Eigen::VectorXcd point = y;
  const double norm2 = y.squaredNorm();
  if (std::abs(norm2 - n) > kSphereTol * n) {
    if (!(norm2 > 0.0)) throw DomainError("lower_bound_from_vector: zero vector");
    point *= std::sqrt(n / norm2);
    out.renormalized = true;
  }
  out.log_value = log_factorial(v.n()) - n * std::log(n) + objective_product(v, point);
  return out;
}

struct CertifyOptions {
  std::int64_t k_rounds = 0;  // 0 selects 64 n
  bool reduce_rank = true;
  std::uint64_t seed = 0;
  SolverOptions solver;
  double rank_tol = 1e-9;
};

/// Certified sandwich log_lower <= log per(A) <= log_upper with the witness
/// that realizes the lower end.
struct CertifiedBounds {
  double log_lower = -std::numeric_limits<double>::infinity();
  double log_upper = -std::numeric_limits<double>::infinity();
  RoundedVector witness;
  int rank_r = 1;
  int rank_solver = 1;
  double log_factor = 0.0;         // log(n!/n^n) - n L_r
  double a_priori_log_lower = 0.0;  // log_factor + log rel(A)
  bool witness_beats_a_priori = false;
  bool certificate_validated = false;
  bool solver_converged = false;
  bool loose = false;  // solver stopped before closing the gap
  RelResult relaxation;
  std::optional<ReductionTrace> reduction;
};

inline CertifiedBounds certify_sandwich(const HermitianMatrix& a,
                                        const CertifyOptions& opts = {}) {
  const int n = a.n();
  CertifiedBounds out;
  out.relaxation = rel(a, opts.solver);
  const RelResult& relx = out.relaxation;
  out.certificate_validated = relx.certificate.validated;
  out.solver_converged = relx.solution.converged;
  out.loose = !relx.solution.converged;
  out.log_upper = relx.certificate.log_upper;

  if (relx.zero_diagonal) {
    out.witness.y = Eigen::VectorXcd::Constant(n, Complex(1.0, 0.0));
    out.witness.objective_log = -std::numeric_limits<double>::infinity();
    out.log_factor = approx_factor(n, 1).log_value;
    out.a_priori_log_lower = -std::numeric_limits<double>::infinity();
    return out;
  }

  Eigen::MatrixXcd u = relx.solution.u;
  out.rank_solver = static_cast<int>(u.cols());
  if (opts.reduce_rank) {
    auto reduced = reduce_rank(relx.factor, relx.solution.p, opts.rank_tol);
    if (!reduced.trace.aborted) u = reduced.u;
    out.reduction = reduced.trace;
  }
  out.rank_r = std::max<int>(1, static_cast<int>(u.cols()));

  const std::int64_t k = opts.k_rounds > 0 ? opts.k_rounds : 64 * static_cast<std::int64_t>(n);
  out.witness = best_of_k_rounding(u, relx.factor, k, opts.seed);
  out.log_lower = lower_bound_from_vector(relx.factor, out.witness.y).log_value;

  out.log_factor = approx_factor(n, out.rank_r).log_value;
  out.a_priori_log_lower = out.log_factor + relx.value_log;
  out.witness_beats_a_priori = out.log_lower >= out.a_priori_log_lower;
  return out;
}

}  // namespace permcert
