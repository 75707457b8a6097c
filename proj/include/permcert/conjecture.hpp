#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "permcert/constants.hpp"
#include "permcert/errors.hpp"
#include "permcert/hermitian.hpp"
#include "permcert/permanent.hpp"
#include "permcert/relaxation.hpp"
#include "permcert/rng.hpp"
#include "permcert/rounding.hpp"

namespace permcert {

struct SphereSearchOptions {
  int max_iter = 5000;
  double step_tol = 1e-9;  // on the tangent gradient norm
  std::uint64_t seed = 0;  // perturbations near the zero set
};

struct SphereSearchResult {
  Eigen::VectorXcd x;
  double objective_log = -std::numeric_limits<double>::infinity();
  int iterations = 0;
  bool converged = false;
  std::vector<double> objective_trace;
};

namespace detail {

inline constexpr double kFormClamp = 1e-280;

// Global phase making the first non-negligible entry real positive.
inline void fix_phase(Eigen::VectorXcd& x) {
  const double cutoff = 1e-12 * x.norm();
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double mag = std::abs(x(i));
    if (mag > cutoff) {
      x *= std::conj(x(i)) / mag;
      x(i) = Complex(x(i).real(), 0.0);
      return;
    }
  }
}

}  // namespace detail

/// Projected gradient ascent of sum log |<v_i, x>|^2 on ||x||^2 = n with
/// Armijo backtracking and retraction by rescaling.
inline SphereSearchResult local_maximize_sphere(const GramFactor& v,
                                                const Eigen::VectorXcd& x0,
                                                const SphereSearchOptions& opts = {}) {
  const int n = v.n();
  const double radius2 = static_cast<double>(n);
  const Eigen::MatrixXcd& cols = v.matrix();
  if (!std::isfinite(objective_product(v, x0))) {
    throw DomainError("local_maximize_sphere: start point has a vanishing form");
  }
  CounterRng rng(opts.seed, 0x5EA7C4ULL);

  auto retract = [&](Eigen::VectorXcd x) {
    x *= std::sqrt(radius2) / x.norm();
    return x;
  };

  SphereSearchResult out;
  Eigen::VectorXcd x = x0;
  if (std::abs(x.squaredNorm() - radius2) > kSphereTol * radius2) x = retract(x);
  double f = objective_product(v, x);
  double step = 1.0 / radius2;
  out.objective_trace.push_back(f);

  for (int it = 0; it < opts.max_iter; ++it) {
    const Eigen::VectorXcd forms = cols.adjoint() * x;
    Eigen::VectorXcd weights(n);
    bool clamped = false;
    for (int i = 0; i < n; ++i) {
      double mag2 = std::norm(forms(i));
      if (mag2 < detail::kFormClamp) {
        mag2 = detail::kFormClamp;
        clamped = true;
      }
      weights(i) = forms(i) / mag2;
    }
    // Real gradient 2 sum_i v_i <v_i, x> / |<v_i, x>|^2, then tangent part.
    Eigen::VectorXcd grad = 2.0 * (cols * weights);
    grad -= (x.dot(grad).real() / radius2) * x;
    const double gnorm = grad.norm();
    out.iterations = it;
    if (gnorm <= opts.step_tol && !clamped) {
      out.converged = true;
      break;
    }
    if (clamped) {
      Eigen::VectorXcd kick(n);
      for (int i = 0; i < n; ++i) kick(i) = rng.complex_normal();
      kick -= (x.dot(kick).real() / radius2) * x;
      x = retract(x + 1e-3 * std::sqrt(radius2) / kick.norm() * kick);
      detail::fix_phase(x);
      f = objective_product(v, x);
      out.objective_trace.push_back(f);
      continue;
    }

    bool moved = false;
    double s = std::min(step * 4.0, 1e6);
    while (s > 1e-20) {
      Eigen::VectorXcd trial = retract(x + s * grad);
      const double ft = objective_product(v, trial);
      if (std::isfinite(ft) && ft >= f + 1e-4 * s * gnorm * gnorm) {
        detail::fix_phase(trial);
        x = std::move(trial);
        f = ft;
        step = s;
        moved = true;
        break;
      }
      s *= 0.5;
    }
    out.objective_trace.push_back(f);
    if (!moved) {
      // No ascent at machine precision: treat as stationary.
      out.converged = gnorm <= std::sqrt(opts.step_tol);
      break;
    }
    out.iterations = it + 1;
  }
  out.x = x;
  out.objective_log = f;
  return out;
}

struct ConjectureOptions {
  int starts = 20;
  std::uint64_t seed = 0;
  std::int64_t k_rounds = 0;  // candidate roundings; 0 selects 64 n
  SolverOptions solver;
  SphereSearchOptions search;
};

/// Outcome of testing n!/n^n r(A) <= per(A) <= r(A) on one instance.
/// The upper end is never declared false from local search:
/// upper_status is "consistent" when the best value found already exceeds
/// per(A), and "unresolved" otherwise.
struct ConjectureReport {
  std::string instance_id;
  int n = 0;
  double log_r_lower = -std::numeric_limits<double>::infinity();
  double log_per = -std::numeric_limits<double>::infinity();
  double log_nu = -std::numeric_limits<double>::infinity();  // upper value of nu*
  double log_rounding = -std::numeric_limits<double>::infinity();
  bool lower_holds = false;
  bool upper_consistent = false;  // per <= nu*, necessary for the upper end
  bool counterexample_flag = false;  // per > nu* >= r(A)
  std::string upper_status;
};

inline ConjectureReport check_vdw_conjecture(const HermitianMatrix& a,
                                             const ConjectureOptions& opts = {},
                                             std::string instance_id = {}) {
  const int n = a.n();
  if (n > kExactPermanentCap) throw SizeError("check_vdw_conjecture: n above exact permanent cap");
  ConjectureReport rep;
  rep.instance_id = std::move(instance_id);
  rep.n = n;

  const double per = permanent_exact(a).value;
  rep.log_per = per > 0.0 ? std::log(per) : -std::numeric_limits<double>::infinity();
  const RelResult relx = rel(a, opts.solver);
  // Certified side of the duality gap, so r(A) <= nu* <= exp(log_nu).
  rep.log_nu = relx.certificate.log_mu_bound;
  const double log_base = log_factorial(n) - n * std::log(static_cast<double>(n));
  const double slack = 1e-8;

  if (!relx.zero_diagonal) {
    const std::int64_t k = opts.k_rounds > 0 ? opts.k_rounds : 64 * static_cast<std::int64_t>(n);
    std::vector<RoundedVector> draws;
    draws.reserve(static_cast<std::size_t>(k));
    for (std::int64_t j = 0; j < k; ++j) {
      CounterRng rng(opts.seed, static_cast<std::uint64_t>(j));
      draws.push_back(round_once(relx.solution.u, relx.factor, rng));
      draws.back().draw_index = j;
    }
    std::stable_sort(draws.begin(), draws.end(), [](const auto& l, const auto& r) {
      return l.objective_log > r.objective_log;
    });
    rep.log_rounding = draws.front().objective_log;
    rep.log_r_lower = rep.log_rounding;
    const int starts = std::min<int>(opts.starts, static_cast<int>(draws.size()));
    for (int s = 0; s < starts; ++s) {
      if (!std::isfinite(draws[static_cast<std::size_t>(s)].objective_log)) break;
      SphereSearchOptions search = opts.search;
      search.seed = opts.seed + static_cast<std::uint64_t>(s);
      const auto found = local_maximize_sphere(relx.factor, draws[static_cast<std::size_t>(s)].y, search);
      rep.log_r_lower = std::max(rep.log_r_lower, found.objective_log);
    }
  }

  auto leq = [&](double lhs, double rhs) {
    if (!std::isfinite(lhs) && lhs < 0) return true;
    return lhs <= rhs + slack * std::max(1.0, std::abs(rhs));
  };
  rep.lower_holds = leq(log_base + rep.log_r_lower, rep.log_per);
  rep.upper_consistent = leq(rep.log_per, rep.log_nu);
  rep.counterexample_flag = !rep.upper_consistent;
  rep.upper_status = leq(rep.log_per, rep.log_r_lower) ? "consistent" : "unresolved";
  return rep;
}

struct PateCheck {
  double lhs_log = 0.0;  // log per(A (x) J_k)
  double rhs_log = 0.0;  // k log per(A) + n log k!
  bool holds = false;
};

/// Kronecker product A (x) J_k: block (i, j) is A(i, j) times the all-ones k x k.
inline Eigen::MatrixXcd kron_all_ones(const Eigen::MatrixXcd& a, int k) {
  const Eigen::Index n = a.rows();
  Eigen::MatrixXcd out(n * k, n * k);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      out.block(i * k, j * k, k, k).setConstant(a(i, j));
    }
  }
  return out;
}

inline PateCheck check_pate(const HermitianMatrix& a, int k) {
  const int n = a.n();
  if (k < 1) throw DomainError("check_pate: k must be >= 1");
  if (n * k > kExactPermanentCap) throw SizeError("check_pate: n k above exact permanent cap");
  auto safe_log = [](double x) {
    return x > 0.0 ? std::log(x) : -std::numeric_limits<double>::infinity();
  };
  PateCheck out;
  out.lhs_log = safe_log(permanent_exact(kron_all_ones(a.matrix(), k)).value);
  out.rhs_log = k * safe_log(permanent_exact(a).value) + n * log_factorial(k);
  if (!std::isfinite(out.rhs_log) && out.rhs_log < 0) {
    out.holds = true;
  } else {
    out.holds = out.lhs_log >= out.rhs_log - 1e-9 * std::max(1.0, std::abs(out.rhs_log));
  }
  return out;
}

}  // namespace permcert
