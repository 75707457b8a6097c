#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <sstream>
#include <vector>

#include <Eigen/Dense>

#include "permcert/errors.hpp"
#include "permcert/hermitian.hpp"

namespace permcert {

inline constexpr double kCertificateInflation = 1e-8;

struct SolverOptions {
  int max_iter = 0;  // 0 selects 50 n^2
  double gap_tol = 1e-7;
  double min_form_floor = 1e-300;
  // Re-optimize over the face spanned by the current support after every
  // conditional-gradient step.
  bool fully_corrective = true;
  // Eigenvalues of P below support_tol * lambda_max are dropped from the
  // face basis and from the reported factor U.
  double support_tol = 1e-9;
};

struct IterateRecord {
  double log_nu = 0.0;
  double log_mu_bound = 0.0;
};

/// Feasible point of max prod v_i^H P v_i s.t. tr P = n, P >= 0.
struct RelaxationSolution {
  HermitianMatrix p;
  Eigen::MatrixXcd u;  // P = U U^H, n x r
  double log_nu = 0.0;
  double log_mu_bound = 0.0;
  double gap_ratio = 1.0;
  int iterations = 0;
  bool converged = false;
  std::vector<IterateRecord> history;
};

/// Diagonal D = Diag(d) with A <= D, built from weights alpha with
/// prod alpha_i = 1 and lambda = lambda_max(V Diag(alpha) V^H).
struct DiagonalCertificate {
  Eigen::VectorXd d;  // lambda / alpha_i, before inflation
  double lambda = 0.0;
  Eigen::VectorXd alpha;
  double inflation = kCertificateInflation;
  bool validated = false;
  double log_mu_bound = 0.0;  // n log lambda
  double log_upper = 0.0;     // sum log(d_i (1 + inflation)), the reported bound
};

namespace detail {

inline Eigen::VectorXd quadratic_forms(const Eigen::MatrixXcd& columns,
                                       const Eigen::MatrixXcd& p) {
  return (columns.adjoint() * p * columns).diagonal().real();
}

inline double sum_log(const Eigen::VectorXd& q) {
  double acc = 0.0;
  for (Eigen::Index i = 0; i < q.size(); ++i) acc += std::log(q(i));
  return acc;
}

// Exact maximizer over [0, 1] of h(t) = sum log((1-t) q_i + t s_i), which is
// concave. Safeguarded Newton on h' inside a shrinking bracket, bisection as
// fallback.
inline double concave_line_search(const Eigen::VectorXd& q,
                                  const Eigen::VectorXd& s) {
  auto slope = [&](double t, double* curvature) {
    double d1 = 0.0;
    double d2 = 0.0;
    for (Eigen::Index i = 0; i < q.size(); ++i) {
      const double diff = s(i) - q(i);
      const double val = (1.0 - t) * q(i) + t * s(i);
      d1 += diff / val;
      d2 -= diff * diff / (val * val);
    }
    if (curvature) *curvature = d2;
    return d1;
  };
  if (slope(0.0, nullptr) <= 0.0) return 0.0;
  if (s.minCoeff() > 0.0 && slope(1.0, nullptr) >= 0.0) return 1.0;

  double lo = 0.0;
  double hi = 1.0;
  double t = 0.5;
  for (int it = 0; it < 200; ++it) {
    double curv = 0.0;
    const double d1 = slope(t, &curv);
    if (d1 > 0.0) {
      lo = t;
    } else {
      hi = t;
    }
    if (hi - lo <= 1e-16 * std::max(1.0, hi) || d1 == 0.0) break;
    double next = curv < 0.0 ? t - d1 / curv : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - t) <= 1e-17) break;
    t = next;
  }
  return t;
}

// Hessian of -log det at W in Hermitian coordinates,
// H[a][b] = Re tr(W^-1 E_a W^-1 E_b), given W^-1. Each basis element has at
// most two nonzero entries, so W^-1 E_a W^-1 is a sum of two outer products.
inline Eigen::MatrixXd barrier_hessian(const Eigen::MatrixXcd& w_inv) {
  const Eigen::Index k = w_inv.rows();
  const Eigen::Index dim = k * k;
  Eigen::MatrixXd hess(dim, dim);
  Eigen::MatrixXcd m(k, k);
  Eigen::Index a = 0;
  for (Eigen::Index j = 0; j < k; ++j) {
    m.noalias() = w_inv.col(j) * w_inv.row(j);
    hess.col(a++) = hermitian_coords(m);
  }
  const double inv_sqrt2 = 1.0 / std::numbers::sqrt2;
  const Complex imag_unit(0.0, 1.0);
  for (Eigen::Index j = 0; j < k; ++j) {
    for (Eigen::Index l = j + 1; l < k; ++l) {
      m.noalias() = w_inv.col(j) * w_inv.row(l);
      const Eigen::MatrixXcd swapped = w_inv.col(l) * w_inv.row(j);
      hess.col(a++) = hermitian_coords(inv_sqrt2 * (m + swapped));
      hess.col(a++) = hermitian_coords((imag_unit * inv_sqrt2) * (m - swapped));
    }
  }
  return hess;
}

// Log-barrier path following for
//   max sum_i log(b_i^H W b_i)  s.t.  W >= 0, tr W = trace,
// with b_i the columns of `b` (k x n). Newton steps run on the k^2 real
// coordinates of W with the trace constraint handled through the KKT system.
// Returns nullopt on numerical breakdown.
inline std::optional<Eigen::MatrixXcd> solve_face(const Eigen::MatrixXcd& b,
                                                  Eigen::MatrixXcd w,
                                                  double trace) {
  const Eigen::Index k = b.rows();
  const Eigen::Index n = b.cols();
  const Eigen::Index dim = k * k;

  Eigen::MatrixXd g(dim, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    g.col(i) = hermitian_coords(b.col(i) * b.col(i).adjoint());
  }
  const Eigen::VectorXd ones_coords =
      hermitian_coords(Eigen::MatrixXcd::Identity(k, k));

  auto barrier_value = [&](const Eigen::MatrixXcd& x, double mu,
                           double* value) -> bool {
    Eigen::LLT<Eigen::MatrixXcd> llt(x);
    if (llt.info() != Eigen::Success) return false;
    double logdet = 0.0;
    for (Eigen::Index j = 0; j < k; ++j) {
      const double dj = llt.matrixLLT()(j, j).real();
      if (!(dj > 0.0)) return false;
      logdet += 2.0 * std::log(dj);
    }
    const Eigen::VectorXd q = g.transpose() * hermitian_coords(x);
    if (!(q.minCoeff() > 0.0)) return false;
    *value = -sum_log(q) - mu * logdet;
    return std::isfinite(*value);
  };

  const double mu_final = 1e-11;
  for (double mu = 1.0; mu >= mu_final * 0.999; mu *= 0.05) {
    const bool last = mu * 0.05 < mu_final * 0.999;
    const double centering_tol = last ? 1e-14 : 1e-6;
    for (int newton = 0; newton < 80; ++newton) {
      double phi = 0.0;
      if (!barrier_value(w, mu, &phi)) return std::nullopt;
      const Eigen::VectorXd q = g.transpose() * hermitian_coords(w);
      const Eigen::MatrixXcd w_inv =
          w.llt().solve(Eigen::MatrixXcd::Identity(k, k));

      Eigen::VectorXd grad = -g * q.cwiseInverse() - mu * hermitian_coords(w_inv);
      Eigen::MatrixXd hess =
          g * q.cwiseAbs2().cwiseInverse().asDiagonal() * g.transpose();
      hess += mu * barrier_hessian(w_inv);

      Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(dim + 1, dim + 1);
      kkt.topLeftCorner(dim, dim) = 0.5 * (hess + hess.transpose());
      kkt.block(0, dim, dim, 1) = ones_coords;
      kkt.block(dim, 0, 1, dim) = ones_coords.transpose();
      Eigen::VectorXd rhs = Eigen::VectorXd::Zero(dim + 1);
      rhs.head(dim) = -grad;
      const Eigen::VectorXd step = kkt.partialPivLu().solve(rhs).head(dim);
      if (!step.allFinite()) return std::nullopt;

      const double decrement = -grad.dot(step);
      if (decrement <= centering_tol) break;

      const Eigen::MatrixXcd dir = hermitian_from_coords(step, k);
      double alpha = 1.0;
      bool accepted = false;
      while (alpha > 1e-14) {
        const Eigen::MatrixXcd trial = w + alpha * dir;
        double phi_trial = 0.0;
        if (barrier_value(trial, mu, &phi_trial) &&
            phi_trial <= phi - 0.25 * alpha * decrement) {
          w = trial;
          accepted = true;
          break;
        }
        alpha *= 0.5;
      }
      if (!accepted) break;
    }
  }
  // Remove drift in the trace from accumulated round-off.
  w *= trace / w.trace().real();
  return w;
}

// Appends x to the orthonormal columns of `basis` (Gram-Schmidt, twice).
inline Eigen::MatrixXcd append_orthonormal(const Eigen::MatrixXcd& basis,
                                           const Eigen::VectorXcd& x) {
  Eigen::VectorXcd r = x;
  for (int pass = 0; pass < 2; ++pass) r -= basis * (basis.adjoint() * r);
  const double norm = r.norm();
  if (norm <= 1e-8 * x.norm()) return basis;
  Eigen::MatrixXcd out(basis.rows(), basis.cols() + 1);
  out << basis, r / norm;
  return out;
}

}  // namespace detail

/// Dual certificate for any feasible P: alpha_i proportional to
/// 1 / (v_i^H P v_i) normalized to prod alpha_i = 1. The returned bound
/// n log lambda dominates log prod v_i^H P v_i and meets it at the optimum.
inline DiagonalCertificate extract_diagonal_certificate(const GramFactor& v,
                                                        const Eigen::MatrixXcd& p) {
  const int n = v.n();
  const Eigen::VectorXd q = detail::quadratic_forms(v.matrix(), p);
  if (!(q.minCoeff() > 0.0)) {
    throw DomainError("extract_diagonal_certificate: some v_i^H P v_i is not positive");
  }
  Eigen::VectorXd log_q = q.array().log();
  const double log_c = log_q.mean();

  DiagonalCertificate cert;
  cert.alpha = (log_c - log_q.array()).exp();
  const Eigen::MatrixXcd weighted =
      v.matrix() * cert.alpha.cast<Complex>().asDiagonal() * v.matrix().adjoint();
  cert.lambda = eigh(weighted).values(0);
  cert.d = cert.lambda * cert.alpha.cwiseInverse();
  cert.log_mu_bound = static_cast<double>(n) * std::log(cert.lambda);

  const Eigen::VectorXd inflated = cert.d * (1.0 + cert.inflation);
  cert.log_upper = detail::sum_log(inflated);
  const HermitianMatrix dmat(inflated.cast<Complex>().asDiagonal().toDenseMatrix());
  cert.validated = loewner_leq(v.gram(), dmat, 0.0);
  return cert;
}

/// Conditional-gradient ascent on sum log(v_i^H P v_i) over the spectrahedron
/// {P >= 0, tr P = n}. Each iteration takes the step towards n w w^H (w the
/// top eigenvector of the gradient) with an exact line search, then
/// optionally re-optimizes on the face spanned by the current support.
/// Stops once the diagonal certificate closes the gap to 1 + gap_tol.
inline RelaxationSolution solve_dual(const GramFactor& v, const SolverOptions& opts = {}) {
  const int n = v.n();
  const Eigen::MatrixXcd& cols = v.matrix();
  for (int i = 0; i < n; ++i) {
    if (!(cols.col(i).squaredNorm() > 0.0)) {
      std::ostringstream msg;
      msg << "solve_dual: diagonal entry " << i << " is zero";
      throw DomainError(msg.str());
    }
  }
  const int max_iter = opts.max_iter > 0 ? opts.max_iter : 50 * n * n;
  const double log_gap_target = std::log1p(opts.gap_tol);

  RelaxationSolution sol;
  Eigen::MatrixXcd p = Eigen::MatrixXcd::Identity(n, n);

  auto evaluate = [&](const Eigen::MatrixXcd& x) {
    const Eigen::VectorXd q = detail::quadratic_forms(cols, x);
    if (!(q.minCoeff() >= opts.min_form_floor)) {
      std::ostringstream msg;
      msg << "solve_dual: quadratic form fell to " << q.minCoeff();
      throw NumericError(msg.str());
    }
    return q;
  };

  Eigen::VectorXd q = evaluate(p);
  double log_nu = detail::sum_log(q);
  // Orthonormal span of recent conditional-gradient directions; the face
  // problem is solved over it.
  Eigen::MatrixXcd basis(n, 0);
  const Eigen::Index face_cap = std::min<Eigen::Index>(
      n, std::max<Eigen::Index>(
             6, static_cast<Eigen::Index>(std::ceil(std::sqrt(n + 1.0))) + 3));
  for (int it = 0; it < max_iter; ++it) {
    const Eigen::MatrixXcd grad =
        cols * q.cwiseInverse().cast<Complex>().asDiagonal() * cols.adjoint();
    const auto eig = eigh(grad);
    const double top = eig.values(0);
    const double log_mu = log_nu + n * std::log(top);
    sol.history.push_back({log_nu, log_mu});
    sol.iterations = it;
    if (log_mu - log_nu <= log_gap_target) {
      sol.converged = true;
      break;
    }

    const Eigen::VectorXcd w = eig.vectors.col(0);
    const Eigen::VectorXd s =
        static_cast<double>(n) * (cols.adjoint() * w).cwiseAbs2();
    const double t = detail::concave_line_search(q, s);
    p = (1.0 - t) * p + (t * n) * (w * w.adjoint());
    p = 0.5 * (p + p.adjoint()).eval();
    q = evaluate(p);
    log_nu = detail::sum_log(q);

    if (opts.fully_corrective) {
      // New directions: every gradient eigenvector with eigenvalue above 1
      // violates optimality; take up to two of them.
      int fresh = 1;
      while (fresh < 2 && fresh < n && eig.values(fresh) > 1.0) ++fresh;
      if (basis.cols() + fresh > face_cap) {
        const auto be = eigh(basis.adjoint() * p * basis);
        basis = basis * be.vectors.leftCols(face_cap - fresh);
      }
      for (int j = 0; j < fresh; ++j) {
        basis = detail::append_orthonormal(basis, eig.vectors.col(j));
      }
      const Eigen::Index k = basis.cols();
      Eigen::MatrixXcd w0 = basis.adjoint() * p * basis;
      w0 = 0.9 * w0 + (0.1 * w0.trace().real() / static_cast<double>(k)) *
                          Eigen::MatrixXcd::Identity(k, k);
      w0 *= static_cast<double>(n) / w0.trace().real();
      if (auto face = detail::solve_face(basis.adjoint() * cols, w0, n)) {
        Eigen::MatrixXcd candidate = basis * (*face) * basis.adjoint();
        candidate = 0.5 * (candidate + candidate.adjoint()).eval();
        const Eigen::VectorXd qc = detail::quadratic_forms(cols, candidate);
        if (qc.minCoeff() >= opts.min_form_floor) {
          const double log_nu_c = detail::sum_log(qc);
          if (log_nu_c > log_nu) {
            p = candidate;
            q = qc;
            log_nu = log_nu_c;
          }
        }
      }
    }
    sol.iterations = it + 1;
  }

  // Drop negligible eigen-directions when doing so keeps the gap closed.
  auto pe = eigh(p);
  const double cutoff = opts.support_tol * pe.values(0);
  Eigen::Index rank = 0;
  while (rank < n && pe.values(rank) > cutoff) ++rank;
  if (sol.converged && rank < n) {
    Eigen::VectorXd vals = pe.values.head(rank);
    vals *= static_cast<double>(n) / vals.sum();
    const Eigen::MatrixXcd trimmed = pe.vectors.leftCols(rank) *
        vals.cast<Complex>().asDiagonal() * pe.vectors.leftCols(rank).adjoint();
    const Eigen::VectorXd qt = detail::quadratic_forms(cols, trimmed);
    if (qt.minCoeff() > 0.0) {
      const double log_nu_t = detail::sum_log(qt);
      const auto cert = extract_diagonal_certificate(v, trimmed);
      if (log_nu_t >= log_nu - 1e-12 * std::max(1.0, std::abs(log_nu)) &&
          cert.log_mu_bound - log_nu_t <= log_gap_target) {
        p = trimmed;
        log_nu = log_nu_t;
        pe = eigh(p);
      }
    }
  }

  sol.p = HermitianMatrix(p);
  sol.u = pe.vectors.leftCols(rank) *
          pe.values.head(rank).cwiseMax(0.0).cwiseSqrt().cast<Complex>().asDiagonal();
  sol.log_nu = log_nu;
  const auto cert = extract_diagonal_certificate(v, sol.p.matrix());
  sol.log_mu_bound = cert.log_mu_bound;
  sol.gap_ratio = std::exp(std::min(700.0, sol.log_mu_bound - sol.log_nu));
  sol.converged = sol.log_mu_bound - sol.log_nu <= log_gap_target;
  return sol;
}

/// Result of the full relaxation pipeline. value_log is -inf when A has a
/// zero diagonal entry (then per(A) = rel(A) = 0).
struct RelResult {
  double value_log = 0.0;
  GramFactor factor;
  RelaxationSolution solution;
  DiagonalCertificate certificate;
  bool zero_diagonal = false;
};

inline constexpr double kPsdCheckTol = 1e-9;

inline RelResult rel(const HermitianMatrix& a, const SolverOptions& opts = {}) {
  const auto psd = check_hpsd(a, kPsdCheckTol);
  if (!psd.psd) {
    std::ostringstream msg;
    msg << "rel: matrix is not positive semidefinite (min eigenvalue "
        << psd.min_eigenvalue << ")";
    throw DomainError(msg.str());
  }
  const int n = a.n();
  RelResult out;
  out.factor = factorize_gram(a);

  std::vector<int> live;
  for (int i = 0; i < n; ++i) {
    if (a.diag(i) > 0.0) live.push_back(i);
  }
  if (static_cast<int>(live.size()) < n) {
    // A PSD matrix with A_ii = 0 has a zero i-th row and column, so D_ii = 0
    // is admissible and prod D_ii = 0.
    out.zero_diagonal = true;
    out.value_log = -std::numeric_limits<double>::infinity();
    auto& sol = out.solution;
    sol.p = HermitianMatrix::identity(n);
    sol.u = Eigen::MatrixXcd::Identity(n, n);
    sol.log_nu = out.value_log;
    sol.log_mu_bound = out.value_log;
    sol.converged = true;

    auto& cert = out.certificate;
    const double top = std::max(eigh(a).values(0), 0.0);
    cert.lambda = top;
    cert.d = Eigen::VectorXd::Zero(n);
    cert.alpha = Eigen::VectorXd::Ones(n);
    for (int i : live) cert.d(i) = top;
    cert.log_mu_bound = out.value_log;
    cert.log_upper = out.value_log;
    bool zero_rows_clean = true;
    const double scale = std::max(a.matrix().cwiseAbs().maxCoeff(), kAbsoluteFloor);
    for (int i = 0; i < n; ++i) {
      if (a.diag(i) > 0.0) continue;
      zero_rows_clean = zero_rows_clean &&
                        a.matrix().row(i).cwiseAbs().maxCoeff() <= 1e-12 * scale;
    }
    bool live_ok = true;
    if (!live.empty()) {
      const Eigen::Index m = static_cast<Eigen::Index>(live.size());
      Eigen::MatrixXcd sub(m, m);
      for (Eigen::Index r = 0; r < m; ++r) {
        for (Eigen::Index c = 0; c < m; ++c) sub(r, c) = a(live[r], live[c]);
      }
      const Eigen::MatrixXcd dsub = (top * (1.0 + cert.inflation)) *
                                    Eigen::MatrixXcd::Identity(m, m);
      live_ok = loewner_leq(HermitianMatrix(sub), HermitianMatrix(dsub), 0.0);
    }
    cert.validated = zero_rows_clean && live_ok;
    return out;
  }

  out.solution = solve_dual(out.factor, opts);
  out.certificate = extract_diagonal_certificate(out.factor, out.solution.p.matrix());
  out.value_log = out.solution.log_nu;
  return out;
}

}  // namespace permcert
