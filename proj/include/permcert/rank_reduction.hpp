#pragma once

#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "permcert/errors.hpp"
#include "permcert/hermitian.hpp"

namespace permcert {

/// Number of eigenvalues above tol * lambda_max(P).
inline int numeric_rank(const HermitianMatrix& p, double tol = 1e-9) {
  const auto eig = eigh(p);
  const double top = eig.values(0);
  if (!(top > 0.0)) return 0;
  int rank = 0;
  for (Eigen::Index k = 0; k < eig.values.size(); ++k) {
    if (eig.values(k) > tol * top) ++rank;
  }
  return rank;
}

struct ReductionStep {
  double null_residual = 0.0;  // sigma_min / sigma_max of the functional matrix
  double boundary_step = 0.0;  // t with lambda_min(I + t Delta) = 0
};

struct ReductionTrace {
  int initial_rank = 0;
  int final_rank = 0;
  std::vector<ReductionStep> steps;
  double objective_drift = 0.0;  // |log prod q'_i - log prod q_i|
  double functional_drift = 0.0;  // max_i |q'_i - q_i| / (1 + |q_i|), trace included
  bool aborted = false;
};

struct ReductionResult {
  HermitianMatrix p;
  Eigen::MatrixXcd u;  // P' = U U^H
  ReductionTrace trace;
};

namespace detail {

inline Eigen::MatrixXcd psd_factor(const HermitianMatrix& p, double tol) {
  const auto eig = eigh(p);
  const double top = eig.values(0);
  Eigen::Index rank = 0;
  while (rank < eig.values.size() && eig.values(rank) > tol * top) ++rank;
  return eig.vectors.leftCols(rank) *
         eig.values.head(rank).cwiseSqrt().cast<Complex>().asDiagonal();
}

// Values of the preserved functionals tr(v_i v_i^H P), i = 1..n, then tr P.
inline Eigen::VectorXd preserved_functionals(const Eigen::MatrixXcd& cols,
                                             const Eigen::MatrixXcd& u) {
  const Eigen::Index n = cols.cols();
  Eigen::VectorXd out(n + 1);
  out.head(n) = (u.adjoint() * cols).colwise().squaredNorm().transpose();
  out(n) = u.squaredNorm();
  return out;
}

}  // namespace detail

/// Moves P = U U^H along directions U Delta U^H that leave every
/// tr(v_i v_i^H P) and tr P unchanged, stopping each move at the PSD
/// boundary, until rank^2 <= n + 1. The objective prod v_i^H P v_i is a
/// function of the preserved values and so does not change.
inline ReductionResult reduce_rank(const GramFactor& v, const HermitianMatrix& p,
                                   double tol = 1e-9) {
  if (v.n() != p.n()) throw DimensionError("reduce_rank: dimension mismatch");
  const Eigen::Index n = v.n();
  const Eigen::Index d = n + 1;
  const Eigen::MatrixXcd& cols = v.matrix();

  ReductionResult out;
  Eigen::MatrixXcd u = detail::psd_factor(p, tol);
  const Eigen::VectorXd start = detail::preserved_functionals(cols, u);
  out.trace.initial_rank = static_cast<int>(u.cols());

  while (u.cols() * u.cols() > d) {
    const Eigen::Index r = u.cols();
    // Coefficients of the d real functionals on Hermitian r x r Delta,
    // restricted to the first min(r^2, d + 1) coordinates: d + 1 unknowns
    // against d equations always leave a null direction.
    const Eigen::Index m = std::min(r * r, d + 1);
    Eigen::MatrixXd coeffs(d, m);
    const Eigen::MatrixXcd b = u.adjoint() * cols;
    for (Eigen::Index i = 0; i < n; ++i) {
      coeffs.row(i) = hermitian_coords(b.col(i) * b.col(i).adjoint()).head(m).transpose();
    }
    coeffs.row(n) = hermitian_coords(u.adjoint() * u).head(m).transpose();

    Eigen::JacobiSVD<Eigen::MatrixXd> svd(coeffs, Eigen::ComputeFullV);
    const Eigen::VectorXd sv = svd.singularValues();
    const double sigma_max = sv.size() > 0 ? sv(0) : 0.0;
    // Right-singular vector of the smallest singular value; with m > d the
    // last column of V spans (part of) the kernel.
    Eigen::VectorXd delta_coords = Eigen::VectorXd::Zero(r * r);
    delta_coords.head(m) = svd.matrixV().col(m - 1);
    const double residual =
        (coeffs * delta_coords.head(m)).norm() / std::max(sigma_max, kAbsoluteFloor);

    ReductionStep step;
    step.null_residual = residual;
    if (!(residual <= 1e-10)) {
      out.trace.aborted = true;
      out.trace.steps.push_back(step);
      break;
    }

    const Eigen::MatrixXcd delta = hermitian_from_coords(delta_coords, r);
    const auto de = eigh(delta);
    const double lambda_min = de.values(r - 1);
    if (!(lambda_min < 0.0)) {
      // tr(U^H U Delta) = 0 with U^H U > 0 forces a negative eigenvalue.
      out.trace.aborted = true;
      out.trace.steps.push_back(step);
      break;
    }
    step.boundary_step = -1.0 / lambda_min;

    Eigen::VectorXd moved = Eigen::VectorXd::Ones(r) + step.boundary_step * de.values;
    Eigen::Index keep = 0;
    while (keep < r && moved(keep) > 1e-12) ++keep;
    u = u * de.vectors.leftCols(keep) *
        moved.head(keep).cwiseSqrt().cast<Complex>().asDiagonal();
    out.trace.steps.push_back(step);
  }

  if (out.trace.aborted) {
    out.p = p;
    out.u = detail::psd_factor(p, tol);
    out.trace.final_rank = out.trace.initial_rank;
    return out;
  }

  const Eigen::VectorXd finish = detail::preserved_functionals(cols, u);
  double drift = 0.0;
  for (Eigen::Index i = 0; i <= n; ++i) {
    drift = std::max(drift, std::abs(finish(i) - start(i)) / (1.0 + std::abs(start(i))));
  }
  out.trace.functional_drift = drift;
  double log_start = 0.0;
  double log_finish = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    log_start += std::log(start(i));
    log_finish += std::log(finish(i));
  }
  out.trace.objective_drift = std::abs(log_finish - log_start);
  out.u = u;
  out.p = HermitianMatrix(u * u.adjoint());
  out.trace.final_rank = static_cast<int>(u.cols());
  return out;
}

}  // namespace permcert
