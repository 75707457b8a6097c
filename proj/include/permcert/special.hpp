#pragma once

#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include <Eigen/Dense>

#include "permcert/errors.hpp"
#include "permcert/hermitian.hpp"
#include "permcert/rank_reduction.hpp"

namespace permcert {

/// Circulant matrix with A(i, j) = first_row[(j - i) mod n].
inline Eigen::MatrixXcd make_circulant(const std::vector<Complex>& first_row) {
  const auto n = static_cast<Eigen::Index>(first_row.size());
  Eigen::MatrixXcd a(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      a(i, j) = first_row[static_cast<std::size_t>(((j - i) % n + n) % n)];
    }
  }
  return a;
}

inline bool is_circulant(const HermitianMatrix& a, double tol = 1e-12) {
  const int n = a.n();
  const double scale = std::max(a.matrix().cwiseAbs().maxCoeff(), kAbsoluteFloor);
  for (int i = 1; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (std::abs(a(i, j) - a(0, ((j - i) % n + n) % n)) > tol * scale) return false;
    }
  }
  return true;
}

/// Eigenvalues of a circulant from the DFT of its first row:
/// lambda_k = sum_m c_m w^{mk}, w = exp(2 pi i / n), eigenvector (w^{jk})_j.
inline std::vector<Complex> circulant_eigenvalues(const std::vector<Complex>& first_row) {
  const auto n = first_row.size();
  std::vector<Complex> out(n);
  for (std::size_t k = 0; k < n; ++k) {
    Complex acc = 0.0;
    for (std::size_t m = 0; m < n; ++m) {
      const double angle = 2.0 * std::numbers::pi * static_cast<double>((m * k) % n) /
                           static_cast<double>(n);
      acc += first_row[m] * std::polar(1.0, angle);
    }
    out[k] = acc;
  }
  return out;
}

struct CirculantSolution {
  HermitianMatrix p_star;  // rank one, trace n
  double log_rel = 0.0;
  double lambda_max = 0.0;
  double slackness_residual = 0.0;  // |tr(P V V^H) - n lambda_max|
};

/// For an HPSD circulant, D = lambda_max I is an optimal diagonal bound and
/// a Fourier vector of the top eigenvalue gives a rank-one optimal P.
inline CirculantSolution solve_circulant(const HermitianMatrix& a) {
  if (!is_circulant(a)) throw DomainError("solve_circulant: matrix is not circulant");
  const int n = a.n();
  std::vector<Complex> row(static_cast<std::size_t>(n));
  for (int j = 0; j < n; ++j) row[static_cast<std::size_t>(j)] = a(0, j);
  const auto eigs = circulant_eigenvalues(row);
  std::size_t top = 0;
  for (std::size_t k = 1; k < eigs.size(); ++k) {
    if (eigs[k].real() > eigs[top].real()) top = k;
  }
  for (const auto& e : eigs) {
    if (e.real() < -kClampTol * std::max(std::abs(eigs[top].real()), kAbsoluteFloor)) {
      throw DomainError("solve_circulant: matrix is not positive semidefinite");
    }
  }

  Eigen::VectorXcd fourier(n);
  for (int j = 0; j < n; ++j) {
    const double angle = 2.0 * std::numbers::pi *
                         static_cast<double>((static_cast<std::size_t>(j) * top) %
                                             static_cast<std::size_t>(n)) /
                         static_cast<double>(n);
    fourier(j) = std::polar(1.0, angle);
  }
  // ||fourier||^2 = n, so fourier fourier^H already has trace n.
  CirculantSolution out;
  out.lambda_max = eigs[top].real();
  out.p_star = HermitianMatrix(fourier * fourier.adjoint());
  out.log_rel = n * std::log(out.lambda_max);

  const GramFactor v = factorize_gram(a);
  const Complex inner = (out.p_star.matrix() * v.matrix() * v.matrix().adjoint()).trace();
  out.slackness_residual = std::abs(inner.real() - n * out.lambda_max);
  return out;
}

/// rank(P*) <= rank(A); returns the numeric rank of A.
inline int rank_bound_structural(const HermitianMatrix& a, double tol = 1e-9) {
  return numeric_rank(a, tol);
}

}  // namespace permcert
