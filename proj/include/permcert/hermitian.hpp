#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <sstream>
#include <string>

#include <Eigen/Dense>

#include "permcert/errors.hpp"

namespace permcert {

using Complex = std::complex<double>;

inline constexpr double kHermitianTol = 1e-12;
inline constexpr double kReconstructTol = 1e-10;
inline constexpr double kAbsoluteFloor = 1e-14;
inline constexpr double kClampTol = 1e-10;

/// Dense complex Hermitian matrix. Construction checks the Hermitian
/// property relative to the largest entry and then stores the exact
/// Hermitian part, so diagonal entries are real.
class HermitianMatrix {
 public:
  HermitianMatrix() = default;

  explicit HermitianMatrix(const Eigen::MatrixXcd& entries) {
    if (entries.rows() != entries.cols()) {
      std::ostringstream msg;
      msg << "expected a square matrix, got " << entries.rows() << "x"
          << entries.cols();
      throw DimensionError(msg.str());
    }
    if (entries.rows() == 0) throw DimensionError("matrix must be non-empty");
    const double scale =
        std::max(entries.cwiseAbs().maxCoeff(), kAbsoluteFloor);
    const double skew = (entries - entries.adjoint()).cwiseAbs().maxCoeff();
    if (!(skew <= kHermitianTol * scale)) {
      std::ostringstream msg;
      msg << "matrix is not Hermitian: max |M - M^H| = " << skew
          << " (scale " << scale << ")";
      throw DomainError(msg.str());
    }
    entries_ = 0.5 * (entries + entries.adjoint());
  }

  static HermitianMatrix from_real(const Eigen::MatrixXd& entries) {
    return HermitianMatrix(entries.cast<Complex>());
  }

  static HermitianMatrix identity(int n) {
    return HermitianMatrix(Eigen::MatrixXcd::Identity(n, n));
  }

  int n() const { return static_cast<int>(entries_.rows()); }
  const Eigen::MatrixXcd& matrix() const { return entries_; }
  Complex operator()(int i, int j) const { return entries_(i, j); }
  double diag(int i) const { return entries_(i, i).real(); }

 private:
  Eigen::MatrixXcd entries_;
};

/// Square factor V with A = V^H V; column i is the vector v_i.
class GramFactor {
 public:
  GramFactor() = default;

  explicit GramFactor(Eigen::MatrixXcd columns) : columns_(std::move(columns)) {
    if (columns_.rows() != columns_.cols()) {
      throw DimensionError("Gram factor must be square (pad with zeros)");
    }
  }

  int n() const { return static_cast<int>(columns_.cols()); }
  const Eigen::MatrixXcd& matrix() const { return columns_; }
  auto column(int i) const { return columns_.col(i); }

  HermitianMatrix gram() const {
    return HermitianMatrix(columns_.adjoint() * columns_);
  }

 private:
  Eigen::MatrixXcd columns_;
};

struct EigDecomposition {
  Eigen::VectorXd values;    // descending
  Eigen::MatrixXcd vectors;  // column k pairs with values(k)

  Eigen::MatrixXcd reconstruct() const {
    return vectors * values.cast<Complex>().asDiagonal() * vectors.adjoint();
  }
};

/// Eigendecomposition of a Hermitian matrix, eigenvalues descending. Each
/// eigenvector is rotated so its first non-negligible component is real
/// positive.
inline EigDecomposition eigh(const Eigen::MatrixXcd& m) {
  if (m.rows() != m.cols()) throw DimensionError("eigh needs a square matrix");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(m);
  if (solver.info() != Eigen::Success) {
    std::ostringstream msg;
    msg << "Hermitian eigensolver did not converge (n = " << m.rows() << ")";
    throw NumericError(msg.str());
  }
  const Eigen::Index n = m.rows();
  EigDecomposition out;
  out.values = solver.eigenvalues().reverse();
  out.vectors = solver.eigenvectors().rowwise().reverse();
  for (Eigen::Index k = 0; k < n; ++k) {
    auto v = out.vectors.col(k);
    const double cutoff = 1e-10 * v.norm();
    for (Eigen::Index i = 0; i < n; ++i) {
      const double mag = std::abs(v(i));
      if (mag > cutoff) {
        v *= std::conj(v(i)) / mag;
        v(i) = Complex(v(i).real(), 0.0);
        break;
      }
    }
  }
  return out;
}

inline EigDecomposition eigh(const HermitianMatrix& m) { return eigh(m.matrix()); }

/// Largest eigenvalue magnitude, floored at the absolute tolerance floor.
inline double spectral_scale(const Eigen::VectorXd& eigenvalues) {
  return std::max(eigenvalues.cwiseAbs().maxCoeff(), kAbsoluteFloor);
}

struct PsdReport {
  bool psd = false;
  double min_eigenvalue = 0.0;
  double max_abs_eigenvalue = 0.0;
};

inline PsdReport check_hpsd(const Eigen::MatrixXcd& m, double tol) {
  if (m.rows() != m.cols()) {
    std::ostringstream msg;
    msg << "check_hpsd: expected square matrix, got " << m.rows() << "x"
        << m.cols();
    throw DimensionError(msg.str());
  }
  const auto eig = eigh(m);
  PsdReport report;
  report.min_eigenvalue = eig.values.minCoeff();
  report.max_abs_eigenvalue = eig.values.cwiseAbs().maxCoeff();
  report.psd = report.min_eigenvalue >= -tol * spectral_scale(eig.values);
  return report;
}

inline PsdReport check_hpsd(const HermitianMatrix& m, double tol) {
  return check_hpsd(m.matrix(), tol);
}

/// Hermitian square root A^{1/2}, used as the canonical Gram factor.
inline GramFactor factorize_gram(const HermitianMatrix& a) {
  auto eig = eigh(a);
  const double scale = spectral_scale(eig.values);
  for (Eigen::Index k = 0; k < eig.values.size(); ++k) {
    const double lambda = eig.values(k);
    if (lambda < -kClampTol * scale) {
      std::ostringstream msg;
      msg << "matrix is not positive semidefinite: eigenvalue " << lambda
          << " (largest magnitude " << scale << ")";
      throw DomainError(msg.str());
    }
    eig.values(k) = std::sqrt(std::max(lambda, 0.0));
  }
  return GramFactor(eig.reconstruct());
}

/// A <= B in the Loewner order, up to tol times the larger spectral scale.
inline bool loewner_leq(const HermitianMatrix& a, const HermitianMatrix& b,
                        double tol) {
  if (a.n() != b.n()) {
    std::ostringstream msg;
    msg << "loewner_leq: dimension mismatch " << a.n() << " vs " << b.n();
    throw DimensionError(msg.str());
  }
  const double scale = std::max(spectral_scale(eigh(a).values),
                                spectral_scale(eigh(b).values));
  const double min_gap = eigh(b.matrix() - a.matrix()).values.minCoeff();
  return min_gap >= -tol * scale;
}

inline double relative_frobenius_error(const Eigen::MatrixXcd& approx,
                                       const Eigen::MatrixXcd& exact) {
  return (approx - exact).norm() / std::max(exact.norm(), kAbsoluteFloor);
}

// Real coordinates of k x k Hermitian matrices in the orthonormal basis
// (w.r.t. <X, Y> = Re tr(XY)): diagonal units first, then for each pair
// j < l the symmetric (E_jl + E_lj)/sqrt2 and antisymmetric
// i(E_jl - E_lj)/sqrt2 elements.
inline Eigen::VectorXd hermitian_coords(const Eigen::MatrixXcd& x) {
  const Eigen::Index k = x.rows();
  Eigen::VectorXd w(k * k);
  Eigen::Index pos = 0;
  for (Eigen::Index j = 0; j < k; ++j) w(pos++) = x(j, j).real();
  for (Eigen::Index j = 0; j < k; ++j) {
    for (Eigen::Index l = j + 1; l < k; ++l) {
      w(pos++) = std::numbers::sqrt2 * x(j, l).real();
      w(pos++) = std::numbers::sqrt2 * x(j, l).imag();
    }
  }
  return w;
}

inline Eigen::MatrixXcd hermitian_from_coords(const Eigen::VectorXd& w,
                                              Eigen::Index k) {
  Eigen::MatrixXcd x = Eigen::MatrixXcd::Zero(k, k);
  Eigen::Index pos = 0;
  for (Eigen::Index j = 0; j < k; ++j) x(j, j) = w(pos++);
  for (Eigen::Index j = 0; j < k; ++j) {
    for (Eigen::Index l = j + 1; l < k; ++l) {
      const Complex entry(w(pos), w(pos + 1));
      pos += 2;
      x(j, l) = entry / std::numbers::sqrt2;
      x(l, j) = std::conj(x(j, l));
    }
  }
  return x;
}

}  // namespace permcert
