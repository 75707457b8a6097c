#pragma once

// Reference computations used only by the tests. Everything here is
// deliberately naive and independent of the library code paths.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numeric>
#include <random>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

using Complex = std::complex<double>;

/// Sum over all n! permutations.
inline Complex permanent_by_permutations(const Eigen::MatrixXcd& a) {
  const int n = static_cast<int>(a.rows());
  std::vector<int> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), 0);
  Complex total = 0.0;
  do {
    Complex term = 1.0;
    for (int i = 0; i < n; ++i) term *= a(i, perm[static_cast<std::size_t>(i)]);
    total += term;
  } while (std::next_permutation(perm.begin(), perm.end()));
  return total;
}

/// Exact rational with 64-bit parts, enough for harmonic numbers up to ~20.
struct Fraction {
  std::int64_t num = 0;
  std::int64_t den = 1;

  Fraction operator+(const Fraction& o) const {
    const std::int64_t l = std::lcm(den, o.den);
    Fraction out{num * (l / den) + o.num * (l / o.den), l};
    const std::int64_t g = std::gcd(out.num, out.den);
    return {out.num / g, out.den / g};
  }
  double value() const { return static_cast<double>(num) / static_cast<double>(den); }
};

inline Fraction harmonic_fraction(int r) {
  Fraction h{0, 1};
  for (int k = 1; k <= r; ++k) h = h + Fraction{1, k};
  return h;
}

/// Test-side generator, separate from the library RNG.
class Gen {
 public:
  explicit Gen(std::uint64_t seed) : eng_(seed) {}

  double normal() { return norm_(eng_); }
  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(eng_); }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(eng_); }
  Complex complex_normal() { return {normal() * std::sqrt(0.5), normal() * std::sqrt(0.5)}; }

  Eigen::MatrixXcd complex_matrix(int rows, int cols) {
    Eigen::MatrixXcd m(rows, cols);
    for (int i = 0; i < rows; ++i)
      for (int j = 0; j < cols; ++j) m(i, j) = complex_normal();
    return m;
  }

  Eigen::MatrixXd real_matrix(int rows, int cols) {
    Eigen::MatrixXd m(rows, cols);
    for (int i = 0; i < rows; ++i)
      for (int j = 0; j < cols; ++j) m(i, j) = normal();
    return m;
  }

  /// A = W^H W with W complex rows x n, so rank(A) = min(rows, n).
  Eigen::MatrixXcd hpsd(int n, int rows = -1) {
    const Eigen::MatrixXcd w = complex_matrix(rows < 0 ? n : rows, n);
    Eigen::MatrixXcd a = w.adjoint() * w;
    return 0.5 * (a + a.adjoint());
  }

  /// Haar-ish unitary from the QR factorization of a Gaussian matrix.
  Eigen::MatrixXcd unitary(int n) {
    Eigen::HouseholderQR<Eigen::MatrixXcd> qr(complex_matrix(n, n));
    return qr.householderQ() * Eigen::MatrixXcd::Identity(n, n);
  }

  std::mt19937_64& engine() { return eng_; }

 private:
  std::mt19937_64 eng_;
  std::normal_distribution<double> norm_{0.0, 1.0};
};

/// Brute-force nu* for n = 2: P = [[1 + s, w], [conj(w), 1 - s]] with
/// s^2 + |w|^2 <= 1 covers every trace-2 PSD matrix. Grid over the disk
/// (s, |w|) and the phase of w.
inline double nu_star_grid_2x2(const Eigen::Matrix2cd& v, int steps = 200) {
  double best = 0.0;
  const double pi = std::acos(-1.0);
  for (int a = 0; a <= steps; ++a) {
    const double s = -1.0 + 2.0 * a / steps;
    const double rmax = std::sqrt(std::max(0.0, 1.0 - s * s));
    for (int b = 0; b <= steps / 4; ++b) {
      const double r = rmax * b / (steps / 4);
      for (int c = 0; c < steps / 2; ++c) {
        const Complex w = std::polar(r, 2.0 * pi * c / (steps / 2));
        Eigen::Matrix2cd p;
        p << 1.0 + s, w, std::conj(w), 1.0 - s;
        double prod = 1.0;
        for (int i = 0; i < 2; ++i) prod *= (v.col(i).adjoint() * p * v.col(i))(0, 0).real();
        best = std::max(best, prod);
      }
    }
  }
  return best;
}

}  // namespace oracle
