#include <cmath>

#include <gtest/gtest.h>

#include "permcert/conjecture.hpp"
#include "permcert/special.hpp"
#include "support/oracles.hpp"

using namespace permcert;

TEST(LocalMaximizeSphere, DiagonalInstance) {
  Eigen::VectorXcd d(4);
  d << 1.0, 2.0, 3.0, 0.5;
  const GramFactor v = factorize_gram(HermitianMatrix(Eigen::MatrixXcd(d.asDiagonal())));
  oracle::Gen g(71);
  Eigen::VectorXcd x0 = g.complex_matrix(4, 1);
  const auto res = local_maximize_sphere(v, x0);
  EXPECT_TRUE(res.converged);
  for (int i = 0; i < 4; ++i) EXPECT_NEAR(std::abs(res.x(i)), 1.0, 1e-6);
  EXPECT_NEAR(res.objective_log, std::log(3.0), 1e-9);
}

TEST(LocalMaximizeSphere, RankOneReachesRelaxation) {
  oracle::Gen g(72);
  const Eigen::VectorXcd v = g.complex_matrix(5, 1);
  const HermitianMatrix a(Eigen::MatrixXcd(v * v.adjoint()));
  const auto relx = rel(a);
  const auto res = local_maximize_sphere(relx.factor, g.complex_matrix(5, 1));
  EXPECT_NEAR(res.objective_log, relx.value_log, 1e-6);
}

TEST(LocalMaximizeSphere, ObjectiveNeverDecreases) {
  oracle::Gen g(73);
  for (int t = 0; t < 10; ++t) {
    const int n = g.integer(2, 8);
    const GramFactor v = factorize_gram(HermitianMatrix(g.hpsd(n)));
    const auto res = local_maximize_sphere(v, g.complex_matrix(n, 1));
    for (std::size_t k = 1; k < res.objective_trace.size(); ++k) {
      EXPECT_GE(res.objective_trace[k], res.objective_trace[k - 1] - 1e-12);
    }
    EXPECT_NEAR(res.x.squaredNorm(), n, 1e-9 * n);
  }
}

TEST(LocalMaximizeSphere, CriticalStartStays) {
  const GramFactor v(Eigen::MatrixXcd::Identity(3, 3));
  const Eigen::VectorXcd x0 = Eigen::VectorXcd::Ones(3);
  const auto res = local_maximize_sphere(v, x0);
  EXPECT_TRUE(res.converged);
  EXPECT_LT((res.x - x0).norm(), 1e-9);
}

TEST(LocalMaximizeSphere, RejectsZeroStart) {
  const GramFactor v(Eigen::MatrixXcd::Identity(2, 2));
  Eigen::VectorXcd x0(2);
  x0 << 1.0, 0.0;
  EXPECT_THROW(local_maximize_sphere(v, x0), DomainError);
}

TEST(LocalMaximizeSphere, GradientMatchesFiniteDifferences) {
  // At the returned point the directional derivative along random tangent
  // directions vanishes.
  oracle::Gen g(74);
  const int n = 5;
  const GramFactor v = factorize_gram(HermitianMatrix(g.hpsd(n)));
  const auto res = local_maximize_sphere(v, g.complex_matrix(n, 1));
  ASSERT_TRUE(res.converged);
  for (int k = 0; k < 5; ++k) {
    Eigen::VectorXcd t = g.complex_matrix(n, 1);
    t -= (res.x.dot(t).real() / n) * res.x;
    t /= t.norm();
    const double h = 1e-5;
    auto on_sphere = [&](double s) {
      Eigen::VectorXcd y = res.x + s * t;
      return objective_product(v, y * (std::sqrt(double(n)) / y.norm()));
    };
    EXPECT_NEAR((on_sphere(h) - on_sphere(-h)) / (2 * h), 0.0, 1e-5);
  }
}

TEST(VdwConjecture, DiagonalIsTightAtBothEnds) {
  Eigen::VectorXcd d(3);
  d << 1.0, 2.0, 3.0;
  const auto rep = check_vdw_conjecture(HermitianMatrix(Eigen::MatrixXcd(d.asDiagonal())));
  EXPECT_TRUE(rep.lower_holds);
  EXPECT_TRUE(rep.upper_consistent);
  EXPECT_FALSE(rep.counterexample_flag);
  EXPECT_EQ(rep.upper_status, "consistent");
  EXPECT_NEAR(rep.log_per, std::log(6.0), 1e-12);
  EXPECT_NEAR(rep.log_r_lower, std::log(6.0), 1e-8);
  EXPECT_NEAR(rep.log_nu, std::log(6.0), 1e-7);
}

TEST(VdwConjecture, WorkedCirculant) {
  const auto rep = check_vdw_conjecture(HermitianMatrix(make_circulant({2.0, 1.0, 1.0})));
  EXPECT_GE(std::exp(rep.log_r_lower), 64.0 * (1 - 1e-6));
  EXPECT_TRUE(rep.lower_holds);
  EXPECT_EQ(rep.upper_status, "consistent");
}

TEST(VdwConjecture, RandomInstances) {
  oracle::Gen g(75);
  for (int t = 0; t < 10; ++t) {
    const int n = g.integer(2, 6);
    ConjectureOptions opts;
    opts.seed = static_cast<std::uint64_t>(t);
    const auto rep = check_vdw_conjecture(HermitianMatrix(g.hpsd(n)), opts, "r" + std::to_string(t));
    EXPECT_TRUE(rep.lower_holds);
    EXPECT_FALSE(rep.counterexample_flag);
    EXPECT_LE(rep.log_r_lower, rep.log_nu + 1e-8);
    EXPECT_GE(rep.log_r_lower, rep.log_rounding);
    EXPECT_TRUE(rep.upper_status == "consistent" || rep.upper_status == "unresolved");
  }
}

TEST(VdwConjecture, SizeCap) {
  EXPECT_THROW(check_vdw_conjecture(HermitianMatrix::identity(21)), SizeError);
}

TEST(Pate, KEqualsOneIsEquality) {
  oracle::Gen g(76);
  const HermitianMatrix a(g.hpsd(3));
  const auto p = check_pate(a, 1);
  EXPECT_NEAR(p.lhs_log, p.rhs_log, 1e-12);
  EXPECT_TRUE(p.holds);
}

TEST(Pate, TwoByTwoAgainstPermutationOracle) {
  for (double c : {0.0, 0.25, 0.7, 1.0}) {
    Eigen::MatrixXcd a(2, 2);
    a << 1, c, c, 1;
    const auto p = check_pate(HermitianMatrix(a), 2);
    const double lhs = oracle::permanent_by_permutations(kron_all_ones(a, 2)).real();
    EXPECT_NEAR(std::exp(p.lhs_log), lhs, 1e-9 * lhs);
    EXPECT_NEAR(std::exp(p.rhs_log), std::pow(1 + c * c, 2) * 4, 1e-12);
    EXPECT_TRUE(p.holds);
  }
}

TEST(Pate, IdentityKThree) {
  const auto p = check_pate(HermitianMatrix::identity(2), 3);
  EXPECT_NEAR(std::exp(p.rhs_log), 36.0, 1e-12);
  const double lhs = oracle::permanent_by_permutations(kron_all_ones(Eigen::MatrixXcd::Identity(2, 2), 3)).real();
  EXPECT_NEAR(std::exp(p.lhs_log), lhs, 1e-9);
  EXPECT_TRUE(p.holds);
}

TEST(Pate, Errors) {
  EXPECT_THROW(check_pate(HermitianMatrix::identity(7), 3), SizeError);
  EXPECT_THROW(check_pate(HermitianMatrix::identity(2), 0), DomainError);
}
