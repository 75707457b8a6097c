#include <cmath>

#include <gtest/gtest.h>

#include "permcert/rank_reduction.hpp"
#include "permcert/relaxation.hpp"
#include "support/oracles.hpp"

using namespace permcert;

namespace {

Eigen::VectorXd functionals(const GramFactor& v, const Eigen::MatrixXcd& p) {
  const int n = v.n();
  Eigen::VectorXd out(n + 1);
  for (int i = 0; i < n; ++i) {
    out(i) = (v.column(i).adjoint() * p * v.column(i))(0, 0).real();
  }
  out(n) = p.trace().real();
  return out;
}

}  // namespace

TEST(NumericRank, Examples) {
  EXPECT_EQ(numeric_rank(HermitianMatrix::identity(4)), 4);
  EXPECT_EQ(numeric_rank(HermitianMatrix(Eigen::MatrixXcd::Ones(4, 4))), 1);
  oracle::Gen g(51);
  EXPECT_EQ(numeric_rank(HermitianMatrix(g.hpsd(6, 2))), 2);
}

TEST(ReduceRank, IdentityPointOfIdentityInstance) {
  const GramFactor v(Eigen::MatrixXcd::Identity(3, 3));
  const auto red = reduce_rank(v, HermitianMatrix::identity(3));
  EXPECT_EQ(red.trace.initial_rank, 3);
  EXPECT_LE(red.trace.final_rank, 2);
  EXPECT_FALSE(red.trace.aborted);
  const Eigen::VectorXd before = functionals(v, Eigen::MatrixXcd::Identity(3, 3));
  const Eigen::VectorXd after = functionals(v, red.p.matrix());
  EXPECT_LT((after - before).cwiseAbs().maxCoeff(), 1e-10);
}

// Arbitrary full-rank feasible P (not an optimum) still reduces while
// keeping every preserved functional and staying PSD.
TEST(ReduceRank, GenericFeasiblePoints) {
  oracle::Gen g(52);
  for (int t = 0; t < 30; ++t) {
    const int n = g.integer(3, 24);
    const GramFactor v = factorize_gram(HermitianMatrix(g.hpsd(n)));
    Eigen::MatrixXcd p = g.hpsd(n);
    p *= n / p.trace().real();
    const auto red = reduce_rank(v, HermitianMatrix(p));
    ASSERT_FALSE(red.trace.aborted) << n;
    const int bound = static_cast<int>(std::floor(std::sqrt(n + 1.0)));
    EXPECT_LE(red.trace.final_rank, bound);
    EXPECT_EQ(red.u.cols(), red.trace.final_rank);
    const Eigen::VectorXd before = functionals(v, p);
    const Eigen::VectorXd after = functionals(v, red.p.matrix());
    for (int i = 0; i <= n; ++i) {
      EXPECT_LE(std::abs(after(i) - before(i)), 1e-9 * std::abs(before(i)) + 1e-12);
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(red.p.matrix());
    EXPECT_GE(es.eigenvalues().minCoeff(), -1e-10);
  }
}

TEST(ReduceRank, AlreadyLowRankIsUntouched) {
  oracle::Gen g(53);
  const GramFactor v = factorize_gram(HermitianMatrix(g.hpsd(8)));
  Eigen::MatrixXcd p = g.hpsd(8, 2);
  p *= 8.0 / p.trace().real();
  const auto red = reduce_rank(v, HermitianMatrix(p));
  EXPECT_EQ(red.trace.final_rank, 2);
  EXPECT_TRUE(red.trace.steps.empty());
  EXPECT_LT((red.p.matrix() - p).norm(), 1e-10);
}

TEST(ReduceRank, DimensionMismatchThrows) {
  const GramFactor v(Eigen::MatrixXcd::Identity(3, 3));
  EXPECT_THROW(reduce_rank(v, HermitianMatrix::identity(4)), DimensionError);
}
