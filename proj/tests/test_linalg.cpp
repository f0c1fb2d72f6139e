#include <gtest/gtest.h>

#include "qsd/errors.hpp"
#include "qsd/linalg.hpp"
#include "test_support.hpp"

using namespace qsd;
using namespace qsd::testing;

TEST(Eig, ResidualAndOrdering) {
  std::mt19937_64 rng(11);
  for (int t = 0; t < 50; ++t) {
    const Index n = 1 + t % 7;
    const HermitianOperator a = random_hermitian(n, rng);
    const SpectralDecomposition e = eig_hermitian(a);
    const double bound = 1e-10 * (1.0 + a.frobenius_norm());
    for (Index i = 0; i < n; ++i) {
      const Eigen::VectorXcd v = e.vectors.col(i);
      EXPECT_LE((a.matrix() * v - e.values(i) * v).norm(), bound);
      if (i > 0) EXPECT_GE(e.values(i - 1), e.values(i));
    }
    EXPECT_LE(max_abs(e.vectors.adjoint() * e.vectors - Matrix::Identity(n, n)), 1e-12);
  }
}

TEST(Eig, Extremes) {
  auto [lo, hi] = extreme_eigs(HermitianOperator::diagonal(Eigen::Vector2d(3.0, -1.0)));
  EXPECT_NEAR(lo, -1.0, 1e-12);
  EXPECT_NEAR(hi, 3.0, 1e-12);
  std::tie(lo, hi) = extreme_eigs(HermitianOperator::identity(3));
  EXPECT_NEAR(lo, 1.0, 1e-12);
  EXPECT_NEAR(hi, 1.0, 1e-12);
  Matrix x(2, 2);
  x << 0, 1, 1, 0;
  std::tie(lo, hi) = extreme_eigs(HermitianOperator::from_matrix(x));
  EXPECT_NEAR(lo, -1.0, 1e-12);
  EXPECT_NEAR(hi, 1.0, 1e-12);
}

TEST(HermitianOperator, RejectsNonHermitian) {
  Matrix x(2, 2);
  x << 1, 2, 0, 1;
  EXPECT_THROW(HermitianOperator::from_matrix(x), InputError);
  EXPECT_NO_THROW(HermitianOperator::symmetrized(x));
}

TEST(PositivePart, Diagonal) {
  const HermitianOperator p = positive_part(HermitianOperator::diagonal(Eigen::Vector3d(2.0, -1.0, 0.5)));
  EXPECT_LE(max_abs(p.matrix() - HermitianOperator::diagonal(Eigen::Vector3d(2.0, 0.0, 0.5)).matrix()), 1e-14);
}

TEST(PositivePart, TraceMatchesSvdOracle) {
  std::mt19937_64 rng(12);
  for (int t = 0; t < 100; ++t) {
    const HermitianOperator a = random_hermitian(2 + t % 5, rng);
    EXPECT_NEAR(positive_part(a).trace(), trace_positive_part(a), 1e-10);
  }
}

TEST(PositivePart, Idempotent) {
  std::mt19937_64 rng(13);
  for (int t = 0; t < 100; ++t) {
    const HermitianOperator p = positive_part(random_hermitian(2 + t % 5, rng));
    EXPECT_LE((positive_part(p) - p).frobenius_norm(), 1e-10);
  }
}

TEST(Projectors, KernelClassification) {
  const HermitianOperator a = HermitianOperator::diagonal(Eigen::Vector3d(1.0, 1e-13, -2.0));
  EXPECT_LE(max_abs(proj_pos(a).matrix() - HermitianOperator::diagonal(Eigen::Vector3d(1, 0, 0)).matrix()), 1e-14);
  EXPECT_LE(max_abs(proj_nonneg(a).matrix() - HermitianOperator::diagonal(Eigen::Vector3d(1, 1, 0)).matrix()), 1e-14);
  // The threshold scales with the spectral radius.
  const HermitianOperator big = HermitianOperator::diagonal(Eigen::Vector2d(1e6, 1e-4));
  EXPECT_NEAR(proj_pos(big).trace(), 1.0, 1e-12);
  EXPECT_NEAR(proj_pos(big, 1e-12).trace(), 2.0, 1e-12);
}

TEST(InvSqrt, PseudoInverseOnSupport) {
  std::mt19937_64 rng(14);
  const HermitianOperator g = random_psd(5, 3, rng);
  const InvSqrtResult r = inv_sqrt_psd(g);
  EXPECT_TRUE(r.rank_deficient);
  EXPECT_EQ(r.rank, 3);
  const HermitianOperator p = g.congruence(r.op.matrix());
  EXPECT_LE(max_abs(p.matrix() * p.matrix() - p.matrix()), 1e-9);
  EXPECT_NEAR(p.trace(), 3.0, 1e-9);

  const HermitianOperator full = random_psd(4, 4, rng);
  const InvSqrtResult f = inv_sqrt_psd(full);
  EXPECT_FALSE(f.rank_deficient);
  EXPECT_LE(max_abs(full.congruence(f.op.matrix()).matrix() - Matrix::Identity(4, 4)), 1e-9);
}

TEST(SupportSubset, Examples) {
  const HermitianOperator d = HermitianOperator::diagonal(Eigen::Vector2d(1.0, 0.0));
  const HermitianOperator i = HermitianOperator::identity(2);
  EXPECT_TRUE(support_subset(d, i));
  EXPECT_FALSE(support_subset(i, d));
  EXPECT_TRUE(support_subset(HermitianOperator::zero(2), d));
}

TEST(SupportBasis, CompressLift) {
  std::mt19937_64 rng(15);
  const HermitianOperator g = random_psd(5, 2, rng);
  const SupportBasis s(g);
  EXPECT_EQ(s.rank(), 2);
  EXPECT_FALSE(s.full_rank());
  EXPECT_LE((s.lift(s.compress(g)) - g).frobenius_norm(), 1e-10);
  EXPECT_NEAR(s.kernel_projector().trace(), 3.0, 1e-12);
  EXPECT_LE(s.kernel_projector().congruence(g.matrix()).frobenius_norm(), 1e-10);
}

TEST(LemmaProperties, PositivePartMonotone) {
  std::mt19937_64 rng(16);
  for (int t = 0; t < 200; ++t) {
    const Index n = 2 + t % 4;
    const HermitianOperator b = random_hermitian(n, rng);
    const HermitianOperator a = b + random_psd(n, 1 + t % n, rng);
    EXPECT_GE(positive_part(a).trace(), positive_part(b).trace() - 1e-9);
  }
}

TEST(LemmaProperties, Subadditive) {
  std::mt19937_64 rng(17);
  for (int t = 0; t < 200; ++t) {
    const Index n = 2 + t % 4;
    const HermitianOperator a = random_hermitian(n, rng);
    const HermitianOperator b = random_hermitian(n, rng);
    EXPECT_GE(positive_part(a).trace() + positive_part(b).trace(), positive_part(a + b).trace() - 1e-9);
  }
}

TEST(LemmaProperties, ProjectorOrdering) {
  std::mt19937_64 rng(18);
  for (int t = 0; t < 200; ++t) {
    const Index n = 2 + t % 4;
    const HermitianOperator b = random_hermitian(n, rng);
    const HermitianOperator d = random_psd(n, 1 + t % n, rng);
    const HermitianOperator a = b + d;
    EXPECT_GE(d.trace_product(proj_pos(a)), d.trace_product(proj_nonneg(b)) - 1e-9);
  }
}

TEST(LemmaProperties, AccumulationIdentity) {
  std::mt19937_64 rng(19);
  for (int t = 0; t < 200; ++t) {
    const Index n = 2 + t % 4;
    const HermitianOperator x = random_psd(n, n, rng);
    const HermitianOperator rho = random_psd(n, 1 + t % n, rng);
    EXPECT_LE((x + positive_part(rho - x) - rho - positive_part(x - rho)).frobenius_norm(), 1e-9);
  }
}

TEST(LemmaProperties, CongruencePreservesSupportInclusion) {
  std::mt19937_64 rng(20);
  for (int t = 0; t < 200; ++t) {
    const Index n = 3 + t % 3;
    const Matrix v = gaussian(n, 2, rng);
    const HermitianOperator b = HermitianOperator::symmetrized(v * v.adjoint());
    const Matrix w = v * gaussian(2, 1, rng);
    const HermitianOperator a = HermitianOperator::symmetrized(w * w.adjoint());
    const Matrix c = gaussian(n, n, rng);
    ASSERT_TRUE(support_subset(a, b));
    EXPECT_TRUE(support_subset(a.congruence(c), b.congruence(c)));
  }
}
