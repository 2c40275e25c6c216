#include "msrate/linalg.h"

#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "msrate/errors.h"
#include "test_util.h"

namespace msrate {
namespace {

using testing::max_abs_diff;

GTEST_TEST(MatrixTest, RejectsNonFiniteEntries) {
  EXPECT_THROW(Matrix(1, 2, {1.0, NAN}), InvalidArgument);
  EXPECT_THROW(Matrix::from_rows({{1.0}, {INFINITY}}), InvalidArgument);
  EXPECT_THROW(Matrix::from_rows({{1.0, 2.0}, {3.0}}), DimensionMismatch);
}

GTEST_TEST(MatrixTest, Products) {
  const Matrix a = Matrix::from_rows({{1, 2}, {3, 4}});
  const Matrix b = Matrix::from_rows({{0, 1}, {1, 0}});
  EXPECT_EQ(a * b, Matrix::from_rows({{2, 1}, {4, 3}}));
  const std::vector<double> x{1.0, -1.0};
  EXPECT_EQ(a * std::span<const double>(x), (std::vector<double>{-1.0, -1.0}));
  EXPECT_THROW(a * Matrix(3, 1), DimensionMismatch);
}

GTEST_TEST(SymMatrixTest, StorageIsSymmetric) {
  SymMatrix s(3);
  s.set(0, 2, 1.5);
  EXPECT_EQ(s(2, 0), 1.5);
  EXPECT_THROW(SymMatrix::from_rows({{1, 2}, {3, 4}}), InvalidArgument);
  const SymMatrix p = SymMatrix::symmetric_part(Matrix::from_rows({{1, 2}, {4, 1}}));
  EXPECT_EQ(p(0, 1), 3.0);
  EXPECT_EQ(p(1, 0), 3.0);
}

GTEST_TEST(SymEigenTest, Examples) {
  const EigenDecomposition id = sym_eigen(SymMatrix::identity(2));
  EXPECT_EQ(id.values, (std::vector<double>{1.0, 1.0}));

  const EigenDecomposition d = sym_eigen(SymMatrix::diagonal({3.0, -1.0}));
  EXPECT_NEAR(d.values[0], -1.0, 1e-15);
  EXPECT_NEAR(d.values[1], 3.0, 1e-15);

  const EigenDecomposition e = sym_eigen(SymMatrix::from_rows({{2, 1}, {1, 2}}));
  EXPECT_NEAR(e.values[0], 1.0, 1e-14);
  EXPECT_NEAR(e.values[1], 3.0, 1e-14);
}

GTEST_TEST(SymEigenTest, RandomReconstructionAndOrthogonality) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 1 + trial % 8;
    const SymMatrix m = testing::random_symmetric(rng, n);
    const EigenDecomposition e = sym_eigen(m);
    ASSERT_TRUE(std::is_sorted(e.values.begin(), e.values.end()));
    Matrix lambda(n, n);
    for (int i = 0; i < n; ++i) lambda(i, i) = e.values[i];
    const Matrix rec = e.vectors * lambda * e.vectors.transpose();
    EXPECT_LE((rec - m.matrix()).frobenius_norm(),
              1e-10 * std::max(1.0, m.frobenius_norm()));
    EXPECT_LE((e.vectors.transpose() * e.vectors - Matrix::identity(n)).frobenius_norm(), 1e-10);
  }
}

GTEST_TEST(CholeskyTest, Examples) {
  EXPECT_EQ(*cholesky(SymMatrix::identity(3)), Matrix::identity(3));
  const auto l = cholesky(SymMatrix::from_rows({{4, 2}, {2, 5}}));
  ASSERT_TRUE(l.has_value());
  EXPECT_LE(max_abs_diff(*l, Matrix::from_rows({{2, 0}, {1, 2}})), 1e-15);
  EXPECT_FALSE(cholesky(SymMatrix::from_rows({{1, 2}, {2, 1}})).has_value());
}

GTEST_TEST(CholeskyTest, AgreesWithEigenvaluePredicate) {
  std::mt19937_64 rng(11);
  int disagreements = 0;
  int positive = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const int n = 1 + trial % 6;
    // Random symmetric with a shifted spectrum, so both outcomes occur.
    SymMatrix m = testing::random_psd(rng, n, n);
    m -= 0.15 * m.trace() / n * SymMatrix::identity(n);
    const double tol = kPdRelativeTolerance * std::abs(m.trace()) / n;
    const bool by_eigen = sym_eigen(m).values.front() > tol;
    const auto l = cholesky(m);
    positive += by_eigen;
    if (by_eigen != l.has_value()) ++disagreements;
    if (l) {
      EXPECT_LE((*l * l->transpose() - m.matrix()).frobenius_norm(), 1e-10 * m.frobenius_norm());
    }
  }
  EXPECT_EQ(disagreements, 0);
  EXPECT_GT(positive, 100);
  EXPECT_LT(positive, 900);
}

GTEST_TEST(InverseTest, Examples) {
  EXPECT_EQ(inverse_spd(SymMatrix::identity(2)), SymMatrix::identity(2));
  EXPECT_LE(max_abs_diff(inverse_spd(SymMatrix::diagonal({2.0, 4.0})).matrix(),
                         SymMatrix::diagonal({0.5, 0.25}).matrix()),
            1e-15);
  const SymMatrix inv = inverse_spd(SymMatrix::from_rows({{4, 2}, {2, 5}}));
  EXPECT_LE(max_abs_diff(inv.matrix(), (1.0 / 16.0) * Matrix::from_rows({{5, -2}, {-2, 4}})),
            1e-15);
  EXPECT_THROW(inverse_spd(SymMatrix::from_rows({{1, 2}, {2, 1}})), NotPositiveDefinite);
}

GTEST_TEST(InverseTest, RandomResidual) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 1 + trial % 8;
    const SymMatrix m = testing::random_pd(rng, n);
    const Matrix prod = m.matrix() * inverse_spd(m).matrix();
    EXPECT_LE((prod - Matrix::identity(n)).frobenius_norm(), 1e-8);
  }
}

GTEST_TEST(PinvTest, Examples) {
  EXPECT_LE(max_abs_diff(pinv_psd(SymMatrix::diagonal({2.0, 0.0})).matrix(),
                         SymMatrix::diagonal({0.5, 0.0}).matrix()),
            1e-15);
  EXPECT_LE(max_abs_diff(pinv_psd(SymMatrix::identity(2)).matrix(), Matrix::identity(2)), 1e-15);
  const std::vector<double> v{1.0, 1.0};
  const SymMatrix vv = SymMatrix::outer(v);
  EXPECT_LE(max_abs_diff(pinv_psd(vv).matrix(), (0.25 * vv).matrix()), 1e-15);
}

GTEST_TEST(PinvTest, PenroseIdentitiesOnAllRanks) {
  std::mt19937_64 rng(5);
  for (int n = 1; n <= 6; ++n) {
    for (int rank = 0; rank <= n; ++rank) {
      const SymMatrix m = testing::random_psd(rng, n, rank);
      const SymMatrix p = pinv_psd(m);
      const Matrix& M = m.matrix();
      const Matrix& Mp = p.matrix();
      EXPECT_LE((M * Mp * M - M).frobenius_norm(), 1e-8) << n << " " << rank;
      EXPECT_LE((Mp * M * Mp - Mp).frobenius_norm(), 1e-8) << n << " " << rank;
      const Matrix mmp = M * Mp;
      EXPECT_LE((mmp - mmp.transpose()).frobenius_norm(), 1e-8);
    }
  }
}

GTEST_TEST(SqrtInvTest, Examples) {
  EXPECT_LE(max_abs_diff(sym_sqrt_inv(SymMatrix::identity(2)).matrix(), Matrix::identity(2)),
            1e-15);
  EXPECT_LE(max_abs_diff(sym_sqrt_inv(SymMatrix::diagonal({4.0, 9.0})).matrix(),
                         SymMatrix::diagonal({0.5, 1.0 / 3.0}).matrix()),
            1e-15);
  const SymMatrix m = SymMatrix::from_rows({{2, 1}, {1, 2}});
  const EigenDecomposition e = sym_eigen(m);
  const Matrix expected =
      e.vectors * SymMatrix::diagonal({1.0, 1.0 / std::sqrt(3.0)}).matrix() * e.vectors.transpose();
  const SymMatrix s = sym_sqrt_inv(m);
  EXPECT_LE(max_abs_diff(s.matrix(), expected), 1e-14);
  EXPECT_LE(max_abs_diff(s.matrix() * m.matrix() * s.matrix(), Matrix::identity(2)), 1e-8);
  EXPECT_THROW(sym_sqrt_inv(SymMatrix::diagonal({1.0, 0.0})), NotPositiveDefinite);
}

GTEST_TEST(SpectralNormTest, Examples) {
  EXPECT_DOUBLE_EQ(spectral_norm(Matrix::identity(3)), 1.0);
  EXPECT_NEAR(spectral_norm(Matrix::from_rows({{3, 0}, {0, -5}})), 5.0, 1e-14);
  EXPECT_NEAR(spectral_norm(Matrix::from_rows({{0, 2}, {0, 0}})), 2.0, 1e-14);
}

GTEST_TEST(SpectralNormTest, DominatesRandomDirections) {
  std::mt19937_64 rng(9);
  std::normal_distribution<double> normal;
  const Matrix m = testing::random_matrix(rng, 4, 3);
  const double norm = spectral_norm(m);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> x(3);
    double len = 0.0;
    for (double& v : x) {
      v = normal(rng);
      len += v * v;
    }
    for (double& v : x) v /= std::sqrt(len);
    const std::vector<double> y = m * std::span<const double>(x);
    double ny = 0.0;
    for (double v : y) ny += v * v;
    EXPECT_LE(std::sqrt(ny), norm * (1 + 1e-12));
  }
  const EigenDecomposition e = sym_eigen(congruence(m, SymMatrix::identity(4)));
  std::vector<double> top(3);
  for (int i = 0; i < 3; ++i) top[i] = e.vectors(i, 2);
  const std::vector<double> y = m * std::span<const double>(top);
  double ny = 0.0;
  for (double v : y) ny += v * v;
  EXPECT_NEAR(std::sqrt(ny), norm, 1e-8);
}

GTEST_TEST(ColumnRankTest, Examples) {
  EXPECT_EQ(column_rank(Matrix::from_rows({{1}, {0}})), 1);
  EXPECT_EQ(column_rank(Matrix::identity(2)), 2);
  EXPECT_EQ(column_rank(Matrix::from_rows({{1, 1}, {1, 1}})), 1);
  EXPECT_EQ(column_rank(Matrix(2, 2)), 0);
}

GTEST_TEST(LinalgTest, Deterministic) {
  std::mt19937_64 rng(13);
  const SymMatrix m = testing::random_symmetric(rng, 7);
  const EigenDecomposition a = sym_eigen(m);
  const EigenDecomposition b = sym_eigen(m);
  EXPECT_EQ(a.values, b.values);
  EXPECT_EQ(a.vectors, b.vectors);
}

}  // namespace
}  // namespace msrate
