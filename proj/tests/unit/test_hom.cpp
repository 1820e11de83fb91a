#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "gkt/calibrate.hpp"
#include "gkt/error.hpp"
#include "gkt/hom.hpp"
#include "oracles.hpp"

using namespace gkt;

namespace {

SampleMatrix normal_sample(std::size_t n, std::size_t d, std::uint64_t seed, double scale = 1.0) {
  std::mt19937_64 rng(seed);
  return SampleMatrix(oracle::random_sample(n, d, rng, scale));
}

Matrix stack(const Matrix& x, const Matrix& y) {
  Matrix z(x.rows() + y.rows(), x.cols());
  for (std::size_t i = 0; i < x.rows(); ++i)
    for (std::size_t k = 0; k < x.cols(); ++k) z(i, k) = x(i, k);
  for (std::size_t i = 0; i < y.rows(); ++i)
    for (std::size_t k = 0; k < x.cols(); ++k) z(x.rows() + i, k) = y(i, k);
  return z;
}

}  // namespace

TEST(HomGamma2, HandExample) {
  const SampleMatrix x = SampleMatrix::from_rows({{0}, {1}});
  EXPECT_NEAR(hom_gamma2(x, x, 1.0), std::exp(-1.0) - 1.0, 1e-15);
  EXPECT_NEAR(hom_gamma2(x, x, 1.0), -0.632121, 1e-6);
}

TEST(HomGamma2, ConstantEqualSamples) {
  const SampleMatrix c(Matrix(3, 2, 0.5));
  EXPECT_NEAR(hom_gamma2(c, c, 2.0), 0.0, 1e-15);
}

TEST(HomGamma2, DimensionMismatch) {
  try {
    hom_gamma2(normal_sample(4, 1, 1), normal_sample(4, 2, 2), 1.0);
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::invalid_input);
  }
}

TEST(HomGamma2, MatchesBruteForce) {
  std::mt19937_64 rng(1);
  for (int rep = 0; rep < 50; ++rep) {
    const std::size_t n = 2 + rep % 7, m = 2 + (rep * 3) % 7;
    const Matrix x = oracle::random_sample(n, 2, rng);
    const Matrix y = oracle::random_sample(m, 2, rng, 1.3);
    const double nu = 0.2 + 0.07 * rep;
    EXPECT_LT(oracle::relative_error(hom_gamma2(SampleMatrix(x), SampleMatrix(y), nu),
                                     oracle::hom_gamma2(x, y, nu)),
              1e-10);
  }
}

TEST(HomGamma2, SymmetricForEqualSizesAndNonPositiveForCopies) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const SampleMatrix x = normal_sample(2 + seed % 7, 1, seed);
    const SampleMatrix y = normal_sample(x.n(), 1, seed + 100);
    EXPECT_NEAR(hom_gamma2(x, y, 0.8), hom_gamma2(y, x, 0.8), 1e-14);
    EXPECT_LE(hom_gamma2(x, x, 0.8), 1e-15);
  }
}

TEST(HomVariance, PooledConstantSample) {
  const SampleMatrix c(Matrix(3, 1, 2.0));
  const VarianceEstimate v = hom_variance(c, c, 1.0);
  EXPECT_NEAR(v.s_tilde2, 0.0, 1e-15);
  EXPECT_DOUBLE_EQ(v.s_hat2, 1.0 / 9.0);
}

TEST(HomVariance, MatchesBruteForceOnPooledSample) {
  std::mt19937_64 rng(2);
  for (int rep = 0; rep < 50; ++rep) {
    const std::size_t n = 2 + rep % 4, m = 2 + (rep / 4) % 4;
    const Matrix x = oracle::random_sample(n, 1, rng);
    const Matrix y = oracle::random_sample(m, 1, rng);
    const double nu = 0.5 + 0.02 * rep;
    const double want = oracle::variance(oracle::gram(stack(x, y), nu));
    const VarianceEstimate v = hom_variance(SampleMatrix(x), SampleMatrix(y), nu);
    EXPECT_LT(oracle::relative_error(v.s_tilde2, want), 1e-10);
    const double nf = static_cast<double>(std::min(n, m));
    EXPECT_GE(v.s_hat2, 1.0 / (nf * nf));
  }
}

TEST(HomVariance, MatchesPopulationValue) {
  const SampleMatrix z = normal_sample(1000, 1, 3);
  const double nu = 25.0;
  const double e1 = 1.0 / std::sqrt(1.0 + 8.0 * nu);
  const double e2 = 1.0 / ((1.0 + 2.0 * nu) * std::sqrt(1.0 + 4.0 * nu / (1.0 + 2.0 * nu)));
  const double e3 = 1.0 / (1.0 + 4.0 * nu);
  const double want = e1 - 2.0 * e2 + e3;
  EXPECT_LT(std::abs(hom_variance(z, nu, 500.0).s_hat2 - want) / want, 0.1);
}

TEST(HomStat, ComposesFromParts) {
  const SampleMatrix x = SampleMatrix::from_rows({{0}, {1}});
  const double g = oracle::hom_gamma2(x.matrix(), x.matrix(), 1.0);
  const double v = oracle::variance(oracle::gram(stack(x.matrix(), x.matrix()), 1.0));
  const double s_hat2 = std::max(v, 0.25);
  const double want = 2.0 * 2.0 / (std::sqrt(2.0) * 4.0) * g / std::sqrt(s_hat2);
  EXPECT_NEAR(hom_stat(x, x, 1.0), want, 1e-12);
}

TEST(HomTest, IdenticalPointsGivePValueOne) {
  const SampleMatrix c(Matrix(10, 2, 1.0));
  TestOptions opts;
  opts.B = 99;
  const HomReport r = hom_test(c, c, 1.0, opts);
  EXPECT_DOUBLE_EQ(r.p_value, 1.0);
  EXPECT_FALSE(r.reject);
  EXPECT_EQ(r.calibration, "permutation");
}

TEST(HomTest, SeparatedSamplesGiveMinimalPValue) {
  Matrix y = normal_sample(50, 1, 9).matrix();
  for (std::size_t i = 0; i < 50; ++i) y(i, 0) += 3.0;
  TestOptions opts;
  opts.B = 99;
  const HomReport r = hom_test(normal_sample(50, 1, 8), SampleMatrix(y), 1.0, opts);
  EXPECT_DOUBLE_EQ(r.p_value, 0.01);
}

TEST(HomTest, RejectsZeroPermutations) {
  TestOptions opts;
  opts.B = 0;
  try {
    hom_test(normal_sample(5, 1, 1), normal_sample(5, 1, 2), 1.0, opts);
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::invalid_parameter);
  }
}

TEST(HomGrid, MatchesDirectStatisticsOnShuffledLabels) {
  const SampleMatrix x = normal_sample(12, 2, 4);
  const SampleMatrix y = normal_sample(9, 2, 5, 1.4);
  const ScalingGrid grid({0.3, 1.0, 3.0});
  GridOptions opts;
  opts.B = 6;
  opts.seed = 3;
  opts.floor = VarianceFloor::absolute;
  const GridStatistics s = hom_grid_statistics(x, y, grid, opts);
  for (std::size_t g = 0; g < grid.size(); ++g) {
    EXPECT_NEAR(s.t[g], hom_stat(x, y, grid[g]), 1e-10);
    EXPECT_NEAR(s.gamma2[g], hom_gamma2(x, y, grid[g]), 1e-13);
  }
  const SampleMatrix z = SampleMatrix::concat(x, y);
  for (std::size_t b = 0; b < opts.B; ++b) {
    const auto perm = pooled_shuffle(21, opts.seed, b);
    std::vector<std::size_t> first(perm.begin(), perm.begin() + 12);
    std::vector<std::size_t> second(perm.begin() + 12, perm.end());
    const SampleMatrix px = z.select_rows(first), py = z.select_rows(second);
    for (std::size_t g = 0; g < grid.size(); ++g) {
      EXPECT_NEAR(s.null_t[b * 3 + g], hom_stat(px, py, grid[g]), 1e-9);
      EXPECT_NEAR(s.null_gamma2[b * 3 + g], hom_gamma2(px, py, grid[g]), 1e-13);
    }
  }
}
