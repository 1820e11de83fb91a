#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "gkt/calibrate.hpp"
#include "gkt/error.hpp"
#include "gkt/gof.hpp"
#include "oracles.hpp"

using namespace gkt;

namespace {

SampleMatrix normal_sample(std::size_t n, std::size_t d, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return SampleMatrix(oracle::random_sample(n, d, rng));
}

double analytic_embed(const Matrix& x, std::size_t i, double nu, double var) {
  double sq = 0.0;
  for (std::size_t k = 0; k < x.cols(); ++k) sq += x(i, k) * x(i, k);
  const double a = 1.0 + 2.0 * nu * var;
  return std::pow(a, -0.5 * static_cast<double>(x.cols())) * std::exp(-nu * sq / a);
}

}  // namespace

TEST(GofCenteredGram, ClosedFormAtOrigin) {
  const Matrix c = centered_gram_gof(SampleMatrix::from_rows({{0}, {0}}), 1.0, standard_gaussian(1));
  const double want = 1.0 - 2.0 / std::sqrt(3.0) + 1.0 / std::sqrt(5.0);
  EXPECT_NEAR(c(0, 1), want, 1e-15);
  EXPECT_NEAR(c(0, 1), 0.292513, 1e-6);
}

TEST(GofCenteredGram, VanishesAsNuShrinks) {
  const Matrix c = centered_gram_gof(normal_sample(5, 2, 1), 1e-9, standard_gaussian(2));
  for (std::size_t t = 0; t < 25; ++t) EXPECT_NEAR(c.data()[t], 0.0, 1e-7);
}

TEST(GofCenteredGram, EmpiricalReferenceOnTwoPoints) {
  const SampleMatrix pts = SampleMatrix::from_rows({{0.0}, {1.0}});
  const ReferenceModel ref = EmpiricalReference(pts);
  const double e = std::exp(-1.0);
  // m(x) averages the kernel over both reference points, M is the off-diagonal mean.
  const double m0 = (1.0 + e) / 2.0, m1 = (e + 1.0) / 2.0, M = e;
  const Matrix c = centered_gram_gof(pts, 1.0, ref);
  EXPECT_NEAR(c(0, 1), e - m0 - m1 + M, 1e-15);
  EXPECT_NEAR(c(0, 0), 1.0 - 2.0 * m0 + M, 1e-15);
}

TEST(GofCenteredGram, DegenerateReference) {
  EXPECT_THROW(validate_reference(AnalyticGaussian{{0.0}, 0.0}), Error);
  EXPECT_THROW(validate_reference(AnalyticGaussian{{}, 1.0}), Error);
}

TEST(GofGamma2, TwoPointExample) {
  EXPECT_NEAR(gof_gamma2(SampleMatrix::from_rows({{0}, {0}}), 1.0, standard_gaussian(1)), 0.292513,
              1e-6);
}

TEST(GofGamma2, MatchesBruteForce) {
  std::mt19937_64 rng(5);
  for (int rep = 0; rep < 50; ++rep) {
    const std::size_t n = 2 + rep % 9, d = 1 + rep % 3;
    const double nu = 0.2 + 0.1 * rep;
    const Matrix x = oracle::random_sample(n, d, rng);
    const ReferenceModel ref = standard_gaussian(d);
    const double self = std::pow(1.0 + 4.0 * nu, -0.5 * d);
    const double want = oracle::gof_gamma2(
        x, nu, [&](std::size_t i) { return analytic_embed(x, i, nu, 1.0); }, self);
    EXPECT_LT(oracle::relative_error(gof_gamma2(SampleMatrix(x), nu, ref), want), 1e-10);
  }
}

TEST(GofGamma2, EmpiricalReferenceMatchesBruteForce) {
  std::mt19937_64 rng(6);
  const Matrix pts = oracle::random_sample(12, 2, rng);
  const Matrix x = oracle::random_sample(7, 2, rng, 1.5);
  const double nu = 0.6;
  const auto embed = [&](std::size_t i) {
    double s = 0.0;
    for (std::size_t r = 0; r < pts.rows(); ++r) s += std::exp(-nu * oracle::sqdist(x, i, pts, r));
    return s / pts.rows();
  };
  const double self = oracle::pair_mean(oracle::gram(pts, nu));
  const double want = oracle::gof_gamma2(x, nu, embed, self);
  const ReferenceModel ref = EmpiricalReference(SampleMatrix(pts));
  EXPECT_LT(oracle::relative_error(gof_gamma2(SampleMatrix(x), nu, ref), want), 1e-10);
}

TEST(GofGamma2, ClosedFormMatchesMonteCarlo) {
  std::mt19937_64 rng(8);
  std::normal_distribution<double> normal;
  constexpr std::size_t draws = 1'000'000;
  for (std::size_t d : {1u, 2u, 3u}) {
    const SampleMatrix y(Matrix(2, d, 0.4));
    for (double nu : {0.5, 1.0, 5.0}) {
      const double closed = reference_embedding(standard_gaussian(d), y, nu)[0];
      const double closed_self = reference_self_term(standard_gaussian(d), nu);
      double s = 0.0, s2 = 0.0, t = 0.0, t2 = 0.0;
      for (std::size_t k = 0; k < draws; ++k) {
        double a = 0.0, b = 0.0;
        for (std::size_t l = 0; l < d; ++l) {
          const double u = normal(rng), v = normal(rng);
          a += (u - 0.4) * (u - 0.4);
          b += (u - v) * (u - v);
        }
        const double ga = std::exp(-nu * a), gb = std::exp(-nu * b);
        s += ga;
        s2 += ga * ga;
        t += gb;
        t2 += gb * gb;
      }
      const double mean = s / draws, se = std::sqrt((s2 / draws - mean * mean) / draws);
      const double mean_t = t / draws, se_t = std::sqrt((t2 / draws - mean_t * mean_t) / draws);
      EXPECT_LT(std::abs(mean - closed), 4.0 * se) << "d=" << d << " nu=" << nu;
      EXPECT_LT(std::abs(mean_t - closed_self), 4.0 * se_t) << "d=" << d << " nu=" << nu;
    }
  }
}

TEST(GofGamma2, UnbiasedUnderNull) {
  const ReferenceModel ref = standard_gaussian(1);
  constexpr int reps = 10000;
  double s = 0.0, s2 = 0.0;
  for (int r = 0; r < reps; ++r) {
    const double g = gof_gamma2(parametric_draw(ref, 20, 99, r), 1.0, ref);
    s += g;
    s2 += g * g;
  }
  const double mean = s / reps, se = std::sqrt((s2 / reps - mean * mean) / reps);
  EXPECT_LT(std::abs(mean), 3.0 * se);
}

TEST(GofVariance, ConstantSampleHitsFloor) {
  const VarianceEstimate v = gof_variance(SampleMatrix(Matrix(5, 2, 1.5)), 1.0);
  EXPECT_NEAR(v.s_tilde2, 0.0, 1e-15);
  EXPECT_DOUBLE_EQ(v.s_hat2, 1.0 / 25.0);
}

TEST(GofVariance, MatchesBruteForce) {
  std::mt19937_64 rng(12);
  for (int rep = 0; rep < 50; ++rep) {
    const std::size_t n = 4 + rep % 7;
    const Matrix x = oracle::random_sample(n, 2, rng);
    const double nu = 0.3 + 0.05 * rep;
    const double want = oracle::variance(oracle::gram(x, nu));
    const VarianceEstimate v = gof_variance(SampleMatrix(x), nu);
    EXPECT_LT(oracle::relative_error(v.s_tilde2, want), 1e-10);
    EXPECT_GE(v.s_hat2, 1.0 / (n * n));
  }
}

TEST(GofVariance, TooSmall) {
  try {
    gof_variance(normal_sample(3, 1, 1), 1.0);
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::sample_too_small);
  }
}

// Population value of s~² for X ~ N(0, 1): E G_{2nu} - 2 E m(X)² + (E G_nu)².
double normal_population_variance(double nu) {
  const double e1 = 1.0 / std::sqrt(1.0 + 8.0 * nu);
  const double e2 = 1.0 / ((1.0 + 2.0 * nu) * std::sqrt(1.0 + 4.0 * nu / (1.0 + 2.0 * nu)));
  const double e3 = 1.0 / (1.0 + 4.0 * nu);
  return e1 - 2.0 * e2 + e3;
}

TEST(GofVariance, MatchesPopulationValue) {
  const SampleMatrix x = normal_sample(500, 1, 21);
  const double nu = 25.0;
  const double want = normal_population_variance(nu);
  EXPECT_LT(std::abs(gof_variance(x, nu).s_hat2 - want) / want, 0.1);
}

TEST(GofVariance, ScaledPopulationValueApproachesDensityNorm) {
  const double norm2 = 1.0 / std::sqrt(4.0 * M_PI);
  double last = 1.0;
  for (double nu : {25.0, 100.0, 400.0, 1e4}) {
    const double gap = std::abs(std::sqrt(2.0 * nu / M_PI) * normal_population_variance(nu) - norm2);
    EXPECT_LT(gap, last);
    last = gap;
  }
  EXPECT_LT(last / norm2, 0.01);
}

TEST(GofStat, TwoPointExampleComposes) {
  // n = 2 has no variance estimate; the floor for a constant sample is 1/4.
  const double g = gof_gamma2(SampleMatrix::from_rows({{0}, {0}}), 1.0, standard_gaussian(1));
  EXPECT_NEAR(studentize(g, 0.25, 2.0), 0.827, 1e-3);
  EXPECT_DOUBLE_EQ(studentize(0.0, 0.25, 2.0), 0.0);
}

TEST(GofTest, AsymptoticPValueAtCriticalValue) {
  EXPECT_NEAR(normal_upper_pvalue(normal_upper_quantile(0.05)), 0.05, 1e-12);
}

TEST(GofTest, ReportFields) {
  const SampleMatrix x = normal_sample(40, 1, 3);
  TestOptions opts;
  opts.B = 19;
  opts.seed = 4;
  const GofReport r = gof_test(x, 2.0, standard_gaussian(1), opts);
  EXPECT_EQ(r.calibration, "monte-carlo");
  EXPECT_EQ(r.B, 19u);
  EXPECT_GE(r.s_hat2, 1.0 / 1600.0);
  EXPECT_GE(r.p_value, 1.0 / 20.0);
  EXPECT_LE(r.p_value, 1.0);
  EXPECT_NEAR(r.t_stat, gof_stat(x, 2.0, standard_gaussian(1)), 1e-12);

  opts.calibration = Calibration::asymptotic;
  const GofReport a = gof_test(x, 2.0, standard_gaussian(1), opts);
  EXPECT_EQ(a.calibration, "asymptotic-normal");
  EXPECT_NEAR(a.p_value, normal_upper_pvalue(a.t_stat), 1e-15);
}

TEST(GofTest, ShiftedDataRejects) {
  Matrix m = normal_sample(200, 1, 8).matrix();
  for (std::size_t i = 0; i < 200; ++i) m(i, 0) += 1.0;
  TestOptions opts;
  opts.B = 99;
  const GofReport r = gof_test(SampleMatrix(m), 1.0, standard_gaussian(1), opts);
  EXPECT_NEAR(r.p_value, 0.01, 1e-15);
  EXPECT_TRUE(r.reject);
}

TEST(GofTest, SmallEmpiricalReferenceCannotCalibrate) {
  const ReferenceModel ref = EmpiricalReference(normal_sample(10, 1, 1));
  try {
    gof_test(normal_sample(20, 1, 2), 1.0, ref);
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::calibration_unavailable);
  }
}

TEST(GofTest, MonteCarloPValueMonotoneInObserved) {
  const ReferenceModel ref = standard_gaussian(1);
  GridOptions opts;
  opts.B = 49;
  opts.seed = 2;
  const GridStatistics null = gof_null_statistics(ref, 30, ScalingGrid({3.0}), opts);
  const auto column = null.null_t_column(0);
  double last = 1.0;
  for (double t = -3.0; t <= 5.0; t += 0.05) {
    const double p = resample_pvalue(t, column);
    EXPECT_LE(p, last);
    last = p;
  }
}

TEST(GofGrid, MatchesDirectStatisticsAndSharedNull) {
  const ReferenceModel ref = standard_gaussian(2);
  const SampleMatrix x = normal_sample(25, 2, 5);
  const ScalingGrid grid({0.5, 1.0, 4.0});
  GridOptions opts;
  opts.B = 7;
  opts.seed = 11;
  opts.floor = VarianceFloor::absolute;
  const GridStatistics s = gof_grid_statistics(x, ref, grid, opts);
  for (std::size_t g = 0; g < grid.size(); ++g) {
    EXPECT_NEAR(s.t[g], gof_stat(x, grid[g], ref), 1e-10);
    EXPECT_NEAR(s.gamma2[g], gof_gamma2(x, grid[g], ref), 1e-13);
  }
  for (std::size_t b = 0; b < opts.B; ++b) {
    const SampleMatrix draw = parametric_draw(ref, 25, opts.seed, b);
    EXPECT_NEAR(s.null_t[b * 3 + 1], gof_stat(draw, 1.0, ref), 1e-10);
  }
  const GridStatistics null = gof_null_statistics(ref, 25, grid, opts);
  const GridStatistics shared = gof_grid_statistics(x, ref, grid, opts, &null);
  EXPECT_EQ(shared.null_t, s.null_t);
  EXPECT_EQ(shared.t, s.t);
}
