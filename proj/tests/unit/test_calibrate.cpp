#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "gkt/calibrate.hpp"
#include "gkt/error.hpp"
#include "gkt/parallel.hpp"
#include "gkt/rng.hpp"

using namespace gkt;

TEST(ResamplePValue, SpecExamples) {
  std::vector<double> null(99);
  std::iota(null.begin(), null.end(), 0.0);
  EXPECT_DOUBLE_EQ(resample_pvalue(1000.0, null), 0.01);
  EXPECT_DOUBLE_EQ(resample_pvalue(-1.0, null), 1.0);
  EXPECT_DOUBLE_EQ(resample_pvalue(2.0, std::vector<double>(9, 2.0)), 1.0);
}

TEST(ResamplePValue, OnLatticeAndRejectsNonFinite) {
  std::vector<double> null{0.1, 0.5, 0.2, 0.9};
  for (double obs : {-1.0, 0.1, 0.15, 0.5, 0.95}) {
    const double p = resample_pvalue(obs, null) * 5.0;
    EXPECT_NEAR(p, std::round(p), 1e-12);
  }
  EXPECT_THROW(resample_pvalue(std::nan(""), null), Error);
  null.push_back(INFINITY);
  EXPECT_THROW(resample_pvalue(0.0, null), Error);
  EXPECT_THROW(resample_pvalue(0.0, std::vector<double>{}), Error);
}

TEST(EmpiricalQuantile, SpecExamples) {
  std::vector<double> null(19);
  std::iota(null.begin(), null.end(), 1.0);
  std::reverse(null.begin(), null.end());
  EXPECT_DOUBLE_EQ(empirical_quantile(null, 0.05), 19.0);
  EXPECT_DOUBLE_EQ(empirical_quantile(std::vector<double>(7, 3.5), 0.2), 3.5);
}

TEST(EmpiricalQuantile, UniformMedian) {
  CounterRng rng(5);
  std::vector<double> null(10000);
  for (double& v : null) v = rng.uniform();
  EXPECT_NEAR(empirical_quantile(null, 0.5), 0.5, 0.02);
}

TEST(EmpiricalQuantile, RejectsBadAlpha) {
  EXPECT_THROW(empirical_quantile(std::vector<double>{1.0}, 0.0), Error);
  EXPECT_THROW(empirical_quantile(std::vector<double>{1.0}, 1.0), Error);
}

TEST(Replicates, DeterministicGivenSeedAndIndex) {
  const ResamplePlan plan{PooledShuffle{5, 7}, 10, 7};
  EXPECT_EQ(generate_replicate(plan, 3).permutations, generate_replicate(plan, 3).permutations);
  EXPECT_NE(generate_replicate(plan, 3).permutations, generate_replicate(plan, 4).permutations);
  const ResamplePlan other{PooledShuffle{5, 7}, 10, 8};
  EXPECT_NE(generate_replicate(plan, 3).permutations, generate_replicate(other, 3).permutations);
}

TEST(Replicates, PooledShuffleIsBijection) {
  const ResamplePlan plan{PooledShuffle{30, 20}, 5, 1};
  for (std::size_t b = 0; b < 5; ++b) {
    const Replicate r = generate_replicate(plan, b);
    ASSERT_EQ(r.permutations.size(), 1u);
    std::vector<std::uint32_t> sorted = r.permutations[0];
    std::sort(sorted.begin(), sorted.end());
    for (std::uint32_t i = 0; i < 50; ++i) EXPECT_EQ(sorted[i], i);
  }
}

TEST(Replicates, BlockPermuteEmitsOnePermutationPerMovingBlock) {
  EXPECT_EQ(generate_replicate(ResamplePlan{BlockPermute{2, 10}, 3, 1}, 0).permutations.size(), 1u);
  const Replicate r = generate_replicate(ResamplePlan{BlockPermute{5, 10}, 3, 1}, 2);
  EXPECT_EQ(r.permutations.size(), 4u);
  std::set<std::vector<std::uint32_t>> distinct(r.permutations.begin(), r.permutations.end());
  EXPECT_EQ(distinct.size(), 4u);
}

TEST(Replicates, ParametricDrawNeedsSamplableReference) {
  const ResamplePlan ok{ParametricDraw{standard_gaussian(2), 6}, 3, 1};
  const Replicate r = generate_replicate(ok, 1);
  ASSERT_TRUE(r.sample.has_value());
  EXPECT_EQ(r.sample->n(), 6u);
  EXPECT_EQ(r.sample->d(), 2u);
  EXPECT_EQ(r.sample->matrix(), generate_replicate(ok, 1).sample->matrix());

  const ReferenceModel small = EmpiricalReference(SampleMatrix(Matrix(5, 1, 0.0)));
  try {
    generate_replicate(ResamplePlan{ParametricDraw{small, 6}, 3, 1}, 0);
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::calibration_unavailable);
  }
}

TEST(Replicates, InvalidPlans) {
  EXPECT_THROW(validate_plan(ResamplePlan{PooledShuffle{5, 5}, 0, 1}), Error);
  EXPECT_THROW(validate_plan(ResamplePlan{PooledShuffle{0, 5}, 3, 1}), Error);
  EXPECT_THROW(validate_plan(ResamplePlan{BlockPermute{1, 5}, 3, 1}), Error);
}

TEST(Replicates, PermutationsLookUniform) {
  // Position of element 0 over many shuffles of 4 labels.
  std::vector<int> counts(4, 0);
  constexpr int reps = 40000;
  for (int b = 0; b < reps; ++b) {
    const auto p = pooled_shuffle(4, 3, b);
    counts[std::find(p.begin(), p.end(), 0U) - p.begin()]++;
  }
  for (int c : counts) EXPECT_NEAR(c, reps / 4.0, 4.0 * std::sqrt(reps * 0.25 * 0.75));
}

TEST(Parallel, ResultsIndependentOfWorkerCount) {
  auto run = [](std::size_t workers) {
    std::vector<double> out(200);
    parallel_for(out.size(), workers, [&](std::size_t b) {
      CounterRng rng(11, b);
      out[b] = rng.uniform();
    });
    return out;
  };
  EXPECT_EQ(run(1), run(3));
  EXPECT_EQ(run(1), run(0));
}

TEST(Parallel, PropagatesExceptions) {
  EXPECT_THROW(parallel_for(10, 4,
                            [](std::size_t i) {
                              if (i == 7) fail(ErrorKind::invalid_input, "boom");
                            }),
               Error);
}

TEST(Normal, QuantileAndPValue) {
  EXPECT_NEAR(normal_upper_quantile(0.05), 1.6448536269514722, 1e-12);
  EXPECT_NEAR(normal_upper_pvalue(0.0), 0.5, 1e-15);
}
