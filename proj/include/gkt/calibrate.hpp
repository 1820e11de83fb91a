#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <variant>
#include <vector>

#include "gkt/reference.hpp"

namespace gkt {

/// Label shuffle of the pooled sample Z = (X, Y).
struct PooledShuffle {
  std::size_t n = 0;
  std::size_t m = 0;
};

/// Independent row permutations of blocks 2..k; block 1 stays fixed.
struct BlockPermute {
  std::size_t k = 0;
  std::size_t n = 0;
};

/// Fresh n-samples from P0.
struct ParametricDraw {
  ReferenceModel ref;
  std::size_t n = 0;
};

using ResampleScheme = std::variant<PooledShuffle, BlockPermute, ParametricDraw>;

struct ResamplePlan {
  ResampleScheme scheme;
  std::size_t B = 100;
  std::uint64_t seed = 0;
};

/// One replicate's randomness. For BlockPermute, permutations[l] is the
/// permutation of block l + 1.
struct Replicate {
  std::vector<std::vector<std::uint32_t>> permutations;
  std::optional<SampleMatrix> sample;
};

void validate_plan(const ResamplePlan& plan);

/// Replicate b of the plan; a pure function of (seed, b).
Replicate generate_replicate(const ResamplePlan& plan, std::size_t b);

std::vector<std::uint32_t> pooled_shuffle(std::size_t total, std::uint64_t seed, std::size_t b);
std::vector<std::vector<std::uint32_t>> block_permutations(std::size_t k, std::size_t n,
                                                           std::uint64_t seed, std::size_t b);
SampleMatrix parametric_draw(const ReferenceModel& ref, std::size_t n, std::uint64_t seed,
                             std::size_t b);

/// (1 + #{null >= observed}) / (B + 1).
double resample_pvalue(double observed, std::span<const double> null_stats);
/// The ceil((1 - alpha)(B + 1))-th smallest null statistic, clipped to [1, B].
double empirical_quantile(std::span<const double> null_stats, double alpha);

/// 1 - Phi(t).
double normal_upper_pvalue(double t);
/// z_alpha, the upper alpha quantile of N(0, 1).
double normal_upper_quantile(double alpha);

}  // namespace gkt
