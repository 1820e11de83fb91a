#pragma once

#include <functional>
#include <optional>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "gkt/kernel_core.hpp"
#include "gkt/reference.hpp"
#include "gkt/report.hpp"

namespace gkt {

enum class AdaptiveMode {
  /// Max of the studentized statistic T_nu (S.A.).
  self_normalized,
  /// Max of the raw estimate γ̂²_nu (U.A.).
  unnormalized,
};

std::string_view to_string(AdaptiveMode mode) noexcept;

struct GridMax {
  double value = 0.0;
  double nu = 0.0;
  std::size_t index = 0;
  std::vector<std::pair<double, double>> per_nu;
};

struct AdaptiveReport {
  double t_max = 0.0;
  double nu_argmax = 0.0;
  std::vector<std::pair<double, double>> per_nu;
  double p_value = 1.0;
  double q_hat = 0.0;
  AdaptiveMode mode = AdaptiveMode::self_normalized;
  std::size_t B = 0;
  std::uint64_t seed = 0;
  bool reject = false;
};

struct GofProblem {
  SampleMatrix x;
  ReferenceModel ref;
};
struct HomProblem {
  SampleMatrix x;
  SampleMatrix y;
};
struct IndProblem {
  SampleMatrix x;
  BlockLayout layout;
  std::optional<IndEstimator> estimator;
};
using Problem = std::variant<GofProblem, HomProblem, IndProblem>;

/// Max of stat_fn over the grid; ties go to the smaller nu. A failure at any
/// nu is rethrown with that nu in the message.
GridMax adaptive_stat(const std::function<double(double)>& stat_fn, const ScalingGrid& grid);

/// Max over the grid of γ̂²_nu on dimension-rescaled distances.
GridMax unnormalized_adaptive_stat(const Problem& problem, const ScalingGrid& grid);

/// All grid statistics for a problem (observed and B resamples).
GridStatistics problem_grid_statistics(const Problem& problem, const ScalingGrid& grid,
                                       const GridOptions& options);

/// Adaptive decision from precomputed grid statistics: each resample
/// contributes its own grid max.
AdaptiveReport adaptive_from_grid(const GridStatistics& stats, AdaptiveMode mode, double alpha);

struct AdaptiveOptions {
  double alpha = 0.05;
  std::size_t B = 100;
  std::uint64_t seed = 0;
  std::size_t workers = 0;
  VarianceFloor floor = VarianceFloor::kernel_scaled;
  bool rescale_by_dim = true;
  AdaptiveMode mode = AdaptiveMode::self_normalized;
};

/// Monte-Carlo (GOF) or permutation (HOM, IND) calibrated max-over-grid test.
AdaptiveReport adaptive_test(const Problem& problem, const ScalingGrid& grid,
                             const AdaptiveOptions& options = {});

/// Data dimension of the problem.
std::size_t problem_dim(const Problem& problem) noexcept;
/// Sample size used by grid defaults: n for GOF and IND, min(n, m) for HOM.
std::size_t problem_size(const Problem& problem) noexcept;

}  // namespace gkt
