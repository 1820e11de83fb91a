#pragma once

#include <optional>
#include <span>
#include <vector>

#include "gkt/gof.hpp"
#include "gkt/kernel_core.hpp"
#include "gkt/report.hpp"

namespace gkt {

/// Per-block variance ingredients: e1 = u_pair_sq, e2 = u_triple, e3 = u_quad.
struct BlockIngredients {
  double e1 = 0.0;
  double e2 = 0.0;
  double e3 = 0.0;
};

/// Bias-corrected k = 2 estimator: pair mean of A1∘A2 + quad cross
/// - 2 · triple cross. Requires n >= 4.
double hsic2_gamma2_unbiased(const Matrix& a1, const Matrix& a2);
inline double hsic2_gamma2_unbiased(const GramMatrix& a1, const GramMatrix& a2) {
  return hsic2_gamma2_unbiased(a1.values, a2.values);
}

/// dHSIC V-statistic over k >= 2 block Grams, diagonals included.
double dhsic_gamma2_v(std::span<const GramMatrix> blocks);

std::vector<BlockIngredients> ind_ingredients(std::span<const GramMatrix> blocks);

/// Π_l (e1_l - 2 e2_l + e3_l).
double ind_variance_product(std::span<const BlockIngredients> e);
/// Division-free general-k expansion; equals the product form when k = 2.
double ind_variance_general(std::span<const BlockIngredients> e);

/// k = 2 uses the product form, k >= 3 the general expansion.
VarianceEstimate ind_variance(std::span<const GramMatrix> blocks,
                              VarianceFloor floor = VarianceFloor::absolute);

/// Unbiased for k = 2 and the V-statistic otherwise.
IndEstimator default_estimator(std::size_t k) noexcept;

/// T = (n/√2) γ̂² / ŝ.
double ind_stat(std::span<const GramMatrix> blocks, IndEstimator estimator,
                VarianceFloor floor = VarianceFloor::absolute);

/// Single-nu test. Permutation calibration keeps block 1 fixed and permutes
/// the rows of every other block independently.
IndReport ind_test(const SampleMatrix& x, const BlockLayout& layout, double nu,
                   const TestOptions& options = {},
                   std::optional<IndEstimator> estimator = std::nullopt);

/// Statistics over a grid for x and for B block permutations. Each
/// permutation builds the permuted joint distance once and reuses it for
/// every grid point.
GridStatistics ind_grid_statistics(const SampleMatrix& x, const BlockLayout& layout,
                                   const ScalingGrid& grid, const GridOptions& options,
                                   std::optional<IndEstimator> estimator = std::nullopt);

/// 1/median of the joint (concatenated) squared distances, rescaled or not.
double ind_median_nu(const SampleMatrix& x, bool rescale_by_dim);

}  // namespace gkt
