#pragma once

#include "gkt/gof.hpp"
#include "gkt/kernel_core.hpp"
#include "gkt/report.hpp"

namespace gkt {

/// Off-diagonal mean of Gram(X) + off-diagonal mean of Gram(Y)
/// - 2 · mean of the cross Gram.
double hom_gamma2(const SampleMatrix& x, const SampleMatrix& y, double nu,
                  bool rescale_by_dim = false);

/// Variance estimate on the pooled sample z; `n_floor` enters the 1/n² floor.
VarianceEstimate hom_variance(const SampleMatrix& z, double nu, double n_floor,
                              VarianceFloor floor = VarianceFloor::absolute,
                              bool rescale_by_dim = false);
/// Pools x and y and floors with min(n, m).
VarianceEstimate hom_variance(const SampleMatrix& x, const SampleMatrix& y, double nu,
                              VarianceFloor floor = VarianceFloor::absolute,
                              bool rescale_by_dim = false);

/// T = nm / (√2 (n + m)) · γ̂² / ŝ.
double hom_stat(const SampleMatrix& x, const SampleMatrix& y, double nu,
                VarianceFloor floor = VarianceFloor::absolute, bool rescale_by_dim = false);

/// Single-nu test, calibrated by 1 - Phi(T) or by B pooled-label shuffles.
HomReport hom_test(const SampleMatrix& x, const SampleMatrix& y, double nu,
                   const TestOptions& options = {});

/// Statistics over a grid for (x, y) and for B label shuffles of the pooled
/// sample. Each shuffle re-indexes the pooled Gram; no kernel is re-evaluated.
GridStatistics hom_grid_statistics(const SampleMatrix& x, const SampleMatrix& y,
                                   const ScalingGrid& grid, const GridOptions& options);

}  // namespace gkt
