#pragma once

#include "gkt/kernel_core.hpp"
#include "gkt/reference.hpp"
#include "gkt/report.hpp"

namespace gkt {

struct VarianceEstimate {
  double s_tilde2 = 0.0;
  double s_hat2 = 0.0;
};

/// Ḡ(X_i, X_j) = G(X_i, X_j) - m(X_i) - m(X_j) + M, with m and M the P0
/// expectations of the kernel.
Matrix centered_gram_gof(const SampleMatrix& x, double nu, const ReferenceModel& ref,
                         bool rescale_by_dim = false);

/// Off-diagonal mean of the centered Gram, computed as
/// u_pair(G) - (2/n) Σ m(X_i) + M.
double gof_gamma2(const SampleMatrix& x, double nu, const ReferenceModel& ref,
                  bool rescale_by_dim = false);

/// s~² from the Gram of x and its floored version ŝ². Requires n >= 4.
VarianceEstimate gof_variance(const SampleMatrix& x, double nu,
                              VarianceFloor floor = VarianceFloor::absolute,
                              bool rescale_by_dim = false);

/// T = (n/√2) γ̂² / ŝ.
double gof_stat(const SampleMatrix& x, double nu, const ReferenceModel& ref,
                VarianceFloor floor = VarianceFloor::absolute, bool rescale_by_dim = false);

/// Single-nu test, calibrated by 1 - Phi(T) or by B fresh draws from P0.
GofReport gof_test(const SampleMatrix& x, double nu, const ReferenceModel& ref,
                   const TestOptions& options = {});

/// Statistics over a grid for x and, when options.B > 0, for B samples from P0.
/// The null part depends only on (ref, n, grid, options); pass a previously
/// computed `shared_null` to reuse it across data sets.
GridStatistics gof_grid_statistics(const SampleMatrix& x, const ReferenceModel& ref,
                                   const ScalingGrid& grid, const GridOptions& options,
                                   const GridStatistics* shared_null = nullptr);

/// Only the Monte-Carlo null part of gof_grid_statistics.
GridStatistics gof_null_statistics(const ReferenceModel& ref, std::size_t n,
                                   const ScalingGrid& grid, const GridOptions& options);

}  // namespace gkt
