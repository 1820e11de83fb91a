#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "gkt/matrix.hpp"

namespace gkt {

/// Symmetric n×n squared distances with zero diagonal. `divisor` is 1 for raw
/// distances and d when they were rescaled by dimension.
struct DistMatrix {
  Matrix values;
  double divisor = 1.0;

  std::size_t n() const noexcept { return values.rows(); }
  /// Strict upper triangle in row-major order, length n(n-1)/2.
  std::vector<double> upper_triangle() const;
};

/// exp(-nu * D) with unit diagonal.
struct GramMatrix {
  Matrix values;
  double nu = 0.0;
  bool rescaled_by_dim = false;

  std::size_t n() const noexcept { return values.rows(); }
  double operator()(std::size_t i, std::size_t j) const noexcept { return values(i, j); }
};

/// Widths of k >= 2 contiguous coordinate blocks.
class BlockLayout {
 public:
  explicit BlockLayout(std::vector<std::size_t> widths);
  /// k blocks of width 1.
  static BlockLayout unit(std::size_t k);
  /// Two halves of a d-vector (d even).
  static BlockLayout halves(std::size_t d);

  std::size_t k() const noexcept { return widths_.size(); }
  std::size_t width(std::size_t l) const noexcept { return widths_[l]; }
  std::size_t offset(std::size_t l) const noexcept { return offsets_[l]; }
  std::size_t total() const noexcept { return offsets_.back(); }
  const std::vector<std::size_t>& widths() const noexcept { return widths_; }

 private:
  std::vector<std::size_t> widths_;
  std::vector<std::size_t> offsets_;
};

/// Strictly increasing, nonempty list of scaling parameters.
class ScalingGrid {
 public:
  explicit ScalingGrid(std::vector<double> values);
  /// `points` log-spaced values from lo to hi inclusive; one point gives {hi}.
  static ScalingGrid log_spaced(double lo, double hi, std::size_t points);

  std::size_t size() const noexcept { return values_.size(); }
  double operator[](std::size_t i) const noexcept { return values_[i]; }
  const std::vector<double>& values() const noexcept { return values_; }
  double lo() const noexcept { return values_.front(); }
  double hi() const noexcept { return values_.back(); }

 private:
  std::vector<double> values_;
};

struct UStatMoments {
  double u_pair = 0.0;
  double u_pair_sq = 0.0;
  double u_triple = 0.0;
  double u_quad = 0.0;
};

/// How the variance estimate is kept away from zero.
enum class VarianceFloor {
  /// max{s~², 1/n²}.
  absolute,
  /// max{s~², e1/n²} where e1 estimates E G_{2nu} <= 1. Equal to the absolute
  /// floor for unit-scale kernels, but does not swamp the estimate when the
  /// Gram entries are tiny (large nu on high-dimensional data).
  kernel_scaled,
};

DistMatrix pairwise_sqdist(const SampleMatrix& x, bool rescale_by_dim);
/// Squared distances between the rows of x and the rows of y (n×m).
Matrix cross_sqdist(const SampleMatrix& x, const SampleMatrix& y, double divisor = 1.0);

GramMatrix gaussian_gram(const DistMatrix& dist, double nu);

/// 1 / median of the strict-upper-triangle squared distances.
double median_heuristic(const DistMatrix& dist);

/// One DistMatrix per block. With rescaling every block is divided by the
/// full dimension, so block distances add up to the joint distance.
std::vector<DistMatrix> block_sqdists(const SampleMatrix& x, const BlockLayout& layout,
                                      bool rescale_by_dim);
std::vector<GramMatrix> block_grams(const SampleMatrix& x, const BlockLayout& layout, double nu,
                                    bool rescale_by_dim);

/// Log-spaced grid over [1, n^{2/d}].
ScalingGrid scaling_grid(std::size_t n, std::size_t d, std::size_t points = 20);
/// Grid used by adaptive runs on dimension-rescaled distances:
/// [1, max(n^{2/d}, 2 sqrt(d))]. Equals scaling_grid whenever n^{2/d} >= 2 sqrt(d).
ScalingGrid rescaled_default_grid(std::size_t n, std::size_t d, std::size_t points = 20);

/// n^{4/(d + 4s)}.
double recommended_nu(std::size_t n, std::size_t d, double s = 2.0);

/// n(n-1)...(n-m+1) in floating point.
double falling_factorial(double n, int m) noexcept;

/// Mean of the off-diagonal entries (n >= 2).
double offdiag_mean(const Matrix& a);
/// Moments of a square matrix; requires n >= 4.
UStatMoments ustat_moments(const Matrix& a);
inline UStatMoments ustat_moments(const GramMatrix& a) { return ustat_moments(a.values); }

/// Sum over distinct (i, j1, j2) of A[i,j1] B[i,j2] / (n)_3.
double ustat_triple_cross(const Matrix& a, const Matrix& b);
/// Sum over distinct (i1, i2, j1, j2) of A[i1,i2] B[j1,j2] / (n)_4.
double ustat_quad_cross(const Matrix& a, const Matrix& b);

/// Row sums r_i and row sums of squares q_i of exp(-nu D), diagonal
/// excluded, computed from the upper triangle without forming the Gram.
struct GramRowSums {
  std::vector<double> r;
  std::vector<double> q;
};
GramRowSums gram_row_sums(const DistMatrix& dist, double nu);
/// Same moments as ustat_moments on the Gram the row sums came from.
UStatMoments moments_from_row_sums(const GramRowSums& sums);

/// s~² = u_pair_sq - 2 u_triple + u_quad.
inline double variance_estimate(const UStatMoments& m) noexcept {
  return m.u_pair_sq - 2.0 * m.u_triple + m.u_quad;
}

/// Applies the floor; `n_floor` is the sample size entering 1/n² and
/// `kernel_scale` the e1 factor for the kernel-scaled policy.
double floor_variance(double s_tilde2, double n_floor, VarianceFloor policy,
                      double kernel_scale) noexcept;

/// (n/√2) γ̂² / ŝ.
double studentize(double gamma2, double s_hat2, double n) noexcept;

}  // namespace gkt
