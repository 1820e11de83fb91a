#include "gkt/kernel_core.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "gkt/error.hpp"
#include "gkt/simd.hpp"

namespace gkt {
namespace {

void mirror_upper(Matrix& m) {
  const std::size_t n = m.rows();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) m(j, i) = m(i, j);
}

void require_square(const Matrix& a) {
  require(a.rows() == a.cols(), ErrorKind::invalid_input, "matrix must be square");
}

// Row sums and row sums of squares with the diagonal excluded. The diagonal is
// skipped rather than subtracted: at large nu the off-diagonal entries can be
// ~1e-7 and subtracting a unit diagonal would destroy their squares.
// Row sums are kept in extended precision: the quadruple-sum identity
// subtracts terms of size S² and loses digits when one entry dominates a row.
struct RowStats {
  std::vector<long double> r;
  std::vector<long double> q;
};

RowStats row_stats(const Matrix& a) {
  const std::size_t n = a.rows();
  RowStats s{std::vector<long double>(n, 0.0L), std::vector<long double>(n, 0.0L)};
  for (std::size_t i = 0; i < n; ++i) {
    const double* row = a.data() + i * n;
    long double r = 0.0L, q = 0.0L;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      const long double v = row[j];
      r += v;
      q += v * v;
    }
    s.r[i] = r;
    s.q[i] = q;
  }
  return s;
}

UStatMoments moments_extended(const std::vector<long double>& r, const std::vector<long double>& q) {
  const std::size_t n = r.size();
  require(n >= 4, ErrorKind::sample_too_small, "U-statistic moments need n >= 4");
  long double total = 0.0L, squares = 0.0L, triple = 0.0L;
  for (std::size_t i = 0; i < n; ++i) {
    total += r[i];
    squares += q[i];
    triple += r[i] * r[i] - q[i];
  }
  const long double nn = n;
  const long double f2 = nn * (nn - 1), f3 = f2 * (nn - 2), f4 = f3 * (nn - 3);
  UStatMoments m;
  m.u_pair = static_cast<double>(total / f2);
  m.u_pair_sq = static_cast<double>(squares / f2);
  m.u_triple = static_cast<double>(triple / f3);
  m.u_quad = static_cast<double>((total * total - 2.0L * squares - 4.0L * triple) / f4);
  return m;
}

struct CrossSums {
  long double s_a = 0.0L;
  long double s_b = 0.0L;
  long double rr = 0.0L;  // Σ_i r^A_i r^B_i
  long double f = 0.0L;   // Σ_{i≠j} A[i,j] B[i,j]
};

CrossSums cross_sums(const Matrix& a, const Matrix& b) {
  require_square(a);
  require(a.rows() == b.rows() && a.cols() == b.cols(), ErrorKind::invalid_input,
          "cross moments need matrices of the same shape");
  const RowStats sa = row_stats(a);
  const RowStats sb = row_stats(b);
  const std::size_t n = a.rows();
  CrossSums c;
  for (std::size_t i = 0; i < n; ++i) {
    c.s_a += sa.r[i];
    c.s_b += sb.r[i];
    c.rr += sa.r[i] * sb.r[i];
    for (std::size_t j = 0; j < n; ++j)
      if (j != i) c.f += static_cast<long double>(a(i, j)) * b(i, j);
  }
  return c;
}

}  // namespace

std::vector<double> DistMatrix::upper_triangle() const {
  const std::size_t n = values.rows();
  std::vector<double> out;
  out.reserve(n * (n - 1) / 2);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) out.push_back(values(i, j));
  return out;
}

BlockLayout::BlockLayout(std::vector<std::size_t> widths) : widths_(std::move(widths)) {
  require(widths_.size() >= 2, ErrorKind::invalid_layout, "block layout needs k >= 2 blocks");
  offsets_.assign(1, 0);
  for (std::size_t w : widths_) {
    require(w >= 1, ErrorKind::invalid_layout, "block widths must be positive");
    offsets_.push_back(offsets_.back() + w);
  }
}

BlockLayout BlockLayout::unit(std::size_t k) { return BlockLayout(std::vector<std::size_t>(k, 1)); }

BlockLayout BlockLayout::halves(std::size_t d) {
  require(d >= 2 && d % 2 == 0, ErrorKind::invalid_layout, "halves layout needs an even d");
  return BlockLayout({d / 2, d / 2});
}

ScalingGrid::ScalingGrid(std::vector<double> values) : values_(std::move(values)) {
  require(!values_.empty(), ErrorKind::invalid_parameter, "scaling grid is empty");
  for (std::size_t i = 0; i < values_.size(); ++i) {
    require(std::isfinite(values_[i]) && values_[i] > 0.0, ErrorKind::invalid_parameter,
            "scaling grid values must be positive and finite");
    if (i > 0)
      require(values_[i] > values_[i - 1], ErrorKind::invalid_parameter,
              "scaling grid must be strictly increasing");
  }
}

ScalingGrid ScalingGrid::log_spaced(double lo, double hi, std::size_t points) {
  require(points >= 1, ErrorKind::invalid_parameter, "grid needs at least one point");
  require(lo > 0.0 && hi >= lo && std::isfinite(hi), ErrorKind::invalid_parameter,
          "grid endpoints must satisfy 0 < lo <= hi");
  if (points == 1 || hi == lo) return ScalingGrid({hi});
  std::vector<double> v(points);
  const double a = std::log(lo);
  const double step = (std::log(hi) - a) / static_cast<double>(points - 1);
  v.front() = lo;
  for (std::size_t i = 1; i + 1 < points; ++i) v[i] = std::exp(a + step * static_cast<double>(i));
  v.back() = hi;
  return ScalingGrid(std::move(v));
}

DistMatrix pairwise_sqdist(const SampleMatrix& x, bool rescale_by_dim) {
  const auto& k = simd::kernels();
  const std::size_t n = x.n();
  const std::size_t d = x.d();
  DistMatrix out{Matrix(n, n, 0.0), rescale_by_dim ? static_cast<double>(d) : 1.0};
  const double* base = x.matrix().data();
  for (std::size_t i = 0; i + 1 < n; ++i) {
    double* dst = out.values.data() + i * n + i + 1;
    k.sqdist_rows(base + i * d, base + (i + 1) * d, n - i - 1, d, dst);
    if (rescale_by_dim)
      for (std::size_t j = 0; j < n - i - 1; ++j) dst[j] /= out.divisor;
  }
  mirror_upper(out.values);
  return out;
}

Matrix cross_sqdist(const SampleMatrix& x, const SampleMatrix& y, double divisor) {
  require(x.d() == y.d(), ErrorKind::invalid_input, "samples differ in dimension");
  const auto& k = simd::kernels();
  Matrix out(x.n(), y.n());
  for (std::size_t i = 0; i < x.n(); ++i) {
    double* dst = out.data() + i * y.n();
    k.sqdist_rows(x.row(i).data(), y.matrix().data(), y.n(), x.d(), dst);
    if (divisor != 1.0)
      for (std::size_t j = 0; j < y.n(); ++j) dst[j] /= divisor;
  }
  return out;
}

GramMatrix gaussian_gram(const DistMatrix& dist, double nu) {
  require(std::isfinite(nu) && nu > 0.0, ErrorKind::invalid_parameter, "nu must be positive");
  const auto& k = simd::kernels();
  const std::size_t n = dist.n();
  GramMatrix g{Matrix(n, n, 1.0), nu, dist.divisor != 1.0};
  for (std::size_t i = 0; i + 1 < n; ++i)
    k.exp_neg_scaled(dist.values.data() + i * n + i + 1, g.values.data() + i * n + i + 1,
                     n - i - 1, nu);
  mirror_upper(g.values);
  return g;
}

double median_heuristic(const DistMatrix& dist) {
  std::vector<double> upper = dist.upper_triangle();
  require(!upper.empty(), ErrorKind::sample_too_small, "median heuristic needs n >= 2");
  require(std::any_of(upper.begin(), upper.end(), [](double v) { return v > 0.0; }),
          ErrorKind::degenerate_sample, "all pairwise distances are zero");
  const std::size_t mid = upper.size() / 2;
  std::nth_element(upper.begin(), upper.begin() + static_cast<std::ptrdiff_t>(mid), upper.end());
  double median = upper[mid];
  if (upper.size() % 2 == 0) {
    const double below = *std::max_element(upper.begin(), upper.begin() + static_cast<std::ptrdiff_t>(mid));
    median = 0.5 * (median + below);
  }
  require(median > 0.0, ErrorKind::degenerate_sample,
          "median pairwise distance is zero (more than half the pairs coincide)");
  return 1.0 / median;
}

std::vector<DistMatrix> block_sqdists(const SampleMatrix& x, const BlockLayout& layout,
                                      bool rescale_by_dim) {
  require(layout.total() == x.d(), ErrorKind::invalid_layout,
          "block widths do not sum to the sample dimension");
  const double divisor = rescale_by_dim ? static_cast<double>(x.d()) : 1.0;
  std::vector<DistMatrix> out;
  out.reserve(layout.k());
  for (std::size_t l = 0; l < layout.k(); ++l) {
    DistMatrix block = pairwise_sqdist(x.columns(layout.offset(l), layout.width(l)), false);
    if (rescale_by_dim) {
      double* v = block.values.data();
      for (std::size_t t = 0; t < block.n() * block.n(); ++t) v[t] /= divisor;
    }
    block.divisor = divisor;
    out.push_back(std::move(block));
  }
  return out;
}

std::vector<GramMatrix> block_grams(const SampleMatrix& x, const BlockLayout& layout, double nu,
                                    bool rescale_by_dim) {
  std::vector<GramMatrix> out;
  for (const DistMatrix& dist : block_sqdists(x, layout, rescale_by_dim))
    out.push_back(gaussian_gram(dist, nu));
  return out;
}

ScalingGrid scaling_grid(std::size_t n, std::size_t d, std::size_t points) {
  require(n >= 1 && d >= 1, ErrorKind::invalid_parameter, "grid needs n >= 1 and d >= 1");
  const double hi = std::pow(static_cast<double>(n), 2.0 / static_cast<double>(d));
  require(hi >= 1.0, ErrorKind::invalid_parameter, "n^{2/d} must be at least 1");
  return ScalingGrid::log_spaced(1.0, hi, points);
}

ScalingGrid rescaled_default_grid(std::size_t n, std::size_t d, std::size_t points) {
  require(n >= 1 && d >= 1, ErrorKind::invalid_parameter, "grid needs n >= 1 and d >= 1");
  const double spec_hi = std::pow(static_cast<double>(n), 2.0 / static_cast<double>(d));
  const double hi = std::max(spec_hi, 2.0 * std::sqrt(static_cast<double>(d)));
  return ScalingGrid::log_spaced(1.0, hi, points);
}

double recommended_nu(std::size_t n, std::size_t d, double s) {
  require(n >= 1 && d >= 1 && s > 0.0, ErrorKind::invalid_parameter,
          "recommended nu needs n, d >= 1 and s > 0");
  return std::pow(static_cast<double>(n), 4.0 / (static_cast<double>(d) + 4.0 * s));
}

double falling_factorial(double n, int m) noexcept {
  double out = 1.0;
  for (int t = 0; t < m; ++t) out *= n - t;
  return out;
}

double offdiag_mean(const Matrix& a) {
  require_square(a);
  const std::size_t n = a.rows();
  require(n >= 2, ErrorKind::sample_too_small, "off-diagonal mean needs n >= 2");
  const RowStats s = row_stats(a);
  long double total = 0.0L;
  for (long double r : s.r) total += r;
  return static_cast<double>(total / falling_factorial(static_cast<double>(n), 2));
}

GramRowSums gram_row_sums(const DistMatrix& dist, double nu) {
  require(std::isfinite(nu) && nu > 0.0, ErrorKind::invalid_parameter, "nu must be positive");
  const auto& k = simd::kernels();
  const std::size_t n = dist.n();
  GramRowSums s{std::vector<double>(n, 0.0), std::vector<double>(n, 0.0)};
  std::vector<double> e(n);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const std::size_t len = n - i - 1;
    k.exp_neg_scaled(dist.values.data() + i * n + i + 1, e.data(), len, nu);
    s.r[i] += k.sum(e.data(), len);
    s.q[i] += k.dot(e.data(), e.data(), len);
    double* r = s.r.data() + i + 1;
    double* q = s.q.data() + i + 1;
    for (std::size_t j = 0; j < len; ++j) {
      r[j] += e[j];
      q[j] += e[j] * e[j];
    }
  }
  return s;
}

UStatMoments moments_from_row_sums(const GramRowSums& s) {
  return moments_extended(std::vector<long double>(s.r.begin(), s.r.end()),
                          std::vector<long double>(s.q.begin(), s.q.end()));
}

UStatMoments ustat_moments(const Matrix& a) {
  require_square(a);
  require(a.rows() >= 4, ErrorKind::sample_too_small, "U-statistic moments need n >= 4");
  const RowStats s = row_stats(a);
  return moments_extended(s.r, s.q);
}

double ustat_triple_cross(const Matrix& a, const Matrix& b) {
  require(a.rows() >= 3, ErrorKind::sample_too_small, "triple sums need n >= 3");
  const CrossSums c = cross_sums(a, b);
  return static_cast<double>((c.rr - c.f) / falling_factorial(static_cast<double>(a.rows()), 3));
}

double ustat_quad_cross(const Matrix& a, const Matrix& b) {
  require(a.rows() >= 4, ErrorKind::sample_too_small, "quadruple sums need n >= 4");
  const CrossSums c = cross_sums(a, b);
  return static_cast<double>((c.s_a * c.s_b - 4.0L * c.rr + 2.0L * c.f) /
                             falling_factorial(static_cast<double>(a.rows()), 4));
}

double floor_variance(double s_tilde2, double n_floor, VarianceFloor policy,
                      double kernel_scale) noexcept {
  const double absolute = 1.0 / (n_floor * n_floor);
  double floor = absolute;
  if (policy == VarianceFloor::kernel_scaled && std::isnormal(kernel_scale) && kernel_scale > 0.0)
    floor = std::min(absolute, kernel_scale * absolute);
  const double out = std::max(s_tilde2, floor);
  return std::isnormal(out) && out > 0.0 ? out : absolute;
}

double studentize(double gamma2, double s_hat2, double n) noexcept {
  return n / std::sqrt(2.0) * gamma2 / std::sqrt(s_hat2);
}

}  // namespace gkt
