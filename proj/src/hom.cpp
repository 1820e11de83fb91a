#include "gkt/hom.hpp"

#include <algorithm>
#include <cmath>

#include "gkt/calibrate.hpp"
#include "gkt/error.hpp"
#include "gkt/parallel.hpp"
#include "gkt/simd.hpp"

namespace gkt {
namespace {

void check_pair(const SampleMatrix& x, const SampleMatrix& y) {
  require(x.d() == y.d(), ErrorKind::invalid_input, "samples differ in dimension");
}

double effective_n(double n, double m) { return n * m / (n + m); }

// Within/cross sums for one labelling. mask[i] = 1 marks the X group.
struct LabelSums {
  double xx = 0.0;
  double xy = 0.0;
};

LabelSums label_sums(const Matrix& a0, const double* mask) {
  const auto& k = simd::kernels();
  const std::size_t total = a0.rows();
  LabelSums s;
  for (std::size_t i = 0; i < total; ++i) {
    const double c = k.dot(a0.data() + i * total, mask, total);
    if (mask[i] != 0.0)
      s.xx += c;
    else
      s.xy += c;
  }
  return s;
}

double gamma2_from_sums(const LabelSums& s, double total_sum, double n, double m) {
  const double yy = total_sum - s.xx - 2.0 * s.xy;
  return s.xx / (n * (n - 1.0)) + yy / (m * (m - 1.0)) - 2.0 * s.xy / (n * m);
}

}  // namespace

double hom_gamma2(const SampleMatrix& x, const SampleMatrix& y, double nu, bool rescale_by_dim) {
  check_pair(x, y);
  require(std::isfinite(nu) && nu > 0.0, ErrorKind::invalid_parameter, "nu must be positive");
  const double divisor = rescale_by_dim ? static_cast<double>(x.d()) : 1.0;
  const double within_x = offdiag_mean(gaussian_gram(pairwise_sqdist(x, rescale_by_dim), nu).values);
  const double within_y = offdiag_mean(gaussian_gram(pairwise_sqdist(y, rescale_by_dim), nu).values);
  const Matrix cross = cross_sqdist(x, y, divisor);
  const std::size_t len = x.n() * y.n();
  const double cross_mean =
      simd::kernels().exp_neg_scaled_sum(cross.data(), len, nu) / static_cast<double>(len);
  return within_x + within_y - 2.0 * cross_mean;
}

VarianceEstimate hom_variance(const SampleMatrix& z, double nu, double n_floor,
                              VarianceFloor floor, bool rescale_by_dim) {
  require(z.n() >= 4, ErrorKind::sample_too_small, "pooled variance estimate needs N >= 4");
  const UStatMoments m = ustat_moments(gaussian_gram(pairwise_sqdist(z, rescale_by_dim), nu));
  VarianceEstimate v;
  v.s_tilde2 = variance_estimate(m);
  v.s_hat2 = floor_variance(v.s_tilde2, n_floor, floor, m.u_pair_sq);
  return v;
}

VarianceEstimate hom_variance(const SampleMatrix& x, const SampleMatrix& y, double nu,
                              VarianceFloor floor, bool rescale_by_dim) {
  check_pair(x, y);
  const double n_floor = static_cast<double>(std::min(x.n(), y.n()));
  return hom_variance(SampleMatrix::concat(x, y), nu, n_floor, floor, rescale_by_dim);
}

double hom_stat(const SampleMatrix& x, const SampleMatrix& y, double nu, VarianceFloor floor,
                bool rescale_by_dim) {
  const VarianceEstimate v = hom_variance(x, y, nu, floor, rescale_by_dim);
  return studentize(hom_gamma2(x, y, nu, rescale_by_dim), v.s_hat2,
                    effective_n(static_cast<double>(x.n()), static_cast<double>(y.n())));
}

HomReport hom_test(const SampleMatrix& x, const SampleMatrix& y, double nu,
                   const TestOptions& options) {
  require(options.alpha > 0.0 && options.alpha < 1.0, ErrorKind::invalid_parameter,
          "alpha must be in (0, 1)");
  HomReport report;
  report.nu = nu;
  report.seed = options.seed;
  const VarianceEstimate v = hom_variance(x, y, nu, options.floor, options.rescale_by_dim);
  report.s_tilde2 = v.s_tilde2;
  report.s_hat2 = v.s_hat2;
  if (options.calibration == Calibration::asymptotic) {
    report.calibration = "asymptotic-normal";
    report.gamma2_hat = hom_gamma2(x, y, nu, options.rescale_by_dim);
    report.t_stat = studentize(report.gamma2_hat, v.s_hat2,
                               effective_n(static_cast<double>(x.n()), static_cast<double>(y.n())));
    report.p_value = normal_upper_pvalue(report.t_stat);
  } else {
    require(options.B >= 1, ErrorKind::invalid_parameter, "permutation calibration needs B >= 1");
    report.calibration = "permutation";
    report.B = options.B;
    const GridStatistics stats = hom_grid_statistics(
        x, y, ScalingGrid({nu}),
        GridOptions{options.B, options.seed, options.workers, options.floor, options.rescale_by_dim});
    report.gamma2_hat = stats.gamma2[0];
    report.t_stat = stats.t[0];
    report.p_value = stats.fixed_pvalue(0);
  }
  report.reject = report.p_value <= options.alpha;
  return report;
}

GridStatistics hom_grid_statistics(const SampleMatrix& x, const SampleMatrix& y,
                                   const ScalingGrid& grid, const GridOptions& options) {
  check_pair(x, y);
  const std::size_t n = x.n();
  const std::size_t m = y.n();
  const std::size_t total = n + m;
  require(total >= 4, ErrorKind::sample_too_small, "pooled sample needs N >= 4");
  const double nd = static_cast<double>(n);
  const double md = static_cast<double>(m);
  const double n_eff = effective_n(nd, md);
  const double n_floor = static_cast<double>(std::min(n, m));

  const DistMatrix dist = pairwise_sqdist(SampleMatrix::concat(x, y), options.rescale_by_dim);

  // One mask per labelling; row 0 is the observed split.
  const std::size_t B = options.B;
  std::vector<double> masks((B + 1) * total, 0.0);
  std::fill(masks.begin(), masks.begin() + static_cast<std::ptrdiff_t>(n), 1.0);
  for (std::size_t b = 0; b < B; ++b) {
    const std::vector<std::uint32_t> perm = pooled_shuffle(total, options.seed, b);
    double* mask = masks.data() + (b + 1) * total;
    for (std::size_t i = 0; i < n; ++i) mask[perm[i]] = 1.0;
  }

  const std::size_t G = grid.size();
  GridStatistics out;
  out.nus = grid.values();
  out.B = B;
  out.t.assign(G, 0.0);
  out.gamma2.assign(G, 0.0);
  out.null_t.assign(B * G, 0.0);
  out.null_gamma2.assign(B * G, 0.0);

  for (std::size_t g = 0; g < G; ++g) {
    GramMatrix gram = gaussian_gram(dist, grid[g]);
    for (std::size_t i = 0; i < total; ++i) gram.values(i, i) = 0.0;
    const UStatMoments mom = ustat_moments(gram.values);
    const double s_hat2 = floor_variance(variance_estimate(mom), n_floor, options.floor, mom.u_pair_sq);
    const double total_sum = mom.u_pair * static_cast<double>(total) * static_cast<double>(total - 1);

    auto evaluate = [&](std::size_t row, double& t, double& gamma2) {
      gamma2 = gamma2_from_sums(label_sums(gram.values, masks.data() + row * total), total_sum, nd, md);
      t = studentize(gamma2, s_hat2, n_eff);
    };
    evaluate(0, out.t[g], out.gamma2[g]);
    parallel_for(B, options.workers, [&](std::size_t b) {
      evaluate(b + 1, out.null_t[b * G + g], out.null_gamma2[b * G + g]);
    });
  }
  return out;
}

}  // namespace gkt
