#include "gkt/gof.hpp"

#include <cmath>

#include "gkt/calibrate.hpp"
#include "gkt/error.hpp"
#include "gkt/parallel.hpp"

namespace gkt {
namespace {

double divisor_for(const SampleMatrix& x, bool rescale_by_dim) {
  return rescale_by_dim ? static_cast<double>(x.d()) : 1.0;
}

void check_inputs(const SampleMatrix& x, double nu, const ReferenceModel& ref) {
  require(std::isfinite(nu) && nu > 0.0, ErrorKind::invalid_parameter, "nu must be positive");
  validate_reference(ref);
  require(reference_dim(ref) == x.d(), ErrorKind::invalid_input,
          "sample and reference differ in dimension");
}

// T and γ̂² of one sample at every nu.
void evaluate_sample(const SampleMatrix& y, const ReferenceEvaluator& eval,
                     const std::vector<double>& nus, const std::vector<double>& self_terms,
                     const GridOptions& options, double* t_out, double* gamma2_out) {
  const DistMatrix dist = pairwise_sqdist(y, options.rescale_by_dim);
  const std::vector<double> embed = eval.mean_embedding(y, nus);
  const double n = static_cast<double>(y.n());
  for (std::size_t g = 0; g < nus.size(); ++g) {
    const UStatMoments m = moments_from_row_sums(gram_row_sums(dist, nus[g]));
    const double gamma2 = m.u_pair - 2.0 * embed[g] + self_terms[g];
    const double s_hat2 = floor_variance(variance_estimate(m), n, options.floor, m.u_pair_sq);
    t_out[g] = studentize(gamma2, s_hat2, n);
    gamma2_out[g] = gamma2;
  }
}

}  // namespace

Matrix centered_gram_gof(const SampleMatrix& x, double nu, const ReferenceModel& ref,
                         bool rescale_by_dim) {
  check_inputs(x, nu, ref);
  const double divisor = divisor_for(x, rescale_by_dim);
  const GramMatrix gram = gaussian_gram(pairwise_sqdist(x, rescale_by_dim), nu);
  const std::vector<double> m = reference_embedding(ref, x, nu, divisor);
  const double self = reference_self_term(ref, nu, divisor);
  Matrix out(x.n(), x.n());
  for (std::size_t i = 0; i < x.n(); ++i)
    for (std::size_t j = 0; j < x.n(); ++j) out(i, j) = gram(i, j) - m[i] - m[j] + self;
  return out;
}

double gof_gamma2(const SampleMatrix& x, double nu, const ReferenceModel& ref,
                  bool rescale_by_dim) {
  check_inputs(x, nu, ref);
  const double divisor = divisor_for(x, rescale_by_dim);
  const GramMatrix gram = gaussian_gram(pairwise_sqdist(x, rescale_by_dim), nu);
  const std::vector<double> m = reference_embedding(ref, x, nu, divisor);
  double mean_m = 0.0;
  for (double v : m) mean_m += v;
  mean_m /= static_cast<double>(x.n());
  return offdiag_mean(gram.values) - 2.0 * mean_m + reference_self_term(ref, nu, divisor);
}

VarianceEstimate gof_variance(const SampleMatrix& x, double nu, VarianceFloor floor,
                              bool rescale_by_dim) {
  require(x.n() >= 4, ErrorKind::sample_too_small, "variance estimate needs n >= 4");
  const UStatMoments m = ustat_moments(gaussian_gram(pairwise_sqdist(x, rescale_by_dim), nu));
  VarianceEstimate v;
  v.s_tilde2 = variance_estimate(m);
  v.s_hat2 = floor_variance(v.s_tilde2, static_cast<double>(x.n()), floor, m.u_pair_sq);
  return v;
}

double gof_stat(const SampleMatrix& x, double nu, const ReferenceModel& ref, VarianceFloor floor,
                bool rescale_by_dim) {
  const VarianceEstimate v = gof_variance(x, nu, floor, rescale_by_dim);
  return studentize(gof_gamma2(x, nu, ref, rescale_by_dim), v.s_hat2, static_cast<double>(x.n()));
}

GofReport gof_test(const SampleMatrix& x, double nu, const ReferenceModel& ref,
                   const TestOptions& options) {
  require(options.alpha > 0.0 && options.alpha < 1.0, ErrorKind::invalid_parameter,
          "alpha must be in (0, 1)");
  GofReport report;
  report.nu = nu;
  report.seed = options.seed;
  report.gamma2_hat = gof_gamma2(x, nu, ref, options.rescale_by_dim);
  const VarianceEstimate v = gof_variance(x, nu, options.floor, options.rescale_by_dim);
  report.s_tilde2 = v.s_tilde2;
  report.s_hat2 = v.s_hat2;
  report.t_stat = studentize(report.gamma2_hat, v.s_hat2, static_cast<double>(x.n()));

  if (options.calibration == Calibration::asymptotic) {
    report.calibration = "asymptotic-normal";
    report.p_value = normal_upper_pvalue(report.t_stat);
  } else {
    require(options.B >= 1, ErrorKind::invalid_parameter, "Monte-Carlo calibration needs B >= 1");
    require(can_sample(ref, x.n()), ErrorKind::calibration_unavailable,
            "reference cannot be sampled for Monte-Carlo calibration");
    report.calibration = "monte-carlo";
    report.B = options.B;
    GridOptions grid_options{options.B, options.seed, options.workers, options.floor,
                             options.rescale_by_dim};
    const GridStatistics null = gof_null_statistics(ref, x.n(), ScalingGrid({nu}), grid_options);
    report.p_value = resample_pvalue(report.t_stat, null.null_t);
  }
  report.reject = report.p_value <= options.alpha;
  return report;
}

GridStatistics gof_null_statistics(const ReferenceModel& ref, std::size_t n,
                                   const ScalingGrid& grid, const GridOptions& options) {
  validate_reference(ref);
  require(can_sample(ref, n), ErrorKind::calibration_unavailable,
          "reference cannot be sampled for Monte-Carlo calibration");
  require(n >= 4, ErrorKind::sample_too_small, "GOF statistic needs n >= 4");
  GridStatistics out;
  out.nus = grid.values();
  out.B = options.B;
  const std::size_t g = grid.size();
  out.null_t.assign(options.B * g, 0.0);
  out.null_gamma2.assign(options.B * g, 0.0);
  const double divisor = options.rescale_by_dim ? static_cast<double>(reference_dim(ref)) : 1.0;
  ReferenceEvaluator eval(ref, divisor);
  const std::vector<double> self = eval.self_terms(out.nus);
  parallel_for(options.B, options.workers, [&](std::size_t b) {
    const SampleMatrix y = parametric_draw(ref, n, options.seed, b);
    evaluate_sample(y, eval, out.nus, self, options, out.null_t.data() + b * g,
                    out.null_gamma2.data() + b * g);
  });
  return out;
}

GridStatistics gof_grid_statistics(const SampleMatrix& x, const ReferenceModel& ref,
                                   const ScalingGrid& grid, const GridOptions& options,
                                   const GridStatistics* shared_null) {
  check_inputs(x, grid.lo(), ref);
  require(x.n() >= 4, ErrorKind::sample_too_small, "GOF statistic needs n >= 4");
  GridStatistics out;
  if (options.B > 0) {
    if (shared_null != nullptr) {
      require(shared_null->nus == grid.values() && shared_null->B == options.B,
              ErrorKind::invalid_parameter, "shared null statistics do not match the grid");
      out = *shared_null;
    } else {
      out = gof_null_statistics(ref, x.n(), grid, options);
    }
  }
  out.nus = grid.values();
  out.B = options.B;
  out.t.assign(grid.size(), 0.0);
  out.gamma2.assign(grid.size(), 0.0);
  ReferenceEvaluator eval(ref, divisor_for(x, options.rescale_by_dim));
  const std::vector<double> self = eval.self_terms(out.nus);
  evaluate_sample(x, eval, out.nus, self, options, out.t.data(), out.gamma2.data());
  return out;
}

}  // namespace gkt
