#include "gkt/ind.hpp"

#include <cmath>
#include <numeric>

#include "gkt/calibrate.hpp"
#include "gkt/error.hpp"
#include "gkt/parallel.hpp"
#include "gkt/simd.hpp"

namespace gkt {
namespace {

void check_blocks(std::span<const GramMatrix> blocks) {
  require(blocks.size() >= 2, ErrorKind::invalid_layout, "independence needs k >= 2 blocks");
  const std::size_t n = blocks.front().n();
  for (const GramMatrix& g : blocks)
    require(g.n() == n && g.values.cols() == n, ErrorKind::invalid_input,
            "block Grams must share the sample size");
}

BlockIngredients ingredients_from(const UStatMoments& m) {
  return BlockIngredients{m.u_pair_sq, m.u_triple, m.u_quad};
}

double floor_for_blocks(double s_tilde2, std::span<const BlockIngredients> e, double n,
                        VarianceFloor floor) {
  double scale = 1.0;
  for (const BlockIngredients& b : e) scale *= b.e1;
  return floor_variance(s_tilde2, n, floor, scale);
}

double combine_variance(std::span<const BlockIngredients> e) {
  return e.size() == 2 ? ind_variance_product(e) : ind_variance_general(e);
}

}  // namespace

std::string_view to_string(IndEstimator e) noexcept {
  return e == IndEstimator::unbiased_u ? "unbiased-U" : "v-statistic";
}

IndEstimator default_estimator(std::size_t k) noexcept {
  return k == 2 ? IndEstimator::unbiased_u : IndEstimator::v_statistic;
}

double hsic2_gamma2_unbiased(const Matrix& a1, const Matrix& a2) {
  require(a1.rows() >= 4, ErrorKind::sample_too_small, "unbiased HSIC needs n >= 4");
  require(a1.rows() == a2.rows() && a1.cols() == a2.cols() && a1.rows() == a1.cols(),
          ErrorKind::invalid_input, "block Grams must be square and of equal size");
  const std::size_t n = a1.rows();
  Matrix hadamard(n, n);
  for (std::size_t t = 0; t < n * n; ++t) hadamard.data()[t] = a1.data()[t] * a2.data()[t];
  return offdiag_mean(hadamard) + ustat_quad_cross(a1, a2) - 2.0 * ustat_triple_cross(a1, a2);
}

double dhsic_gamma2_v(std::span<const GramMatrix> blocks) {
  check_blocks(blocks);
  const std::size_t n = blocks.front().n();
  const long double nd = static_cast<long double>(n);
  // The three terms are O(1) while their combination can be far smaller, so
  // accumulate in extended precision.
  std::vector<long double> joint(n * n, 1.0L);
  std::vector<long double> row_prod(n, 1.0L);
  long double mean_prod = 1.0L;
  for (const GramMatrix& g : blocks) {
    const double* v = g.values.data();
    for (std::size_t t = 0; t < n * n; ++t) joint[t] *= v[t];
    long double total = 0.0L;
    for (std::size_t i = 0; i < n; ++i) {
      long double r = 0.0L;
      for (std::size_t j = 0; j < n; ++j) r += v[i * n + j];
      row_prod[i] *= r / nd;
      total += r;
    }
    mean_prod *= total / (nd * nd);
  }
  long double joint_sum = 0.0L, cross = 0.0L;
  for (long double v : joint) joint_sum += v;
  for (long double v : row_prod) cross += v;
  return static_cast<double>(joint_sum / (nd * nd) + mean_prod - 2.0L * cross / nd);
}

std::vector<BlockIngredients> ind_ingredients(std::span<const GramMatrix> blocks) {
  check_blocks(blocks);
  require(blocks.front().n() >= 4, ErrorKind::sample_too_small,
          "variance ingredients need n >= 4");
  std::vector<BlockIngredients> out;
  for (const GramMatrix& g : blocks) out.push_back(ingredients_from(ustat_moments(g)));
  return out;
}

double ind_variance_product(std::span<const BlockIngredients> e) {
  double out = 1.0;
  for (const BlockIngredients& b : e) out *= b.e1 - 2.0 * b.e2 + b.e3;
  return out;
}

double ind_variance_general(std::span<const BlockIngredients> e) {
  const std::size_t k = e.size();
  // Products over all blocks except the listed ones.
  auto prod_except = [&](auto field, std::size_t skip1, std::size_t skip2) {
    double p = 1.0;
    for (std::size_t l = 0; l < k; ++l)
      if (l != skip1 && l != skip2) p *= e[l].*field;
    return p;
  };
  constexpr std::size_t none = static_cast<std::size_t>(-1);
  const double kd = static_cast<double>(k);
  const double p1 = prod_except(&BlockIngredients::e1, none, none);
  const double p2 = prod_except(&BlockIngredients::e2, none, none);
  const double p3 = prod_except(&BlockIngredients::e3, none, none);

  const double a = p1 - 2.0 * p2 + p3;

  double b = -kd * p2 + kd * p3;
  for (std::size_t j = 0; j < k; ++j) {
    b += e[j].e1 * prod_except(&BlockIngredients::e2, j, none);
    b -= e[j].e2 * prod_except(&BlockIngredients::e3, j, none);
  }

  double c = 0.0;
  for (std::size_t j = 0; j < k; ++j)
    c += (e[j].e1 - 2.0 * e[j].e2 + e[j].e3) * prod_except(&BlockIngredients::e3, j, none);
  for (std::size_t j1 = 0; j1 < k; ++j1)
    for (std::size_t j2 = 0; j2 < k; ++j2)
      if (j1 != j2)
        c += (e[j1].e2 - e[j1].e3) * (e[j2].e2 - e[j2].e3) *
             prod_except(&BlockIngredients::e3, j1, j2);

  return a - 2.0 * b + c;
}

VarianceEstimate ind_variance(std::span<const GramMatrix> blocks, VarianceFloor floor) {
  const std::vector<BlockIngredients> e = ind_ingredients(blocks);
  VarianceEstimate v;
  v.s_tilde2 = combine_variance(e);
  v.s_hat2 = floor_for_blocks(v.s_tilde2, e, static_cast<double>(blocks.front().n()), floor);
  return v;
}

double ind_stat(std::span<const GramMatrix> blocks, IndEstimator estimator, VarianceFloor floor) {
  check_blocks(blocks);
  double gamma2 = 0.0;
  if (estimator == IndEstimator::unbiased_u) {
    require(blocks.size() == 2, ErrorKind::invalid_parameter,
            "the unbiased estimator is only available for k = 2");
    gamma2 = hsic2_gamma2_unbiased(blocks[0], blocks[1]);
  } else {
    gamma2 = dhsic_gamma2_v(blocks);
  }
  const VarianceEstimate v = ind_variance(blocks, floor);
  return studentize(gamma2, v.s_hat2, static_cast<double>(blocks.front().n()));
}

double ind_median_nu(const SampleMatrix& x, bool rescale_by_dim) {
  return median_heuristic(pairwise_sqdist(x, rescale_by_dim));
}

IndReport ind_test(const SampleMatrix& x, const BlockLayout& layout, double nu,
                   const TestOptions& options, std::optional<IndEstimator> estimator) {
  require(options.alpha > 0.0 && options.alpha < 1.0, ErrorKind::invalid_parameter,
          "alpha must be in (0, 1)");
  const IndEstimator est = estimator.value_or(default_estimator(layout.k()));
  IndReport report;
  report.nu = nu;
  report.seed = options.seed;
  report.estimator = std::string(to_string(est));
  const std::vector<GramMatrix> grams = block_grams(x, layout, nu, options.rescale_by_dim);
  const VarianceEstimate v = ind_variance(grams, options.floor);
  report.s_tilde2 = v.s_tilde2;
  report.s_hat2 = v.s_hat2;
  if (options.calibration == Calibration::asymptotic) {
    report.calibration = "asymptotic-normal";
    report.gamma2_hat = est == IndEstimator::unbiased_u
                            ? hsic2_gamma2_unbiased(grams.at(0), grams.at(1))
                            : dhsic_gamma2_v(grams);
    require(est == IndEstimator::v_statistic || layout.k() == 2, ErrorKind::invalid_parameter,
            "the unbiased estimator is only available for k = 2");
    report.t_stat = studentize(report.gamma2_hat, v.s_hat2, static_cast<double>(x.n()));
    report.p_value = normal_upper_pvalue(report.t_stat);
  } else {
    require(options.B >= 1, ErrorKind::invalid_parameter, "permutation calibration needs B >= 1");
    report.calibration = "permutation";
    report.B = options.B;
    const GridStatistics stats = ind_grid_statistics(
        x, layout, ScalingGrid({nu}),
        GridOptions{options.B, options.seed, options.workers, options.floor,
                    options.rescale_by_dim},
        est);
    report.gamma2_hat = stats.gamma2[0];
    report.t_stat = stats.t[0];
    report.p_value = stats.fixed_pvalue(0);
  }
  report.reject = report.p_value <= options.alpha;
  return report;
}

GridStatistics ind_grid_statistics(const SampleMatrix& x, const BlockLayout& layout,
                                   const ScalingGrid& grid, const GridOptions& options,
                                   std::optional<IndEstimator> estimator) {
  const std::size_t k = layout.k();
  const std::size_t n = x.n();
  require(n >= 4, ErrorKind::sample_too_small, "independence statistic needs n >= 4");
  const IndEstimator est = estimator.value_or(default_estimator(k));
  require(est == IndEstimator::v_statistic || k == 2, ErrorKind::invalid_parameter,
          "the unbiased estimator is only available for k = 2");
  const std::vector<DistMatrix> dists = block_sqdists(x, layout, options.rescale_by_dim);
  const std::size_t G = grid.size();
  const double nd = static_cast<double>(n);

  // Permutation-invariant pieces at each nu: block row sums (diagonal
  // excluded), their totals, and the variance estimate.
  struct NuTerms {
    std::vector<std::vector<double>> r;
    std::vector<double> s;
    double s_hat2 = 0.0;
    double mean_prod = 1.0;  // Π_l (S_l + n) / n², the V-statistic's middle term
  };
  std::vector<NuTerms> terms(G);
  for (std::size_t g = 0; g < G; ++g) {
    NuTerms& t = terms[g];
    std::vector<BlockIngredients> e;
    for (std::size_t l = 0; l < k; ++l) {
      GramRowSums sums = gram_row_sums(dists[l], grid[g]);
      e.push_back(ingredients_from(moments_from_row_sums(sums)));
      const double total = std::accumulate(sums.r.begin(), sums.r.end(), 0.0);
      t.s.push_back(total);
      t.mean_prod *= (total + nd) / (nd * nd);
      t.r.push_back(std::move(sums.r));
    }
    t.s_hat2 = floor_for_blocks(combine_variance(e), e, nd, options.floor);
  }

  const auto& kern = simd::kernels();
  const std::size_t packed = n * (n - 1) / 2;
  const double n2 = falling_factorial(nd, 2);
  const double n3 = falling_factorial(nd, 3);
  const double n4 = falling_factorial(nd, 4);
  const double v_scale = 2.0 / std::pow(nd, static_cast<double>(k) + 1.0);

  // perms[l - 1] permutes block l.
  auto evaluate = [&](const std::vector<std::vector<std::uint32_t>>& perms, double* t_out,
                      double* gamma2_out) {
    std::vector<double> joint(packed);
    std::size_t offset = 0;
    for (std::size_t i = 0; i + 1 < n; ++i) {
      const std::size_t len = n - i - 1;
      const double* d0 = dists[0].values.data() + i * n + i + 1;
      std::copy(d0, d0 + len, joint.data() + offset);
      for (std::size_t l = 1; l < k; ++l) {
        const std::vector<std::uint32_t>& p = perms[l - 1];
        kern.gather_add(dists[l].values.data() + static_cast<std::size_t>(p[i]) * n,
                        p.data() + i + 1, len, joint.data() + offset);
      }
      offset += len;
    }
    for (std::size_t g = 0; g < G; ++g) {
      const NuTerms& t = terms[g];
      const double upper = kern.exp_neg_scaled_sum(joint.data(), packed, grid[g]);
      double gamma2 = 0.0;
      if (est == IndEstimator::unbiased_u) {
        const std::vector<std::uint32_t>& p = perms[0];
        double rr = 0.0;
        for (std::size_t i = 0; i < n; ++i) rr += t.r[0][i] * t.r[1][p[i]];
        const double f = 2.0 * upper;
        const double triple = rr - f;
        const double quad = t.s[0] * t.s[1] - 4.0 * rr + 2.0 * f;
        gamma2 = f / n2 + quad / n4 - 2.0 * triple / n3;
      } else {
        double cross = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
          double prod = t.r[0][i] + 1.0;
          for (std::size_t l = 1; l < k; ++l) prod *= t.r[l][perms[l - 1][i]] + 1.0;
          cross += prod;
        }
        gamma2 = (nd + 2.0 * upper) / (nd * nd) + t.mean_prod - v_scale * cross;
      }
      gamma2_out[g] = gamma2;
      t_out[g] = studentize(gamma2, t.s_hat2, nd);
    }
  };

  GridStatistics out;
  out.nus = grid.values();
  out.B = options.B;
  out.t.assign(G, 0.0);
  out.gamma2.assign(G, 0.0);
  out.null_t.assign(options.B * G, 0.0);
  out.null_gamma2.assign(options.B * G, 0.0);

  std::vector<std::uint32_t> identity(n);
  std::iota(identity.begin(), identity.end(), 0U);
  evaluate(std::vector<std::vector<std::uint32_t>>(k - 1, identity), out.t.data(),
           out.gamma2.data());
  parallel_for(options.B, options.workers, [&](std::size_t b) {
    evaluate(block_permutations(k, n, options.seed, b), out.null_t.data() + b * G,
             out.null_gamma2.data() + b * G);
  });
  return out;
}

}  // namespace gkt
