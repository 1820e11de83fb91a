#include "gkt/adaptive.hpp"

#include <cmath>
#include <sstream>

#include "gkt/calibrate.hpp"
#include "gkt/error.hpp"
#include "gkt/gof.hpp"
#include "gkt/hom.hpp"
#include "gkt/ind.hpp"

namespace gkt {
namespace {

// Max with ties resolved toward the smaller index (the grid is increasing).
std::size_t argmax(const double* values, std::size_t count) {
  std::size_t best = 0;
  for (std::size_t g = 1; g < count; ++g)
    if (values[g] > values[best]) best = g;
  return best;
}

}  // namespace

std::string_view to_string(AdaptiveMode mode) noexcept {
  return mode == AdaptiveMode::self_normalized ? "self-normalized" : "unnormalized";
}

GridMax adaptive_stat(const std::function<double(double)>& stat_fn, const ScalingGrid& grid) {
  GridMax out;
  std::vector<double> values;
  for (double nu : grid.values()) {
    double v = 0.0;
    try {
      v = stat_fn(nu);
    } catch (const Error& e) {
      std::ostringstream msg;
      msg << e.what() << " (at nu = " << nu << ")";
      throw Error(e.kind(), msg.str());
    }
    values.push_back(v);
    out.per_nu.emplace_back(nu, v);
  }
  out.index = argmax(values.data(), values.size());
  out.value = values[out.index];
  out.nu = grid[out.index];
  return out;
}

std::size_t problem_dim(const Problem& problem) noexcept {
  return std::visit([](const auto& p) { return p.x.d(); }, problem);
}

std::size_t problem_size(const Problem& problem) noexcept {
  if (const auto* h = std::get_if<HomProblem>(&problem)) return std::min(h->x.n(), h->y.n());
  return std::visit([](const auto& p) { return p.x.n(); }, problem);
}

GridStatistics problem_grid_statistics(const Problem& problem, const ScalingGrid& grid,
                                       const GridOptions& options) {
  if (const auto* p = std::get_if<GofProblem>(&problem))
    return gof_grid_statistics(p->x, p->ref, grid, options);
  if (const auto* p = std::get_if<HomProblem>(&problem))
    return hom_grid_statistics(p->x, p->y, grid, options);
  const auto& p = std::get<IndProblem>(problem);
  return ind_grid_statistics(p.x, p.layout, grid, options, p.estimator);
}

GridMax unnormalized_adaptive_stat(const Problem& problem, const ScalingGrid& grid) {
  GridOptions options;
  options.B = 0;
  options.rescale_by_dim = true;
  const GridStatistics stats = problem_grid_statistics(problem, grid, options);
  GridMax out;
  for (std::size_t g = 0; g < grid.size(); ++g) out.per_nu.emplace_back(grid[g], stats.gamma2[g]);
  out.index = argmax(stats.gamma2.data(), grid.size());
  out.value = stats.gamma2[out.index];
  out.nu = grid[out.index];
  return out;
}

AdaptiveReport adaptive_from_grid(const GridStatistics& stats, AdaptiveMode mode, double alpha) {
  require(stats.B >= 1, ErrorKind::invalid_parameter, "adaptive calibration needs B >= 1");
  const std::size_t G = stats.grid_size();
  const bool studentized = mode == AdaptiveMode::self_normalized;
  const std::vector<double>& observed = studentized ? stats.t : stats.gamma2;
  const std::vector<double>& null = studentized ? stats.null_t : stats.null_gamma2;

  AdaptiveReport report;
  report.mode = mode;
  report.B = stats.B;
  for (std::size_t g = 0; g < G; ++g) report.per_nu.emplace_back(stats.nus[g], observed[g]);
  const std::size_t best = argmax(observed.data(), G);
  report.t_max = observed[best];
  report.nu_argmax = stats.nus[best];

  std::vector<double> null_max(stats.B);
  for (std::size_t b = 0; b < stats.B; ++b) {
    const double* row = null.data() + b * G;
    null_max[b] = row[argmax(row, G)];
  }
  report.p_value = resample_pvalue(report.t_max, null_max);
  report.q_hat = empirical_quantile(null_max, alpha);
  report.reject = report.p_value <= alpha;
  return report;
}

AdaptiveReport adaptive_test(const Problem& problem, const ScalingGrid& grid,
                             const AdaptiveOptions& options) {
  require(options.alpha > 0.0 && options.alpha < 1.0, ErrorKind::invalid_parameter,
          "alpha must be in (0, 1)");
  require(options.B >= 1, ErrorKind::invalid_parameter, "adaptive calibration needs B >= 1");
  const GridOptions grid_options{options.B, options.seed, options.workers, options.floor,
                                 options.rescale_by_dim};
  AdaptiveReport report =
      adaptive_from_grid(problem_grid_statistics(problem, grid, grid_options), options.mode,
                         options.alpha);
  report.seed = options.seed;
  return report;
}

}  // namespace gkt
