#include "gkt/bench/experiments.hpp"

#include <algorithm>
#include <cmath>

#include "gkt/adaptive.hpp"
#include "gkt/error.hpp"
#include "gkt/ind.hpp"
#include "gkt/parallel.hpp"
#include "gkt/rng.hpp"

namespace gkt::bench {
namespace {

bool two_sample(Experiment tag) { return tag == Experiment::I || tag == Experiment::III; }

Problem make_problem(Experiment tag, ExperimentData data) {
  if (two_sample(tag)) return HomProblem{std::move(data.x), std::move(*data.y)};
  const std::size_t d = data.x.d();
  const BlockLayout layout = tag == Experiment::II ? BlockLayout::unit(d) : BlockLayout::halves(d);
  return IndProblem{std::move(data.x), layout, {}};
}

double median_nu(const Problem& problem, bool rescale) {
  if (const auto* h = std::get_if<HomProblem>(&problem))
    return median_heuristic(pairwise_sqdist(SampleMatrix::concat(h->x, h->y), rescale));
  return ind_median_nu(std::get<IndProblem>(problem).x, rescale);
}

// Position of nu in the sorted union grid.
std::size_t locate(const std::vector<double>& grid, double nu) {
  const auto it = std::lower_bound(grid.begin(), grid.end(), nu * (1.0 - 1e-12));
  return static_cast<std::size_t>(it - grid.begin());
}

std::vector<double> merge(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  std::vector<double> out;
  for (double v : values)
    if (out.empty() || v > out.back() * (1.0 + 1e-12)) out.push_back(v);
  return out;
}

GridStatistics subset(const GridStatistics& s, const std::vector<std::size_t>& idx) {
  GridStatistics out;
  out.B = s.B;
  const std::size_t G = s.grid_size();
  for (std::size_t g : idx) {
    out.nus.push_back(s.nus[g]);
    out.t.push_back(s.t[g]);
    out.gamma2.push_back(s.gamma2[g]);
  }
  out.null_t.reserve(s.B * idx.size());
  out.null_gamma2.reserve(s.B * idx.size());
  for (std::size_t b = 0; b < s.B; ++b)
    for (std::size_t g : idx) {
      out.null_t.push_back(s.null_t[b * G + g]);
      out.null_gamma2.push_back(s.null_gamma2[b * G + g]);
    }
  return out;
}

}  // namespace

std::string Method::label() const {
  switch (kind) {
    case MethodKind::fixed: return "fixed";
    case MethodKind::median: return "median";
    case MethodKind::ua: return "ua";
    case MethodKind::sa: return "sa";
  }
  return "?";
}

std::vector<double> default_log_nus(Experiment tag) {
  double lo = 0, hi = 0;
  if (tag == Experiment::I) {
    lo = -1.0;
    hi = 4.0;
  } else if (tag == Experiment::II) {
    lo = -3.0;
    hi = 2.0;
  } else {
    return {};
  }
  std::vector<double> out;
  for (int k = 0; lo + 0.25 * k <= hi + 1e-9; ++k) out.push_back(lo + 0.25 * k);
  return out;
}

ExperimentParams default_params(Experiment tag) {
  ExperimentParams p;
  p.setting = default_setting(tag);
  if (tag == Experiment::I || tag == Experiment::II) {
    for (double l : default_log_nus(tag)) p.methods.push_back(Method::fixed(l));
    p.methods.push_back({MethodKind::median});
  } else {
    p.methods = {{MethodKind::median}, {MethodKind::ua}, {MethodKind::sa}};
    p.rescale_by_dim = true;
  }
  return p;
}

void validate_params(const ExperimentParams& params) {
  try {
    validate_setting(params.setting);
  } catch (const Error& e) {
    throw Error(ErrorKind::invalid_config, e.what());
  }
  require(!params.methods.empty(), ErrorKind::invalid_config, "no methods selected");
  require(params.reps >= 1, ErrorKind::invalid_config, "reps must be >= 1");
  require(params.B >= 1, ErrorKind::invalid_config, "permutations must be >= 1");
  require(params.alpha > 0.0 && params.alpha < 1.0, ErrorKind::invalid_config,
          "alpha must be in (0, 1)");
  for (const Method& m : params.methods)
    require(m.kind != MethodKind::fixed || std::isfinite(m.log_nu), ErrorKind::invalid_config,
            "fixed nu must be finite");
  const ExperimentSetting& s = params.setting;
  require(s.n >= 4 && (!two_sample(s.tag) || s.m >= 4), ErrorKind::invalid_config,
          "sample sizes must be >= 4");
}

PowerTable run_experiment(const ExperimentParams& params) {
  validate_params(params);
  const ExperimentSetting& s = params.setting;
  const std::size_t size = two_sample(s.tag) ? std::min(s.n, s.m) : s.n;
  const ScalingGrid adaptive_grid =
      params.grid ? *params.grid
                  : (params.rescale_by_dim ? rescaled_default_grid(size, s.d) : scaling_grid(size, s.d));
  const std::size_t M = params.methods.size();
  bool need_median = false, need_adaptive = false;
  for (const Method& m : params.methods) {
    need_median |= m.kind == MethodKind::median;
    need_adaptive |= m.kind == MethodKind::ua || m.kind == MethodKind::sa;
  }

  std::vector<std::uint8_t> reject(params.reps * M, 0);
  std::vector<double> log_median(params.reps, 0.0);
  parallel_for(params.reps, params.workers, [&](std::size_t r) {
    const Problem problem =
        make_problem(s.tag, experiment_sampler(s, derive_seed(params.seed, 2 * r)));
    std::vector<double> nus;
    double nu_med = 0.0;
    if (need_median) {
      nu_med = median_nu(problem, params.rescale_by_dim);
      log_median[r] = std::log(nu_med);
      nus.push_back(nu_med);
    }
    for (const Method& m : params.methods)
      if (m.kind == MethodKind::fixed) nus.push_back(std::exp(m.log_nu));
    if (need_adaptive) nus.insert(nus.end(), adaptive_grid.values().begin(), adaptive_grid.values().end());
    const std::vector<double> grid = merge(std::move(nus));

    const GridOptions options{params.B, derive_seed(params.seed, 2 * r + 1), 1, params.floor,
                              params.rescale_by_dim};
    const GridStatistics stats = problem_grid_statistics(problem, ScalingGrid(grid), options);

    std::vector<std::size_t> adaptive_idx;
    for (double nu : adaptive_grid.values()) adaptive_idx.push_back(locate(grid, nu));
    for (std::size_t k = 0; k < M; ++k) {
      const Method& m = params.methods[k];
      double p = 1.0;
      switch (m.kind) {
        case MethodKind::fixed: p = stats.fixed_pvalue(locate(grid, std::exp(m.log_nu))); break;
        case MethodKind::median: p = stats.fixed_pvalue(locate(grid, nu_med)); break;
        case MethodKind::ua:
        case MethodKind::sa: {
          const AdaptiveMode mode = m.kind == MethodKind::sa ? AdaptiveMode::self_normalized
                                                             : AdaptiveMode::unnormalized;
          p = adaptive_from_grid(subset(stats, adaptive_idx), mode, params.alpha).p_value;
          break;
        }
      }
      reject[r * M + k] = p <= params.alpha;
    }
  });

  PowerTable table;
  double mean_log_median = 0.0;
  for (double v : log_median) mean_log_median += v / static_cast<double>(params.reps);
  for (std::size_t k = 0; k < M; ++k) {
    const Method& m = params.methods[k];
    std::size_t count = 0;
    for (std::size_t r = 0; r < params.reps; ++r) count += reject[r * M + k];
    double param = static_cast<double>(s.d);
    if (m.kind == MethodKind::fixed) param = m.log_nu;
    if (m.kind == MethodKind::median) param = mean_log_median;
    table.add(m.label(), param, count, params.reps);
  }
  return table;
}

}  // namespace gkt::bench
