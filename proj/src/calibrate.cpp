#include "gkt/calibrate.hpp"

#include <algorithm>
#include <cmath>

#include <boost/math/distributions/normal.hpp>

#include "gkt/error.hpp"

namespace gkt {

void validate_plan(const ResamplePlan& plan) {
  require(plan.B >= 1, ErrorKind::invalid_parameter, "resampling needs B >= 1");
  if (const auto* s = std::get_if<PooledShuffle>(&plan.scheme)) {
    require(s->n >= 1 && s->m >= 1, ErrorKind::invalid_parameter, "pooled shuffle needs n, m >= 1");
  } else if (const auto* s = std::get_if<BlockPermute>(&plan.scheme)) {
    require(s->k >= 2 && s->n >= 1, ErrorKind::invalid_parameter, "block permutation needs k >= 2");
  } else {
    const auto& draw = std::get<ParametricDraw>(plan.scheme);
    require(draw.n >= 1, ErrorKind::invalid_parameter, "parametric draw needs n >= 1");
    validate_reference(draw.ref);
    require(can_sample(draw.ref, draw.n), ErrorKind::calibration_unavailable,
            "reference cannot be sampled for Monte-Carlo calibration");
  }
}

std::vector<std::uint32_t> pooled_shuffle(std::size_t total, std::uint64_t seed, std::size_t b) {
  CounterRng rng(seed, b, 0);
  return random_permutation(total, rng);
}

std::vector<std::vector<std::uint32_t>> block_permutations(std::size_t k, std::size_t n,
                                                           std::uint64_t seed, std::size_t b) {
  std::vector<std::vector<std::uint32_t>> out;
  out.reserve(k - 1);
  for (std::size_t l = 1; l < k; ++l) {
    CounterRng rng(seed, b, l);
    out.push_back(random_permutation(n, rng));
  }
  return out;
}

SampleMatrix parametric_draw(const ReferenceModel& ref, std::size_t n, std::uint64_t seed,
                             std::size_t b) {
  CounterRng rng(seed, b, 0);
  return sample_reference(ref, n, rng);
}

Replicate generate_replicate(const ResamplePlan& plan, std::size_t b) {
  Replicate rep;
  if (const auto* s = std::get_if<PooledShuffle>(&plan.scheme)) {
    rep.permutations.push_back(pooled_shuffle(s->n + s->m, plan.seed, b));
  } else if (const auto* s = std::get_if<BlockPermute>(&plan.scheme)) {
    rep.permutations = block_permutations(s->k, s->n, plan.seed, b);
  } else {
    const auto& draw = std::get<ParametricDraw>(plan.scheme);
    rep.sample = parametric_draw(draw.ref, draw.n, plan.seed, b);
  }
  return rep;
}

double resample_pvalue(double observed, std::span<const double> null_stats) {
  require(!null_stats.empty(), ErrorKind::invalid_parameter, "p-value needs B >= 1");
  require(std::isfinite(observed), ErrorKind::invalid_input, "observed statistic is not finite");
  std::size_t at_least = 0;
  for (double v : null_stats) {
    require(std::isfinite(v), ErrorKind::invalid_input, "null statistic is not finite");
    if (v >= observed) ++at_least;
  }
  return static_cast<double>(1 + at_least) / static_cast<double>(null_stats.size() + 1);
}

double empirical_quantile(std::span<const double> null_stats, double alpha) {
  require(!null_stats.empty(), ErrorKind::invalid_parameter, "quantile needs B >= 1");
  require(alpha > 0.0 && alpha < 1.0, ErrorKind::invalid_parameter, "alpha must be in (0, 1)");
  for (double v : null_stats)
    require(std::isfinite(v), ErrorKind::invalid_input, "null statistic is not finite");
  const std::size_t b = null_stats.size();
  // Guard the ceiling against representation error, e.g. 0.95 * 20 = 19.000000000000004.
  const double pos = (1.0 - alpha) * static_cast<double>(b + 1);
  auto rank = static_cast<std::size_t>(std::ceil(pos - 1e-9));
  rank = std::clamp<std::size_t>(rank, 1, b);
  std::vector<double> sorted(null_stats.begin(), null_stats.end());
  std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(rank - 1),
                   sorted.end());
  return sorted[rank - 1];
}

double normal_upper_pvalue(double t) {
  require(!std::isnan(t), ErrorKind::invalid_input, "statistic is NaN");
  if (std::isinf(t)) return t > 0 ? 0.0 : 1.0;
  return boost::math::cdf(boost::math::complement(boost::math::normal_distribution<double>(), t));
}

double normal_upper_quantile(double alpha) {
  require(alpha > 0.0 && alpha < 1.0, ErrorKind::invalid_parameter, "alpha must be in (0, 1)");
  return boost::math::quantile(
      boost::math::complement(boost::math::normal_distribution<double>(), alpha));
}

}  // namespace gkt
