#include "gkt/reference.hpp"

#include <cmath>
#include <numeric>
#include <random>

#include "gkt/error.hpp"
#include "gkt/simd.hpp"

namespace gkt {
namespace {

double analytic_embedding(const AnalyticGaussian& g, std::span<const double> y, double nu_eff) {
  const double d = static_cast<double>(g.mean.size());
  const double denom = 1.0 + 2.0 * nu_eff * g.var;
  double dist = 0.0;
  for (std::size_t k = 0; k < y.size(); ++k) {
    const double diff = y[k] - g.mean[k];
    dist += diff * diff;
  }
  return std::pow(denom, -0.5 * d) * std::exp(-nu_eff * dist / denom);
}

}  // namespace

EmpiricalReference::EmpiricalReference(SampleMatrix points, Sampler sampler)
    : points_(std::move(points)), sampler_(std::move(sampler)) {}

AnalyticGaussian standard_gaussian(std::size_t d) {
  return AnalyticGaussian{std::vector<double>(d, 0.0), 1.0};
}

std::size_t reference_dim(const ReferenceModel& ref) {
  if (const auto* g = std::get_if<AnalyticGaussian>(&ref)) return g->mean.size();
  return std::get<EmpiricalReference>(ref).points().d();
}

void validate_reference(const ReferenceModel& ref) {
  if (const auto* g = std::get_if<AnalyticGaussian>(&ref)) {
    require(!g->mean.empty(), ErrorKind::invalid_reference, "reference mean is empty");
    require(std::isfinite(g->var) && g->var > 0.0, ErrorKind::invalid_reference,
            "reference variance must be positive");
    for (double m : g->mean)
      require(std::isfinite(m), ErrorKind::invalid_reference, "reference mean must be finite");
    return;
  }
  require(std::get<EmpiricalReference>(ref).size() >= 2, ErrorKind::invalid_reference,
          "empirical reference needs at least two points");
}

bool can_sample(const ReferenceModel& ref, std::size_t n) noexcept {
  if (std::holds_alternative<AnalyticGaussian>(ref)) return true;
  const auto& emp = std::get<EmpiricalReference>(ref);
  return emp.has_sampler() || emp.size() >= 2 * n;
}

SampleMatrix sample_reference(const ReferenceModel& ref, std::size_t n, CounterRng& rng) {
  if (const auto* g = std::get_if<AnalyticGaussian>(&ref)) {
    const std::size_t d = g->mean.size();
    const double sd = std::sqrt(g->var);
    std::normal_distribution<double> normal;
    Matrix m(n, d);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t k = 0; k < d; ++k) m(i, k) = g->mean[k] + sd * normal(rng);
    return SampleMatrix(std::move(m));
  }
  const auto& emp = std::get<EmpiricalReference>(ref);
  if (emp.has_sampler()) {
    SampleMatrix out = emp.sampler()(n, rng);
    require(out.n() == n && out.d() == emp.points().d(), ErrorKind::invalid_reference,
            "reference sampler returned a sample of the wrong shape");
    return out;
  }
  require(emp.size() >= 2 * n, ErrorKind::calibration_unavailable,
          "empirical reference without a sampler needs at least 2n points for Monte-Carlo "
          "calibration");
  // Partial Fisher-Yates: n reference points without replacement.
  std::vector<std::size_t> idx(emp.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  for (std::size_t i = 0; i < n; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, idx.size() - 1);
    std::swap(idx[i], idx[pick(rng)]);
  }
  idx.resize(n);
  return emp.points().select_rows(idx);
}

std::vector<double> reference_embedding(const ReferenceModel& ref, const SampleMatrix& y,
                                        double nu, double divisor) {
  require(nu > 0.0 && divisor > 0.0, ErrorKind::invalid_parameter, "nu must be positive");
  require(reference_dim(ref) == y.d(), ErrorKind::invalid_input,
          "sample and reference differ in dimension");
  std::vector<double> out(y.n());
  if (const auto* g = std::get_if<AnalyticGaussian>(&ref)) {
    for (std::size_t i = 0; i < y.n(); ++i) out[i] = analytic_embedding(*g, y.row(i), nu / divisor);
    return out;
  }
  const auto& pts = std::get<EmpiricalReference>(ref).points();
  const auto& k = simd::kernels();
  std::vector<double> dist(pts.n());
  for (std::size_t i = 0; i < y.n(); ++i) {
    k.sqdist_rows(y.row(i).data(), pts.matrix().data(), pts.n(), y.d(), dist.data());
    out[i] = k.exp_neg_scaled_sum(dist.data(), dist.size(), nu / divisor) /
             static_cast<double>(pts.n());
  }
  return out;
}

double reference_self_term(const ReferenceModel& ref, double nu, double divisor) {
  ReferenceEvaluator eval(ref, divisor);
  return eval.self_terms({nu}).front();
}

ReferenceEvaluator::ReferenceEvaluator(const ReferenceModel& ref, double divisor)
    : ref_(&ref), divisor_(divisor) {
  validate_reference(ref);
  require(divisor > 0.0, ErrorKind::invalid_parameter, "divisor must be positive");
}

std::vector<double> ReferenceEvaluator::mean_embedding(const SampleMatrix& y,
                                                       const std::vector<double>& nus) const {
  require(reference_dim(*ref_) == y.d(), ErrorKind::invalid_input,
          "sample and reference differ in dimension");
  std::vector<double> out(nus.size(), 0.0);
  const double n = static_cast<double>(y.n());
  if (const auto* g = std::get_if<AnalyticGaussian>(ref_)) {
    for (std::size_t t = 0; t < nus.size(); ++t) {
      double total = 0.0;
      for (std::size_t i = 0; i < y.n(); ++i)
        total += analytic_embedding(*g, y.row(i), nus[t] / divisor_);
      out[t] = total / n;
    }
    return out;
  }
  const auto& pts = std::get<EmpiricalReference>(*ref_).points();
  const auto& k = simd::kernels();
  std::vector<double> dist(pts.n());
  for (std::size_t i = 0; i < y.n(); ++i) {
    k.sqdist_rows(y.row(i).data(), pts.matrix().data(), pts.n(), y.d(), dist.data());
    for (std::size_t t = 0; t < nus.size(); ++t)
      out[t] += k.exp_neg_scaled_sum(dist.data(), dist.size(), nus[t] / divisor_);
  }
  const double scale = n * static_cast<double>(pts.n());
  for (double& v : out) v /= scale;
  return out;
}

const std::vector<double>& ReferenceEvaluator::self_terms(const std::vector<double>& nus) {
  if (nus == cached_nus_) return cached_self_;
  std::vector<double> out(nus.size(), 0.0);
  if (const auto* g = std::get_if<AnalyticGaussian>(ref_)) {
    const double d = static_cast<double>(g->mean.size());
    for (std::size_t t = 0; t < nus.size(); ++t)
      out[t] = std::pow(1.0 + 4.0 * (nus[t] / divisor_) * g->var, -0.5 * d);
  } else {
    const auto& pts = std::get<EmpiricalReference>(*ref_).points();
    const auto& k = simd::kernels();
    const std::size_t r = pts.n();
    const std::size_t d = pts.d();
    std::vector<double> dist(r);
    for (std::size_t i = 0; i + 1 < r; ++i) {
      const std::size_t len = r - i - 1;
      k.sqdist_rows(pts.row(i).data(), pts.matrix().data() + (i + 1) * d, len, d, dist.data());
      for (std::size_t t = 0; t < nus.size(); ++t)
        out[t] += k.exp_neg_scaled_sum(dist.data(), len, nus[t] / divisor_);
    }
    const double pairs = 0.5 * static_cast<double>(r) * static_cast<double>(r - 1);
    for (double& v : out) v /= pairs;
  }
  cached_nus_ = nus;
  cached_self_ = std::move(out);
  return cached_self_;
}

}  // namespace gkt
