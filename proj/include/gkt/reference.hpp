#pragma once

#include <cstddef>
#include <functional>
#include <variant>
#include <vector>

#include "gkt/matrix.hpp"
#include "gkt/rng.hpp"

namespace gkt {

/// N(mean, var·I).
struct AnalyticGaussian {
  std::vector<double> mean;
  double var = 1.0;
};

/// P0 represented by R >= 2 reference draws. Expectations under P0 are sample
/// means over the reference points. An optional sampler makes Monte-Carlo
/// calibration exact; without one, calibration subsamples the reference.
class EmpiricalReference {
 public:
  using Sampler = std::function<SampleMatrix(std::size_t n, CounterRng& rng)>;

  explicit EmpiricalReference(SampleMatrix points, Sampler sampler = {});

  const SampleMatrix& points() const noexcept { return points_; }
  std::size_t size() const noexcept { return points_.n(); }
  bool has_sampler() const noexcept { return static_cast<bool>(sampler_); }
  const Sampler& sampler() const noexcept { return sampler_; }

 private:
  SampleMatrix points_;
  Sampler sampler_;
};

using ReferenceModel = std::variant<AnalyticGaussian, EmpiricalReference>;

/// Standard normal reference in dimension d.
AnalyticGaussian standard_gaussian(std::size_t d);

std::size_t reference_dim(const ReferenceModel& ref);
void validate_reference(const ReferenceModel& ref);

/// Whether fresh samples of size n can be drawn for Monte-Carlo calibration.
bool can_sample(const ReferenceModel& ref, std::size_t n) noexcept;
/// n draws from P0. Throws calibration-unavailable when can_sample is false.
SampleMatrix sample_reference(const ReferenceModel& ref, std::size_t n, CounterRng& rng);

/// m(y_i) = E_{X~P0} exp(-nu ||X - y_i||² / divisor) for every row of y.
std::vector<double> reference_embedding(const ReferenceModel& ref, const SampleMatrix& y,
                                        double nu, double divisor = 1.0);
/// E_{X,X'~P0} exp(-nu ||X - X'||² / divisor); for an empirical reference, the
/// off-diagonal mean of its Gram matrix.
double reference_self_term(const ReferenceModel& ref, double nu, double divisor = 1.0);

/// Cached embeddings for one sample across a list of scaling parameters.
/// Distances to empirical reference points are computed once.
class ReferenceEvaluator {
 public:
  ReferenceEvaluator(const ReferenceModel& ref, double divisor);
  /// Mean over rows of y of m(y_i), for every nu in `nus`.
  std::vector<double> mean_embedding(const SampleMatrix& y, const std::vector<double>& nus) const;
  /// Self term for every nu in `nus` (computed once per evaluator and cached).
  const std::vector<double>& self_terms(const std::vector<double>& nus);

 private:
  const ReferenceModel* ref_;
  double divisor_;
  std::vector<double> cached_nus_;
  std::vector<double> cached_self_;
};

}  // namespace gkt
