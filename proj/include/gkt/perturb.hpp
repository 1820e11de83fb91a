#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "gkt/matrix.hpp"

namespace gkt {

/// exp(-1/(1-(4t-1)²)) on (0, ½), -exp(-1/(1-(4t-3)²)) on (½, 1), 0 elsewhere.
double bump_phi0(double t) noexcept;
/// Tensor product Π_l φ0(x_l).
double bump_phi(std::span<const double> x) noexcept;

/// ‖φ0‖_{L2} on [0, 1], by quadrature (computed once).
double bump_phi0_l2() noexcept;
/// ‖φ0‖_∞ = e^{-1}.
double bump_phi0_sup() noexcept;
/// ‖φ‖_{W^{s,2}} of the d-dimensional tensor bump for integer 0 <= s <= 4,
/// using Plancherel: the Fourier weight (1 + ‖ω‖²)^s expands into
/// derivative norms, evaluated by automatic differentiation and quadrature.
double bump_phi_sobolev(std::size_t d, int s);

/// Uniform density on [0,1]^d plus r Σ_k a_k φ_{k}, with b bumps per axis.
struct PerturbationSpec {
  std::size_t d = 1;
  std::size_t b = 1;
  double r = 0.0;
  std::vector<int> signs;  // b^d entries in {-1, +1}, cell index in row-major order
  double s = 2.0;          // nominal smoothness
  double M = 1.0;          // nominal Sobolev radius

  std::size_t cells() const noexcept;
  /// Throws invalid-spec if the density could go negative or fields are malformed.
  void validate() const;
  /// r b^{d/2} ‖φ‖_∞ / ‖φ‖_{L2}; at most 1 for a valid spec.
  double sup_deviation() const noexcept;
};

/// Spec with all signs drawn as independent Rademacher variables.
PerturbationSpec make_perturbation(std::size_t d, std::size_t b, double r, std::uint64_t seed,
                                   double s = 2.0, double M = 1.0);
/// b = floor((M ‖φ‖²/‖φ‖_{W^{s,2}})^{1/s} Δ^{-1/s}), r = Δ / b^{d/2}.
PerturbationSpec perturbation_from_separation(double delta, std::size_t d, int s, double M,
                                              std::uint64_t seed);

double perturbed_density(const PerturbationSpec& spec, std::span<const double> x);
/// Δ = r b^{d/2} = ‖p - 1‖_{L2}.
double l2_separation(const PerturbationSpec& spec) noexcept;
/// Rejection sampler against the uniform envelope.
SampleMatrix sample_perturbed(const PerturbationSpec& spec, std::size_t n, std::uint64_t seed);
/// Uniform sample on [0,1]^d.
SampleMatrix sample_uniform(std::size_t n, std::size_t d, std::uint64_t seed);

enum class Experiment { I, II, III, IV };

std::string_view to_string(Experiment e) noexcept;
Experiment parse_experiment(std::string_view tag);

/// I: two-sample, d = 1, N(0,1) against a normal/normal-mixture.
/// II: independence of k = d coordinates with a sign-coupled last coordinate.
/// III: two-sample N(0, I) against N(0, (1 + 2 d^{-1/2}) I).
/// IV: independence of the two halves of a scale mixture.
struct ExperimentSetting {
  Experiment tag = Experiment::I;
  std::size_t n = 200;
  std::size_t m = 200;  // second sample size for I and III
  std::size_t d = 1;
  bool null = false;    // draw from the experiment's null instead
};

/// Default parameters for each experiment.
ExperimentSetting default_setting(Experiment tag);

void validate_setting(const ExperimentSetting& setting);

/// For I and III, `y` holds the second sample; for II and IV, `x` holds the joint sample.
struct ExperimentData {
  SampleMatrix x;
  std::optional<SampleMatrix> y;
};

ExperimentData experiment_sampler(const ExperimentSetting& setting, std::uint64_t seed);

}  // namespace gkt
