#include "gkt/perturb.hpp"

#include <cmath>
#include <random>
#include <string>

#include <boost/math/differentiation/autodiff.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "gkt/error.hpp"
#include "gkt/rng.hpp"

namespace gkt {
namespace {

constexpr int kMaxSobolevOrder = 4;

// ∫_{-1}^{1} (h^{(j)}(u))² du for h(u) = exp(-1/(1-u²)).
double bump_derivative_energy(int j) {
  namespace ad = boost::math::differentiation;
  auto integrand = [j](double u) {
    // Beyond this point h and its first few derivatives are below 1e-28.
    if (1.0 - u * u < 1e-2) return 0.0;
    const auto x = ad::make_fvar<double, kMaxSobolevOrder>(u);
    const auto h = exp(-1.0 / (1.0 - x * x));
    const double v = static_cast<double>(h.derivative(static_cast<std::size_t>(j)));
    return v * v;
  };
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(integrand, -1.0, 1.0, 15,
                                                                       1e-13);
}

// ‖φ0^{(j)}‖² on [0, 1]: φ0^{(j)}(t) = ±4^j h^{(j)}(4t - 1 or 4t - 3), two halves.
double phi0_derivative_sq(int j) {
  return 2.0 * std::pow(16.0, j) / 4.0 * bump_derivative_energy(j);
}

// Σ over compositions j_0 + ... + j_d = s of s!/(j_0!...j_d!) Π_{l>=1} D[j_l].
double sobolev_sum(const std::vector<double>& deriv_sq, std::size_t blocks_left, int remaining,
                   double coeff) {
  if (blocks_left == 0) return coeff;  // the leftover order goes to the "1" term
  double total = 0.0;
  for (int j = 0; j <= remaining; ++j)
    total += sobolev_sum(deriv_sq, blocks_left - 1, remaining - j,
                         coeff * deriv_sq[static_cast<std::size_t>(j)] / std::tgamma(j + 1.0));
  return total;
}

double standard_normal(CounterRng& rng) {
  std::normal_distribution<double> normal;
  return normal(rng);
}

SampleMatrix normal_sample(std::size_t n, std::size_t d, double sd, CounterRng& rng) {
  std::normal_distribution<double> normal(0.0, sd);
  Matrix m(n, d);
  for (std::size_t t = 0; t < n * d; ++t) m.data()[t] = normal(rng);
  return SampleMatrix(std::move(m));
}

}  // namespace

double bump_phi0(double t) noexcept {
  if (t > 0.0 && t < 0.5) {
    const double u = 4.0 * t - 1.0;
    return std::exp(-1.0 / (1.0 - u * u));
  }
  if (t > 0.5 && t < 1.0) {
    const double u = 4.0 * t - 3.0;
    return -std::exp(-1.0 / (1.0 - u * u));
  }
  return 0.0;
}

double bump_phi(std::span<const double> x) noexcept {
  double out = 1.0;
  for (double t : x) {
    out *= bump_phi0(t);
    if (out == 0.0) break;
  }
  return out;
}

double bump_phi0_l2() noexcept {
  static const double norm = std::sqrt(phi0_derivative_sq(0));
  return norm;
}

double bump_phi0_sup() noexcept { return std::exp(-1.0); }

double bump_phi_sobolev(std::size_t d, int s) {
  require(s >= 0 && s <= kMaxSobolevOrder, ErrorKind::invalid_parameter,
          "Sobolev norm is available for integer 0 <= s <= 4");
  require(d >= 1, ErrorKind::invalid_parameter, "dimension must be positive");
  std::vector<double> deriv_sq;
  for (int j = 0; j <= s; ++j) deriv_sq.push_back(phi0_derivative_sq(j));
  const double sum = sobolev_sum(deriv_sq, d, s, 1.0) * std::tgamma(s + 1.0);
  return std::sqrt(sum);
}

std::size_t PerturbationSpec::cells() const noexcept {
  std::size_t c = 1;
  for (std::size_t l = 0; l < d; ++l) c *= b;
  return c;
}

double PerturbationSpec::sup_deviation() const noexcept {
  const double dd = static_cast<double>(d);
  return r * std::pow(static_cast<double>(b), dd / 2.0) * std::pow(bump_phi0_sup(), dd) /
         std::pow(bump_phi0_l2(), dd);
}

void PerturbationSpec::validate() const {
  require(d >= 1 && b >= 1, ErrorKind::invalid_spec, "perturbation needs d >= 1 and b >= 1");
  require(std::isfinite(r) && r >= 0.0, ErrorKind::invalid_spec, "amplitude r must be >= 0");
  require(signs.size() == cells(), ErrorKind::invalid_spec, "perturbation needs b^d signs");
  for (int a : signs)
    require(a == 1 || a == -1, ErrorKind::invalid_spec, "signs must be +1 or -1");
  require(sup_deviation() <= 1.0 + 1e-12, ErrorKind::invalid_spec,
          "perturbed density would be negative: r b^{d/2} |phi|_inf / |phi|_2 exceeds 1");
}

PerturbationSpec make_perturbation(std::size_t d, std::size_t b, double r, std::uint64_t seed,
                                   double s, double M) {
  PerturbationSpec spec{d, b, r, {}, s, M};
  CounterRng rng(seed, 0, 1);
  spec.signs.resize(spec.cells());
  for (int& a : spec.signs) a = (rng() >> 63) != 0 ? 1 : -1;
  spec.validate();
  return spec;
}

PerturbationSpec perturbation_from_separation(double delta, std::size_t d, int s, double M,
                                              std::uint64_t seed) {
  require(delta > 0.0 && M > 0.0 && s >= 1, ErrorKind::invalid_spec,
          "separation mapping needs delta > 0, M > 0 and s >= 1");
  const double l2 = std::pow(bump_phi0_l2(), static_cast<double>(d));
  const double sob = bump_phi_sobolev(d, s);
  const double sd = static_cast<double>(s);
  const double b_real = std::pow(M * l2 * l2 / sob, 1.0 / sd) * std::pow(delta, -1.0 / sd);
  const auto b = static_cast<std::size_t>(std::floor(b_real));
  require(b >= 1, ErrorKind::invalid_spec, "separation too large for the Sobolev radius: b < 1");
  const double r = delta / std::pow(static_cast<double>(b), static_cast<double>(d) / 2.0);
  return make_perturbation(d, b, r, seed, sd, M);
}

double perturbed_density(const PerturbationSpec& spec, std::span<const double> x) {
  require(x.size() == spec.d, ErrorKind::invalid_input, "point has the wrong dimension");
  const double bd = static_cast<double>(spec.b);
  std::size_t cell = 0;
  double phi = 1.0;
  for (double t : x) {
    if (!(t >= 0.0 && t <= 1.0)) return 0.0;
    auto c = static_cast<std::size_t>(std::floor(t * bd));
    if (c >= spec.b) c = spec.b - 1;
    cell = cell * spec.b + c;
    phi *= bump_phi0(t * bd - static_cast<double>(c));
  }
  const double dd = static_cast<double>(spec.d);
  const double scale = std::pow(bd, dd / 2.0) / std::pow(bump_phi0_l2(), dd);
  return 1.0 + spec.r * spec.signs[cell] * scale * phi;
}

double l2_separation(const PerturbationSpec& spec) noexcept {
  return spec.r * std::pow(static_cast<double>(spec.b), static_cast<double>(spec.d) / 2.0);
}

SampleMatrix sample_perturbed(const PerturbationSpec& spec, std::size_t n, std::uint64_t seed) {
  spec.validate();
  CounterRng rng(seed, 0, 0);
  const double envelope = 1.0 + spec.sup_deviation();
  Matrix out(n, spec.d);
  std::vector<double> point(spec.d);
  for (std::size_t i = 0; i < n;) {
    for (double& v : point) v = rng.uniform();
    if (rng.uniform() * envelope <= perturbed_density(spec, point)) {
      std::copy(point.begin(), point.end(), out.row(i).begin());
      ++i;
    }
  }
  return SampleMatrix(std::move(out));
}

SampleMatrix sample_uniform(std::size_t n, std::size_t d, std::uint64_t seed) {
  CounterRng rng(seed, 0, 0);
  Matrix out(n, d);
  for (std::size_t t = 0; t < n * d; ++t) out.data()[t] = rng.uniform();
  return SampleMatrix(std::move(out));
}

std::string_view to_string(Experiment e) noexcept {
  switch (e) {
    case Experiment::I: return "I";
    case Experiment::II: return "II";
    case Experiment::III: return "III";
    case Experiment::IV: return "IV";
  }
  return "?";
}

Experiment parse_experiment(std::string_view tag) {
  if (tag == "I" || tag == "1") return Experiment::I;
  if (tag == "II" || tag == "2") return Experiment::II;
  if (tag == "III" || tag == "3") return Experiment::III;
  if (tag == "IV" || tag == "4") return Experiment::IV;
  fail(ErrorKind::invalid_setting, "unknown experiment '" + std::string(tag) + "'");
}

ExperimentSetting default_setting(Experiment tag) {
  switch (tag) {
    case Experiment::I: return {tag, 200, 200, 1, false};
    case Experiment::II: return {tag, 400, 0, 5, false};
    case Experiment::III: return {tag, 200, 200, 1000, false};
    case Experiment::IV: return {tag, 600, 0, 1000, false};
  }
  return {};
}

void validate_setting(const ExperimentSetting& s) {
  require(s.n >= 4, ErrorKind::invalid_setting, "experiments need n >= 4");
  switch (s.tag) {
    case Experiment::I:
      require(s.d == 1, ErrorKind::invalid_setting, "experiment I is one-dimensional");
      require(s.m >= 4, ErrorKind::invalid_setting, "experiment I needs m >= 4");
      break;
    case Experiment::II:
      require(s.d >= 2, ErrorKind::invalid_setting, "experiment II needs d = k >= 2");
      break;
    case Experiment::III:
      require(s.d >= 1 && s.m >= 4, ErrorKind::invalid_setting, "experiment III needs d >= 1, m >= 4");
      break;
    case Experiment::IV:
      require(s.d >= 2 && s.d % 2 == 0, ErrorKind::invalid_setting,
              "experiment IV needs an even d >= 2");
      break;
  }
}

ExperimentData experiment_sampler(const ExperimentSetting& s, std::uint64_t seed) {
  validate_setting(s);
  CounterRng rng(seed, 0, 0);
  const double d = static_cast<double>(s.d);
  switch (s.tag) {
    case Experiment::I: {
      SampleMatrix x = normal_sample(s.n, 1, 1.0, rng);
      if (s.null) return {std::move(x), normal_sample(s.m, 1, 1.0, rng)};
      static constexpr double kMeans[] = {-1.0, -0.5, 0.0, 0.5, 1.0};
      Matrix y(s.m, 1);
      for (std::size_t i = 0; i < s.m; ++i) {
        const double u = rng.uniform();
        const double z = standard_normal(rng);
        if (u < 0.5) {
          y(i, 0) = z;
        } else {
          const auto c = std::min<std::size_t>(static_cast<std::size_t>((u - 0.5) / 0.1), 4);
          y(i, 0) = kMeans[c] + 0.05 * z;
        }
      }
      return {std::move(x), SampleMatrix(std::move(y))};
    }
    case Experiment::II: {
      Matrix x(s.n, s.d);
      for (std::size_t i = 0; i < s.n; ++i) {
        double sign = 1.0;
        for (std::size_t l = 0; l + 1 < s.d; ++l) {
          x(i, l) = standard_normal(rng);
          sign *= x(i, l) < 0.0 ? -1.0 : 1.0;
        }
        const double last = standard_normal(rng);
        x(i, s.d - 1) = s.null ? last : std::abs(last) * sign;
      }
      return {SampleMatrix(std::move(x)), std::nullopt};
    }
    case Experiment::III: {
      SampleMatrix x = normal_sample(s.n, s.d, 1.0, rng);
      const double var = s.null ? 1.0 : 1.0 + 2.0 / std::sqrt(d);
      return {std::move(x), normal_sample(s.m, s.d, std::sqrt(var), rng)};
    }
    case Experiment::IV: {
      const double wide = std::sqrt(1.0 + 6.0 * std::pow(d, -0.6));
      const std::size_t half = s.d / 2;
      Matrix x(s.n, s.d);
      for (std::size_t i = 0; i < s.n; ++i) {
        const bool first_wide = rng.uniform() < 0.5;
        const bool second_wide = s.null ? rng.uniform() < 0.5 : first_wide;
        for (std::size_t l = 0; l < s.d; ++l) {
          const bool w = l < half ? first_wide : second_wide;
          x(i, l) = (w ? wide : 1.0) * standard_normal(rng);
        }
      }
      return {SampleMatrix(std::move(x)), std::nullopt};
    }
  }
  fail(ErrorKind::invalid_setting, "unknown experiment");
}

}  // namespace gkt
