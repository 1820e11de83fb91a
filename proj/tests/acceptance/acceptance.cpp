// One PASS/FAIL line per acceptance criterion. `--only 4` runs a single one.

#include <CLI11.hpp>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <limits>
#include <random>
#include <sstream>
#include <string>

#include "../unit/oracles.hpp"
#include "gkt/bench/dag.hpp"
#include "gkt/bench/experiments.hpp"
#include "gkt/calibrate.hpp"
#include "gkt/gof.hpp"
#include "gkt/hom.hpp"
#include "gkt/ind.hpp"
#include "gkt/parallel.hpp"
#include "gkt/perturb.hpp"
#include "gkt/rng.hpp"

using namespace gkt;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

std::size_t g_workers = 0;

// 1. Every combinatorial estimator against index enumeration.
Outcome oracle_equivalence() {
  std::mt19937_64 rng(20240601);
  std::uniform_int_distribution<std::size_t> pick_n(4, 10), pick_d(1, 3);
  std::uniform_real_distribution<double> log_nu(std::log(0.1), std::log(10.0));
  double worst = 0.0;
  std::string where;
  auto check = [&](double got, double want, const char* what) {
    const double e = oracle::relative_error(got, want);
    if (!(e <= worst)) {
      worst = e;
      where = what;
    }
  };
  for (int rep = 0; rep < 50; ++rep) {
    const std::size_t n = pick_n(rng), d = pick_d(rng);
    const double nu = std::exp(log_nu(rng));
    const Matrix xm = oracle::random_sample(n, d, rng);
    const Matrix ym = oracle::random_sample(pick_n(rng), d, rng, 1.3);
    const SampleMatrix x(xm), y(ym);

    const double c = 1.0 + 2.0 * nu;
    auto embed = [&](std::size_t i) {
      double s = 0.0;
      for (std::size_t j = 0; j < d; ++j) s += xm(i, j) * xm(i, j);
      return std::pow(c, -0.5 * d) * std::exp(-nu * s / c);
    };
    const double self = std::pow(1.0 + 4.0 * nu, -0.5 * d);
    check(gof_gamma2(x, nu, standard_gaussian(d)), oracle::gof_gamma2(xm, nu, embed, self),
          "gof_gamma2");
    const Matrix gx = oracle::gram(xm, nu);
    check(gof_variance(x, nu).s_tilde2, oracle::variance(gx), "gof_variance");
    check(hom_gamma2(x, y, nu), oracle::hom_gamma2(xm, ym, nu), "hom_gamma2");
    const SampleMatrix z = SampleMatrix::concat(x, y);
    check(hom_variance(z, nu, std::min(x.n(), y.n())).s_tilde2,
          oracle::variance(oracle::gram(z.matrix(), nu)), "hom_variance");

    // Independence: k = 2 blocks of width 1 and d, then k = 3 unit blocks.
    const Matrix jm = oracle::random_sample(n, 1 + d, rng);
    const SampleMatrix joint(jm);
    const BlockLayout two({1, d});
    const std::vector<GramMatrix> g2 = block_grams(joint, two, nu, false);
    check(hsic2_gamma2_unbiased(g2[0], g2[1]),
          oracle::hsic_unbiased(g2[0].values, g2[1].values), "hsic2_gamma2_unbiased");
    const std::vector<BlockIngredients> ing = ind_ingredients(g2);
    for (std::size_t l = 0; l < 2; ++l) {
      const Matrix& a = g2[l].values;
      check(ing[l].e1, oracle::pair_sq_mean(a), "ind e1");
      check(ing[l].e2, oracle::triple(a, a), "ind e2");
      check(ing[l].e3, oracle::quad(a, a), "ind e3");
    }
    const Matrix j3 = oracle::random_sample(std::min<std::size_t>(n, 7), 3, rng);
    const std::vector<GramMatrix> g3 = block_grams(SampleMatrix(j3), BlockLayout::unit(3), nu, false);
    check(dhsic_gamma2_v(g3), oracle::dhsic_v({g3[0].values, g3[1].values, g3[2].values}),
          "dhsic_gamma2_v k=3");
    check(dhsic_gamma2_v(g2), oracle::dhsic_v({g2[0].values, g2[1].values}), "dhsic_gamma2_v k=2");
  }
  return {worst <= 1e-10, fmt("max relative error %.2e (%s), tol 1e-10", worst, where.c_str())};
}

struct Moments {
  double mean = 0, var = 0, reject = 0;
};

Moments summarize(const std::vector<double>& t) {
  Moments m;
  const double z = normal_upper_quantile(0.05);
  for (double v : t) {
    m.mean += v;
    m.reject += v > z;
  }
  m.mean /= t.size();
  for (double v : t) m.var += (v - m.mean) * (v - m.mean);
  m.var /= t.size() - 1.0;
  m.reject /= t.size();
  return m;
}

// 2. Studentized statistics are close to N(0, 1) under the null.
Outcome null_normality() {
  constexpr std::size_t reps = 500;
  std::vector<double> tg(reps), th(reps), ti(reps);
  const double nu_g = recommended_nu(1000, 1);
  const double nu_h = recommended_nu(500, 1);
  const double nu_i = recommended_nu(500, 2);
  parallel_for(reps, g_workers, [&](std::size_t r) {
    CounterRng rng(77, r);
    std::normal_distribution<double> N;
    auto draw = [&](std::size_t n, std::size_t d) {
      Matrix m(n, d);
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < d; ++j) m(i, j) = N(rng);
      return SampleMatrix(m);
    };
    tg[r] = gof_stat(draw(1000, 1), nu_g, standard_gaussian(1));
    th[r] = hom_stat(draw(500, 1), draw(500, 1), nu_h);
    const std::vector<GramMatrix> g = block_grams(draw(500, 2), BlockLayout::unit(2), nu_i, false);
    ti[r] = ind_stat(g, IndEstimator::unbiased_u);
  });
  bool ok = true;
  std::string detail;
  for (auto [name, t] : {std::pair{"gof", &tg}, std::pair{"hom", &th}, std::pair{"ind", &ti}}) {
    const Moments m = summarize(*t);
    ok &= std::abs(m.mean) < 0.15 && m.var >= 0.7 && m.var <= 1.3 && m.reject >= 0.02 &&
          m.reject <= 0.09;
    detail += fmt("%s mean %+.3f var %.3f rej %.3f; ", name, m.mean, m.var, m.reject);
  }
  return {ok, detail + "500 reps"};
}

// 3. Every bench method keeps its level under each experiment's null.
Outcome permutation_size() {
  bool ok = true;
  std::string detail;
  double lo = 1.0, hi = 0.0;
  for (Experiment tag : {Experiment::I, Experiment::II, Experiment::III, Experiment::IV}) {
    bench::ExperimentParams p = bench::default_params(tag);
    p.setting.null = true;
    p.reps = 500;
    p.seed = 300 + static_cast<int>(tag);
    p.workers = g_workers;
    if (tag == Experiment::I || tag == Experiment::II) {
      p.methods.push_back({bench::MethodKind::ua});
      p.methods.push_back({bench::MethodKind::sa});
    }
    const bench::PowerTable t = bench::run_experiment(p);
    double elo = 1.0, ehi = 0.0;
    for (const bench::PowerRow& r : t.rows) {
      const bool in = r.power >= 0.02 && r.power <= 0.09;
      if (!in) detail += fmt("%s %s(%.2f)=%.3f out of band; ", std::string(to_string(tag)).c_str(),
                             r.method.c_str(), r.param, r.power);
      ok &= in;
      elo = std::min(elo, r.power);
      ehi = std::max(ehi, r.power);
    }
    detail += fmt("%s %zu methods in [%.3f, %.3f]; ", std::string(to_string(tag)).c_str(),
                  t.rows.size(), elo, ehi);
    lo = std::min(lo, elo);
    hi = std::max(hi, ehi);
  }
  return {ok, detail + fmt("overall [%.3f, %.3f], band [0.02, 0.09]", lo, hi)};
}

// 4. Experiment I power curve.
Outcome experiment_one() {
  bench::ExperimentParams p = bench::default_params(Experiment::I);
  p.reps = 100;
  p.seed = 401;
  p.workers = g_workers;
  const bench::PowerTable t = bench::run_experiment(p);
  const double top = t.find("fixed", 4.0).power;
  const bench::PowerRow med = t.find("median");
  bool mono = true;
  std::string curve;
  std::vector<bench::PowerRow> seg;
  for (const bench::PowerRow& r : t.method_rows("fixed"))
    if (r.param >= 2.0 - 1e-9 && r.param <= 4.0 + 1e-9) seg.push_back(r);
  for (std::size_t k = 0; k < seg.size(); ++k) {
    curve += fmt("%.2f ", seg[k].power);
    if (k > 0 && seg[k].power < seg[k - 1].power - std::max(seg[k].se, seg[k - 1].se)) mono = false;
  }
  const bool ok = top >= 0.95 && med.power >= 0.10 && med.power <= 0.33 && mono;
  return {ok, fmt("power(log nu=4) %.2f; median %.2f at mean log nu %.2f; log nu 2..4: %s(monotone %s)",
                  top, med.power, med.param, curve.c_str(), mono ? "yes" : "no")};
}

// 5. Experiment II power at log nu = 1 and at the median heuristic.
Outcome experiment_two() {
  bench::ExperimentParams p = bench::default_params(Experiment::II);
  p.methods = {bench::Method::fixed(1.0), {bench::MethodKind::median}};
  p.reps = 100;
  p.seed = 501;
  p.workers = g_workers;
  const bench::PowerTable t = bench::run_experiment(p);
  const double at1 = t.find("fixed", 1.0).power;
  const bench::PowerRow med = t.find("median");
  return {at1 >= 0.83 && med.power <= 0.15,
          fmt("power(log nu=1) %.2f (>= 0.83); median %.2f at mean log nu %.2f (<= 0.15)", at1,
              med.power, med.param)};
}

// 6. and 7. High-dimensional comparison of the three methods.
bench::PowerTable high_dim(Experiment tag, std::uint64_t seed) {
  bench::ExperimentParams p = bench::default_params(tag);
  p.reps = 100;
  p.seed = seed;
  p.workers = g_workers;
  return bench::run_experiment(p);
}

Outcome experiment_three() {
  const bench::PowerTable t = high_dim(Experiment::III, 601);
  const double sa = t.find("sa").power, ua = t.find("ua").power, med = t.find("median").power;
  const bool ok = sa >= 0.95 && med >= 0.5 && med <= 0.8 && ua >= 0.85 && sa >= ua && ua >= med;
  return {ok, fmt("d=1000 n=200: S.A. %.2f, U.A. %.2f, Median %.2f", sa, ua, med)};
}

Outcome experiment_four() {
  const bench::PowerTable t = high_dim(Experiment::IV, 701);
  const double sa = t.find("sa").power, ua = t.find("ua").power, med = t.find("median").power;
  const bool ok = sa >= 0.80 && med <= 0.30 && ua <= 0.35;
  return {ok, fmt("d=1000 n=600: S.A. %.2f, U.A. %.2f, Median %.2f", sa, ua, med)};
}

// 8. GOF power against bump alternatives grows with the L2 separation.
Outcome detection_boundary() {
  constexpr std::size_t n = 500, reps = 400, R = 4000;
  constexpr std::size_t b = 4;
  const double nu = recommended_nu(n, 1, 2.0);
  const EmpiricalReference::Sampler uniform = [](std::size_t m, CounterRng& rng) {
    Matrix u(m, 1);
    for (std::size_t i = 0; i < m; ++i) u(i, 0) = rng.uniform();
    return SampleMatrix(u);
  };
  const ReferenceModel ref = EmpiricalReference(sample_uniform(R, 1, 8), uniform);
  bool ok = true;
  std::string detail;
  double prev = 0.0, prev_se = 0.0;
  for (double delta : {0.0, 0.1, 0.2, 0.4}) {
    std::vector<std::uint8_t> rej(reps, 0);
    parallel_for(reps, g_workers, [&](std::size_t r) {
      const PerturbationSpec spec =
          make_perturbation(1, b, delta / std::sqrt(double(b)), derive_seed(80, r));
      const SampleMatrix x = sample_perturbed(spec, n, derive_seed(81, r));
      TestOptions opts;
      opts.B = 100;
      opts.seed = derive_seed(82, r);
      opts.workers = 1;
      rej[r] = gof_test(x, nu, ref, opts).reject;
    });
    double power = 0.0;
    for (auto v : rej) power += v;
    power /= reps;
    const double se = std::sqrt(power * (1.0 - power) / reps);
    if (delta == 0.0) ok &= power >= 0.02 && power <= 0.09;
    else ok &= power >= prev - std::max(se, prev_se);
    detail += fmt("delta %.1f: %.3f; ", delta, power);
    prev = power;
    prev_se = se;
  }
  return {ok, detail + fmt("n=%zu, b=%zu, nu=%.2f, %zu reps", n, b, nu, reps)};
}

// 9. Both sides of the Fourier identity by quadrature, f the N(0, 1) density.
Outcome fourier_identity() {
  using boost::math::quadrature::gauss_kronrod;
  const double inf = std::numeric_limits<double>::infinity();
  const double pi = std::acos(-1.0);
  auto f = [&](double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * pi); };
  // |F f(w)|^2 with F f(w) = (2 pi)^{-1/2} ∫ f(x) e^{-i x w} dx, also by quadrature.
  auto fourier_sq = [&](double w) {
    const double re = gauss_kronrod<double, 61>::integrate(
        [&](double x) { return f(x) * std::cos(x * w); }, -inf, inf, 15, 1e-13);
    const double im = gauss_kronrod<double, 61>::integrate(
        [&](double x) { return -f(x) * std::sin(x * w); }, -inf, inf, 15, 1e-13);
    return (re * re + im * im) / (2.0 * pi);
  };
  double worst = 0.0;
  std::string detail;
  for (double nu : {1.0, 4.0, 16.0}) {
    const double lhs = gauss_kronrod<double, 61>::integrate(
        [&](double x) {
          return f(x) * gauss_kronrod<double, 61>::integrate(
                            [&](double y) { return std::exp(-nu * (x - y) * (x - y)) * f(y); },
                            -inf, inf, 15, 1e-13);
        },
        -inf, inf, 15, 1e-12);
    const double rhs = std::sqrt(pi / nu) *
                       gauss_kronrod<double, 61>::integrate(
                           [&](double w) { return std::exp(-w * w / (4.0 * nu)) * fourier_sq(w); },
                           -inf, inf, 15, 1e-12);
    worst = std::max(worst, std::abs(lhs - rhs));
    detail += fmt("nu %g: %.10f vs %.10f; ", nu, lhs, rhs);
  }
  return {worst <= 1e-6, detail + fmt("max gap %.1e, tol 1e-6", worst)};
}

// 10. General-k variance expansion against the k = 2 product form.
Outcome general_k_cross_check() {
  std::mt19937_64 rng(1010);
  std::uniform_int_distribution<std::size_t> pick_n(4, 40), pick_d(1, 3);
  std::uniform_real_distribution<double> log_nu(std::log(0.05), std::log(20.0));
  double worst = 0.0;
  for (int rep = 0; rep < 100; ++rep) {
    const std::size_t n = pick_n(rng), d1 = pick_d(rng), d2 = pick_d(rng);
    const SampleMatrix x(oracle::random_sample(n, d1 + d2, rng));
    const std::vector<GramMatrix> g = block_grams(x, BlockLayout({d1, d2}), std::exp(log_nu(rng)), false);
    const std::vector<BlockIngredients> e = ind_ingredients(g);
    // Direct per-block products s~²_1 s~²_2.
    const double direct = variance_estimate(ustat_moments(g[0])) * variance_estimate(ustat_moments(g[1]));
    worst = std::max(worst, oracle::relative_error(ind_variance_general(e), direct));
    worst = std::max(worst, oracle::relative_error(ind_variance_product(e), direct));
  }
  return {worst <= 1e-10, fmt("100 instances, max relative gap %.2e, tol 1e-10", worst)};
}

// 11. DAG enumeration and recovery of a planted DAG.
Outcome dag_workflow() {
  const std::size_t c2 = bench::enumerate_dags(2).size(), c3 = bench::enumerate_dags(3).size(),
                    c4 = bench::enumerate_dags(4).size();
  constexpr std::size_t seeds = 20, n = 200;
  std::vector<std::uint8_t> hit(seeds, 0);
  const bench::Dag truth = bench::planted_dag();
  parallel_for(seeds, g_workers, [&](std::size_t s) {
    bench::DagOptions opts;
    opts.seed = derive_seed(1100, s);
    opts.workers = 1;
    const auto ranked = bench::dag_select(bench::planted_dag_sample(n, derive_seed(1101, s)), opts);
    hit[s] = ranked.front().dag == truth && ranked[1].p_value < ranked[0].p_value;
  });
  std::size_t hits = 0;
  for (auto h : hit) hits += h;
  const double rate = static_cast<double>(hits) / seeds;
  return {c3 == 25 && c2 == 3 && c4 == 543 && rate >= 0.8,
          fmt("DAG counts %zu/%zu/%zu for p=2/3/4; planted DAG ranked first in %zu/%zu seeds (%.0f%%) at n=%zu",
              c2, c3, c4, hits, seeds, 100 * rate, n)};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance checks"};
  int only = 0;
  app.add_option("--only", only, "Run a single criterion (1-11)");
  app.add_option("--workers", g_workers, "Worker threads (0 = all)");
  CLI11_PARSE(app, argc, argv);

  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"oracle equivalence", oracle_equivalence},
      {"null normality", null_normality},
      {"resampling size", permutation_size},
      {"experiment I", experiment_one},
      {"experiment II", experiment_two},
      {"experiment III", experiment_three},
      {"experiment IV", experiment_four},
      {"detection boundary", detection_boundary},
      {"Fourier identity", fourier_identity},
      {"general-k variance", general_k_cross_check},
      {"DAG workflow", dag_workflow},
  };
  int failures = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    if (only != 0 && static_cast<std::size_t>(only) != k + 1) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[k].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    failures += !o.pass;
    std::cout << (o.pass ? "PASS" : "FAIL") << " [" << k + 1 << "] " << criteria[k].first << ": "
              << o.detail << " (" << fmt("%.1f", secs) << " s)" << std::endl;
  }
  return failures == 0 ? 0 : 1;
}
