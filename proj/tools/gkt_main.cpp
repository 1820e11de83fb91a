#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "gkt/adaptive.hpp"
#include "gkt/bench/csv.hpp"
#include "gkt/bench/dag.hpp"
#include "gkt/bench/experiments.hpp"
#include "gkt/bench/power_table.hpp"
#include "gkt/error.hpp"
#include "gkt/gof.hpp"
#include "gkt/hom.hpp"
#include "gkt/ind.hpp"

using json = nlohmann::json;
using namespace gkt;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitData = 3;

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::invalid_parameter:
    case ErrorKind::invalid_config:
    case ErrorKind::invalid_layout:
    case ErrorKind::invalid_setting:
    case ErrorKind::invalid_spec:
      return kExitConfig;
    default:
      return kExitData;
  }
}

struct Common {
  std::vector<std::string> files;
  double alpha = 0.05;
  std::size_t B = 100;
  std::uint64_t seed = 0;
  std::size_t workers = 0;
  std::optional<double> nu;
  std::string nu_grid;
  bool grid_default = false;
  bool median = false;
  bool ua = false;
  bool sa = false;
  std::string rescale = "auto";
  std::string out;
  std::string group;
  std::string blocks;
  std::string reference;
  double ref_mean = 0.0;
  double ref_var = 1.0;
  bool asymptotic = false;
  std::string test;  // adaptive subcommand only
};

// Echo of every option of a subcommand, as given or defaulted.
json config_echo(const CLI::App* app) {
  json cfg = json::object();
  for (const CLI::Option* opt : app->get_options()) {
    std::string name = opt->get_single_name();
    if (name.empty() || name == "help") continue;
    const auto& res = opt->results();
    if (!res.empty())
      cfg[name] = res.size() == 1 ? json(res[0]) : json(res);
    else if (!opt->get_default_str().empty())
      cfg[name] = opt->get_default_str();
    else if (opt->get_type_size() == 0)
      cfg[name] = false;
  }
  return cfg;
}

class Output {
 public:
  explicit Output(const std::string& path) {
    if (!path.empty()) {
      file_.open(path);
      if (!file_) fail(ErrorKind::io_error, "cannot write " + path);
    }
  }
  std::ostream& stream() { return file_.is_open() ? file_ : std::cout; }
  void line(const json& j) { stream() << j.dump() << '\n'; }

 private:
  std::ofstream file_;
};

ScalingGrid parse_grid(const std::string& text) {
  std::vector<std::string> parts;
  std::stringstream ss(text);
  for (std::string p; std::getline(ss, p, ':');) parts.push_back(p);
  if (parts.size() != 3) fail(ErrorKind::invalid_config, "--nu-grid expects lo:hi:points");
  double lo = 0, hi = 0;
  std::size_t points = 0;
  try {
    lo = std::stod(parts[0]);
    hi = std::stod(parts[1]);
    points = std::stoul(parts[2]);
  } catch (const std::exception&) {
    fail(ErrorKind::invalid_config, "--nu-grid expects lo:hi:points");
  }
  if (!(lo > 0.0 && hi >= lo && points >= 1))
    fail(ErrorKind::invalid_config, "--nu-grid needs 0 < lo <= hi and points >= 1");
  try {
    return ScalingGrid::log_spaced(lo, hi, points);
  } catch (const Error& e) {
    throw Error(ErrorKind::invalid_config, e.what());
  }
}

bool rescale_flag(const std::string& value, bool fallback) {
  if (value == "on") return true;
  if (value == "off") return false;
  return fallback;
}

ReferenceModel gof_reference(const Common& c, std::size_t d) {
  if (!c.reference.empty())
    return EmpiricalReference(SampleMatrix(bench::read_csv(c.reference).values));
  if (!(c.ref_var > 0.0)) fail(ErrorKind::invalid_config, "--ref-var must be positive");
  return AnalyticGaussian{std::vector<double>(d, c.ref_mean), c.ref_var};
}

Problem load_problem(const std::string& test, const Common& c) {
  if (c.files.empty()) fail(ErrorKind::invalid_config, "no input file");
  const bench::CsvTable first = bench::read_csv(c.files[0]);
  if (test == "gof") {
    SampleMatrix x(first.values);
    return GofProblem{x, gof_reference(c, x.d())};
  }
  if (test == "hom") {
    if (c.files.size() >= 2)
      return HomProblem{SampleMatrix(first.values), SampleMatrix(bench::read_csv(c.files[1]).values)};
    if (c.group.empty()) fail(ErrorKind::invalid_config, "hom needs two files or --group");
    auto [x, y] = bench::split_groups(first, first.column(c.group));
    return HomProblem{SampleMatrix(std::move(x)), SampleMatrix(std::move(y))};
  }
  if (test == "ind") {
    SampleMatrix x(first.values);
    const BlockLayout layout =
        c.blocks.empty() ? BlockLayout::unit(x.d()) : BlockLayout(bench::parse_widths(c.blocks));
    if (layout.total() != x.d())
      fail(ErrorKind::invalid_config, "--blocks widths do not add up to the column count");
    return IndProblem{x, layout, {}};
  }
  fail(ErrorKind::invalid_config, "unknown test '" + test + "'");
}

double median_nu(const Problem& problem, bool rescale) {
  if (const auto* g = std::get_if<GofProblem>(&problem))
    return median_heuristic(pairwise_sqdist(g->x, rescale));
  if (const auto* h = std::get_if<HomProblem>(&problem))
    return median_heuristic(pairwise_sqdist(SampleMatrix::concat(h->x, h->y), rescale));
  return ind_median_nu(std::get<IndProblem>(problem).x, rescale);
}

json report_json(const TestReport& r) {
  json j{{"statistic", r.t_stat},       {"p_value", r.p_value}, {"nu", r.nu},
         {"gamma2_hat", r.gamma2_hat}, {"s_tilde2", r.s_tilde2}, {"s_hat2", r.s_hat2},
         {"calibration", r.calibration}, {"B", r.B},            {"seed", r.seed},
         {"reject", r.reject}};
  if (!r.estimator.empty()) j["estimator"] = r.estimator;
  return j;
}

void run_single(const std::string& test, const Common& c, const Problem& problem, double nu,
                bool rescale, bool from_median, json cfg, Output& out) {
  TestOptions opts;
  opts.alpha = c.alpha;
  opts.B = c.B;
  opts.seed = c.seed;
  opts.workers = c.workers;
  opts.rescale_by_dim = rescale;
  opts.calibration = c.asymptotic ? Calibration::asymptotic : Calibration::resampling;
  TestReport r;
  if (const auto* g = std::get_if<GofProblem>(&problem))
    r = gof_test(g->x, nu, g->ref, opts);
  else if (const auto* h = std::get_if<HomProblem>(&problem))
    r = hom_test(h->x, h->y, nu, opts);
  else {
    const auto& p = std::get<IndProblem>(problem);
    r = ind_test(p.x, p.layout, nu, opts, p.estimator);
  }
  json j = report_json(r);
  j["test"] = test;
  j["nu_source"] = from_median ? "median" : "fixed";
  j["rescale_dim"] = rescale;
  j["config"] = std::move(cfg);
  out.line(j);
}

void run_adaptive(const std::string& test, const Common& c, const Problem& problem, bool rescale,
                  json cfg, Output& out) {
  const ScalingGrid grid = !c.nu_grid.empty()
                               ? parse_grid(c.nu_grid)
                               : (rescale ? rescaled_default_grid(problem_size(problem), problem_dim(problem))
                                          : scaling_grid(problem_size(problem), problem_dim(problem)));
  GridOptions options{c.B, c.seed, c.workers, VarianceFloor::kernel_scaled, rescale};
  const GridStatistics stats = problem_grid_statistics(problem, grid, options);
  std::vector<AdaptiveMode> modes;
  if (c.sa || !c.ua) modes.push_back(AdaptiveMode::self_normalized);
  if (c.ua) modes.push_back(AdaptiveMode::unnormalized);
  for (AdaptiveMode mode : modes) {
    const AdaptiveReport r = adaptive_from_grid(stats, mode, c.alpha);
    json per_nu = json::array();
    for (const auto& [nu, t] : r.per_nu) per_nu.push_back({{"nu", nu}, {"value", t}});
    out.line({{"test", test},
              {"method", mode == AdaptiveMode::self_normalized ? "sa" : "ua"},
              {"statistic", r.t_max},
              {"nu_argmax", r.nu_argmax},
              {"p_value", r.p_value},
              {"q_hat", r.q_hat},
              {"reject", r.reject},
              {"grid", grid.values()},
              {"per_nu", per_nu},
              {"B", r.B},
              {"seed", c.seed},
              {"rescale_dim", rescale},
              {"config", cfg}});
  }
}

void add_test_options(CLI::App* app, Common& c, bool adaptive_only) {
  app->add_option("files", c.files, "CSV input file(s) with a header row")->required();
  app->add_option("--alpha", c.alpha, "Significance level")->capture_default_str();
  app->add_option("--permutations,-B", c.B, "Permutations or Monte-Carlo draws")->capture_default_str();
  app->add_option("--seed", c.seed, "Random seed")->capture_default_str();
  app->add_option("--workers", c.workers, "Worker threads (0 = all)")->capture_default_str();
  if (!adaptive_only) {
    app->add_option("--nu", c.nu, "Fixed scaling parameter");
    app->add_flag("--median", c.median, "Median-heuristic scaling parameter");
    app->add_flag("--asymptotic", c.asymptotic, "Normal calibration instead of resampling");
  }
  app->add_option("--nu-grid", c.nu_grid, "Adaptive grid lo:hi:points (log-spaced)");
  app->add_flag("--grid-default", c.grid_default, "Default adaptive grid");
  app->add_flag("--sa", c.sa, "Self-normalized adaptive test");
  app->add_flag("--ua", c.ua, "Unnormalized adaptive test");
  app->add_option("--rescale-dim", c.rescale, "Divide squared distances by d (on|off)")
      ->check(CLI::IsMember({"on", "off", "auto"}))
      ->capture_default_str();
  app->add_option("--group", c.group, "hom: name of the two-valued group column");
  app->add_option("--blocks", c.blocks, "ind: block widths d1,d2,...");
  app->add_option("--reference", c.reference, "gof: CSV of draws from P0");
  app->add_option("--ref-mean", c.ref_mean, "gof: mean of the Gaussian reference")->capture_default_str();
  app->add_option("--ref-var", c.ref_var, "gof: variance of the Gaussian reference")->capture_default_str();
  app->add_option("--out", c.out, "Write JSON lines here instead of stdout");
}

void run_test_command(const std::string& test, const Common& c, const CLI::App* app,
                      bool force_adaptive) {
  if (c.nu && c.median) fail(ErrorKind::invalid_config, "--nu and --median are exclusive");
  if (c.nu && !(*c.nu > 0.0 && std::isfinite(*c.nu)))
    fail(ErrorKind::invalid_config, "--nu must be positive");
  if (c.B == 0 && !c.asymptotic) fail(ErrorKind::invalid_config, "--permutations must be >= 1");
  const bool adaptive = force_adaptive || c.sa || c.ua || c.grid_default || !c.nu_grid.empty();
  if (adaptive && (c.nu || c.median || c.asymptotic))
    fail(ErrorKind::invalid_config, "adaptive options cannot be combined with --nu, --median or --asymptotic");
  const Problem problem = load_problem(test, c);
  Output out(c.out);
  json cfg = config_echo(app);
  if (adaptive) {
    run_adaptive(test, c, problem, rescale_flag(c.rescale, true), std::move(cfg), out);
    return;
  }
  const bool rescale = rescale_flag(c.rescale, false);
  const double nu = c.nu ? *c.nu : median_nu(problem, rescale);
  run_single(test, c, problem, nu, rescale, !c.nu, std::move(cfg), out);
}

struct BenchArgs {
  std::string tag;
  std::size_t reps = 100;
  std::size_t B = 100;
  double alpha = 0.05;
  std::uint64_t seed = 0;
  std::size_t workers = 0;
  std::vector<double> nus;
  std::vector<double> log_nus;
  bool sweep = false;
  bool median = false, ua = false, sa = false;
  std::string nu_grid;
  bool grid_default = false;
  std::string rescale = "auto";
  std::optional<std::size_t> n, m, d;
  bool null = false;
  std::string out;
  std::string format = "csv";
};

void run_bench(const BenchArgs& a, const CLI::App* app) {
  const Experiment tag = [&] {
    try {
      return parse_experiment(a.tag);
    } catch (const Error& e) {
      throw Error(ErrorKind::invalid_config, e.what());
    }
  }();
  bench::ExperimentParams p = bench::default_params(tag);
  if (a.n) p.setting.n = *a.n;
  if (a.m) p.setting.m = *a.m;
  if (a.d) p.setting.d = *a.d;
  p.setting.null = a.null;
  p.reps = a.reps;
  p.B = a.B;
  p.alpha = a.alpha;
  p.seed = a.seed;
  p.workers = a.workers;
  p.rescale_by_dim = rescale_flag(a.rescale, p.rescale_by_dim);
  if (!a.nu_grid.empty()) p.grid = parse_grid(a.nu_grid);

  const bool explicit_methods =
      a.sweep || a.median || a.ua || a.sa || !a.nus.empty() || !a.log_nus.empty();
  if (explicit_methods) {
    p.methods.clear();
    if (a.sweep)
      for (double l : bench::default_log_nus(tag)) p.methods.push_back(bench::Method::fixed(l));
    for (double l : a.log_nus) p.methods.push_back(bench::Method::fixed(l));
    for (double nu : a.nus) {
      if (!(nu > 0.0)) fail(ErrorKind::invalid_config, "--nu must be positive");
      p.methods.push_back(bench::Method::fixed(std::log(nu)));
    }
    if (a.median) p.methods.push_back({bench::MethodKind::median});
    if (a.ua) p.methods.push_back({bench::MethodKind::ua});
    if (a.sa) p.methods.push_back({bench::MethodKind::sa});
    if (p.methods.empty()) fail(ErrorKind::invalid_config, "the sweep is empty for this experiment");
  }

  const bench::PowerTable table = bench::run_experiment(p);
  const std::string title = "Experiment " + a.tag;
  if (a.out.empty()) {
    if (a.format == "csv")
      bench::write_csv(table, std::cout);
    else
      bench::write_svg(table, std::cout, title);
    return;
  }
  bench::save_table(table, a.out, a.format, title);
  std::cout << json{{"bench", a.tag}, {"rows", table.rows.size()}, {"out", a.out},
                    {"config", config_echo(app)}}
                   .dump()
            << '\n';
}

struct DagArgs {
  std::string file;
  std::size_t B = 100;
  std::uint64_t seed = 0;
  double alpha = 0.05;
  std::size_t workers = 0;
  bool ua = false;
  std::string out;
};

void run_dag(const DagArgs& a, const CLI::App* app) {
  const bench::CsvTable table = bench::read_csv(a.file);
  bench::DagOptions opts;
  opts.B = a.B;
  opts.seed = a.seed;
  opts.alpha = a.alpha;
  opts.workers = a.workers;
  opts.mode = a.ua ? AdaptiveMode::unnormalized : AdaptiveMode::self_normalized;
  if (opts.B == 0) fail(ErrorKind::invalid_config, "--permutations must be >= 1");
  const auto ranked = bench::dag_select(table.values, opts);
  Output out(a.out);
  out.line({{"dag_candidates", ranked.size()},
            {"regression", "nadaraya-watson, product gaussian weights, silverman bandwidth"},
            {"columns", table.header},
            {"config", config_echo(app)}});
  for (std::size_t i = 0; i < ranked.size(); ++i)
    out.line({{"rank", i + 1},
              {"dag", ranked[i].dag.to_string(table.header)},
              {"p_value", ranked[i].p_value},
              {"statistic", ranked[i].t_max}});
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Gaussian kernel tests for goodness of fit, homogeneity and independence"};
  app.require_subcommand(1);

  Common gof, hom, ind, adapt;
  CLI::App* gof_cmd = app.add_subcommand("gof", "Goodness-of-fit test against P0");
  add_test_options(gof_cmd, gof, false);
  CLI::App* hom_cmd = app.add_subcommand("hom", "Two-sample homogeneity test");
  add_test_options(hom_cmd, hom, false);
  CLI::App* ind_cmd = app.add_subcommand("ind", "Joint independence test of column blocks");
  add_test_options(ind_cmd, ind, false);
  CLI::App* adapt_cmd = app.add_subcommand("adaptive", "Max-over-grid test");
  adapt_cmd->add_option("test", adapt.test, "gof, hom or ind")
      ->required()
      ->check(CLI::IsMember({"gof", "hom", "ind"}));
  add_test_options(adapt_cmd, adapt, true);

  BenchArgs b;
  CLI::App* bench_cmd = app.add_subcommand("bench", "Power simulation for Experiments I-IV");
  bench_cmd->add_option("experiment", b.tag, "I, II, III or IV")->required();
  bench_cmd->add_option("--reps", b.reps, "Replicates")->capture_default_str();
  bench_cmd->add_option("--permutations,-B", b.B, "Permutations per test")->capture_default_str();
  bench_cmd->add_option("--alpha", b.alpha, "Significance level")->capture_default_str();
  bench_cmd->add_option("--seed", b.seed, "Random seed")->capture_default_str();
  bench_cmd->add_option("--workers", b.workers, "Worker threads (0 = all)")->capture_default_str();
  bench_cmd->add_option("--nu", b.nus, "Fixed scaling parameter (repeatable)");
  bench_cmd->add_option("--log-nu", b.log_nus, "Fixed log scaling parameter (repeatable)");
  bench_cmd->add_flag("--sweep", b.sweep, "Default log nu sweep (I and II)");
  bench_cmd->add_flag("--median", b.median, "Median heuristic");
  bench_cmd->add_flag("--ua", b.ua, "Unnormalized adaptive");
  bench_cmd->add_flag("--sa", b.sa, "Self-normalized adaptive");
  bench_cmd->add_option("--nu-grid", b.nu_grid, "Adaptive grid lo:hi:points");
  bench_cmd->add_flag("--grid-default", b.grid_default, "Default adaptive grid");
  bench_cmd->add_option("--rescale-dim", b.rescale, "on|off (default: on for III and IV)")
      ->check(CLI::IsMember({"on", "off", "auto"}))
      ->capture_default_str();
  bench_cmd->add_option("--n", b.n, "Sample size");
  bench_cmd->add_option("--m", b.m, "Second sample size (I, III)");
  bench_cmd->add_option("--d", b.d, "Dimension");
  bench_cmd->add_flag("--null", b.null, "Draw from the experiment's null (size check)");
  bench_cmd->add_option("--out", b.out, "Output path");
  bench_cmd->add_option("--format", b.format, "csv or svg")
      ->check(CLI::IsMember({"csv", "svg"}))
      ->capture_default_str();

  DagArgs g;
  CLI::App* dag_cmd = app.add_subcommand("dag", "Rank DAGs by residual independence");
  dag_cmd->add_option("file", g.file, "CSV with 2 to 4 numeric columns")->required();
  dag_cmd->add_option("--permutations,-B", g.B, "Permutations per DAG")->capture_default_str();
  dag_cmd->add_option("--seed", g.seed, "Random seed")->capture_default_str();
  dag_cmd->add_option("--alpha", g.alpha, "Significance level")->capture_default_str();
  dag_cmd->add_option("--workers", g.workers, "Worker threads (0 = all)")->capture_default_str();
  dag_cmd->add_flag("--ua", g.ua, "Unnormalized adaptive statistic instead of S.A.");
  dag_cmd->add_option("--out", g.out, "Write JSON lines here instead of stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    if (gof_cmd->parsed()) run_test_command("gof", gof, gof_cmd, false);
    if (hom_cmd->parsed()) run_test_command("hom", hom, hom_cmd, false);
    if (ind_cmd->parsed()) run_test_command("ind", ind, ind_cmd, false);
    if (adapt_cmd->parsed()) run_test_command(adapt.test, adapt, adapt_cmd, true);
    if (bench_cmd->parsed()) run_bench(b, bench_cmd);
    if (dag_cmd->parsed()) run_dag(g, dag_cmd);
  } catch (const Error& e) {
    std::cerr << "error (" << to_string(e.kind()) << "): " << e.what() << '\n';
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitData;
  }
  return 0;
}
