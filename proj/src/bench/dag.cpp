#include "gkt/bench/dag.hpp"

#include <algorithm>
#include <cmath>

#include "gkt/error.hpp"
#include "gkt/rng.hpp"

namespace gkt::bench {

std::vector<std::size_t> Dag::parents(std::size_t j) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < p; ++i)
    if (edge(i, j)) out.push_back(i);
  return out;
}

bool Dag::acyclic() const {
  // Kahn: repeatedly strip nodes with no remaining parents.
  std::vector<std::size_t> indegree(p, 0);
  for (std::size_t i = 0; i < p; ++i)
    for (std::size_t j = 0; j < p; ++j) indegree[j] += edge(i, j);
  std::vector<std::size_t> ready;
  for (std::size_t j = 0; j < p; ++j)
    if (indegree[j] == 0) ready.push_back(j);
  std::size_t seen = 0;
  while (!ready.empty()) {
    const std::size_t i = ready.back();
    ready.pop_back();
    ++seen;
    for (std::size_t j = 0; j < p; ++j)
      if (edge(i, j) && --indegree[j] == 0) ready.push_back(j);
  }
  return seen == p;
}

std::string Dag::to_string(const std::vector<std::string>& names) const {
  auto name = [&](std::size_t i) { return i < names.size() ? names[i] : "X" + std::to_string(i); };
  std::string out;
  for (std::size_t i = 0; i < p; ++i)
    for (std::size_t j = 0; j < p; ++j)
      if (edge(i, j)) out += (out.empty() ? "" : ",") + name(i) + "->" + name(j);
  return out.empty() ? "empty" : out;
}

std::vector<Dag> enumerate_dags(std::size_t p) {
  if (p < 2 || p > 4) fail(ErrorKind::unsupported_size, "DAG enumeration supports 2 to 4 nodes");
  std::vector<std::pair<std::size_t, std::size_t>> slots;
  for (std::size_t i = 0; i < p; ++i)
    for (std::size_t j = 0; j < p; ++j)
      if (i != j) slots.emplace_back(i, j);
  std::vector<Dag> out;
  for (std::uint32_t mask = 0; mask < (1u << slots.size()); ++mask) {
    Dag g{p, std::vector<std::uint8_t>(p * p, 0)};
    for (std::size_t s = 0; s < slots.size(); ++s)
      if (mask >> s & 1u) g.adj[slots[s].first * p + slots[s].second] = 1;
    if (g.acyclic()) out.push_back(std::move(g));
  }
  return out;
}

Matrix standardize(const Matrix& data) {
  const std::size_t n = data.rows();
  require(n >= 2, ErrorKind::sample_too_small, "need at least two rows to standardize");
  Matrix out = data;
  for (std::size_t c = 0; c < data.cols(); ++c) {
    double mean = 0.0;
    for (std::size_t i = 0; i < n; ++i) mean += data(i, c);
    mean /= static_cast<double>(n);
    double ss = 0.0;
    for (std::size_t i = 0; i < n; ++i) ss += (data(i, c) - mean) * (data(i, c) - mean);
    const double sd = std::sqrt(ss / static_cast<double>(n - 1));
    if (!(sd > 0.0))
      fail(ErrorKind::degenerate_sample, "column " + std::to_string(c + 1) + " is constant");
    for (std::size_t i = 0; i < n; ++i) out(i, c) = (data(i, c) - mean) / sd;
  }
  return out;
}

std::vector<double> silverman_bandwidths(const Matrix& covariates) {
  // Normal-reference rule sd (4 / ((q + 2) n))^{1/(q + 4)}; 1.06 sd n^{-1/5} for q = 1.
  const std::size_t n = covariates.rows(), q = covariates.cols();
  const double factor = std::pow(4.0 / ((static_cast<double>(q) + 2.0) * static_cast<double>(n)),
                                 1.0 / (static_cast<double>(q) + 4.0));
  std::vector<double> h(q);
  for (std::size_t c = 0; c < q; ++c) {
    double mean = 0.0;
    for (std::size_t i = 0; i < n; ++i) mean += covariates(i, c);
    mean /= static_cast<double>(n);
    double ss = 0.0;
    for (std::size_t i = 0; i < n; ++i) ss += (covariates(i, c) - mean) * (covariates(i, c) - mean);
    const double sd = std::sqrt(ss / static_cast<double>(n - 1));
    if (!(sd > 0.0))
      fail(ErrorKind::degenerate_regressor, "regressor " + std::to_string(c + 1) + " is constant");
    h[c] = sd * factor;
  }
  return h;
}

std::vector<double> nadaraya_watson(const Matrix& covariates, const std::vector<double>& y,
                                    const std::vector<double>& h, bool leave_one_out) {
  const std::size_t n = covariates.rows(), q = covariates.cols();
  require(y.size() == n, ErrorKind::invalid_input, "response length differs from covariates");
  require(h.size() == q, ErrorKind::invalid_input, "one bandwidth per covariate");
  std::vector<double> fit(n);
  for (std::size_t i = 0; i < n; ++i) {
    double num = 0.0, den = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (leave_one_out && j == i) continue;
      double e = 0.0;
      for (std::size_t c = 0; c < q; ++c) {
        const double u = (covariates(i, c) - covariates(j, c)) / h[c];
        e += u * u;
      }
      const double w = std::exp(-0.5 * e);
      num += w * y[j];
      den += w;
    }
    // Leave-in fits always have den >= 1; an isolated point left out falls back to its own value.
    fit[i] = den > 0.0 ? num / den : y[i];
  }
  return fit;
}

double cv_bandwidth_scale(const Matrix& covariates, const std::vector<double>& y) {
  const std::vector<double> base = silverman_bandwidths(covariates);
  double best_scale = 1.0, best_err = INFINITY;
  for (int k = 0; k <= 8; ++k) {
    const double scale = std::pow(2.0, -0.5 * k);
    std::vector<double> h = base;
    for (double& v : h) v *= scale;
    const std::vector<double> fit = nadaraya_watson(covariates, y, h, true);
    double err = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) err += (y[i] - fit[i]) * (y[i] - fit[i]);
    if (err < best_err) {
      best_err = err;
      best_scale = scale;
    }
  }
  return best_scale;
}

std::vector<double> nadaraya_watson(const Matrix& covariates, const std::vector<double>& y) {
  std::vector<double> h = silverman_bandwidths(covariates);
  const double scale = cv_bandwidth_scale(covariates, y);
  for (double& v : h) v *= scale;
  return nadaraya_watson(covariates, y, h, false);
}

Matrix dag_residuals(const Matrix& data, const Dag& dag) {
  require(data.cols() == dag.p, ErrorKind::invalid_input, "DAG size differs from column count");
  const std::size_t n = data.rows();
  Matrix out = data;
  for (std::size_t j = 0; j < dag.p; ++j) {
    const std::vector<std::size_t> pa = dag.parents(j);
    if (pa.empty()) continue;
    Matrix cov(n, pa.size());
    std::vector<double> y(n);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t c = 0; c < pa.size(); ++c) cov(i, c) = data(i, pa[c]);
      y[i] = data(i, j);
    }
    const std::vector<double> fit = nadaraya_watson(cov, y);
    for (std::size_t i = 0; i < n; ++i) out(i, j) = y[i] - fit[i];
  }
  return out;
}

std::vector<DagCandidate> dag_select(const Matrix& data, const DagOptions& options) {
  const std::size_t p = data.cols(), n = data.rows();
  if (p < 2 || p > 4) fail(ErrorKind::unsupported_size, "DAG selection supports 2 to 4 columns");
  require(n >= 20, ErrorKind::sample_too_small, "DAG selection needs n >= 20");
  require(options.B >= 1, ErrorKind::invalid_config, "permutations must be >= 1");
  const Matrix z = standardize(data);
  const std::vector<Dag> dags = enumerate_dags(p);
  const ScalingGrid grid = rescaled_default_grid(n, p, options.grid_points);

  std::vector<DagCandidate> out(dags.size());
  for (std::size_t g = 0; g < dags.size(); ++g) {
    // Residual scales differ across nodes; restandardizing keeps one grid meaningful.
    const SampleMatrix residuals(standardize(dag_residuals(z, dags[g])));
    AdaptiveOptions opts;
    opts.alpha = options.alpha;
    opts.B = options.B;
    // Common permutations for every candidate, so p-values differ only through the residuals.
    opts.seed = options.seed;
    opts.workers = options.workers;
    opts.mode = options.mode;
    const AdaptiveReport r = adaptive_test(IndProblem{residuals, BlockLayout::unit(p), {}}, grid, opts);
    out[g] = {dags[g], r.p_value, r.t_max};
  }
  // Equal p-values (they live on a 1/(B+1) lattice) go to the sparser DAG.
  auto edges = [](const Dag& g) { return std::count(g.adj.begin(), g.adj.end(), 1); };
  std::stable_sort(out.begin(), out.end(), [&](const DagCandidate& a, const DagCandidate& b) {
    if (a.p_value != b.p_value) return a.p_value > b.p_value;
    return edges(a.dag) < edges(b.dag);
  });
  return out;
}

Dag planted_dag() {
  Dag g{3, std::vector<std::uint8_t>(9, 0)};
  g.adj[0 * 3 + 1] = 1;
  g.adj[0 * 3 + 2] = 1;
  g.adj[1 * 3 + 2] = 1;
  return g;
}

Matrix planted_dag_sample(std::size_t n, std::uint64_t seed) {
  CounterRng rng(seed);
  auto u = [&](double half) { return half * (2.0 * rng.uniform() - 1.0); };
  Matrix x(n, 3);
  for (std::size_t i = 0; i < n; ++i) {
    const double a = u(2.0);
    const double b = a * a + u(0.6);
    const double c = std::sin(1.5 * a) + 0.5 * b + u(0.4);
    x(i, 0) = a;
    x(i, 1) = b;
    x(i, 2) = c;
  }
  return x;
}

}  // namespace gkt::bench
