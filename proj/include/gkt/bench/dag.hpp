#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "gkt/adaptive.hpp"
#include "gkt/matrix.hpp"

namespace gkt::bench {

/// Directed graph on p nodes; adj[i * p + j] means an edge i -> j.
struct Dag {
  std::size_t p = 0;
  std::vector<std::uint8_t> adj;

  bool edge(std::size_t i, std::size_t j) const noexcept { return adj[i * p + j] != 0; }
  std::vector<std::size_t> parents(std::size_t j) const;
  bool acyclic() const;
  /// "A->B,A->C", or "empty" with no edges.
  std::string to_string(const std::vector<std::string>& names = {}) const;
  bool operator==(const Dag&) const = default;
};

/// Every DAG on p <= 4 labelled nodes (3, 25, 543 for p = 2, 3, 4).
std::vector<Dag> enumerate_dags(std::size_t p);

/// Columns shifted and scaled to mean 0 and unit (n - 1) variance.
Matrix standardize(const Matrix& data);

/// Silverman rule of thumb 1.06 sd n^{-1/5} per column.
std::vector<double> silverman_bandwidths(const Matrix& covariates);

/// Nadaraya-Watson fit of y on the covariates with product Gaussian weights
/// and bandwidths h.
std::vector<double> nadaraya_watson(const Matrix& covariates, const std::vector<double>& y,
                                    const std::vector<double>& h, bool leave_one_out = false);

/// Factor 2^{-k/2}, k = 0..8, applied to the Silverman bandwidths that
/// minimizes the leave-one-out squared error. The rule of thumb alone
/// oversmooths sharp regression functions, and the leftover bias shows up
/// as residual dependence.
double cv_bandwidth_scale(const Matrix& covariates, const std::vector<double>& y);

/// Fit with the Silverman bandwidths times cv_bandwidth_scale. Throws
/// degenerate-regressor when a covariate is constant.
std::vector<double> nadaraya_watson(const Matrix& covariates, const std::vector<double>& y);

/// Residual of every node on its parents; roots keep their values.
Matrix dag_residuals(const Matrix& data, const Dag& dag);

struct DagCandidate {
  Dag dag;
  double p_value = 1.0;
  double t_max = 0.0;
};

struct DagOptions {
  std::size_t B = 100;
  std::uint64_t seed = 0;
  double alpha = 0.05;
  std::size_t workers = 0;
  AdaptiveMode mode = AdaptiveMode::self_normalized;
  std::size_t grid_points = 20;
};

/// Standardizes, fits every DAG and tests joint independence of its residual
/// columns with the adaptive statistic. Sorted by p-value descending; ties go
/// to fewer edges, then enumeration order. Requires 2 <= p <= 4 and n >= 20.
std::vector<DagCandidate> dag_select(const Matrix& data, const DagOptions& options = {});

/// Complete three-node DAG 0->1, 0->2, 1->2 with nonlinear links and
/// uniform noise. It is the only DAG containing all three true edges.
Matrix planted_dag_sample(std::size_t n, std::uint64_t seed);
Dag planted_dag();

}  // namespace gkt::bench
