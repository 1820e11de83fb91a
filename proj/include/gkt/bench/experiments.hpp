#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "gkt/bench/power_table.hpp"
#include "gkt/kernel_core.hpp"
#include "gkt/perturb.hpp"

namespace gkt::bench {

enum class MethodKind { fixed, median, ua, sa };

struct Method {
  MethodKind kind = MethodKind::sa;
  double log_nu = 0.0;  // fixed only

  static Method fixed(double log_nu) { return {MethodKind::fixed, log_nu}; }
  /// "fixed", "median", "ua" or "sa".
  std::string label() const;
};

struct ExperimentParams {
  ExperimentSetting setting;
  std::vector<Method> methods;
  std::size_t reps = 100;
  std::size_t B = 100;
  double alpha = 0.05;
  std::uint64_t seed = 0;
  std::size_t workers = 0;
  /// Grid for the adaptive methods; defaults to rescaled_default_grid(n, d)
  /// on rescaled distances and scaling_grid(n, d) otherwise.
  std::optional<ScalingGrid> grid;
  bool rescale_by_dim = false;
  VarianceFloor floor = VarianceFloor::kernel_scaled;
};

/// log nu sweeps matching the published curves: [-1, 4] for I, [-3, 2] for II,
/// step 0.25. Empty for III and IV.
std::vector<double> default_log_nus(Experiment tag);

/// Fixed sweep plus median for I and II; median, U.A. and S.A. for III and IV.
/// Distances are rescaled by dimension for III and IV only.
ExperimentParams default_params(Experiment tag);

void validate_params(const ExperimentParams& params);

/// Power of every method over `reps` fresh data sets. All methods of one
/// replicate share a single pass over the union of their scaling parameters
/// and the same permutations. Deterministic given the seed.
PowerTable run_experiment(const ExperimentParams& params);

}  // namespace gkt::bench
