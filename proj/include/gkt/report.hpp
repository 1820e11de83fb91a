#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "gkt/kernel_core.hpp"

namespace gkt {

enum class Calibration {
  /// p = 1 - Phi(T).
  asymptotic,
  /// Monte-Carlo draws from P0 (GOF) or permutations (HOM, IND).
  resampling,
};

enum class IndEstimator { unbiased_u, v_statistic };

std::string_view to_string(IndEstimator e) noexcept;

struct TestOptions {
  double alpha = 0.05;
  Calibration calibration = Calibration::resampling;
  std::size_t B = 100;
  std::uint64_t seed = 0;
  /// 0 uses every hardware thread; results never depend on this value.
  std::size_t workers = 0;
  VarianceFloor floor = VarianceFloor::absolute;
  bool rescale_by_dim = false;
};

/// Outcome of a single-nu test.
struct TestReport {
  double gamma2_hat = 0.0;
  double s_tilde2 = 0.0;
  double s_hat2 = 0.0;
  double t_stat = 0.0;
  double p_value = 1.0;
  double nu = 0.0;
  /// "asymptotic-normal", "monte-carlo" or "permutation".
  std::string calibration;
  /// IND only: "unbiased-U" or "v-statistic".
  std::string estimator;
  std::size_t B = 0;
  std::uint64_t seed = 0;
  bool reject = false;
};

using GofReport = TestReport;
using HomReport = TestReport;
using IndReport = TestReport;

struct GridOptions {
  std::size_t B = 100;
  std::uint64_t seed = 0;
  std::size_t workers = 0;
  VarianceFloor floor = VarianceFloor::kernel_scaled;
  bool rescale_by_dim = false;
};

/// Studentized statistics and raw estimates at every grid point, for the
/// observed data and for B resamples. One pass serves fixed-nu tests at each
/// grid point as well as both adaptive maxima.
struct GridStatistics {
  std::vector<double> nus;
  std::vector<double> t;
  std::vector<double> gamma2;
  std::size_t B = 0;
  /// Row-major B × nus.size().
  std::vector<double> null_t;
  std::vector<double> null_gamma2;

  std::size_t grid_size() const noexcept { return nus.size(); }
  /// Resampled statistics at grid point g.
  std::vector<double> null_t_column(std::size_t g) const;
  std::vector<double> null_gamma2_column(std::size_t g) const;
  /// Permutation / Monte-Carlo p-value of the fixed-nu test at grid point g.
  double fixed_pvalue(std::size_t g) const;
};

}  // namespace gkt
