#include "gkt/report.hpp"

#include "gkt/calibrate.hpp"

namespace gkt {
namespace {

std::vector<double> column(const std::vector<double>& values, std::size_t rows, std::size_t cols,
                           std::size_t g) {
  std::vector<double> out(rows);
  for (std::size_t b = 0; b < rows; ++b) out[b] = values[b * cols + g];
  return out;
}

}  // namespace

std::vector<double> GridStatistics::null_t_column(std::size_t g) const {
  return column(null_t, B, nus.size(), g);
}

std::vector<double> GridStatistics::null_gamma2_column(std::size_t g) const {
  return column(null_gamma2, B, nus.size(), g);
}

double GridStatistics::fixed_pvalue(std::size_t g) const {
  return resample_pvalue(t.at(g), null_t_column(g));
}

}  // namespace gkt
