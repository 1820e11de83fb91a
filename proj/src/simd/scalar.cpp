#include <cmath>

#include "gkt/simd.hpp"

namespace gkt::simd {
namespace {

double sqdist(const double* a, const double* b, std::size_t len) {
  double acc = 0.0;
  for (std::size_t k = 0; k < len; ++k) {
    const double diff = a[k] - b[k];
    acc += diff * diff;
  }
  return acc;
}

void sqdist_rows(const double* x, const double* rows, std::size_t count, std::size_t d,
                 double* out) {
  for (std::size_t r = 0; r < count; ++r) out[r] = sqdist(x, rows + r * d, d);
}

void exp_neg_scaled(const double* src, double* dst, std::size_t len, double scale) {
  for (std::size_t k = 0; k < len; ++k) dst[k] = std::exp(-scale * src[k]);
}

double exp_neg_scaled_sum(const double* src, std::size_t len, double scale) {
  double acc = 0.0;
  for (std::size_t k = 0; k < len; ++k) acc += std::exp(-scale * src[k]);
  return acc;
}

double dot(const double* a, const double* b, std::size_t len) {
  double acc = 0.0;
  for (std::size_t k = 0; k < len; ++k) acc += a[k] * b[k];
  return acc;
}

double sum(const double* a, std::size_t len) {
  double acc = 0.0;
  for (std::size_t k = 0; k < len; ++k) acc += a[k];
  return acc;
}

void gather(const double* row, const std::uint32_t* idx, std::size_t len, double* out) {
  for (std::size_t k = 0; k < len; ++k) out[k] = row[idx[k]];
}

void gather_add(const double* row, const std::uint32_t* idx, std::size_t len, double* acc) {
  for (std::size_t k = 0; k < len; ++k) acc[k] += row[idx[k]];
}

}  // namespace

const KernelTable& scalar_kernels() noexcept {
  static const KernelTable table{sqdist, sqdist_rows, exp_neg_scaled, exp_neg_scaled_sum,
                                 dot,    sum,         gather,         gather_add};
  return table;
}

}  // namespace gkt::simd
