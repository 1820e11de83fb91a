#pragma once

// Data-parallel inner loops. Every kernel has a scalar reference
// implementation and, on x86-64, an AVX2+FMA variant chosen at runtime.
// The two are equivalence-tested; results from one backend are deterministic.

#include <cstddef>
#include <cstdint>
#include <string_view>

namespace gkt::simd {

enum class Backend { scalar, avx2 };

std::string_view to_string(Backend backend) noexcept;

struct KernelTable {
  // sum_k (a[k] - b[k])^2
  double (*sqdist)(const double* a, const double* b, std::size_t len);
  // out[r] = sqdist(x, rows + r*d, d) for r < count
  void (*sqdist_rows)(const double* x, const double* rows, std::size_t count, std::size_t d,
                      double* out);
  // dst[k] = exp(-scale * src[k])
  void (*exp_neg_scaled)(const double* src, double* dst, std::size_t len, double scale);
  // sum_k exp(-scale * src[k])
  double (*exp_neg_scaled_sum)(const double* src, std::size_t len, double scale);
  double (*dot)(const double* a, const double* b, std::size_t len);
  double (*sum)(const double* a, std::size_t len);
  // out[k] = row[idx[k]]
  void (*gather)(const double* row, const std::uint32_t* idx, std::size_t len, double* out);
  // acc[k] += row[idx[k]]
  void (*gather_add)(const double* row, const std::uint32_t* idx, std::size_t len, double* acc);
};

const KernelTable& scalar_kernels() noexcept;
/// Null when the build or the CPU lacks AVX2/FMA.
const KernelTable* avx2_kernels() noexcept;

bool backend_available(Backend backend) noexcept;
Backend active_backend() noexcept;
/// Selects the process-wide backend. Throws if unavailable.
void set_backend(Backend backend);
const KernelTable& kernels() noexcept;

/// RAII override of the active backend, for tests and benchmarks.
class ScopedBackend {
 public:
  explicit ScopedBackend(Backend backend) : previous_(active_backend()) { set_backend(backend); }
  ~ScopedBackend() { set_backend(previous_); }
  ScopedBackend(const ScopedBackend&) = delete;
  ScopedBackend& operator=(const ScopedBackend&) = delete;

 private:
  Backend previous_;
};

}  // namespace gkt::simd
