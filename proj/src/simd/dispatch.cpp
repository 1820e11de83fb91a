#include <atomic>

#include "gkt/error.hpp"
#include "gkt/simd.hpp"

namespace gkt::simd {

const KernelTable* avx2_kernels_impl() noexcept;

namespace {

bool cpu_has_avx2_fma() noexcept {
#if (defined(__GNUC__) || defined(__clang__)) && (defined(__x86_64__) || defined(__i386__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

Backend best_backend() noexcept {
  return avx2_kernels() != nullptr ? Backend::avx2 : Backend::scalar;
}

std::atomic<const KernelTable*>& active_table() noexcept {
  static std::atomic<const KernelTable*> table{
      best_backend() == Backend::avx2 ? avx2_kernels() : &scalar_kernels()};
  return table;
}

}  // namespace

std::string_view to_string(Backend backend) noexcept {
  return backend == Backend::avx2 ? "avx2" : "scalar";
}

const KernelTable* avx2_kernels() noexcept {
  static const KernelTable* table = cpu_has_avx2_fma() ? avx2_kernels_impl() : nullptr;
  return table;
}

bool backend_available(Backend backend) noexcept {
  return backend == Backend::scalar || avx2_kernels() != nullptr;
}

Backend active_backend() noexcept {
  return active_table().load(std::memory_order_acquire) == &scalar_kernels() ? Backend::scalar
                                                                             : Backend::avx2;
}

void set_backend(Backend backend) {
  require(backend_available(backend), ErrorKind::invalid_parameter,
          "requested SIMD backend is not available on this machine");
  active_table().store(backend == Backend::avx2 ? avx2_kernels() : &scalar_kernels(),
                       std::memory_order_release);
}

const KernelTable& kernels() noexcept { return *active_table().load(std::memory_order_acquire); }

}  // namespace gkt::simd
