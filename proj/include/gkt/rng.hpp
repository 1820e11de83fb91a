#pragma once

#include <cstdint>
#include <limits>
#include <vector>

namespace gkt {

/// SplitMix64 finalizer; a bijective 64-bit mixer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// Seed for sub-task `index` of a computation seeded with `seed`.
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) noexcept {
  return mix64(seed ^ mix64(index + 0x632BE59BD9B4E019ULL));
}

/// Counter-based generator: the k-th draw is a pure function of
/// (seed, replicate, stream, k), so replicates can be produced in any order
/// and on any worker. Satisfies UniformRandomBitGenerator.
class CounterRng {
 public:
  using result_type = std::uint64_t;

  explicit CounterRng(std::uint64_t seed, std::uint64_t replicate = 0, std::uint64_t stream = 0)
      : key_(mix64(mix64(seed) ^ mix64(replicate * 0xD1B54A32D192ED03ULL + stream))) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  result_type operator()() noexcept { return at(counter_++); }

  /// Draw number `k` without advancing the stream.
  result_type at(std::uint64_t k) const noexcept {
    return mix64(key_ + (k + 1) * 0x9E3779B97F4A7C15ULL);
  }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() noexcept { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

/// Uniformly random permutation of {0, ..., n-1}.
std::vector<std::uint32_t> random_permutation(std::size_t n, CounterRng& rng);

}  // namespace gkt
