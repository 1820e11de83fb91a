#include "gkt/rng.hpp"

#include <algorithm>
#include <numeric>

namespace gkt {

std::vector<std::uint32_t> random_permutation(std::size_t n, CounterRng& rng) {
  std::vector<std::uint32_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0U);
  std::shuffle(perm.begin(), perm.end(), rng);
  return perm;
}

}  // namespace gkt
