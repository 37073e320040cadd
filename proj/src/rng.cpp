#include "bucketmask/rng.hpp"

#include "bucketmask/error.hpp"

namespace bucketmask {

std::uint64_t Rng::uniform_index(std::uint64_t n) {
  require(n > 0, "uniform_index: empty range");
  // Rejection on the low residue class keeps the draw exactly uniform.
  const std::uint64_t threshold = (0 - n) % n;
  for (;;) {
    const std::uint64_t x = engine_();
    if (x >= threshold) return x % n;
  }
}

}  // namespace bucketmask
