#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace bucketmask {

// Seeded random stream with platform-independent draws.
//
// std::mt19937_64 has a fully specified output sequence, but the standard
// distributions do not, so every draw is derived from raw engine output here.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform on [0, 1) with 53 bits of resolution.
  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  // Uniform on {0, ..., n - 1}; n must be positive.
  std::uint64_t uniform_index(std::uint64_t n);

  // k distinct elements of `pool`, uniformly without replacement, in draw order.
  template <typename T>
  std::vector<T> sample(std::vector<T> pool, std::size_t k) {
    if (k > pool.size()) k = pool.size();
    for (std::size_t i = 0; i < k; ++i) {
      const auto j = i + uniform_index(pool.size() - i);
      std::swap(pool[i], pool[j]);
    }
    pool.resize(k);
    return pool;
  }

  template <typename T>
  void shuffle(std::vector<T>& items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      const auto j = uniform_index(i);
      std::swap(items[i - 1], items[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

// splitmix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Per-sequence stream seed. Each component is folded in separately, so adding
// sequences or epochs never changes the seed of an existing (epoch, ordinal).
constexpr std::uint64_t stream_seed(std::uint64_t master_seed, std::uint64_t epoch,
                                    std::uint64_t ordinal) noexcept {
  return mix64(mix64(mix64(master_seed) ^ epoch) ^ (ordinal + 0x632be59bd9b4e019ULL));
}

}  // namespace bucketmask
