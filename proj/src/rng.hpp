#pragma once

#include <cstdint>

namespace vardiss {

// Counter-based generator: draw k of stream `seed` is
//   mix(seed + (k + 1) * 0x9E3779B97F4A7C15)
// with the SplitMix64 finalizer. Any implementation reproduces the same
// sample points from (seed, k) alone.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed) : seed_(seed) {}

  static std::uint64_t mix(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  std::uint64_t at(std::uint64_t counter) const noexcept {
    return mix(seed_ + (counter + 1) * 0x9E3779B97F4A7C15ULL);
  }

  std::uint64_t next() noexcept { return at(counter_++); }

  /// Uniform in [0, 1) with 53 random bits.
  double uniform() noexcept { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t counter() const noexcept { return counter_; }

 private:
  std::uint64_t seed_;
  std::uint64_t counter_ = 0;
};

inline constexpr std::uint64_t kDefaultSeed = 20240611;

}  // namespace vardiss
