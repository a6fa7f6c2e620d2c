#pragma once

#include <cstdint>

namespace srj {

/// SplitMix64 (Steele, Lea, Flood). Sequence-level reproducible everywhere.
///
/// next(): state += 0x9E3779B97F4A7C15; z = state;
///         z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9;
///         z = (z ^ (z >> 27)) * 0x94D049BB133111EB;
///         return z ^ (z >> 31);
/// uniform(): top 53 bits of next() scaled by 2^-53, in [0, 1).
class SplitMix64 {
 public:
  explicit constexpr SplitMix64(std::uint64_t seed) noexcept : state_(seed) {}

  constexpr std::uint64_t next() noexcept {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  constexpr double uniform() noexcept { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  /// Uniform integer in [0, bound) by modulo; callers use bounds of 2 or 3.
  constexpr std::uint64_t below(std::uint64_t bound) noexcept { return next() % bound; }

 private:
  std::uint64_t state_;
};

/// Independent stream seed for (seed, a, b), e.g. per (size, trial).
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0) noexcept {
  SplitMix64 g(seed ^ (a * 0xD1B54A32D192ED03ULL) ^ (b * 0x8CB92BA72F3D8DD7ULL));
  g.next();
  return g.next();
}

}  // namespace srj
