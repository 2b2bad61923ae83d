#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace dlet {

/// SplitMix64 finalizer (Steele, Lea & Flood, 2014).
constexpr std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Seed of an independent stream identified by (seed, a, b).
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0) {
  return splitmix64(splitmix64(splitmix64(seed) ^ (a * 0xd1b54a32d192ed03ULL)) ^
                    (b * 0x8cb92ba72f3d8dd7ULL));
}

/// Reproducible normal stream: SplitMix64 state increments feeding
/// Box-Muller. Every draw depends only on the stream seed and its position,
/// so results do not depend on how streams are spread across threads.
class NormalStream {
 public:
  explicit NormalStream(std::uint64_t stream_seed) : state_(stream_seed) {}

  /// Uniform in (0, 1) with 53 random bits.
  double uniform() {
    state_ += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    z ^= z >> 31;
    return (static_cast<double>(z >> 11) + 0.5) * 0x1.0p-53;
  }

  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double r = std::sqrt(-2.0 * std::log(uniform()));
    const double angle = 2.0 * std::numbers::pi * uniform();
    spare_ = r * std::sin(angle);
    has_spare_ = true;
    return r * std::cos(angle);
  }

 private:
  std::uint64_t state_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace dlet
