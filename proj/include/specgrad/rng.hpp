#pragma once

#include <cmath>
#include <cstdint>

namespace specgrad {

// Counter-mode pseudo-random stream built on the splitmix64 finalizer.
// value(i) depends only on (seed, stream, i), so batch-parallel callers
// drawing disjoint index ranges reproduce the serial stream exactly.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed, std::uint64_t stream = 0)
      : base_(mix(seed + 0x9E3779B97F4A7C15ull * (stream + 1))) {}

  static std::uint64_t mix(std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ull;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  std::uint64_t bits(std::uint64_t index) const {
    return mix(base_ + index * 0x9E3779B97F4A7C15ull);
  }

  // Uniform in [0, 1), 53 significant bits.
  double uniform(std::uint64_t index) const {
    return static_cast<double>(bits(index) >> 11) * 0x1.0p-53;
  }

  // Standard normal via Box-Muller; one value per index, two raw words each.
  double gaussian(std::uint64_t index) const {
    const std::uint64_t w0 = bits(2 * index);
    const std::uint64_t w1 = bits(2 * index + 1);
    // u1 in (0, 1] so the log stays finite.
    const double u1 = static_cast<double>((w0 >> 11) + 1) * 0x1.0p-53;
    const double u2 = static_cast<double>(w1 >> 11) * 0x1.0p-53;
    constexpr double kTwoPi = 6.283185307179586476925286766559;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(kTwoPi * u2);
  }

 private:
  std::uint64_t base_;
};

}  // namespace specgrad
