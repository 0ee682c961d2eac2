#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace radpair {

/// SplitMix64 finalizer.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Random stream used by the sampling code. Streams are derived from a
/// 64-bit root seed and a stream index, so trial i draws the same numbers
/// regardless of how trials are scheduled across threads.
class RandomStream {
public:
  using engine_type = std::mt19937_64;

  explicit RandomStream(std::uint64_t seed, std::uint64_t stream = 0)
      : engine_(splitmix64(splitmix64(seed) ^ splitmix64(~stream))) {}

  /// Uniform on the open interval (0, 1), 53-bit resolution.
  double uniform() noexcept {
    return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
  }

  /// Standard normal deviate (Box-Muller; the second value is cached).
  double normal() noexcept {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double r = std::sqrt(-2.0 * std::log(uniform()));
    const double theta = 2.0 * std::numbers::pi * uniform();
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
  }

  engine_type &engine() noexcept { return engine_; }

private:
  engine_type engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

} // namespace radpair
