#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <vector>

namespace octnet {

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::uint64_t rotl64(std::uint64_t x, int k) {
  return (x << k) | (x >> (64 - k));
}

}  // namespace detail

/// Self-contained xoshiro256++ generator. The standard library distributions
/// are implementation-defined, so all sampling is done here to keep runs
/// reproducible from a seed alone.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) {
    std::uint64_t sm = seed;
    for (auto& word : state_) word = detail::splitmix64(sm);
  }

  std::uint64_t next_u64() {
    const std::uint64_t result =
        detail::rotl64(state_[0] + state_[3], 23) + state_[0];
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = detail::rotl64(state_[3], 45);
    return result;
  }

  /// Uniform double in [0, 1), 53 bits of randomness.
  double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Uniform double in (0, 1], usable as a log() argument.
  double uniform01_open_low() { return 1.0 - uniform01(); }

  /// Unbiased uniform integer in [0, n). n must be > 0.
  std::uint64_t uniform_below(std::uint64_t n) {
    const std::uint64_t threshold = (0 - n) % n;
    for (;;) {
      const std::uint64_t r = next_u64();
      if (r >= threshold) return r % n;
    }
  }

  /// Uniform integer in [lo, hi] inclusive.
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
    return lo + static_cast<std::int64_t>(
                    uniform_below(static_cast<std::uint64_t>(hi - lo) + 1));
  }

  double uniform_range(double lo, double hi) {
    return lo + uniform01() * (hi - lo);
  }

  /// Box-Muller draw; consumes exactly two uniforms.
  double normal(double mean, double stddev) {
    const double u1 = uniform01_open_low();
    const double u2 = uniform01();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    return mean + stddev * radius * std::cos(2.0 * std::numbers::pi * u2);
  }

  /// Inverse-CDF draw; consumes exactly one uniform.
  double laplace(double mean, double scale) {
    const double u = uniform01() - 0.5;
    const double mag = std::abs(u);
    const double sign = u < 0.0 ? -1.0 : 1.0;
    return mean - scale * sign * std::log(1.0 - 2.0 * mag);
  }

  template <typename T>
  void shuffle(std::vector<T>& values) {
    for (std::size_t i = values.size(); i > 1; --i) {
      const std::size_t j = static_cast<std::size_t>(uniform_below(i));
      std::swap(values[i - 1], values[j]);
    }
  }

 private:
  std::array<std::uint64_t, 4> state_{};
};

/// Stable derived seed for independent substreams (per map, per model, ...).
inline std::uint64_t derive_seed(std::uint64_t root, std::uint64_t stream) {
  std::uint64_t sm = root ^ (0x632be59bd9b4e019ULL + stream * 0x9e3779b97f4a7c15ULL);
  return detail::splitmix64(sm);
}

}  // namespace octnet
