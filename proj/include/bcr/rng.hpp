#pragma once

// Counter-based random streams. Every draw is a pure function of
// (seed, stream, index), so results do not depend on call order or on the
// standard library's distribution implementations.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <utility>

namespace bcr {

constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

class CounterRng {
public:
  constexpr CounterRng(std::uint64_t seed, std::uint64_t stream = 0)
      : key_(splitmix64(seed ^ splitmix64(stream + 0x632BE59BD9B4E019ull))) {}

  constexpr std::uint64_t bits(std::uint64_t index) const {
    return splitmix64(key_ + splitmix64(index));
  }

  /// Uniform in [0, 1) with 53 random bits.
  constexpr double uniform(std::uint64_t index) const {
    return static_cast<double>(bits(index) >> 11) * 0x1.0p-53;
  }

  /// Uniform in (0, 1].
  constexpr double uniform_open0(std::uint64_t index) const {
    return static_cast<double>((bits(index) >> 11) + 1) * 0x1.0p-53;
  }

  /// Box-Muller pair built from draws 2k and 2k+1.
  std::pair<double, double> normal_pair(std::uint64_t k) const {
    const double u1 = uniform_open0(2 * k);
    const double u2 = uniform(2 * k + 1);
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double phi = 2.0 * std::numbers::pi * u2;
    return {r * std::cos(phi), r * std::sin(phi)};
  }

  /// i-th standard normal of the stream.
  double normal(std::uint64_t i) const {
    auto [a, b] = normal_pair(i / 2);
    return (i % 2 == 0) ? a : b;
  }

private:
  std::uint64_t key_;
};

} // namespace bcr
