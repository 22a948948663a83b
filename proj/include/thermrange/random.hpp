#pragma once

// Counter-based random numbers: every draw is a pure function of
// (seed, stream, index), so results do not depend on evaluation order or on
// how work is split between threads.

#include <cmath>
#include <cstdint>
#include <numbers>

namespace thermrange {

namespace detail {

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace detail

class CounterRng {
 public:
  explicit constexpr CounterRng(std::uint64_t seed) noexcept : seed_(seed) {}

  constexpr std::uint64_t seed() const noexcept { return seed_; }

  constexpr std::uint64_t bits(std::uint64_t stream, std::uint64_t index, std::uint64_t lane = 0) const noexcept {
    std::uint64_t h = detail::splitmix64(seed_);
    h = detail::splitmix64(h ^ stream);
    h = detail::splitmix64(h ^ index);
    return detail::splitmix64(h ^ lane);
  }

  /// Uniform in the open interval (0, 1).
  double uniform(std::uint64_t stream, std::uint64_t index, std::uint64_t lane = 0) const noexcept {
    return (static_cast<double>(bits(stream, index, lane) >> 11) + 0.5) * 0x1.0p-53;
  }

  /// Standard normal via Box–Muller on two independent uniforms.
  double normal(std::uint64_t stream, std::uint64_t index) const noexcept {
    const double u1 = uniform(stream, index, 0);
    const double u2 = uniform(stream, index, 1);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

 private:
  std::uint64_t seed_;
};

}  // namespace thermrange
