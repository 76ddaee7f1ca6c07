#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace rpol {

// Named substreams. Every channel hashes independently, so adding a channel
// never perturbs the draws of the others.
enum class Stream : std::uint64_t {
  RewardNoise = 1,
  CostNoise = 2,
  RewardDelay = 3,
  CostDelay = 4,
  PolicyTiebreak = 5,
};

// Counter-based generator: each draw is a pure function of
// (seed, stream, counter, slot). No mutable state, platform-independent.
class CounterRng {
public:
  explicit CounterRng(std::uint64_t seed) : seed_(seed) {}

  std::uint64_t seed() const { return seed_; }

  std::uint64_t raw(Stream stream, std::uint64_t counter, std::uint64_t slot = 0) const {
    std::uint64_t h = mix(seed_ ^ (0x9E3779B97F4A7C15ull * static_cast<std::uint64_t>(stream)));
    h = mix(h ^ (0xBF58476D1CE4E5B9ull * (counter + 1)));
    h = mix(h ^ (0x94D049BB133111EBull * (slot + 1)));
    return h;
  }

  // Uniform on (0, 1), never returning either endpoint.
  double uniform(Stream stream, std::uint64_t counter, std::uint64_t slot = 0) const {
    return (static_cast<double>(raw(stream, counter, slot) >> 11) + 0.5) * 0x1.0p-53;
  }

  // Standard normal via Box-Muller; slots are consumed in pairs.
  double gaussian(Stream stream, std::uint64_t counter, std::uint64_t slot = 0) const {
    const double u1 = uniform(stream, counter, 2 * slot);
    const double u2 = uniform(stream, counter, 2 * slot + 1);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  // Poisson by CDF inversion from a single uniform draw.
  int poisson(Stream stream, std::uint64_t counter, double mean) const {
    const double u = uniform(stream, counter);
    double pmf = std::exp(-mean);
    double cdf = pmf;
    int k = 0;
    const int cap = static_cast<int>(10.0 * mean) + 100;
    while (u > cdf && k < cap) {
      ++k;
      pmf *= mean / k;
      cdf += pmf;
    }
    return k;
  }

private:
  // splitmix64 finalizer
  static std::uint64_t mix(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
  }

  std::uint64_t seed_;
};

}  // namespace rpol
