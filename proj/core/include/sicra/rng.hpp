#pragma once

#include <cmath>
#include <cstdint>
#include <utility>

namespace sicra {

// SplitMix64 stream. Chosen over <random> engines because simulation runs
// need cheap per-(slot, node) substreams that stay identical no matter how
// runs are scheduled across worker threads.
class Rng {
public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    state_ += 0x9E3779B97F4A7C15ull;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  // uniform in [0, 1)
  double next_double() { return (next_u64() >> 11) * 0x1.0p-53; }

  // uniform in (0, 1]; safe as a log() argument
  double next_open() { return ((next_u64() >> 11) + 1) * 0x1.0p-53; }

  bool bernoulli(double p) { return next_double() < p; }

  // Box-Muller pair of independent standard normals
  std::pair<double, double> next_normal_pair() {
    double u1 = next_open();
    double u2 = next_double();
    double r = std::sqrt(-2.0 * std::log(u1));
    double t = 6.28318530717958647692 * u2;
    return {r * std::cos(t), r * std::sin(t)};
  }

private:
  std::uint64_t state_;
};

// finalizer with full avalanche (bijective on 64-bit words)
inline std::uint64_t mix64(std::uint64_t z) {
  z ^= z >> 33;
  z *= 0xFF51AFD7ED558CCDull;
  z ^= z >> 33;
  z *= 0xC4CEB9FE1A85EC53ull;
  z ^= z >> 33;
  return z;
}

// Independent stream key for coordinates (a, b) under a base seed,
// e.g. a = slot index, b = node id.
inline std::uint64_t stream_key(std::uint64_t seed, std::uint64_t a = 0,
                                std::uint64_t b = 0) {
  return mix64(mix64(mix64(seed ^ 0x2545F4914F6CDD1Dull) ^ a) ^ b);
}

}  // namespace sicra
