#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace zonedet {

/// Deterministic splitmix64 generator with cheap substream derivation.
///
/// A single 64-bit seed expands into independent substreams keyed by an
/// integer id, so Monte-Carlo kernels can hand one substream to each
/// (position, trial) pair and produce output that does not depend on how the
/// work was partitioned across threads. Distributions are sampled with fixed
/// inverse-transform / Box-Muller recipes rather than <random> distributions,
/// which keeps byte-level reproducibility out of libstdc++'s hands.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  /// Substream `stream` of the generator seeded with `seed`.
  static Rng substream(std::uint64_t seed, std::uint64_t stream) {
    return Rng(mix64(mix64(seed + 0x9E3779B97F4A7C15ull) + stream));
  }

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + uniform() * (hi - lo); }

  /// Standard normal draw (Box-Muller, cosine branch; two uniforms per draw).
  double normal() {
    const double u1 = 1.0 - uniform();  // (0, 1], keeps log() finite
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  double normal(double mean, double stddev) { return mean + stddev * normal(); }

  /// Exponential draw with the given rate, by inverse transform.
  double exponential(double rate) { return -std::log1p(-uniform()) / rate; }

 private:
  static std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  std::uint64_t state_;
};

}  // namespace zonedet
