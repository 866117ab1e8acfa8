#pragma once

#include <cmath>
#include <cstdint>

namespace fepca {

/// Deterministic random stream with cheap substream derivation.
///
/// The generator is splitmix64, so a stream's output depends only on its
/// 64-bit state, never on the standard library's distribution
/// implementations — results are reproducible across platforms. Substreams
/// are derived by hashing (seed, tag...) together, which lets concurrent
/// tasks own independent streams whose output does not depend on the order
/// in which tasks run.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  /// Stream for task (t0, t1, t2) under `seed`. Distinct tag tuples give
  /// (with overwhelming probability) non-overlapping streams.
  static Rng substream(std::uint64_t seed, std::uint64_t t0, std::uint64_t t1 = 0,
                       std::uint64_t t2 = 0) {
    std::uint64_t h = mix(seed + 0x9e3779b97f4a7c15ull);
    h = mix(h ^ mix(t0 + 0xbf58476d1ce4e5b9ull));
    h = mix(h ^ mix(t1 + 0x94d049bb133111ebull));
    h = mix(h ^ mix(t2 + 0xd6e8feb86659fd93ull));
    return Rng(h);
  }

  std::uint64_t next_u64() {
    state_ += 0x9e3779b97f4a7c15ull;
    return mix(state_);
  }

  /// Uniform on (0, 1].
  double uniform() {
    return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
  }

  /// Standard Gaussian via Box-Muller (pair cached).
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
  }

 private:
  static std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  std::uint64_t state_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace fepca
