#pragma once

// Deterministic random number generation. Hand-rolled distributions so that
// output streams are bit-stable across platforms and standard libraries.

#include <cmath>
#include <cstdint>

namespace varscore {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

// Replicate r of a run keyed by master_seed gets its own stream.
inline std::uint64_t derive_seed(std::uint64_t master_seed, std::uint64_t replicate) {
  return master_seed ^ splitmix64(replicate);
}

// xoshiro-style generator seeded through splitmix64.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) {
    std::uint64_t s = seed;
    for (auto& w : state_) {
      s = splitmix64(s);
      w = s;
    }
  }

  std::uint64_t next_u64() {
    const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  // uniform on [0, 1)
  double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double a, double b) { return a + (b - a) * uniform01(); }

  double gaussian() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = uniform01();
    while (u1 <= 0.0) u1 = uniform01();
    const double u2 = uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
  }

  double rademacher() { return (next_u64() & 1ULL) ? 1.0 : -1.0; }

  // uniform integer in [0, n)
  std::uint64_t below(std::uint64_t n) {
    // rejection sampling keeps the draw exactly uniform
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x = next_u64();
    while (x >= limit) x = next_u64();
    return x % n;
  }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
  std::uint64_t state_[4];
  bool has_spare_ = false;
  double spare_ = 0.0;
};

enum class NoiseKind { gaussian, uniform, rademacher };

struct NoiseSpec {
  NoiseKind kind = NoiseKind::gaussian;
  // gaussian: scale = sigma; uniform: draws on (-scale, scale); rademacher: +-scale
  double scale = 1.0;

  double variance() const {
    switch (kind) {
      case NoiseKind::gaussian: return scale * scale;
      case NoiseKind::uniform: return scale * scale / 3.0;
      case NoiseKind::rademacher: return scale * scale;
    }
    return scale * scale;
  }

  double draw(Rng& rng) const {
    switch (kind) {
      case NoiseKind::gaussian: return scale * rng.gaussian();
      case NoiseKind::uniform: return rng.uniform(-scale, scale);
      case NoiseKind::rademacher: return scale * rng.rademacher();
    }
    return 0.0;
  }
};

}  // namespace varscore
