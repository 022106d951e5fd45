#pragma once

#include <cmath>
#include <cstdint>

#include "deconv/numeric.hpp"

namespace deconv {

inline constexpr std::uint64_t kRngGamma = 0x9E3779B97F4A7C15ULL;

// splitmix64 finaliser, the workhorse behind keying and drawing.
inline std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// Derives a stream id from up to four small labels (sample size, noise-size
// tag, replicate index, role). Streams built from distinct labels never
// collide in practice, which makes every replicate reproducible in isolation
// regardless of scheduling.
inline std::uint64_t stream_of(std::uint64_t a, std::uint64_t b = 0,
                               std::uint64_t c = 0, std::uint64_t d = 0) {
  std::uint64_t h = mix64(a + 0x632BE59BD9B4E019ULL);
  h = mix64(h ^ (b + 0x9E3779B97F4A7C15ULL));
  h = mix64(h ^ (c + 0xC2B2AE3D27D4EB4FULL));
  h = mix64(h ^ (d + 0x165667B19E3779F9ULL));
  return h;
}

// Counter-based generator: draw k of stream s under seed is a pure function
// of (seed, s, k). No state is shared between streams, so parallel replicas
// produce identical numbers no matter how work is scheduled.
class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::uint64_t stream)
      : key_(mix64(mix64(seed) + stream * kRngGamma)) {}

  std::uint64_t next_u64() { return mix64(key_ + (++counter_) * kRngGamma); }

  // Strictly inside (0, 1).
  double uniform01() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double r = std::sqrt(-2.0 * std::log(uniform01()));
    const double a = kTwoPi * uniform01();
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

  double expo() { return -std::log(uniform01()); }

  double cauchy_std() { return std::tan(kPi * (uniform01() - 0.5)); }

  // Marsaglia-Tsang squeeze; shapes below one go through the boost step.
  double gamma(double shape) {
    if (!(shape > 0.0)) throw NumericError("gamma: shape must be positive");
    if (shape < 1.0)
      return gamma(shape + 1.0) * std::pow(uniform01(), 1.0 / shape);
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
      double x, v;
      do {
        x = normal();
        v = 1.0 + c * x;
      } while (v <= 0.0);
      v = v * v * v;
      const double u = uniform01();
      if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
      if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
    }
  }

  double chi2(double k) { return 2.0 * gamma(0.5 * k); }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace deconv
