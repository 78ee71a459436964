#ifndef HTSGD_RNG_HPP
#define HTSGD_RNG_HPP

#include <cmath>
#include <cstdint>

namespace htsgd {

// SplitMix64 output mixer (Steele, Lea & Flood; same finalizer as
// java.util.SplittableRandom).
inline std::uint64_t mix64(std::uint64_t z) {
  z ^= z >> 30;
  z *= 0xBF58476D1CE4E5B9ULL;
  z ^= z >> 27;
  z *= 0x94D049BB133111EBULL;
  z ^= z >> 31;
  return z;
}

// Counter-based SplitMix64 stream. One instance is owned by exactly one
// trajectory (or one verifier grid point); streams never migrate between
// threads mid-use, so runs are reproducible independent of scheduling.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  // Derives an independent stream from (base_seed, stream_index). Used for
  // per-trajectory seeding: identical (base, index) always yields the same
  // stream no matter how many worker threads execute it.
  static Rng for_stream(std::uint64_t base_seed, std::uint64_t stream_index) {
    const std::uint64_t kGamma = 0x9E3779B97F4A7C15ULL;
    return Rng(mix64(base_seed + kGamma * (stream_index + 1)));
  }

  std::uint64_t next_u64() {
    state_ += 0x9E3779B97F4A7C15ULL;
    return mix64(state_);
  }

  // Uniform draw strictly inside (0, 1); never returns an endpoint, so it is
  // safe under log() and inverse CDFs without rejection.
  double uniform_open01() {
    return static_cast<double>(next_u64() >> 11) * 0x1p-53 + 0x1p-54;
  }

  // Standard normal via Box-Muller; the antithetic partner is cached.
  double gaussian() {
    if (have_cached_) {
      have_cached_ = false;
      return cached_;
    }
    const double u1 = uniform_open01();
    const double u2 = uniform_open01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * M_PI * u2;
    cached_ = r * std::sin(angle);
    have_cached_ = true;
    return r * std::cos(angle);
  }

  // Exp(1).
  double exponential() { return -std::log(uniform_open01()); }

 private:
  std::uint64_t state_;
  bool have_cached_ = false;
  double cached_ = 0.0;
};

}  // namespace htsgd

#endif  // HTSGD_RNG_HPP
