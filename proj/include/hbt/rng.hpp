#pragma once
#include <cmath>
#include <cstdint>

#include "hbt/errors.hpp"

// Counter-based splitmix64 stream. Every stochastic stage of the pipeline
// draws from its own stream derived from (master seed, shot id, stage tag),
// so results are independent of execution order and worker count. The exact
// derivation is part of the file-format contract and is spelled out in the
// README so other implementations can reproduce event lists bit for bit.

namespace hbt::rng {

constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ull;

inline std::uint64_t splitmix_finalize(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

/// One avalanche round combining two words; used to derive sub-stream seeds.
inline std::uint64_t mix(std::uint64_t a, std::uint64_t b) {
  return splitmix_finalize(a + kGamma * (b + 1));
}

/// Stage tags keep the per-shot streams of different pipeline stages apart.
enum class Stage : std::uint64_t {
  Ensemble = 1, // emitter positions and amplitudes
  Phases = 2,   // emitter phase resampling
  Events = 3,   // Poisson / DPP event draws and cell jitter
  Detector = 4, // efficiency thinning
  Mixing = 5,   // cross-shot pair subsampling
};

class Stream {
public:
  explicit Stream(std::uint64_t seed) : state_(seed) {}

  static Stream for_shot(std::uint64_t master, std::uint64_t shot_id, Stage stage) {
    return Stream(mix(mix(master, shot_id), static_cast<std::uint64_t>(stage)));
  }

  std::uint64_t next_u64() {
    state_ += kGamma;
    return splitmix_finalize(state_);
  }

  /// Uniform double in [0, 1), 53-bit resolution.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Index in [0, n), n <= 2^53.
  std::size_t index(std::size_t n) {
    return static_cast<std::size_t>(uniform() * static_cast<double>(n));
  }

  bool bernoulli(double p) { return uniform() < p; }

  /// Standard normal via Box-Muller; the sine partner is cached.
  double gaussian() {
    if (have_cached_) {
      have_cached_ = false;
      return cached_;
    }
    const double u1 = 1.0 - uniform(); // (0, 1], keeps the log finite
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * M_PI * u2;
    cached_ = r * std::sin(a);
    have_cached_ = true;
    return r * std::cos(a);
  }

  /// Poisson sample. Knuth's product method for small means; larger means
  /// are split in halves (the sum of independent Poissons is Poisson), which
  /// keeps the sampler exact at any lambda.
  long long poisson(double lambda) {
    if (lambda < 0.0) throw DomainError("poisson: negative mean");
    if (lambda == 0.0) return 0;
    long long total = 0;
    while (lambda > 30.0) {
      total += poisson_knuth(30.0);
      lambda -= 30.0;
    }
    return total + poisson_knuth(lambda);
  }

private:
  long long poisson_knuth(double lambda) {
    const double limit = std::exp(-lambda);
    long long n = -1;
    double prod = 1.0;
    do {
      prod *= uniform();
      ++n;
    } while (prod > limit);
    return n;
  }

  std::uint64_t state_;
  double cached_ = 0.0;
  bool have_cached_ = false;
};

} // namespace hbt::rng
