#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <limits>
#include <random>

namespace dynmatch {

/// SplitMix64 finalizer. Bijective on 64-bit words; used to derive
/// independent sub-stream seeds from one master seed.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Seed mixing function used everywhere a seed is derived from another:
///   h0 = splitmix64(master), h_{i+1} = splitmix64(h_i ^ word_i).
/// Sweeps use mix_seed(master, {d_index, rep}); runs use
/// mix_seed(seed, {stream_tag}).
constexpr std::uint64_t mix_seed(std::uint64_t master,
                                 std::initializer_list<std::uint64_t> words) noexcept {
  std::uint64_t h = splitmix64(master);
  for (std::uint64_t w : words) h = splitmix64(h ^ w);
  return h;
}

/// Sub-streams owned by one run. Changing the policy never perturbs the
/// arrival or sojourn streams, so runs with equal seeds are coupled.
enum class StreamTag : std::uint64_t {
  kArrivals = 1,
  kSojourns = 2,
  kCompatibility = 3,
  kTieBreak = 4,
};

/// A seedable 64-bit random stream (std::mt19937_64 underneath).
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed) : engine_(seed) {}
  RandomStream(std::uint64_t master, StreamTag tag)
      : engine_(mix_seed(master, {static_cast<std::uint64_t>(tag)})) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  /// Uniform on (0, 1].
  double uniform_positive() { return 1.0 - uniform(); }

  /// Uniform integer in [0, n). n must be positive.
  std::size_t index(std::size_t n) {
    std::uniform_int_distribution<std::size_t> dist(0, n - 1);
    return dist(engine_);
  }

  bool bernoulli(double p) { return uniform() < p; }

  /// Number of failures before the first success of Bernoulli(p) trials.
  /// Saturates at max() when p == 0.
  std::uint64_t geometric_failures(double p) {
    if (p >= 1.0) return 0;
    if (p <= 0.0) return std::numeric_limits<std::uint64_t>::max();
    const double g = std::floor(std::log(uniform_positive()) / std::log1p(-p));
    if (!(g < 1.8e19)) return std::numeric_limits<std::uint64_t>::max();
    return static_cast<std::uint64_t>(g);
  }

 private:
  std::mt19937_64 engine_;
};

/// Inverse CDF of Exponential(rate) evaluated at u in [0, 1).
inline double exponential_from_uniform(double rate, double u) {
  return -std::log1p(-u) / rate;
}

/// Exponential(m) interarrival gap of a Poisson process with rate m.
inline double sample_interarrival(double m, RandomStream& rng) {
  return exponential_from_uniform(m, rng.uniform());
}

}  // namespace dynmatch
