#pragma once

#include <cmath>
#include <cstdint>

#include "dynmatch/errors.hpp"
#include "dynmatch/random.hpp"

namespace dynmatch::oracles {

/// Nearest-neighbour walk on the integers that steps up with probability
/// p_up and down otherwise, absorbed at M - 1 and at N.
struct WalkSpec {
  double p_up;
  std::int64_t M;
  std::int64_t N;
  std::int64_t start;
};

inline void validate(const WalkSpec& w) {
  if (!(w.p_up > 0.0)) throw DomainError("p_up must be positive");
  if (!(w.p_up <= 1.0)) throw DomainError("p_up must not exceed 1");
  if (!(w.M < w.N)) throw DomainError("walk requires M < N");
  if (w.start < w.M || w.start > w.N) throw DomainError("start must lie in [M, N]");
}

struct RuinResult {
  double exact;             // P(hit N before M - 1)
  double bound;             // (2 p_up)^(N - M)
  bool bound_applicable;    // start == M and p_up <= 1/2
  bool holds;               // exact <= bound, or not applicable
};

/// Closed-form hitting probability from the harmonic function
/// f(k) = (r^k - 1) / (r^b - 1), r = p_down / p_up, with levels shifted so
/// that M - 1 sits at 0. expm1 keeps the near-symmetric case accurate.
inline RuinResult ruin_hit_probability(const WalkSpec& w) {
  validate(w);
  const double a = static_cast<double>(w.start - w.M + 1);
  const double b = static_cast<double>(w.N - w.M + 1);
  double exact;
  if (w.p_up == 1.0) {
    exact = 1.0;
  } else {
    const double log_r = std::log1p(-w.p_up) - std::log(w.p_up);
    exact = log_r == 0.0 ? a / b : std::expm1(a * log_r) / std::expm1(b * log_r);
  }
  RuinResult r;
  r.exact = exact;
  r.bound = std::pow(2.0 * w.p_up, static_cast<double>(w.N - w.M));
  r.bound_applicable = w.start == w.M && w.p_up <= 0.5;
  r.holds = !r.bound_applicable || r.exact <= r.bound * (1.0 + 1e-12);
  return r;
}

struct MonteCarloEstimate {
  double mean;
  double std_error;
  std::uint64_t trials;
};

/// Direct simulation of the walk, one trajectory per trial.
inline MonteCarloEstimate ruin_monte_carlo(const WalkSpec& w, std::uint64_t trials,
                                           RandomStream& rng) {
  validate(w);
  if (trials == 0) throw DomainError("need at least one trial");
  std::uint64_t hits = 0;
  for (std::uint64_t i = 0; i < trials; ++i) {
    std::int64_t x = w.start;
    while (x >= w.M && x < w.N) x += rng.bernoulli(w.p_up) ? 1 : -1;
    if (x == w.N) ++hits;
  }
  const double n = static_cast<double>(trials);
  const double mean = static_cast<double>(hits) / n;
  return {mean, std::sqrt(mean * (1.0 - mean) / n), trials};
}

}  // namespace dynmatch::oracles
