#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "dynmatch/errors.hpp"
#include "dynmatch/numeric.hpp"
#include "dynmatch/random.hpp"

namespace dynmatch::oracles {

/// Urn with `red` red and `blue` blue balls; `draws` balls are taken without
/// replacement and the number of red ones is counted.
struct UrnSpec {
  std::uint64_t red;
  std::uint64_t blue;
  std::uint64_t draws;

  std::uint64_t total() const noexcept { return red + blue; }
};

inline void validate(const UrnSpec& u) {
  if (u.draws > u.total()) throw DomainError("cannot draw more balls than the urn holds");
}

inline double log_binomial(std::uint64_t n, std::uint64_t k) {
  const double nn = static_cast<double>(n), kk = static_cast<double>(k);
  return std::lgamma(nn + 1.0) - std::lgamma(kk + 1.0) - std::lgamma(nn - kk + 1.0);
}

/// Full hypergeometric law of the red count; index k holds P(red = k).
inline std::vector<double> urn_pmf(const UrnSpec& u) {
  validate(u);
  std::vector<double> pmf(u.draws + 1, 0.0);
  const std::uint64_t lo = u.draws > u.blue ? u.draws - u.blue : 0;
  const std::uint64_t hi = std::min(u.red, u.draws);
  const double log_den = log_binomial(u.total(), u.draws);
  for (std::uint64_t k = lo; k <= hi; ++k)
    pmf[k] = std::exp(log_binomial(u.red, k) + log_binomial(u.blue, u.draws - k) - log_den);
  return pmf;
}

/// P(red count >= threshold), summed from the upper end.
inline double urn_exceedance(const UrnSpec& u, std::uint64_t threshold) {
  validate(u);
  if (threshold > u.draws) throw DomainError("threshold exceeds the number of draws");
  if (threshold == 0) return 1.0;
  const auto pmf = urn_pmf(u);
  CompensatedSum acc;
  for (std::uint64_t k = u.draws + 1; k-- > threshold;) acc += pmf[k];
  return std::min(1.0, acc.value());
}

/// Majority-red probability P(red >= ceil(l/2)) against the two bounds used
/// for it: (N + 1)(2 sqrt(0.24))^l and the coarser 2m * 0.98^(m/8).
struct UrnBoundCheck {
  double exact;
  double tight_bound;
  double coarse_bound;
  bool preconditions;  // red/N <= 2/5, l >= m/8, N + 1 <= 2m
  bool holds;          // both bounds hold, or preconditions fail
};

inline UrnBoundCheck urn_bound_check(const UrnSpec& u, double m) {
  validate(u);
  if (!(m > 0.0)) throw DomainError("m must be positive");
  UrnBoundCheck r;
  const std::uint64_t l = u.draws;
  r.exact = urn_exceedance(u, (l + 1) / 2);
  const double N = static_cast<double>(u.total());
  r.tight_bound = (N + 1.0) * std::pow(2.0 * std::sqrt(0.24), static_cast<double>(l));
  r.coarse_bound = 2.0 * m * std::pow(0.98, m / 8.0);
  r.preconditions = u.total() > 0 && 5 * u.red <= 2 * u.total() &&
                    static_cast<double>(l) >= m / 8.0 && N + 1.0 <= 2.0 * m;
  const double slack = 1.0 + 1e-12;
  r.holds = !r.preconditions ||
            (r.exact <= r.tight_bound * slack && r.exact <= r.coarse_bound * slack);
  return r;
}

/// One draw by sequential sampling without replacement.
inline std::uint64_t urn_sample(const UrnSpec& u, RandomStream& rng) {
  validate(u);
  std::uint64_t red = u.red, left = u.total(), got = 0;
  for (std::uint64_t i = 0; i < u.draws; ++i, --left) {
    if (rng.index(left) < red) {
      ++got;
      --red;
    }
  }
  return got;
}

}  // namespace dynmatch::oracles
