#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "dynmatch/errors.hpp"
#include "dynmatch/numeric.hpp"

namespace dynmatch::analytics {

/// Pool-size chain of the greedy market without perishing. On each arrival
/// the pool grows with probability (1 - d/m)^k and shrinks otherwise.
struct ChainParams {
  double m;
  double d;

  double p() const noexcept { return d / m; }
};

inline void validate(const ChainParams& c) {
  if (!(c.m > 0.0) || !std::isfinite(c.m)) throw DomainError("m must be positive and finite");
  if (!(c.d > 0.0) || c.d > c.m) throw DomainError("require 0 < d <= m");
}

struct TransitionProbs {
  double up;
  double down;
};

inline double log_p_up(std::uint64_t k, const ChainParams& c) {
  if (k == 0) return 0.0;
  return static_cast<double>(k) * std::log1p(-c.p());
}

inline double log_p_down(std::uint64_t k, const ChainParams& c) {
  if (k == 0) return -INFINITY;
  return std::log(-std::expm1(static_cast<double>(k) * std::log1p(-c.p())));
}

inline TransitionProbs transition_prob(std::uint64_t k, const ChainParams& c) {
  validate(c);
  if (k == 0) return {1.0, 0.0};
  const double up = std::exp(log_p_up(k, c));
  return {up, -std::expm1(static_cast<double>(k) * std::log1p(-c.p()))};
}

/// Expected change of the pool size on one arrival at size k (negative
/// above the drift crossover).
inline double greedy_drift(std::uint64_t k, const ChainParams& c) {
  const auto t = transition_prob(k, c);
  return t.up - t.down;
}

/// Smallest pool size at which an arrival is more likely to match than to join.
inline std::uint64_t drift_crossover(const ChainParams& c) {
  validate(c);
  if (c.p() >= 1.0) return 1;
  return static_cast<std::uint64_t>(std::floor(std::log(0.5) / std::log1p(-c.p()))) + 1;
}

/// Stationary law truncated at truncation_K. tail_bound certifies the mass
/// above truncation_K; probs plus tail_bound sum to one.
struct StationaryDistribution {
  ChainParams params{};
  std::vector<double> probs;
  std::vector<double> log_probs;
  std::size_t truncation_K = 0;
  double tail_bound = 0.0;
  double log_tail_bound = -INFINITY;
  // rho(K+1)/rho(K); all later step ratios are no larger
  double tail_ratio = 0.0;
};

/// Detailed-balance recursion in log space. Truncation grows until the pool
/// size has passed the point where p_up < 1/3 (so every later ratio is at
/// most 1/2) and the geometric tail certificate falls below tail_tol.
inline StationaryDistribution stationary(const ChainParams& c, double tail_tol) {
  validate(c);
  if (!(tail_tol > 0.0 && tail_tol < 1.0)) throw DomainError("tail_tol must lie in (0, 1)");
  constexpr std::size_t kMaxStates = 100'000'000;
  const double log_third = std::log(1.0 / 3.0);
  const double log_tol = std::log(tail_tol);

  std::vector<double> log_rho{0.0};
  double log_z = 0.0;
  double log_tail = -INFINITY;
  double ratio = 0.0;
  for (std::uint64_t k = 0;; ++k) {
    const double log_up = log_p_up(k, c);
    const double log_step = log_up - log_p_down(k + 1, c);
    if (log_up < log_third) {
      ratio = std::exp(log_step);
      log_tail = ratio > 0.0 ? log_rho[k] + log_step - std::log1p(-ratio) : -INFINITY;
      if (log_tail - log_z < log_tol) break;
    }
    if (log_rho.size() >= kMaxStates) throw NumericError("stationary truncation exceeded the state cap");
    log_rho.push_back(log_rho[k] + log_step);
    log_z = log_add_exp(log_z, log_rho.back());
  }
  // log_z drifts by one rounding per state; renormalize with a shifted
  // compensated sum so probs + tail_bound sum to 1 within a few ulps
  const double log_max = *std::max_element(log_rho.begin(), log_rho.end());
  CompensatedSum scaled;
  for (double lr : log_rho) scaled += std::exp(lr - log_max);
  scaled += std::exp(log_tail - log_max);
  const double log_total = log_max + std::log(scaled.value());
  if (!std::isfinite(log_total)) throw NumericError("normalization failed in log space");

  StationaryDistribution dist;
  dist.params = c;
  dist.truncation_K = log_rho.size() - 1;
  dist.tail_ratio = ratio;
  dist.log_tail_bound = log_tail - log_total;
  dist.tail_bound = std::exp(dist.log_tail_bound);
  dist.log_probs.reserve(log_rho.size());
  dist.probs.reserve(log_rho.size());
  for (double lr : log_rho) {
    dist.log_probs.push_back(lr - log_total);
    dist.probs.push_back(std::exp(lr - log_total));
  }
  return dist;
}

/// Mean pool size, including an upper bound for the truncated tail.
inline double stationary_mean(const StationaryDistribution& dist) {
  CompensatedSum acc;
  for (std::size_t k = 1; k < dist.probs.size(); ++k)
    acc += static_cast<double>(k) * dist.probs[k];
  const double r = dist.tail_ratio;
  if (r > 0.0) {
    const double K = static_cast<double>(dist.truncation_K);
    acc += dist.probs.back() * (K * r / (1.0 - r) + r / ((1.0 - r) * (1.0 - r)));
  }
  return acc.value();
}

/// Smallest k with P(z <= k) >= q.
inline std::size_t stationary_quantile(const StationaryDistribution& dist, double q) {
  double acc = 0.0;
  for (std::size_t k = 0; k < dist.probs.size(); ++k) {
    acc += dist.probs[k];
    if (acc >= q) return k;
  }
  return dist.truncation_K;
}

/// log of an upper bound on P(z > x), computed in log space.
inline double log_mass_above(const StationaryDistribution& dist, double x) {
  double acc = dist.log_tail_bound;
  const double start = std::floor(x) + 1.0;
  for (std::size_t k = start <= 0.0 ? 0 : static_cast<std::size_t>(start);
       k < dist.log_probs.size(); ++k)
    acc = log_add_exp(acc, dist.log_probs[k]);
  return acc;
}

}  // namespace dynmatch::analytics
