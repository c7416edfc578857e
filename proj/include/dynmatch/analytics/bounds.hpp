#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <stdexcept>

#include "dynmatch/analytics/chain.hpp"
#include "dynmatch/errors.hpp"

namespace dynmatch::analytics {

inline const double kLog2 = std::log(2.0);

/// Pool-size thresholds C_i * log(2) * m / d used by the greedy pool bounds.
struct BoundConstants {
  double C1;
  double C2;
  double C3;
};

inline BoundConstants bound_constants(double m, double d) {
  if (!(m > 1.0)) throw DomainError("bound constants need m > 1");
  const double lm = std::log(m);
  const double C1 = 1.0 + 10.0 / (kLog2 * lm);
  const double inc = d * lm * lm / (m * kLog2);
  return {C1, C1 + 2.0 * inc, C1 + 4.0 * inc};
}

/// Greedy loss upper bound exp(-eps d / (2 log 2)) for departures with no
/// mass on [0, eps). The caller certifies the support condition.
inline double gdy_loss_upper(double d, double eps_min_sojourn) {
  if (!(d >= 2.0)) throw DomainError("greedy loss upper bound requires d >= 2");
  if (!(eps_min_sojourn > 0.0)) throw DomainError("minimum sojourn must be positive");
  return std::exp(-eps_min_sojourn * d / (2.0 * kLog2));
}

/// Greedy loss lower bound (delta / 2) exp(-eps d), valid whenever
/// mu([0, eps]) >= delta.
inline double gdy_loss_lower(double d, double eps, double delta) {
  return 0.5 * delta * std::exp(-eps * d);
}

/// Patient loss upper bound for unit sojourns.
inline double pat_loss_upper(double d) { return std::exp(-d / 5.0); }

/// Total-waiting-time bounds for the greedy market over [0, T]. The lower
/// bound needs mu([c, inf]) > 9/10 with c > 1/d and is absent otherwise.
struct WaitingBounds {
  std::optional<double> lower;
  double upper;
};

inline WaitingBounds waiting_bounds(double m, double T, double d, double c_min,
                                    double mass_at_least_c) {
  WaitingBounds b;
  b.upper = 6.0 * m * T / (5.0 * d);
  if (mass_at_least_c > 0.9 && c_min > 1.0 / d) b.lower = m * T / (8.0 * d);
  return b;
}

/// Mean stationary pool size bound 1.01 * ceil(log(3) m / d) + 11.
inline double mean_pool_bound(double m, double d) {
  return 1.01 * std::ceil(std::log(3.0) * m / d) + 11.0;
}

/// Equilibrium heuristics: pool sizes under both policies and their common
/// predicted loss.
struct HeuristicPredictions {
  double pool_gdy;
  double pool_pat;
  double loss_both;
};

inline HeuristicPredictions heuristic_predictions(double m, double d) {
  if (!(d >= 1.0)) throw DomainError("heuristic predictions require d >= 1");
  return {kLog2 * m / d, m / (2.0 * kLog2), 0.5 * std::exp(-d / (2.0 * kLog2))};
}

/// Chernoff bound exp(-mu delta^2 / 3) for either tail of a Poisson or
/// Bernoulli-sum variable with mean mu.
inline double chernoff_poisson(double mu, double delta) {
  if (!(mu > 0.0)) throw DomainError("chernoff bound needs a positive mean");
  if (!(delta > 0.0 && delta <= 1.0)) throw DomainError("chernoff bound needs 0 < delta <= 1");
  return std::exp(-mu * delta * delta / 3.0);
}

struct ExpEstimate {
  double value;  // (1 - c/m)^m
  double bound;  // exp(-c)
};

inline ExpEstimate exp_estimate(double c, double m) {
  if (!(c >= 0.0 && c < m)) throw DomainError("exp estimate needs 0 <= c < m");
  const ExpEstimate e{std::exp(m * std::log1p(-c / m)), std::exp(-c)};
  if (e.value > e.bound * (1.0 + 1e-15)) throw std::logic_error("(1 - c/m)^m exceeded exp(-c)");
  return e;
}

/// Tail behaviour of the no-perishing stationary law above the threshold
/// j0 = C1 log(2) m / d: every step ratio rho(j+1)/rho(j) for j >= j0 must be
/// at most exp(-10 / log m), and the mass above j0 + 1.5 log(m)^2 at most m^-9.
struct TailDecayCheck {
  double threshold = 0.0;            // j0
  double worst_log_ratio = -INFINITY;
  double allowed_log_ratio = 0.0;    // -10 / log m
  std::size_t checked_from = 0;
  std::size_t checked_to = 0;
  double log_mass_above = -INFINITY; // log P(z > j0 + 1.5 log(m)^2)
  double log_mass_limit = 0.0;       // -9 log m
  bool decay_passed = false;
  bool mass_passed = false;
  bool passed() const noexcept { return decay_passed && mass_passed; }
};

inline TailDecayCheck tail_decay_check(const StationaryDistribution& dist) {
  const ChainParams& c = dist.params;
  if (!(c.m > 1.0)) throw DomainError("tail decay check needs m > 1");
  const double lm = std::log(c.m);
  TailDecayCheck r;
  r.threshold = bound_constants(c.m, c.d).C1 * kLog2 * c.m / c.d;
  r.allowed_log_ratio = -10.0 / lm;
  r.log_mass_limit = -9.0 * lm;
  const double upper = r.threshold + 1.5 * lm * lm;
  r.checked_from = static_cast<std::size_t>(std::ceil(r.threshold));
  // Step ratios are nonincreasing in j, so the window below also covers
  // every larger j. Inside the computed support the ratio is read off the
  // stored log-probabilities; beyond it, from the transition probabilities.
  r.checked_to = std::max(static_cast<std::size_t>(std::ceil(upper)) + 1, dist.truncation_K);
  for (std::size_t j = r.checked_from; j < r.checked_to; ++j) {
    double log_ratio;
    if (j + 1 < dist.log_probs.size() && std::isfinite(dist.log_probs[j]))
      log_ratio = dist.log_probs[j + 1] - dist.log_probs[j];
    else
      log_ratio = log_p_up(j, c) - log_p_down(j + 1, c);
    r.worst_log_ratio = std::max(r.worst_log_ratio, log_ratio);
  }
  r.decay_passed = r.worst_log_ratio <= r.allowed_log_ratio;
  r.log_mass_above = analytics::log_mass_above(dist, upper);
  r.mass_passed = r.log_mass_above <= r.log_mass_limit;
  return r;
}

}  // namespace dynmatch::analytics
