#pragma once

#include <cmath>
#include <utility>

#include "json.hpp"

#include "dynmatch/analytics/bounds.hpp"
#include "dynmatch/analytics/chain.hpp"

namespace dynmatch::analytics {

/// Everything the analytic layer says about a market (m, d) over horizon T.
/// Entries whose preconditions fail are null.
inline nlohmann::json analyze_report(double m, double d, double T, double tail_tol = 1e-300) {
  using nlohmann::json;
  const ChainParams params{m, d};
  validate(params);
  const auto dist = stationary(params, tail_tol);

  json quantiles = json::object();
  const std::pair<const char*, double> levels[] = {
      {"q05", 0.05}, {"q25", 0.25}, {"median", 0.5}, {"q75", 0.75}, {"q95", 0.95}};
  for (const auto& [name, q] : levels) quantiles[name] = stationary_quantile(dist, q);

  json report;
  report["m"] = m;
  report["d"] = d;
  report["T"] = T;
  report["stationary"] = {{"truncation_K", dist.truncation_K},
                          {"tail_bound", dist.tail_bound},
                          {"mean", stationary_mean(dist)},
                          {"quantiles", quantiles},
                          {"drift_crossover", drift_crossover(params)}};

  if (m > 1.0) {
    const auto k = bound_constants(m, d);
    report["constants"] = {{"C1", k.C1}, {"C2", k.C2}, {"C3", k.C3}};
    const auto tc = tail_decay_check(dist);
    report["stationary"]["log_mass_above_C1_threshold"] = log_mass_above(dist, tc.threshold);
    report["tail_decay"] = {{"threshold", tc.threshold},
                            {"worst_log_ratio", tc.worst_log_ratio},
                            {"allowed_log_ratio", tc.allowed_log_ratio},
                            {"log_mass_above", tc.log_mass_above},
                            {"log_mass_limit", tc.log_mass_limit},
                            {"status", tc.passed() ? "pass" : "fail"}};
    report["mean_pool_bound"] = mean_pool_bound(m, d);
  } else {
    report["constants"] = nullptr;
    report["tail_decay"] = nullptr;
    report["mean_pool_bound"] = nullptr;
  }

  json bounds;
  bounds["gdy_loss_upper"] = d >= 2.0 ? json(gdy_loss_upper(d, 1.0)) : json(nullptr);
  bounds["gdy_loss_lower"] = gdy_loss_lower(d, 1.0, 1.0);
  bounds["pat_loss_upper"] = pat_loss_upper(d);
  // unit sojourns: all mass at 1 > 1/d once d > 1
  const auto w = waiting_bounds(m, T, d, 1.0, 1.0);
  bounds["waiting_total"] = {{"lower", w.lower ? json(*w.lower) : json(nullptr)},
                             {"upper", w.upper}};
  bounds["waiting_per_agent"] = {
      {"lower", w.lower ? json(*w.lower / (m * T)) : json(nullptr)},
      {"upper", w.upper / (m * T)}};
  report["bounds"] = bounds;

  if (d >= 1.0) {
    const auto h = heuristic_predictions(m, d);
    report["heuristics"] = {{"pool_gdy", h.pool_gdy}, {"pool_pat", h.pool_pat},
                            {"loss_both", h.loss_both}};
  } else {
    report["heuristics"] = nullptr;
  }
  return report;
}

}  // namespace dynmatch::analytics
