#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "dynmatch/departure.hpp"
#include "dynmatch/errors.hpp"

namespace dynmatch {

enum class PolicyKind {
  Greedy,         // match on arrival, uniformly among compatible pool members
  Patient,        // match at criticality, uniformly among compatible pool members
  GreedySojourn,  // greedy, partner with least remaining sojourn (ties: lower id)
};

inline std::string_view to_string(PolicyKind p) noexcept {
  switch (p) {
    case PolicyKind::Greedy: return "greedy";
    case PolicyKind::Patient: return "patient";
    case PolicyKind::GreedySojourn: return "greedy-sojourn";
  }
  return "?";
}

inline PolicyKind parse_policy(std::string_view s) {
  if (s == "greedy" || s == "gdy") return PolicyKind::Greedy;
  if (s == "patient" || s == "pat") return PolicyKind::Patient;
  if (s == "greedy-sojourn" || s == "greedy_sojourn") return PolicyKind::GreedySojourn;
  throw ConfigError("unknown policy '" + std::string(s) + "'");
}

/// Full parameterization of one market run.
struct MarketConfig {
  double m = 1000.0;  // arrival rate
  double d = 5.0;     // density; compatibility probability is d / m
  double T = 100.0;   // horizon
  PolicyKind policy = PolicyKind::Greedy;
  DepartureSpec departure = DepartureSpec::constant(1.0);
  std::uint64_t seed = 1;
  bool pool_trace = false;
  // Statistics cover agents arriving in [burn_in, T]. Zero reproduces the
  // empty-start protocol and is what every acceptance run uses.
  double burn_in = 0.0;

  double compat_probability() const noexcept { return d / m; }
};

inline void validate(const MarketConfig& c) {
  if (!(c.m > 0.0) || !std::isfinite(c.m)) throw ConfigError("m must be positive and finite");
  if (!(c.T > 0.0) || !std::isfinite(c.T)) throw ConfigError("T must be positive and finite");
  if (!(c.d > 0.0)) throw ConfigError("d must be positive");
  if (c.d > c.m) throw ConfigError("d must not exceed m (compatibility probability d/m > 1)");
  if (!(c.burn_in >= 0.0) || !(c.burn_in < c.T)) throw ConfigError("burn_in must lie in [0, T)");
}

}  // namespace dynmatch
