#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <variant>

#include "dynmatch/config.hpp"
#include "dynmatch/errors.hpp"
#include "dynmatch/simulator.hpp"

namespace dynmatch {

/// Snapshot of the patient market at time t - 1/3, looking back over three
/// windows of length 1/3:
///   k1 arrivals in [t-4/3, t-1), k2 in [t-1, t-2/3), k3 in [t-2/3, t-1/3),
///   l  agents of those windows still pooled at t-1/3,
///   K1 agents of the first window still pooled at t-1/3.
struct K1Record {
  std::uint64_t k1 = 0;
  std::uint64_t k2 = 0;
  std::uint64_t k3 = 0;
  std::uint64_t l = 0;
  std::uint64_t K1 = 0;
  friend bool operator==(const K1Record&, const K1Record&) = default;
};

namespace detail {

inline void check_instrument_preconditions(const MarketConfig& config, double t) {
  validate(config);
  if (config.policy != PolicyKind::Patient)
    throw ConfigError("instrumentation requires the patient policy");
  const auto* c = std::get_if<ConstantSojourn>(&config.departure.value());
  if (c == nullptr || c->c != 1.0)
    throw ConfigError("instrumentation requires a constant unit sojourn");
  if (!(t >= 4.0 / 3.0) || !(t <= config.T - 1.0 / 3.0))
    throw RangeError("instrumentation time must satisfy 4/3 <= t <= T - 1/3");
}

inline K1Record snapshot_k1(Simulator& sim, double t) {
  const double w0 = t - 4.0 / 3.0, w1 = t - 1.0, w2 = t - 2.0 / 3.0, w3 = t - 1.0 / 3.0;
  sim.advance_to(w3);
  K1Record r;
  for (const Agent& a : sim.agents()) {
    const double at = a.arrival_time;
    if (at < w0 || at >= w3) continue;
    const bool pooled = a.in_pool();
    if (at < w1) {
      ++r.k1;
      if (pooled) ++r.K1;
    } else if (at < w2) {
      ++r.k2;
    } else {
      ++r.k3;
    }
    if (pooled) ++r.l;
  }
  return r;
}

}  // namespace detail

inline K1Record instrument_patient_k1(const MarketConfig& config, double t) {
  detail::check_instrument_preconditions(config, t);
  Simulator sim(config);
  return detail::snapshot_k1(sim, t);
}

/// Same, with scripted arrival times.
inline K1Record instrument_patient_k1(const MarketConfig& config, double t,
                                      std::span<const double> arrival_times) {
  detail::check_instrument_preconditions(config, t);
  Simulator sim(config, arrival_times);
  return detail::snapshot_k1(sim, t);
}

}  // namespace dynmatch
