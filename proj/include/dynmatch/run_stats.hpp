#pragma once

#include <algorithm>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "dynmatch/config.hpp"
#include "dynmatch/errors.hpp"
#include "dynmatch/numeric.hpp"

namespace dynmatch {

struct PoolPoint {
  double time;
  std::size_t size;
  friend bool operator==(const PoolPoint&, const PoolPoint&) = default;
};

/// Per-run counters. Invariants on every run:
///   arrivals == matched + perished + pool_at_T,  matched even,
///   loss == perished / exposure,  total_wait == integral of the pool size.
struct RunStats {
  // identifying fields, echoed into CSV rows
  std::uint64_t seed = 0;
  double m = 0.0;
  double d = 0.0;
  double T = 0.0;
  PolicyKind policy = PolicyKind::Greedy;
  std::string departure_kind;

  std::uint64_t arrivals = 0;
  std::uint64_t matched = 0;  // agents, i.e. twice the number of pairs
  std::uint64_t perished = 0;
  std::uint64_t pool_at_T = 0;
  double exposure = 0.0;      // m * (T - burn_in); the loss denominator
  double loss = 0.0;
  double total_wait = 0.0;    // W, agent-time units
  double avg_wait = 0.0;      // W / arrivals
  std::vector<PoolPoint> pool_trajectory;

  bool conserved() const noexcept { return arrivals == matched + perished + pool_at_T; }

  /// Associative merge for aggregation; identifying fields keep the left
  /// operand's values, trajectories are dropped.
  RunStats& merge(const RunStats& other) {
    arrivals += other.arrivals;
    matched += other.matched;
    perished += other.perished;
    pool_at_T += other.pool_at_T;
    exposure += other.exposure;
    total_wait += other.total_wait;
    finalize_ratios();
    pool_trajectory.clear();
    return *this;
  }

  void finalize_ratios() noexcept {
    loss = exposure > 0.0 ? static_cast<double>(perished) / exposure : 0.0;
    avg_wait = arrivals > 0 ? total_wait / static_cast<double>(arrivals) : 0.0;
  }
};

/// Exact integral over [0, T] of a piecewise-constant trajectory given by its
/// change points. The trajectory must start at (0, 0) with nondecreasing times.
inline double pool_integral(std::span<const PoolPoint> trajectory, double T) {
  if (trajectory.empty() || trajectory.front().time != 0.0 || trajectory.front().size != 0)
    throw FormatError("trajectory must start at (0, 0)");
  for (std::size_t i = 1; i < trajectory.size(); ++i)
    if (trajectory[i].time < trajectory[i - 1].time)
      throw FormatError("trajectory times are not sorted");
  CompensatedSum acc;
  for (std::size_t i = 0; i < trajectory.size(); ++i) {
    const double start = trajectory[i].time;
    if (start >= T) break;
    const double end = i + 1 < trajectory.size() ? std::min(trajectory[i + 1].time, T) : T;
    acc += static_cast<double>(trajectory[i].size) * (end - start);
  }
  return acc.value();
}

}  // namespace dynmatch
