#pragma once

#include <cstdint>
#include <limits>
#include <variant>

namespace dynmatch {

using AgentId = std::uint64_t;  // 1-based arrival index

struct Unresolved {};
struct Matched {
  AgentId partner;
  double time;
};
struct Perished {
  double time;
};
struct InPoolAtHorizon {};

using Outcome = std::variant<Unresolved, Matched, Perished, InPoolAtHorizon>;

struct Agent {
  static constexpr std::size_t kNotPooled = std::numeric_limits<std::size_t>::max();

  AgentId id = 0;
  double arrival_time = 0.0;
  double max_sojourn = 0.0;
  double critical_time = 0.0;  // arrival_time + max_sojourn, +inf if never critical
  Outcome outcome = Unresolved{};
  std::size_t pool_index = kNotPooled;

  bool unresolved() const noexcept { return std::holds_alternative<Unresolved>(outcome); }
  bool in_pool() const noexcept { return pool_index != kNotPooled; }

  /// Time the agent left the pool, capped at the horizon.
  double exit_time(double horizon) const noexcept {
    if (const auto* m = std::get_if<Matched>(&outcome)) return m->time;
    if (const auto* p = std::get_if<Perished>(&outcome)) return p->time;
    return horizon;
  }
};

}  // namespace dynmatch
