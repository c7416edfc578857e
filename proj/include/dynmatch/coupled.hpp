#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "dynmatch/compatibility.hpp"
#include "dynmatch/config.hpp"
#include "dynmatch/departure.hpp"
#include "dynmatch/event_queue.hpp"
#include "dynmatch/numeric.hpp"
#include "dynmatch/random.hpp"
#include "dynmatch/run_stats.hpp"

namespace dynmatch {

struct CoupledResult {
  RunStats with_departures;  // pool perishing according to config.departure
  RunStats never_perishing;  // same arrivals and compatibility, no perishing
  std::int64_t max_gap = 0;  // max over event times of z_t - z_t^inf
};

namespace detail {

// One side of the coupled pair. Members are kept in arrival order so that
// component j of an arriving agent's compatibility vector answers the query
// against the j-th oldest member.
class OrderedPool {
 public:
  OrderedPool(const MarketConfig& config, bool trace) : config_(config), trace_(trace) {
    if (trace_) trajectory_.push_back({0.0, 0});
  }

  std::size_t size() const noexcept { return members_.size(); }

  void advance(double t) {
    wait_ += static_cast<double>(members_.size()) * (t - clock_);
    clock_ = t;
  }

  // Greedy arrival. `hits` lists, in increasing order, the positions j whose
  // compatibility draw succeeded; positions at or past size() are ignored.
  // `u` is the shared uniform used to pick among compatible members.
  void arrive(AgentId id, const std::vector<std::size_t>& hits, double u, double t) {
    ++arrivals_;
    const auto usable = static_cast<std::size_t>(
        std::lower_bound(hits.begin(), hits.end(), members_.size()) - hits.begin());
    if (usable == 0) {
      members_.push_back(id);
    } else {
      const auto pick =
          std::min(usable - 1, static_cast<std::size_t>(u * static_cast<double>(usable)));
      members_.erase(members_.begin() + static_cast<std::ptrdiff_t>(hits[pick]));
      matched_ += 2;
    }
    record(t);
  }

  // Returns false if the agent already left by matching.
  bool perish(AgentId id, double t) {
    const auto it = std::lower_bound(members_.begin(), members_.end(), id);
    if (it == members_.end() || *it != id) return false;
    members_.erase(it);
    ++perished_;
    record(t);
    return true;
  }

  RunStats stats() const {
    RunStats s;
    s.seed = config_.seed;
    s.m = config_.m;
    s.d = config_.d;
    s.T = config_.T;
    s.policy = config_.policy;
    s.departure_kind = std::string(config_.departure.kind());
    s.arrivals = arrivals_;
    s.matched = matched_;
    s.perished = perished_;
    s.pool_at_T = members_.size();
    s.exposure = config_.m * config_.T;
    s.total_wait = wait_.value();
    s.finalize_ratios();
    s.pool_trajectory = trajectory_;
    return s;
  }

 private:
  void record(double t) {
    if (trace_) trajectory_.push_back({t, members_.size()});
  }

  const MarketConfig& config_;
  bool trace_;
  std::vector<AgentId> members_;
  std::vector<PoolPoint> trajectory_;
  CompensatedSum wait_;
  double clock_ = 0.0;
  std::uint64_t arrivals_ = 0, matched_ = 0, perished_ = 0;
};

}  // namespace detail

/// Greedy markets under config.departure and under never-perishing departures,
/// driven by one arrival stream and one compatibility vector per agent. The
/// construction guarantees z_t <= z_t^inf + 1 pathwise.
inline CoupledResult run_coupled(const MarketConfig& config) {
  validate(config);
  if (config.policy != PolicyKind::Greedy)
    throw ConfigError("coupled runs require the greedy policy");

  MarketConfig never_cfg = config;
  never_cfg.departure = DepartureSpec::never();

  RandomStream arrivals(config.seed, StreamTag::kArrivals);
  RandomStream sojourns(config.seed, StreamTag::kSojourns);
  PairCompatibilityOracle compat(config.seed, config.compat_probability());
  RandomStream ties(config.seed, StreamTag::kTieBreak);

  detail::OrderedPool first(config, config.pool_trace);
  detail::OrderedPool second(never_cfg, config.pool_trace);
  EventQueue queue;
  std::vector<std::size_t> hits;
  std::int64_t max_gap = 0;
  AgentId next_id = 1;

  const auto observe_gap = [&] {
    max_gap = std::max(max_gap, static_cast<std::int64_t>(first.size()) -
                                    static_cast<std::int64_t>(second.size()));
  };

  double next_arrival = sample_interarrival(config.m, arrivals);
  if (next_arrival <= config.T) queue.push_arrival(next_arrival);
  while (!queue.empty() && queue.top().time <= config.T) {
    const SimEvent e = queue.pop();
    first.advance(e.time);
    second.advance(e.time);
    if (e.kind == EventKind::Critical) {
      first.perish(e.agent, e.time);
      observe_gap();
      continue;
    }
    const AgentId id = next_id++;
    const double sojourn = sample_sojourn(config.departure, sojourns);
    const std::size_t k = std::max(first.size(), second.size());
    hits.clear();
    compat.scan(k, [&hits](std::size_t j) { hits.push_back(j); });
    const double u = ties.uniform();
    const std::size_t before = first.size();
    first.arrive(id, hits, u, e.time);
    if (first.size() > before && std::isfinite(e.time + sojourn))
      queue.push_critical(e.time + sojourn, id);
    second.arrive(id, hits, u, e.time);
    observe_gap();

    next_arrival = e.time + sample_interarrival(config.m, arrivals);
    if (next_arrival <= config.T) queue.push_arrival(next_arrival);
  }
  first.advance(config.T);
  second.advance(config.T);
  return {first.stats(), second.stats(), max_gap};
}

}  // namespace dynmatch
