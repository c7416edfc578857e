#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <unordered_map>
#include <utility>
#include <vector>

#include "dynmatch/agent.hpp"
#include "dynmatch/compatibility.hpp"
#include "dynmatch/config.hpp"
#include "dynmatch/departure.hpp"
#include "dynmatch/event_queue.hpp"
#include "dynmatch/numeric.hpp"
#include "dynmatch/pool.hpp"
#include "dynmatch/random.hpp"
#include "dynmatch/run_stats.hpp"

namespace dynmatch {

struct RunOptions {
  // Record every pair query and its draw; throw std::logic_error if a pair
  // is asked twice.
  bool audit = false;
};

/// Exact event-driven simulation of one market. Events are processed in
/// (time, seq) order; events after the horizon are never processed.
///
///   Simulator sim(config);
///   sim.advance_to(2.0);   // inspect sim.pool(), sim.agents()
///   RunStats stats = sim.finish();
class Simulator {
 public:
  explicit Simulator(const MarketConfig& config, RunOptions options = {})
      : Simulator(config, std::nullopt, options) {}

  /// Arrivals at the given (sorted, nonnegative) times instead of a Poisson
  /// stream; everything else is still drawn from the seeded streams.
  Simulator(const MarketConfig& config, std::span<const double> arrival_times,
            RunOptions options = {})
      : Simulator(config,
                  std::optional<std::vector<double>>(std::in_place, arrival_times.begin(),
                                                     arrival_times.end()),
                  options) {}

  double now() const noexcept { return clock_; }
  const MarketConfig& config() const noexcept { return config_; }
  const std::vector<Agent>& agents() const noexcept { return agents_; }
  const PoolState& pool() const noexcept { return pool_; }
  const std::vector<std::pair<AgentId, AgentId>>& matched_pairs() const noexcept {
    return pairs_;
  }
  /// Recorded compatibility draw of a pair (audit mode only).
  std::optional<bool> recorded_draw(AgentId a, AgentId b) const {
    const auto it = draws_.find(pair_key(a, b));
    if (it == draws_.end()) return std::nullopt;
    return it->second;
  }

  /// Processes every event with time <= t. t must not exceed the horizon.
  void advance_to(double t) {
    if (finished_) throw std::logic_error("simulation already finished");
    if (t > config_.T) throw RangeError("cannot advance past the horizon");
    while (!queue_.empty() && queue_.top().time <= t) {
      const SimEvent e = queue_.pop();
      if (e.kind == EventKind::Arrival)
        on_arrival(e.time);
      else
        on_critical(e.time, e.agent);
    }
    advance_clock(std::max(t, clock_));
  }

  RunStats finish() {
    advance_to(config_.T);
    finished_ = true;

    RunStats s;
    s.seed = config_.seed;
    s.m = config_.m;
    s.d = config_.d;
    s.T = config_.T;
    s.policy = config_.policy;
    s.departure_kind = std::string(config_.departure.kind());
    for (Agent& a : agents_) {
      if (a.in_pool()) a.outcome = InPoolAtHorizon{};
      if (a.arrival_time < config_.burn_in) continue;
      ++s.arrivals;
      if (std::holds_alternative<Matched>(a.outcome))
        ++s.matched;
      else if (std::holds_alternative<Perished>(a.outcome))
        ++s.perished;
      else
        ++s.pool_at_T;
    }
    s.exposure = config_.m * (config_.T - config_.burn_in);
    s.total_wait = wait_.value();
    s.finalize_ratios();
    s.pool_trajectory = std::move(trajectory_);
    return s;
  }

 private:
  Simulator(const MarketConfig& config, std::optional<std::vector<double>> scripted,
            RunOptions options)
      : config_((validate(config), config)),
        options_(options),
        arrivals_rng_(config.seed, StreamTag::kArrivals),
        sojourn_rng_(config.seed, StreamTag::kSojourns),
        tie_rng_(config.seed, StreamTag::kTieBreak),
        compat_(config.seed, config.compat_probability()),
        scripted_(std::move(scripted)) {
    if (scripted_) {
      for (std::size_t i = 0; i < scripted_->size(); ++i) {
        const double t = (*scripted_)[i];
        if (!(t >= 0.0) || (i > 0 && t < (*scripted_)[i - 1]))
          throw ConfigError("scripted arrival times must be sorted and nonnegative");
      }
    }
    agents_.reserve(static_cast<std::size_t>(config_.m * config_.T * 1.05) + 16);
    if (config_.pool_trace) trajectory_.push_back({0.0, 0});
    schedule_next_arrival(0.0);
  }

  void schedule_next_arrival(double after) {
    double t;
    if (scripted_) {
      if (next_scripted_ >= scripted_->size()) return;
      t = (*scripted_)[next_scripted_++];
    } else {
      t = after + sample_interarrival(config_.m, arrivals_rng_);
    }
    if (t <= config_.T) queue_.push_arrival(t);
  }

  // W accumulates only the part of [clock_, t] after the burn-in.
  void advance_clock(double t) {
    const double lo = std::max(clock_, config_.burn_in);
    if (t > lo) wait_ += static_cast<double>(pool_.size()) * (t - lo);
    clock_ = t;
  }

  void trace(double t) {
    if (config_.pool_trace) trajectory_.push_back({t, pool_.size()});
  }

  Agent& agent(AgentId id) { return agents_[id - 1]; }

  // Compatible pool slots for `querier` against the current pool.
  const std::vector<std::size_t>& compatible_slots(AgentId querier) {
    candidates_.clear();
    compat_.scan(pool_.size(), [this](std::size_t slot) { candidates_.push_back(slot); });
    if (options_.audit) audit_queries(querier);
    return candidates_;
  }

  void audit_queries(AgentId querier) {
    for (std::size_t slot = 0; slot < pool_.size(); ++slot) {
      const auto [it, fresh] = draws_.emplace(pair_key(querier, pool_[slot]), false);
      if (!fresh) throw std::logic_error("compatibility of a pair was queried twice");
    }
    for (std::size_t slot : candidates_) draws_[pair_key(querier, pool_[slot])] = true;
  }

  std::size_t choose_partner(const std::vector<std::size_t>& slots) {
    if (config_.policy == PolicyKind::GreedySojourn) {
      return *std::min_element(slots.begin(), slots.end(), [this](std::size_t x, std::size_t y) {
        const Agent& a = agents_[pool_[x] - 1];
        const Agent& b = agents_[pool_[y] - 1];
        if (a.critical_time != b.critical_time) return a.critical_time < b.critical_time;
        return a.id < b.id;
      });
    }
    return slots[slots.size() == 1 ? 0 : tie_rng_.index(slots.size())];
  }

  void match(Agent& a, Agent& b, double t) {
    a.outcome = Matched{b.id, t};
    b.outcome = Matched{a.id, t};
    pairs_.emplace_back(std::min(a.id, b.id), std::max(a.id, b.id));
  }

  void on_arrival(double t) {
    advance_clock(t);
    Agent fresh;
    fresh.id = agents_.size() + 1;
    fresh.arrival_time = t;
    fresh.max_sojourn = sample_sojourn(config_.departure, sojourn_rng_);
    fresh.critical_time = t + fresh.max_sojourn;
    agents_.push_back(fresh);
    Agent& a = agents_.back();

    bool pooled = true;
    if (config_.policy != PolicyKind::Patient) {
      const auto& slots = compatible_slots(a.id);
      if (!slots.empty()) {
        Agent& partner = agent(pool_[choose_partner(slots)]);
        pool_.remove(partner, agents_);
        match(a, partner, t);
        pooled = false;
      }
    }
    if (pooled) {
      pool_.insert(a);
      if (std::isfinite(a.critical_time)) queue_.push_critical(a.critical_time, a.id);
    }
    trace(t);
    schedule_next_arrival(t);
  }

  void on_critical(double t, AgentId id) {
    Agent& a = agent(id);
    if (!a.in_pool()) return;  // matched earlier
    advance_clock(t);
    pool_.remove(a, agents_);
    if (config_.policy == PolicyKind::Patient) {
      const auto& slots = compatible_slots(a.id);
      if (!slots.empty()) {
        Agent& partner = agent(pool_[choose_partner(slots)]);
        pool_.remove(partner, agents_);
        match(a, partner, t);
        trace(t);
        return;
      }
    }
    a.outcome = Perished{t};
    trace(t);
  }

  static std::uint64_t pair_key(AgentId a, AgentId b) noexcept {
    if (a > b) std::swap(a, b);
    return (a << 32) ^ b;
  }

  MarketConfig config_;
  RunOptions options_;
  RandomStream arrivals_rng_;
  RandomStream sojourn_rng_;
  RandomStream tie_rng_;
  PairCompatibilityOracle compat_;
  std::optional<std::vector<double>> scripted_;
  std::size_t next_scripted_ = 0;

  EventQueue queue_;
  PoolState pool_;
  std::vector<Agent> agents_;
  std::vector<std::size_t> candidates_;
  std::vector<std::pair<AgentId, AgentId>> pairs_;
  std::unordered_map<std::uint64_t, bool> draws_;
  std::vector<PoolPoint> trajectory_;
  CompensatedSum wait_;
  double clock_ = 0.0;
  bool finished_ = false;
};

inline RunStats run(const MarketConfig& config, RunOptions options = {}) {
  return Simulator(config, options).finish();
}

inline RunStats run(const MarketConfig& config, std::span<const double> arrival_times,
                    RunOptions options = {}) {
  return Simulator(config, arrival_times, options).finish();
}

/// Sum over agents of the time spent in the pool, capped at the horizon.
/// Independent of the pool-size integral the engine accumulates.
inline double per_agent_wait(const std::vector<Agent>& agents, double T) {
  CompensatedSum acc;
  for (const Agent& a : agents) acc += a.exit_time(T) - a.arrival_time;
  return acc.value();
}

}  // namespace dynmatch
