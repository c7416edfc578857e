#pragma once

#include <cstdint>
#include <functional>
#include <queue>
#include <vector>

#include "dynmatch/agent.hpp"

namespace dynmatch {

enum class EventKind : std::uint8_t { Arrival, Critical };

struct SimEvent {
  double time;
  std::uint64_t seq;  // creation counter; breaks ties in time
  EventKind kind;
  AgentId agent;      // meaningful for Critical only

  friend bool operator<(const SimEvent& a, const SimEvent& b) noexcept {
    if (a.time != b.time) return a.time < b.time;
    return a.seq < b.seq;
  }
};

/// Min-queue over (time, seq). +infinity times are never pushed.
class EventQueue {
 public:
  void push_arrival(double time) { push(time, EventKind::Arrival, 0); }
  void push_critical(double time, AgentId id) { push(time, EventKind::Critical, id); }

  bool empty() const noexcept { return heap_.empty(); }
  std::size_t size() const noexcept { return heap_.size(); }
  const SimEvent& top() const { return heap_.top(); }
  SimEvent pop() {
    SimEvent e = heap_.top();
    heap_.pop();
    return e;
  }
  std::uint64_t created() const noexcept { return next_seq_; }

 private:
  void push(double time, EventKind kind, AgentId id) {
    heap_.push(SimEvent{time, next_seq_++, kind, id});
  }

  struct Later {
    bool operator()(const SimEvent& a, const SimEvent& b) const noexcept { return b < a; }
  };
  std::priority_queue<SimEvent, std::vector<SimEvent>, Later> heap_;
  std::uint64_t next_seq_ = 0;
};

}  // namespace dynmatch
