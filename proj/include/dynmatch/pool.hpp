#pragma once

#include <cassert>
#include <cstddef>
#include <span>
#include <vector>

#include "dynmatch/agent.hpp"

namespace dynmatch {

/// Dense pool with O(1) insert, swap-remove and indexed access. Each agent
/// stores its own slot in Agent::pool_index.
class PoolState {
 public:
  std::size_t size() const noexcept { return members_.size(); }
  bool empty() const noexcept { return members_.empty(); }
  AgentId operator[](std::size_t slot) const { return members_[slot]; }
  std::span<const AgentId> members() const noexcept { return members_; }

  void insert(Agent& a) {
    assert(!a.in_pool());
    a.pool_index = members_.size();
    members_.push_back(a.id);
  }

  /// `agents` is indexed by id - 1.
  void remove(Agent& a, std::vector<Agent>& agents) {
    assert(a.in_pool());
    const std::size_t slot = a.pool_index;
    const AgentId last = members_.back();
    members_[slot] = last;
    agents[last - 1].pool_index = slot;
    members_.pop_back();
    a.pool_index = Agent::kNotPooled;
  }

 private:
  std::vector<AgentId> members_;
};

}  // namespace dynmatch
