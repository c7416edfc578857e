#pragma once

#include <cstddef>
#include <cstdint>

#include "dynmatch/random.hpp"

namespace dynmatch {

/// Lazily drawn pairwise compatibility: every query is an independent
/// Bernoulli(p). The engine asks each unordered pair at most once (under
/// greedy at the later arrival, under patient when the first of the two
/// turns critical), so drawing on demand has the same law as materializing
/// per-agent compatibility vectors up front.
class PairCompatibilityOracle {
 public:
  PairCompatibilityOracle(std::uint64_t seed, double p)
      : rng_(seed, StreamTag::kCompatibility), p_(p) {}

  double probability() const noexcept { return p_; }

  /// A single pair query.
  bool query() {
    ++queries_;
    return rng_.bernoulli(p_);
  }

  /// Queries positions 0..n-1 in order and calls on_compatible(j) for every
  /// position whose draw succeeded. Gaps between successes are geometric,
  /// which is the same joint law as n independent Bernoulli(p) draws; the
  /// cost is proportional to the number of successes, not n.
  template <class F>
  void scan(std::size_t n, F&& on_compatible) {
    queries_ += n;
    if (n == 0) return;
    if (p_ >= 1.0) {
      for (std::size_t j = 0; j < n; ++j) on_compatible(j);
      return;
    }
    std::size_t j = 0;
    while (true) {
      const std::uint64_t gap = rng_.geometric_failures(p_);
      if (gap >= n - j) return;
      j += static_cast<std::size_t>(gap);
      on_compatible(j);
      if (++j >= n) return;
    }
  }

  std::uint64_t queries() const noexcept { return queries_; }

 private:
  RandomStream rng_;
  double p_;
  std::uint64_t queries_ = 0;
};

}  // namespace dynmatch
