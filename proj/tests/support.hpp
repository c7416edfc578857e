#pragma once

// Shared helpers for the test suite: summary statistics, a two-sided
// Kolmogorov-Smirnov check and small hand-rolled generators.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <vector>

#include "dynmatch/config.hpp"
#include "dynmatch/departure.hpp"
#include "dynmatch/random.hpp"

namespace testsupport {

struct Moments {
  double mean = 0.0;
  double var = 0.0;   // sample variance (n - 1)
  double se = 0.0;    // standard error of the mean
  std::size_t n = 0;
};

inline Moments moments(const std::vector<double>& v) {
  Moments m;
  m.n = v.size();
  if (v.empty()) return m;
  m.mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  if (v.size() > 1) {
    double ss = 0.0;
    for (double x : v) ss += (x - m.mean) * (x - m.mean);
    m.var = ss / static_cast<double>(v.size() - 1);
    m.se = std::sqrt(m.var / static_cast<double>(v.size()));
  }
  return m;
}

/// sup |F_n - F| over the sample, evaluated on both sides of every sample
/// point so that atoms (point masses, +inf) are handled. For laws with atoms
/// the continuous critical values are conservative.
inline double ks_statistic(std::vector<double> sample, const std::function<double(double)>& cdf) {
  std::sort(sample.begin(), sample.end());
  const double n = static_cast<double>(sample.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sample.size();) {
    std::size_t j = i;
    while (j < sample.size() && sample[j] == sample[i]) ++j;
    const double x = sample[i];
    const double below = cdf(std::nextafter(x, -INFINITY));
    d = std::max({d, std::abs(static_cast<double>(i) / n - below),
                  std::abs(static_cast<double>(j) / n - cdf(x))});
    i = j;
  }
  return d;
}

/// Asymptotic 0.1% critical value of the one-sample KS statistic.
inline double ks_critical_001(std::size_t n) { return 1.949 / std::sqrt(static_cast<double>(n)); }

/// Exact Poisson(mu) CDF by summing the mass function in log space.
inline double poisson_cdf(double mu, std::uint64_t k) {
  double acc = 0.0;
  for (std::uint64_t j = 0; j <= k; ++j)
    acc += std::exp(static_cast<double>(j) * std::log(mu) - mu - std::lgamma(static_cast<double>(j) + 1.0));
  return acc;
}

// Hand-rolled generators for property tests.

inline dynmatch::DepartureSpec random_departure(dynmatch::RandomStream& g, int depth = 0) {
  switch (g.index(depth == 0 ? 5 : 4)) {
    case 0: return dynmatch::DepartureSpec::constant(0.1 + 2.0 * g.uniform());
    case 1: return dynmatch::DepartureSpec::exponential(0.3 + 3.0 * g.uniform());
    case 2: {
      const double a = g.uniform();
      return dynmatch::DepartureSpec::uniform(a, a + 0.1 + g.uniform());
    }
    case 3: return dynmatch::DepartureSpec::never();
    default: {
      std::vector<dynmatch::MixtureComponent> comps;
      const std::size_t k = 1 + g.index(3);
      for (std::size_t i = 0; i < k; ++i)
        comps.push_back({0.1 + g.uniform(), random_departure(g, depth + 1)});
      return dynmatch::DepartureSpec::mixture(std::move(comps));
    }
  }
}

inline dynmatch::PolicyKind random_policy(dynmatch::RandomStream& g) {
  static constexpr dynmatch::PolicyKind kAll[] = {dynmatch::PolicyKind::Greedy,
                                                  dynmatch::PolicyKind::Patient,
                                                  dynmatch::PolicyKind::GreedySojourn};
  return kAll[g.index(3)];
}

/// Small markets that run in milliseconds: m in [5, 200), d in (0.2, min(m, 12)).
inline dynmatch::MarketConfig random_config(dynmatch::RandomStream& g) {
  dynmatch::MarketConfig c;
  c.m = 5.0 + std::floor(195.0 * g.uniform());
  c.d = 0.2 + (std::min(c.m, 12.0) - 0.2) * g.uniform();
  c.T = 1.0 + 9.0 * g.uniform();
  c.policy = random_policy(g);
  c.departure = random_departure(g);
  c.seed = g.next_u64();
  return c;
}

}  // namespace testsupport
