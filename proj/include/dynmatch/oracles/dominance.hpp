#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "dynmatch/errors.hpp"
#include "dynmatch/instrument.hpp"
#include "dynmatch/oracles/urn.hpp"

namespace dynmatch::oracles {

/// Comparison of the observed K1 exceedance curve with the average of the
/// matched hypergeometric curves. Under dominance the observed curve sits
/// below the reference one up to sampling noise.
struct DominanceReport {
  std::size_t records = 0;
  std::uint64_t max_threshold = 0;
  std::vector<double> empirical;   // index tau: fraction of records with K1 >= tau
  std::vector<double> reference;   // index tau: mean hypergeometric P(K~1 >= tau)
  std::vector<double> std_error;   // index tau: pooled standard error
  double worst_z = -INFINITY;      // max over tau of (empirical - reference) / SE
  std::uint64_t worst_threshold = 0;
  double mean_fraction = 0.0;      // mean of K1 / l over records with l > 0
  double empirical_majority = 0.0; // fraction of records with K1 >= ceil(l/2), l > 0
  double reference_majority = 0.0;
  double z_limit = 3.0;
  bool passed = true;
};

inline void validate_record(const K1Record& r) {
  if (r.l > r.k1 + r.k2 + r.k3) throw FormatError("record has l > k1 + k2 + k3");
  if (r.K1 > r.k1 || r.K1 > r.l) throw FormatError("record has K1 > min(k1, l)");
}

inline DominanceReport dominance_check(std::span<const K1Record> records, double z_limit = 3.0) {
  DominanceReport rep;
  rep.records = records.size();
  rep.z_limit = z_limit;
  for (const auto& r : records) {
    validate_record(r);
    rep.max_threshold = std::max(rep.max_threshold, r.l);
  }
  if (records.empty()) return rep;

  const std::size_t width = rep.max_threshold + 1;
  std::vector<double> variance(width, 0.0);
  rep.empirical.assign(width, 0.0);
  rep.reference.assign(width, 0.0);
  std::size_t with_draws = 0;
  for (const auto& r : records) {
    const UrnSpec urn{r.k1, r.k2 + r.k3, r.l};
    const auto pmf = urn_pmf(urn);
    // exceedance[tau] for tau in [0, l]; zero above l
    double tail = 0.0;
    std::vector<double> exceed(r.l + 1);
    for (std::size_t k = r.l + 1; k-- > 0;) {
      tail += pmf[k];
      exceed[k] = std::min(1.0, tail);
    }
    exceed[0] = 1.0;
    for (std::size_t tau = 0; tau <= r.l; ++tau) {
      rep.reference[tau] += exceed[tau];
      variance[tau] += exceed[tau] * (1.0 - exceed[tau]);
      if (r.K1 >= tau) rep.empirical[tau] += 1.0;
    }
    if (r.l > 0) {
      ++with_draws;
      rep.mean_fraction += static_cast<double>(r.K1) / static_cast<double>(r.l);
      const std::uint64_t half = (r.l + 1) / 2;
      if (r.K1 >= half) rep.empirical_majority += 1.0;
      rep.reference_majority += exceed[half];
    }
  }

  const double n = static_cast<double>(records.size());
  rep.std_error.assign(width, 0.0);
  for (std::size_t tau = 0; tau < width; ++tau) {
    rep.empirical[tau] /= n;
    rep.reference[tau] /= n;
    rep.std_error[tau] = std::sqrt(variance[tau]) / n;
    const double excess = rep.empirical[tau] - rep.reference[tau];
    double z;
    if (rep.std_error[tau] > 0.0)
      z = excess / rep.std_error[tau];
    else
      z = excess > 1e-12 ? INFINITY : 0.0;
    if (z > rep.worst_z) {
      rep.worst_z = z;
      rep.worst_threshold = tau;
    }
  }
  if (with_draws > 0) {
    rep.mean_fraction /= static_cast<double>(with_draws);
    rep.empirical_majority /= static_cast<double>(with_draws);
    rep.reference_majority /= static_cast<double>(with_draws);
  }
  rep.passed = !(rep.worst_z > z_limit);
  return rep;
}

}  // namespace dynmatch::oracles
