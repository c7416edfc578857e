#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "dynmatch/config.hpp"
#include "dynmatch/coupled.hpp"
#include "dynmatch/errors.hpp"
#include "dynmatch/instrument.hpp"
#include "dynmatch/io.hpp"
#include "dynmatch/oracles/dominance.hpp"
#include "dynmatch/oracles/ruin.hpp"
#include "dynmatch/oracles/urn.hpp"
#include "dynmatch/random.hpp"
#include "dynmatch/simulator.hpp"

namespace dynmatch::verify {

using nlohmann::json;

struct VerifyOptions {
  std::optional<std::uint64_t> runs;  // overrides each check's default run count
  std::uint64_t seed = 1;
  std::uint64_t ruin_trials = 1'000'000;
};

struct CheckResult {
  std::string name;
  bool passed = false;
  json details;
};

namespace detail {

inline std::uint64_t runs_or(const VerifyOptions& o, std::uint64_t fallback) {
  return o.runs.value_or(fallback);
}

inline std::uint64_t check_seed(const VerifyOptions& o, std::uint64_t check, std::uint64_t i) {
  return mix_seed(o.seed, {check, i});
}

inline std::vector<DepartureSpec> coupling_departures() {
  return {DepartureSpec::constant(1.0), DepartureSpec::exponential(1.0),
          DepartureSpec::uniform(0.5, 1.5)};
}

}  // namespace detail

/// Coupled greedy runs: z_t <= z_t^inf + 1 in every run, and a never-perishing
/// first pool reproduces the second exactly.
inline CheckResult check_coupling(const VerifyOptions& o) {
  const std::uint64_t runs = detail::runs_or(o, 200);
  const auto mus = detail::coupling_departures();
  std::int64_t worst = 0;
  std::uint64_t violations = 0;
  for (std::uint64_t i = 0; i < runs; ++i) {
    MarketConfig c;
    c.m = 200;
    c.d = 4;
    c.T = 20;
    c.departure = mus[i % mus.size()];
    c.seed = detail::check_seed(o, 1, i);
    const auto r = run_coupled(c);
    worst = std::max(worst, r.max_gap);
    if (r.max_gap > 1) ++violations;
  }
  MarketConfig same;
  same.m = 200;
  same.d = 4;
  same.T = 20;
  same.departure = DepartureSpec::never();
  same.seed = detail::check_seed(o, 1, runs);
  const auto twin = run_coupled(same);
  const bool twin_ok = twin.max_gap == 0 &&
                       twin.with_departures.total_wait == twin.never_perishing.total_wait;
  return {"coupling", violations == 0 && twin_ok,
          {{"runs", runs}, {"max_gap", worst}, {"violations", violations},
           {"never_vs_never_identical", twin_ok}}};
}

/// Closed-form ruin probabilities against simulation and the geometric bound.
inline CheckResult check_ruin(const VerifyOptions& o) {
  const std::vector<oracles::WalkSpec> specs = {
      {0.4, 1, 3, 1}, {0.5, 1, 3, 1}, {0.45, 2, 8, 2}, {0.3, 1, 6, 3}};
  RandomStream rng(detail::check_seed(o, 2, 0));
  bool ok = true;
  json rows = json::array();
  for (const auto& w : specs) {
    const auto exact = oracles::ruin_hit_probability(w);
    const auto mc = oracles::ruin_monte_carlo(w, o.ruin_trials, rng);
    const double z = mc.std_error > 0.0 ? std::abs(mc.mean - exact.exact) / mc.std_error : 0.0;
    const bool row_ok = z <= 3.0 && exact.holds;
    ok = ok && row_ok;
    rows.push_back({{"p_up", w.p_up}, {"M", w.M}, {"N", w.N}, {"start", w.start},
                    {"exact", exact.exact}, {"bound", exact.bound},
                    {"bound_applicable", exact.bound_applicable}, {"monte_carlo", mc.mean},
                    {"std_error", mc.std_error}, {"z", z}, {"passed", row_ok}});
  }
  return {"ruin", ok, {{"trials", o.ruin_trials}, {"walks", rows}}};
}

/// Points (m, urn) on which the majority-red bound preconditions hold.
inline std::vector<std::pair<double, oracles::UrnSpec>> urn_bound_grid() {
  std::vector<std::pair<double, oracles::UrnSpec>> grid;
  for (std::uint64_t m : {100u, 200u, 400u, 800u, 1000u, 2000u, 4000u, 8000u, 10000u, 20000u}) {
    const std::uint64_t l0 = (m + 7) / 8;
    const auto urn = [](std::uint64_t N, double frac, std::uint64_t l) {
      const auto red = static_cast<std::uint64_t>(std::floor(frac * static_cast<double>(N)));
      return oracles::UrnSpec{red, N - red, l};
    };
    grid.emplace_back(m, urn(m, 0.4, l0));
    grid.emplace_back(m, urn(2 * m - 1, 0.4, l0));
    grid.emplace_back(m, urn(2 * m - 1, 0.4, m - 1));
    grid.emplace_back(m, urn(m, 0.25, m));
    grid.emplace_back(m, urn(2 * m - 1, 0.1, l0 | 1));
  }
  return grid;
}

inline CheckResult check_urn(const VerifyOptions& o) {
  double worst_sum_error = 0.0;
  for (std::uint64_t N : {1u, 4u, 10u, 57u, 300u, 1000u})
    for (std::uint64_t red = 0; red <= N; red += std::max<std::uint64_t>(1, N / 7))
      for (std::uint64_t l = 0; l <= N; l += std::max<std::uint64_t>(1, N / 5)) {
        const auto pmf = oracles::urn_pmf({red, N - red, l});
        CompensatedSum acc;
        for (double p : pmf) acc += p;
        worst_sum_error = std::max(worst_sum_error, std::abs(acc.value() - 1.0));
      }

  std::size_t applicable = 0, held = 0;
  double worst_ratio = 0.0;
  for (const auto& [m, urn] : urn_bound_grid()) {
    const auto b = oracles::urn_bound_check(urn, m);
    if (!b.preconditions) continue;
    ++applicable;
    if (b.holds) ++held;
    worst_ratio = std::max(worst_ratio, b.exact / std::min(b.tight_bound, b.coarse_bound));
  }

  const oracles::UrnSpec sample_urn{40, 60, 50};
  RandomStream rng(detail::check_seed(o, 3, 0));
  const std::uint64_t samples = detail::runs_or(o, 100'000);
  std::uint64_t over = 0;
  CompensatedSum total;
  for (std::uint64_t i = 0; i < samples; ++i) {
    const auto k = oracles::urn_sample(sample_urn, rng);
    total += static_cast<double>(k);
    if (k >= 25) ++over;
  }
  const double n = static_cast<double>(samples);
  const double exact_over = oracles::urn_exceedance(sample_urn, 25);
  const double emp_over = static_cast<double>(over) / n;
  const double se = std::sqrt(exact_over * (1.0 - exact_over) / n);
  const double z = se > 0.0 ? std::abs(emp_over - exact_over) / se : 0.0;

  const bool ok = worst_sum_error <= 1e-12 && applicable == 50 && held == applicable && z <= 3.0;
  return {"urn", ok,
          {{"max_pmf_sum_error", worst_sum_error}, {"bound_grid_points", applicable},
           {"bound_held", held}, {"max_exact_over_bound", worst_ratio},
           {"sample_mean", total.value() / n}, {"sample_exceedance", emp_over},
           {"exact_exceedance", exact_over}, {"z", z}}};
}

/// Records from instrumented patient markets at m = 300, d = 5.
inline std::vector<K1Record> collect_k1_records(std::uint64_t runs, std::uint64_t seed) {
  std::vector<K1Record> out;
  out.reserve(runs);
  for (std::uint64_t i = 0; i < runs; ++i) {
    MarketConfig c;
    c.m = 300;
    c.d = 5;
    c.T = 4;
    c.policy = PolicyKind::Patient;
    c.departure = DepartureSpec::constant(1.0);
    c.seed = mix_seed(seed, {4, i});
    out.push_back(instrument_patient_k1(c, c.T - 1.0 / 3.0));
  }
  return out;
}

inline CheckResult check_dominance(const VerifyOptions& o) {
  const auto records = collect_k1_records(detail::runs_or(o, 500), o.seed);
  const auto rep = oracles::dominance_check(records);
  // mean of K1 / l against the 2/5 share of first-window arrivals
  std::vector<double> frac;
  for (const auto& r : records)
    if (r.l > 0) frac.push_back(static_cast<double>(r.K1) / static_cast<double>(r.l));
  double mean = 0.0, var = 0.0;
  for (double f : frac) mean += f;
  if (!frac.empty()) mean /= static_cast<double>(frac.size());
  for (double f : frac) var += (f - mean) * (f - mean);
  const double se =
      frac.size() > 1 ? std::sqrt(var / static_cast<double>(frac.size() - 1) /
                                  static_cast<double>(frac.size()))
                      : 0.0;
  const bool share_ok = mean <= 0.4 + 3.0 * se;
  return {"dominance", rep.passed && share_ok,
          {{"records", rep.records}, {"worst_z", rep.worst_z},
           {"worst_threshold", rep.worst_threshold}, {"z_limit", rep.z_limit},
           {"mean_K1_over_l", mean}, {"mean_K1_over_l_se", se},
           {"empirical_majority", rep.empirical_majority},
           {"reference_majority", rep.reference_majority}}};
}

/// Identity checks over policies x departures.
inline std::vector<MarketConfig> identity_matrix(const VerifyOptions& o) {
  const std::vector<DepartureSpec> mus = {
      DepartureSpec::constant(1.0), DepartureSpec::exponential(1.0),
      DepartureSpec::uniform(0.5, 1.5), DepartureSpec::never(),
      DepartureSpec::mixture({{0.5, DepartureSpec::constant(0.2)},
                              {0.5, DepartureSpec::exponential(0.5)}})};
  const std::uint64_t reps = detail::runs_or(o, 4);
  std::vector<MarketConfig> out;
  std::uint64_t i = 0;
  for (auto pol : {PolicyKind::Greedy, PolicyKind::Patient, PolicyKind::GreedySojourn})
    for (const auto& mu : mus)
      for (std::uint64_t r = 0; r < reps; ++r) {
        MarketConfig c;
        c.m = 200;
        c.d = 4;
        c.T = 20;
        c.policy = pol;
        c.departure = mu;
        c.pool_trace = true;
        c.seed = detail::check_seed(o, 5, i++);
        out.push_back(c);
      }
  return out;
}

inline CheckResult check_w_identity(const VerifyOptions& o) {
  double worst_agent = 0.0, worst_traj = 0.0;
  std::size_t runs = 0;
  for (const auto& c : identity_matrix(o)) {
    Simulator sim(c);
    const RunStats s = sim.finish();
    worst_agent = std::max(worst_agent, std::abs(s.total_wait - per_agent_wait(sim.agents(), c.T)));
    worst_traj = std::max(worst_traj, std::abs(s.total_wait - pool_integral(s.pool_trajectory, c.T)));
    ++runs;
  }
  return {"w-identity", worst_agent <= 1e-9 && worst_traj <= 1e-9,
          {{"runs", runs}, {"max_abs_error_per_agent", worst_agent},
           {"max_abs_error_trajectory", worst_traj}, {"tolerance", 1e-9}}};
}

inline CheckResult check_conservation(const VerifyOptions& o) {
  std::size_t runs = 0, broken = 0;
  for (const auto& c : identity_matrix(o)) {
    const RunStats s = run(c);
    const bool ok = s.conserved() && s.matched % 2 == 0 &&
                    (c.departure.kind() != "never" || s.perished == 0) &&
                    s.loss == static_cast<double>(s.perished) / (c.m * c.T);
    if (!ok) ++broken;
    ++runs;
  }
  return {"conservation", broken == 0, {{"runs", runs}, {"violations", broken}}};
}

/// Rescaling time by c maps (Exp(c), d, m, T) onto (Exp(1), d/c, m/c, cT)
/// with the same compatibility probability and the same mT, so the two
/// loss statistics share one law.
inline CheckResult check_time_change(const VerifyOptions& o) {
  const std::uint64_t runs = detail::runs_or(o, 200);
  bool ok = true;
  json rows = json::array();
  std::uint64_t tag = 0;
  for (double c : {2.0, 0.5}) {
    MarketConfig a;
    a.m = 400;
    a.d = 8;
    a.T = 10;
    a.departure = DepartureSpec::exponential(c);
    MarketConfig b = a;
    b.m = a.m / c;
    b.d = a.d / c;
    b.T = a.T * c;
    b.departure = DepartureSpec::exponential(1.0);
    const auto sample = [&](MarketConfig cfg, std::uint64_t which) {
      std::vector<double> v;
      for (std::uint64_t i = 0; i < runs; ++i) {
        cfg.seed = detail::check_seed(o, 6, (tag * 2 + which) * runs + i);
        v.push_back(run(cfg).loss);
      }
      return v;
    };
    const auto la = sample(a, 0), lb = sample(b, 1);
    const auto moments = [](const std::vector<double>& v) {
      double mean = 0.0, var = 0.0;
      for (double x : v) mean += x;
      mean /= static_cast<double>(v.size());
      for (double x : v) var += (x - mean) * (x - mean);
      var /= static_cast<double>(v.size() > 1 ? v.size() - 1 : 1);
      return std::pair{mean, var / static_cast<double>(v.size())};
    };
    const auto [ma, va] = moments(la);
    const auto [mb, vb] = moments(lb);
    const double se = std::sqrt(va + vb);
    const double z = se > 0.0 ? std::abs(ma - mb) / se : 0.0;
    ok = ok && z <= 3.0;
    rows.push_back({{"c", c}, {"loss_rate_c", ma}, {"loss_rescaled", mb}, {"pooled_se", se},
                    {"z", z}});
    ++tag;
  }
  return {"time-change", ok, {{"runs_per_side", runs}, {"pairs", rows}}};
}

inline const std::vector<std::string>& check_names() {
  static const std::vector<std::string> names = {"coupling", "ruin", "urn", "dominance",
                                                 "w-identity", "conservation", "time-change"};
  return names;
}

inline CheckResult run_check(const std::string& name, const VerifyOptions& o) {
  if (name == "coupling") return check_coupling(o);
  if (name == "ruin") return check_ruin(o);
  if (name == "urn") return check_urn(o);
  if (name == "dominance") return check_dominance(o);
  if (name == "w-identity") return check_w_identity(o);
  if (name == "conservation") return check_conservation(o);
  if (name == "time-change") return check_time_change(o);
  throw ConfigError("unknown check '" + name + "'");
}

/// Runs the named checks (all when empty) and returns the JSON report.
inline json run_matrix(const std::vector<std::string>& names, const VerifyOptions& o) {
  const auto& selected = names.empty() ? check_names() : names;
  json checks = json::array();
  bool all = true;
  for (const auto& name : selected) {
    CheckResult r = run_check(name, o);
    all = all && r.passed;
    json entry = {{"name", r.name}, {"passed", r.passed}};
    entry.update(r.details);
    checks.push_back(std::move(entry));
  }
  return {{"passed", all}, {"seed", o.seed}, {"checks", checks}};
}

}  // namespace dynmatch::verify
