// Acceptance gate: twelve criteria, one PASS/FAIL line each. Exit status is
// nonzero when any criterion fails.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <map>
#include <string>
#include <tuple>
#include <vector>

#include "dynmatch/dynmatch.hpp"
#include "dense_chain.hpp"

using namespace dynmatch;

namespace {

constexpr std::uint64_t kMasterSeed = 20240601;

struct Sample {
  double mean = 0.0;
  double se = 0.0;  // standard error of the mean
};

Sample sample_of(const std::vector<double>& v) {
  Sample s;
  for (double x : v) s.mean += x;
  s.mean /= static_cast<double>(v.size());
  if (v.size() > 1) {
    double ss = 0.0;
    for (double x : v) ss += (x - s.mean) * (x - s.mean);
    s.se = std::sqrt(ss / static_cast<double>(v.size() - 1) / static_cast<double>(v.size()));
  }
  return s;
}

// Every simulator run goes through here; identity violations accumulate.
struct IdentityLedger {
  std::uint64_t runs = 0;
  std::uint64_t conservation_failures = 0;
  double worst_wait_error = 0.0;
} identities;

RunStats checked_run(const MarketConfig& c) {
  Simulator sim(c);
  const RunStats s = sim.finish();
  ++identities.runs;
  if (!s.conserved()) ++identities.conservation_failures;
  identities.worst_wait_error =
      std::max(identities.worst_wait_error, std::abs(s.total_wait - per_agent_wait(sim.agents(), c.T)));
  return s;
}

// Runs keyed by (policy, m, d, rep). Seeds depend on (m, d, rep) only, so
// policies compared at the same key are paired.
class RunCache {
 public:
  const RunStats& get(PolicyKind policy, double m, double d, std::uint64_t rep) {
    const auto key = std::make_tuple(static_cast<int>(policy), m, d, rep);
    auto it = runs_.find(key);
    if (it != runs_.end()) return it->second;
    MarketConfig c;
    c.m = m;
    c.d = d;
    c.T = 100;
    c.policy = policy;
    c.departure = DepartureSpec::constant(1.0);
    c.seed = mix_seed(kMasterSeed, {static_cast<std::uint64_t>(m),
                                    static_cast<std::uint64_t>(std::llround(d * 1000)), rep});
    return runs_.emplace(key, checked_run(c)).first->second;
  }

  std::vector<double> losses(PolicyKind policy, double m, double d, std::uint64_t reps) {
    std::vector<double> v;
    for (std::uint64_t r = 0; r < reps; ++r) v.push_back(get(policy, m, d, r).loss);
    return v;
  }

  std::vector<double> waits(PolicyKind policy, double m, double d, std::uint64_t reps) {
    std::vector<double> v;
    for (std::uint64_t r = 0; r < reps; ++r) v.push_back(get(policy, m, d, r).avg_wait);
    return v;
  }

 private:
  std::map<std::tuple<int, double, double, std::uint64_t>, RunStats> runs_;
} cache;

int failures = 0;

void report(int id, bool passed, const std::string& title, const std::string& detail) {
  if (!passed) ++failures;
  std::printf("%s criterion %d: %s | %s\n", passed ? "PASS" : "FAIL", id, title.c_str(), detail.c_str());
  std::fflush(stdout);
}

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

std::string fmt(const char* f, double a, double b) {
  char buf[160];
  std::snprintf(buf, sizeof buf, f, a, b);
  return buf;
}

std::string fmt(const char* f, double a, double b, double c) {
  char buf[200];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

void loss_reproduction(int id, PolicyKind policy, const std::vector<std::pair<double, double>>& refs,
                       std::uint64_t reps, double band, const std::string& title) {
  bool ok = true;
  std::string detail;
  for (const auto& [d, ref] : refs) {
    const double mean = sample_of(cache.losses(policy, 1000, d, reps)).mean;
    const double rel = std::abs(mean - ref) / ref;
    ok = ok && rel <= band;
    detail += fmt("d=%g mean=%.4g ", d, mean) + fmt("ref=%.4g rel=%.3f; ", ref, rel);
  }
  report(id, ok, title, detail);
}

void criterion_greedy_sojourn() {
  constexpr std::uint64_t reps = 40;
  bool ok = true;
  std::string detail;
  for (const auto& [d, ref] : {std::pair{5.0, 0.006517}, std::pair{10.0, 3.80e-5}}) {
    const double mean = sample_of(cache.losses(PolicyKind::GreedySojourn, 1000, d, reps)).mean;
    const double rel = std::abs(mean - ref) / ref;
    ok = ok && rel <= 0.30;
    detail += fmt("d=%g mean=%.4g ", d, mean) + fmt("ref=%.4g rel=%.3f; ", ref, rel);
  }
  bool dominated = true;
  for (double d = 3; d <= 10; d += 1) {
    const double gs = sample_of(cache.losses(PolicyKind::GreedySojourn, 1000, d, reps)).mean;
    const double gdy = sample_of(cache.losses(PolicyKind::Greedy, 1000, d, reps)).mean;
    if (gs > gdy) {
      dominated = false;
      detail += fmt("d=%g GS %.4g > GDY %.4g; ", d, gs, gdy);
    }
  }
  detail += dominated ? "GS <= GDY at d=3..10 (40 paired seeds)" : "";
  report(3, ok && dominated, "greedy-sojourn loss within 30% and below greedy", detail);
}

void criterion_box_plot() {
  std::vector<double> v;
  for (std::uint64_t r = 0; r < 200; ++r) v.push_back(cache.get(PolicyKind::Greedy, 500, 5, r).loss);
  std::sort(v.begin(), v.end());
  const double q1 = quantile_linear(v, 0.25), med = quantile_linear(v, 0.5), q3 = quantile_linear(v, 0.75);
  const bool ok = med >= 0.0125 && med <= 0.0140 && q1 >= 0.0115 && q3 <= 0.0150;
  report(4, ok, "m=500 d=5 greedy box plot", fmt("q1=%.5f median=%.5f q3=%.5f", q1, med, q3));
}

void criterion_sandwich() {
  bool ok = true;
  std::string detail;
  for (double d = 2; d <= 12; d += 1) {
    const auto s = sample_of(cache.losses(PolicyKind::Greedy, 1000, d, 20));
    const double lo = analytics::gdy_loss_lower(d, 1.0, 1.0);
    const double hi = analytics::gdy_loss_upper(d, 1.0);
    const bool row = lo - 3 * s.se <= s.mean && s.mean <= hi + 3 * s.se;
    ok = ok && row;
    if (!row) detail += fmt("d=%g violates [%.4g, %.4g]; ", d, lo, hi);
  }
  report(5, ok, "greedy loss between the lower and upper bounds, d=2..12",
         ok ? "all 11 densities inside with 3 SE slack" : detail);
}

void criterion_patient_bound() {
  bool ok = true;
  std::string detail;
  for (double d : {5.0, 10.0}) {
    const auto s = sample_of(cache.losses(PolicyKind::Patient, 1000, d, 20));
    const double bound = analytics::pat_loss_upper(d);
    ok = ok && s.mean <= bound + 3 * s.se;
    detail += fmt("d=%g mean=%.4g bound=%.4g; ", d, s.mean, bound);
  }
  report(6, ok, "patient loss below exp(-d/5)", detail);
}

void criterion_waiting() {
  bool ok = true;
  std::string detail;
  for (double d : {2.0, 5.0, 10.0, 20.0}) {
    const auto w = analytics::waiting_bounds(1000, 100, d, 1.0, 1.0);
    const double lo = *w.lower / (1000 * 100), hi = w.upper / (1000 * 100);
    const auto waits = cache.waits(PolicyKind::Greedy, 1000, d, 10);
    const bool row = std::all_of(waits.begin(), waits.end(), [&](double x) { return x >= lo && x <= hi; });
    ok = ok && row;
    detail += fmt("d=%g mean=%.4g ", d, sample_of(waits).mean) + fmt("in [%.4g, %.4g]; ", lo, hi);
  }
  const double at5 = sample_of(cache.waits(PolicyKind::Greedy, 1000, 5, 10)).mean;
  const double rel = std::abs(at5 - 0.1355) / 0.1355;
  ok = ok && rel <= 0.10;
  detail += fmt("d=5 vs 0.1355 rel=%.3f", rel);
  report(7, ok, "greedy average wait inside [1/(8d), 6/(5d)]", detail);
}

void criterion_heuristic() {
  bool ok = true;
  std::string detail;
  for (double d = 4; d <= 8; d += 1) {
    const auto g = sample_of(cache.losses(PolicyKind::Greedy, 1000, d, 20));
    const auto p = sample_of(cache.losses(PolicyKind::Patient, 1000, d, 20));
    const double h = analytics::heuristic_predictions(1000, d).loss_both;
    const double rel = std::abs(g.mean - h) / g.mean;
    const double z = std::abs(g.mean - p.mean) / std::sqrt(g.se * g.se + p.se * p.se);
    ok = ok && rel <= 0.15 && z <= 3.0;
    detail += fmt("d=%g rel=%.3f ", d, rel) + fmt("|GDY-PAT|/SE=%.2f; ", z);
  }
  report(8, ok, "heuristic loss within 15% and greedy ~ patient", detail);
}

void criterion_coupling() {
  const auto r = verify::check_coupling({});
  report(9, r.passed, "coupled runs keep the pool gap at most 1",
         "runs=" + r.details["runs"].dump() + " max_gap=" + r.details["max_gap"].dump() +
             " violations=" + r.details["violations"].dump());
}

void criterion_stationary() {
  double worst_tv = 0.0, worst_db = 0.0;
  for (int m = 1; m <= 50; ++m)
    for (int d = 1; d <= m; ++d) {
      const auto dist = analytics::stationary({double(m), double(d)}, 1e-300);
      const auto ref = testsupport::dense_stationary(m, d, 200);
      worst_tv = std::max(worst_tv, testsupport::total_variation(dist.probs, dist.tail_bound, ref));
    }
  // detailed balance, relative and in log space, across small and large markets
  std::vector<analytics::ChainParams> grid;
  for (double m : {2.0, 10.0, 50.0, 1e3, 1e4})
    for (double d : {1.0, 2.0, 5.0, 10.0})
      if (d <= m) grid.push_back({m, d});
  bool decay_ok = true;
  std::string decay;
  for (const auto& c : grid) {
    const auto dist = analytics::stationary(c, 1e-300);
    for (std::size_t j = 0; j + 1 < dist.log_probs.size(); ++j) {
      const double lhs = dist.log_probs[j] + analytics::log_p_up(j, c);
      const double rhs = dist.log_probs[j + 1] + analytics::log_p_down(j + 1, c);
      if (std::isfinite(lhs) || std::isfinite(rhs))
        worst_db = std::max(worst_db, std::abs(lhs - rhs) / std::max(1.0, std::abs(lhs)));
    }
    if (c.m >= 1e3) {
      const auto tc = analytics::tail_decay_check(dist);
      decay_ok = decay_ok && tc.passed();
    }
  }
  const bool ok = worst_tv <= 1e-9 && worst_db <= 1e-12 && decay_ok;
  report(10, ok, "stationary law vs dense solve, detailed balance, tail decay",
         fmt("max TV=%.3g (m<=50, all d) max balance error=%.3g ", worst_tv, worst_db) +
             (decay_ok ? "decay pass at m=1e3,1e4" : "decay FAIL"));
}

void criterion_oracles() {
  verify::VerifyOptions o;
  o.ruin_trials = 1'000'000;
  const auto ruin = verify::check_ruin(o);
  const auto urn = verify::check_urn(o);
  const auto dom = verify::check_dominance(o);
  double worst_z = 0.0;
  for (const auto& w : ruin.details["walks"]) worst_z = std::max(worst_z, w["z"].get<double>());
  report(11, ruin.passed && urn.passed && dom.passed, "ruin, urn and dominance oracles",
         fmt("ruin max z=%.2f ", worst_z) + "urn sum error=" + urn.details["max_pmf_sum_error"].dump() +
             " grid held=" + urn.details["bound_held"].dump() + "/50" +
             " dominance worst z=" + dom.details["worst_z"].dump() + " over " +
             dom.details["records"].dump() + " runs");
}

void criterion_identities() {
  const auto w = verify::check_w_identity({});
  const auto c = verify::check_conservation({});
  const bool ok = identities.conservation_failures == 0 && identities.worst_wait_error <= 1e-9 &&
                  w.passed && c.passed;
  report(12, ok, "run identities on every run",
         std::to_string(identities.runs) + " runs, conservation failures=" +
             std::to_string(identities.conservation_failures) +
             fmt(" max |W - per-agent sum|=%.3g", identities.worst_wait_error) +
             "; policy x departure matrix " + (w.passed && c.passed ? "ok" : "FAILED"));
}

}  // namespace

int main() {
  loss_reproduction(1, PolicyKind::Greedy, {{2, 0.1232}, {5, 0.01336}, {10, 3.77e-4}}, 10, 0.25,
                    "greedy loss within 25% at d=2,5,10");
  loss_reproduction(2, PolicyKind::Patient, {{2, 0.1222}, {5, 0.01312}, {10, 3.69e-4}}, 10, 0.25,
                    "patient loss within 25% at d=2,5,10");
  criterion_greedy_sojourn();
  criterion_box_plot();
  criterion_sandwich();
  criterion_patient_bound();
  criterion_waiting();
  criterion_heuristic();
  criterion_coupling();
  criterion_stationary();
  criterion_oracles();
  criterion_identities();
  std::printf("%d of 12 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
