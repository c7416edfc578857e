#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <mutex>
#include <ostream>
#include <span>
#include <thread>
#include <vector>

#include "dynmatch/config.hpp"
#include "dynmatch/errors.hpp"
#include "dynmatch/io.hpp"
#include "dynmatch/random.hpp"
#include "dynmatch/run_stats.hpp"
#include "dynmatch/simulator.hpp"

namespace dynmatch {

/// Replication sweep over a list of densities. base.d and base.seed are
/// ignored; cell (d_index, rep) runs with d_values[d_index] and seed
/// mix_seed(master_seed, {d_index, rep}).
struct SweepSpec {
  MarketConfig base;
  std::vector<double> d_values;
  std::uint64_t replications = 10;
  std::uint64_t master_seed = 1;
};

inline std::uint64_t cell_seed(std::uint64_t master, std::uint64_t d_index, std::uint64_t rep) {
  return mix_seed(master, {d_index, rep});
}

inline void validate(const SweepSpec& s) {
  if (s.replications < 1) throw ConfigError("replications must be at least 1");
  if (s.d_values.empty()) throw ConfigError("d list must not be empty");
  for (double d : s.d_values) {
    MarketConfig c = s.base;
    c.d = d;
    validate(c);
  }
}

struct SweepRow {
  std::size_t d_index = 0;
  std::uint64_t rep = 0;
  RunStats stats;
};

/// Runs every cell on `jobs` threads. Rows come back ordered by
/// (d_index, rep) regardless of scheduling.
inline std::vector<SweepRow> run_sweep(const SweepSpec& spec, unsigned jobs = 1) {
  validate(spec);
  const std::size_t n = spec.d_values.size() * spec.replications;
  std::vector<SweepRow> rows(n);
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;

  const auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        SweepRow& row = rows[i];
        row.d_index = i / spec.replications;
        row.rep = i % spec.replications;
        MarketConfig c = spec.base;
        c.d = spec.d_values[row.d_index];
        c.seed = cell_seed(spec.master_seed, row.d_index, row.rep);
        c.pool_trace = false;
        row.stats = run(c);
      } catch (...) {
        const std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };

  jobs = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(n)));
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < jobs; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
  return rows;
}

/// Quantile of sorted data by linear interpolation between order
/// statistics at position q (n - 1).
inline double quantile_linear(std::span<const double> sorted, double q) {
  if (sorted.empty()) throw DomainError("quantile of an empty sample");
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

struct SummaryRow {
  double d = 0.0;
  double mean_loss = 0.0;
  double std_loss = 0.0;  // sample standard deviation (n - 1); 0 when n == 1
  double min = 0.0, q1 = 0.0, median = 0.0, q3 = 0.0, max = 0.0;
  double mean_avg_wait = 0.0;
  std::uint64_t n = 0;
  RunStats pooled;        // associative merge of all cells at this d
};

inline SummaryRow summarize(double d, std::span<const RunStats> cells) {
  if (cells.empty()) throw DomainError("cannot summarize zero runs");
  SummaryRow s;
  s.d = d;
  s.n = cells.size();
  std::vector<double> losses;
  CompensatedSum loss_sum, wait_sum;
  for (const auto& c : cells) {
    losses.push_back(c.loss);
    loss_sum += c.loss;
    wait_sum += c.avg_wait;
  }
  const double n = static_cast<double>(s.n);
  s.mean_loss = loss_sum.value() / n;
  s.mean_avg_wait = wait_sum.value() / n;
  if (s.n > 1) {
    CompensatedSum sq;
    for (double x : losses) sq += (x - s.mean_loss) * (x - s.mean_loss);
    s.std_loss = std::sqrt(sq.value() / (n - 1.0));
  }
  std::sort(losses.begin(), losses.end());
  s.min = losses.front();
  s.q1 = quantile_linear(losses, 0.25);
  s.median = quantile_linear(losses, 0.5);
  s.q3 = quantile_linear(losses, 0.75);
  s.max = losses.back();
  s.pooled = cells.front();
  for (std::size_t i = 1; i < cells.size(); ++i) s.pooled.merge(cells[i]);
  return s;
}

/// One summary row per d, in d_values order.
inline std::vector<SummaryRow> summarize(const SweepSpec& spec, std::span<const SweepRow> rows) {
  std::vector<std::vector<RunStats>> by_d(spec.d_values.size());
  for (const auto& r : rows) by_d.at(r.d_index).push_back(r.stats);
  std::vector<SummaryRow> out;
  for (std::size_t i = 0; i < by_d.size(); ++i) out.push_back(summarize(spec.d_values[i], by_d[i]));
  return out;
}

inline void write_raw_csv(std::ostream& out, std::span<const SweepRow> rows) {
  out << io::kSchemaLine << '\n' << "d_index,rep," << io::kStatsCsvHeader << '\n';
  for (const auto& r : rows) out << r.d_index << ',' << r.rep << ',' << io::stats_csv_row(r.stats) << '\n';
}

inline void write_summary_csv(std::ostream& out, std::span<const SummaryRow> rows) {
  using io::format_double;
  out << io::kSchemaLine << '\n'
      << "d,n,mean_loss,std_loss,min,q1,median,q3,max,mean_avg_wait\n";
  for (const auto& s : rows)
    out << format_double(s.d) << ',' << s.n << ',' << format_double(s.mean_loss) << ','
        << format_double(s.std_loss) << ',' << format_double(s.min) << ','
        << format_double(s.q1) << ',' << format_double(s.median) << ','
        << format_double(s.q3) << ',' << format_double(s.max) << ','
        << format_double(s.mean_avg_wait) << '\n';
}

}  // namespace dynmatch
