// Command-line front end: simulate | sweep | analyze | verify.
//
// Exit codes: 0 ok, 1 verification failure, 2 configuration error, 3 I/O error.

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"

#include "dynmatch/dynmatch.hpp"

namespace {

using dynmatch::ConfigError;
using nlohmann::json;

constexpr int kExitVerifyFailed = 1;
constexpr int kExitConfig = 2;
constexpr int kExitIo = 3;

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Market flags shared by simulate and sweep. A flag given on the command
// line overrides the same key in --config.
struct MarketFlags {
  std::string config_path;
  double m = 0, d = 0, T = 0, burn_in = 0;
  std::string policy, departure;
  std::uint64_t seed = 0;
  CLI::Option *m_opt, *d_opt, *T_opt, *burn_opt, *policy_opt, *departure_opt, *seed_opt;

  void attach(CLI::App& app, bool with_d) {
    app.add_option("--config", config_path, "JSON config file")->check(CLI::ExistingFile);
    m_opt = app.add_option("--m", m, "arrival rate");
    d_opt = with_d ? app.add_option("--d", d, "density; compatibility probability d/m") : nullptr;
    T_opt = app.add_option("--T", T, "horizon");
    policy_opt = app.add_option("--policy", policy, "greedy | patient | greedy-sojourn");
    departure_opt = app.add_option("--departure", departure,
                                   "const:<c> | exp:<rate> | unif:<a>:<b> | never | "
                                   "mix:<w>@<spec>,...");
    seed_opt = app.add_option("--seed", seed, "seed (master seed for sweeps)");
    burn_opt = app.add_option("--burn-in", burn_in, "statistics cover arrivals in [burn_in, T]");
  }

  dynmatch::MarketConfig build(bool check = true) const {
    dynmatch::MarketConfig c;
    if (!config_path.empty()) {
      std::ifstream in(config_path);
      if (!in) throw IoError("cannot read " + config_path);
      json j;
      try {
        j = json::parse(in);
      } catch (const json::exception& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
      }
      c = dynmatch::io::config_from_json(j, c);
    }
    if (m_opt->count()) c.m = m;
    if (d_opt && d_opt->count()) c.d = d;
    if (T_opt->count()) c.T = T;
    if (policy_opt->count()) c.policy = dynmatch::parse_policy(policy);
    if (departure_opt->count()) c.departure = dynmatch::io::parse_departure(departure);
    if (seed_opt->count()) c.seed = seed;
    if (burn_opt->count()) c.burn_in = burn_in;
    if (check) dynmatch::validate(c);
    return c;
  }
};

// "1,2,5" or ranges "3..10" (unit steps), freely mixed.
std::vector<double> parse_d_list(const std::string& text) {
  std::vector<double> out;
  for (auto item : dynmatch::io::detail::split(text, ',')) {
    const auto dots = item.find("..");
    if (dots == std::string_view::npos) {
      out.push_back(dynmatch::io::detail::parse_number(item, "d value"));
      continue;
    }
    const double lo = dynmatch::io::detail::parse_number(item.substr(0, dots), "range start");
    const double hi = dynmatch::io::detail::parse_number(item.substr(dots + 2), "range end");
    if (hi < lo) throw ConfigError("empty d range '" + std::string(item) + "'");
    for (double x = lo; x <= hi + 1e-9; x += 1.0) out.push_back(x);
  }
  return out;
}

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  return out;
}

void finish_output(std::ofstream& out, const std::filesystem::path& path) {
  out.flush();
  if (!out) throw IoError("write failed for " + path.string());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Dynamic matching market simulator and analysis toolkit"};
  app.require_subcommand(1);

  auto* simulate = app.add_subcommand("simulate", "run one market and print RunStats as JSON");
  MarketFlags sim_flags;
  sim_flags.attach(*simulate, true);
  std::string trace_path;
  simulate->add_option("--trace", trace_path, "write the pool trajectory CSV here");

  auto* sweep = app.add_subcommand("sweep", "replication sweep over d; writes raw and summary CSV");
  MarketFlags sweep_flags;
  sweep_flags.attach(*sweep, true);
  std::string d_list;
  std::uint64_t reps = 10;
  std::string out_dir = ".";
  unsigned jobs = std::max(1u, std::thread::hardware_concurrency());
  sweep->add_option("--d-list", d_list, "comma list of d values, ranges as a..b");
  sweep->add_option("--reps", reps, "replications per d")->check(CLI::PositiveNumber);
  sweep->add_option("--out", out_dir, "output directory");
  sweep->add_option("--jobs", jobs, "worker threads")->check(CLI::PositiveNumber);

  auto* analyze = app.add_subcommand("analyze", "analytic report for (m, d) as JSON");
  double an_m = 1000, an_d = 5, an_T = 100, tail_tol = 1e-300;
  analyze->add_option("--m", an_m, "arrival rate");
  analyze->add_option("--d", an_d, "density");
  analyze->add_option("--T", an_T, "horizon for the waiting bounds");
  analyze->add_option("--tail-tol", tail_tol, "certified tail mass of the truncated law");

  auto* verify = app.add_subcommand("verify", "run the oracle matrix; JSON pass/fail report");
  std::vector<std::string> checks;
  std::uint64_t verify_runs = 0, verify_seed = 1, ruin_trials = 1'000'000;
  std::string verify_out;
  verify->add_option("--check", checks, "check name (repeatable); default all")
      ->check(CLI::IsMember(dynmatch::verify::check_names()));
  auto* runs_opt = verify->add_option("--runs", verify_runs, "override per-check run counts")
                       ->check(CLI::PositiveNumber);
  verify->add_option("--seed", verify_seed, "master seed");
  verify->add_option("--ruin-trials", ruin_trials, "Monte Carlo trials per walk")
      ->check(CLI::PositiveNumber);
  verify->add_option("--out", verify_out, "also write the report to this file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (*simulate) {
      dynmatch::MarketConfig c = sim_flags.build();
      c.pool_trace = c.pool_trace || !trace_path.empty();
      const auto stats = dynmatch::run(c);
      if (!trace_path.empty()) {
        auto out = open_output(trace_path);
        dynmatch::io::write_trajectory_csv(out, stats.pool_trajectory);
        finish_output(out, trace_path);
      }
      json j = dynmatch::io::stats_to_json(stats);
      j["departure"] = dynmatch::io::departure_to_string(c.departure);
      std::cout << j.dump(2) << '\n';
      return 0;
    }

    if (*sweep) {
      dynmatch::SweepSpec spec;
      spec.base = sweep_flags.build(false);  // d comes from --d-list
      spec.master_seed = spec.base.seed;
      spec.replications = reps;
      spec.d_values = d_list.empty() ? std::vector<double>{spec.base.d} : parse_d_list(d_list);
      dynmatch::validate(spec);

      const std::filesystem::path dir(out_dir);
      std::error_code ec;
      std::filesystem::create_directories(dir, ec);
      if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
      const auto raw_path = dir / "raw.csv";
      const auto summary_path = dir / "summary.csv";
      auto raw_out = open_output(raw_path);
      auto summary_out = open_output(summary_path);

      const auto rows = dynmatch::run_sweep(spec, jobs);
      const auto summary = dynmatch::summarize(spec, rows);
      dynmatch::write_raw_csv(raw_out, rows);
      dynmatch::write_summary_csv(summary_out, summary);
      finish_output(raw_out, raw_path);
      finish_output(summary_out, summary_path);

      json j = {{"raw", raw_path.string()}, {"summary", summary_path.string()},
                {"cells", rows.size()}};
      std::cout << j.dump(2) << '\n';
      return 0;
    }

    if (*analyze) {
      std::cout << dynmatch::analytics::analyze_report(an_m, an_d, an_T, tail_tol).dump(2) << '\n';
      return 0;
    }

    if (*verify) {
      dynmatch::verify::VerifyOptions opts;
      if (runs_opt->count()) opts.runs = verify_runs;
      opts.seed = verify_seed;
      opts.ruin_trials = ruin_trials;
      const json report = dynmatch::verify::run_matrix(checks, opts);
      const std::string text = report.dump(2);
      if (!verify_out.empty()) {
        auto out = open_output(verify_out);
        out << text << '\n';
        finish_output(out, verify_out);
      }
      std::cout << text << '\n';
      return report.at("passed").get<bool>() ? 0 : kExitVerifyFailed;
    }
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitIo;
  } catch (const std::invalid_argument& e) {  // ConfigError
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::domain_error& e) {
    std::cerr << "domain error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::out_of_range& e) {
    std::cerr << "range error: " << e.what() << '\n';
    return kExitConfig;
  }
  return 0;
}
