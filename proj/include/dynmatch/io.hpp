#pragma once

#include <charconv>
#include <cstdio>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "dynmatch/config.hpp"
#include "dynmatch/departure.hpp"
#include "dynmatch/errors.hpp"
#include "dynmatch/run_stats.hpp"

namespace dynmatch::io {

using nlohmann::json;

/// Shortest text that parses back to the same double.
inline std::string format_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

namespace detail {

inline double parse_number(std::string_view s, std::string_view what) {
  double v = 0.0;
  const auto* end = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (s.empty() || ec != std::errc{} || ptr != end)
    throw ConfigError("cannot parse " + std::string(what) + " from '" + std::string(s) + "'");
  return v;
}

inline std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = s.find(sep, start);
    out.push_back(s.substr(start, pos - start));
    if (pos == std::string_view::npos) return out;
    start = pos + 1;
  }
}

}  // namespace detail

/// Command-line departure syntax:
///   const:<c> | exp:<rate> | unif:<a>:<b> | never | mix:<w>@<spec>,<w>@<spec>,...
/// Mixture components are non-mixture specs.
inline DepartureSpec parse_departure(std::string_view text) {
  if (text == "never") return DepartureSpec::never();
  if (text.starts_with("mix:")) {
    std::vector<MixtureComponent> comps;
    for (std::string_view item : detail::split(text.substr(4), ',')) {
      const std::size_t at = item.find('@');
      if (at == std::string_view::npos) throw ConfigError("mixture component needs <w>@<spec>");
      const DepartureSpec inner = parse_departure(item.substr(at + 1));
      if (inner.kind() == "mix") throw ConfigError("nested mixtures are not supported here");
      comps.push_back({detail::parse_number(item.substr(0, at), "mixture weight"), inner});
    }
    return DepartureSpec::mixture(std::move(comps));
  }
  const auto parts = detail::split(text, ':');
  if (parts[0] == "const" && parts.size() == 2)
    return DepartureSpec::constant(detail::parse_number(parts[1], "constant sojourn"));
  if (parts[0] == "exp" && parts.size() == 2)
    return DepartureSpec::exponential(detail::parse_number(parts[1], "exponential rate"));
  if (parts[0] == "unif" && parts.size() == 3)
    return DepartureSpec::uniform(detail::parse_number(parts[1], "uniform lower end"),
                                  detail::parse_number(parts[2], "uniform upper end"));
  throw ConfigError("unknown departure '" + std::string(text) + "'");
}

inline std::string departure_to_string(const DepartureSpec& spec) {
  struct Visitor {
    std::string operator()(const ConstantSojourn& s) const { return "const:" + format_double(s.c); }
    std::string operator()(const ExponentialSojourn& s) const {
      return "exp:" + format_double(s.rate);
    }
    std::string operator()(const UniformSojourn& s) const {
      return "unif:" + format_double(s.a) + ":" + format_double(s.b);
    }
    std::string operator()(const NeverPerish&) const { return "never"; }
    std::string operator()(const MixtureSojourn& s) const {
      std::string out = "mix:";
      for (std::size_t i = 0; i < s.components.size(); ++i) {
        if (i > 0) out += ',';
        out += format_double(s.components[i].weight) + "@" +
               departure_to_string(s.components[i].spec);
      }
      return out;
    }
  };
  return std::visit(Visitor{}, spec.value());
}

inline json departure_to_json(const DepartureSpec& spec) {
  struct Visitor {
    json operator()(const ConstantSojourn& s) const { return {{"kind", "constant"}, {"c", s.c}}; }
    json operator()(const ExponentialSojourn& s) const {
      return {{"kind", "exponential"}, {"rate", s.rate}};
    }
    json operator()(const UniformSojourn& s) const {
      return {{"kind", "uniform"}, {"a", s.a}, {"b", s.b}};
    }
    json operator()(const NeverPerish&) const { return {{"kind", "never"}}; }
    json operator()(const MixtureSojourn& s) const {
      json comps = json::array();
      for (const auto& c : s.components)
        comps.push_back({{"weight", c.weight}, {"departure", departure_to_json(c.spec)}});
      return {{"kind", "mixture"}, {"components", comps}};
    }
  };
  return std::visit(Visitor{}, spec.value());
}

/// Accepts the object form above or a command-line string.
inline DepartureSpec departure_from_json(const json& j) {
  try {
    if (j.is_string()) return parse_departure(j.get<std::string>());
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "constant") return DepartureSpec::constant(j.at("c").get<double>());
    if (kind == "exponential") return DepartureSpec::exponential(j.at("rate").get<double>());
    if (kind == "uniform")
      return DepartureSpec::uniform(j.at("a").get<double>(), j.at("b").get<double>());
    if (kind == "never") return DepartureSpec::never();
    if (kind == "mixture") {
      std::vector<MixtureComponent> comps;
      for (const auto& c : j.at("components"))
        comps.push_back({c.at("weight").get<double>(), departure_from_json(c.at("departure"))});
      return DepartureSpec::mixture(std::move(comps));
    }
    throw ConfigError("unknown departure kind '" + kind + "'");
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed departure: ") + e.what());
  }
}

inline json config_to_json(const MarketConfig& c) {
  return {{"m", c.m},
          {"d", c.d},
          {"T", c.T},
          {"policy", std::string(to_string(c.policy))},
          {"departure", departure_to_json(c.departure)},
          {"seed", c.seed},
          {"pool_trace", c.pool_trace},
          {"burn_in", c.burn_in}};
}

/// Overlays the keys of `j` on `base`; unknown keys are errors. The result
/// is not validated, so callers may complete it before validate().
inline MarketConfig config_from_json(const json& j, MarketConfig base = {}) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  try {
    for (const auto& [key, value] : j.items()) {
      if (key == "m") base.m = value.get<double>();
      else if (key == "d") base.d = value.get<double>();
      else if (key == "T") base.T = value.get<double>();
      else if (key == "policy") base.policy = parse_policy(value.get<std::string>());
      else if (key == "departure") base.departure = departure_from_json(value);
      else if (key == "seed") base.seed = value.get<std::uint64_t>();
      else if (key == "pool_trace") base.pool_trace = value.get<bool>();
      else if (key == "burn_in") base.burn_in = value.get<double>();
      else throw ConfigError("unknown config key '" + key + "'");
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed config: ") + e.what());
  }
  return base;
}

inline json stats_to_json(const RunStats& s, bool with_trajectory = false) {
  json j = {{"seed", s.seed},
            {"m", s.m},
            {"d", s.d},
            {"T", s.T},
            {"policy", std::string(to_string(s.policy))},
            {"departure_kind", s.departure_kind},
            {"arrivals", s.arrivals},
            {"matched", s.matched},
            {"perished", s.perished},
            {"pool_at_T", s.pool_at_T},
            {"loss", s.loss},
            {"total_wait", s.total_wait},
            {"avg_wait", s.avg_wait},
            {"conserved", s.conserved()}};
  if (with_trajectory) {
    json traj = json::array();
    for (const auto& p : s.pool_trajectory) traj.push_back({p.time, p.size});
    j["pool_trajectory"] = std::move(traj);
  }
  return j;
}

inline constexpr std::string_view kSchemaLine = "#schema=1";

inline constexpr std::string_view kStatsCsvHeader =
    "seed,m,d,T,policy,departure_kind,loss,avg_wait,arrivals,matched,perished,pool_at_T,"
    "total_wait";

inline std::string stats_csv_row(const RunStats& s) {
  std::string row;
  row += std::to_string(s.seed) + ',' + format_double(s.m) + ',' + format_double(s.d) + ',' +
         format_double(s.T) + ',' + std::string(to_string(s.policy)) + ',' + s.departure_kind +
         ',' + format_double(s.loss) + ',' + format_double(s.avg_wait) + ',' +
         std::to_string(s.arrivals) + ',' + std::to_string(s.matched) + ',' +
         std::to_string(s.perished) + ',' + std::to_string(s.pool_at_T) + ',' +
         format_double(s.total_wait);
  return row;
}

inline void write_trajectory_csv(std::ostream& out, const std::vector<PoolPoint>& traj) {
  out << kSchemaLine << '\n' << "time,size\n";
  for (const auto& p : traj) out << format_double(p.time) << ',' << p.size << '\n';
}

}  // namespace dynmatch::io
