#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "dynmatch/errors.hpp"
#include "dynmatch/random.hpp"

namespace dynmatch {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

// Maximum-sojourn-time distributions. A sojourn of +infinity means the agent
// never becomes critical.

struct ConstantSojourn {
  double c;
};

struct ExponentialSojourn {
  double rate;
};

struct UniformSojourn {
  double a;
  double b;
};

struct NeverPerish {};

struct MixtureComponent;

struct MixtureSojourn {
  std::vector<MixtureComponent> components;
};

class DepartureSpec {
 public:
  using Variant = std::variant<ConstantSojourn, ExponentialSojourn, UniformSojourn,
                               NeverPerish, MixtureSojourn>;

  DepartureSpec() : value_(NeverPerish{}) {}

  static DepartureSpec constant(double c);
  static DepartureSpec exponential(double rate);
  static DepartureSpec uniform(double a, double b);
  static DepartureSpec never() { return DepartureSpec(NeverPerish{}); }
  /// Weights must be positive; they are normalized to sum to one.
  static DepartureSpec mixture(std::vector<MixtureComponent> components);

  const Variant& value() const noexcept { return value_; }

  /// Short tag used in CSV output: const | exp | unif | never | mix.
  std::string_view kind() const noexcept;

  friend bool operator==(const DepartureSpec&, const DepartureSpec&);

 private:
  explicit DepartureSpec(Variant v) : value_(std::move(v)) {}
  Variant value_;
};

struct MixtureComponent {
  double weight;
  DepartureSpec spec;
};

inline bool operator==(const ConstantSojourn& x, const ConstantSojourn& y) { return x.c == y.c; }
inline bool operator==(const ExponentialSojourn& x, const ExponentialSojourn& y) {
  return x.rate == y.rate;
}
inline bool operator==(const UniformSojourn& x, const UniformSojourn& y) {
  return x.a == y.a && x.b == y.b;
}
inline bool operator==(const NeverPerish&, const NeverPerish&) { return true; }
inline bool operator==(const MixtureComponent& x, const MixtureComponent& y) {
  return x.weight == y.weight && x.spec == y.spec;
}
inline bool operator==(const MixtureSojourn& x, const MixtureSojourn& y) {
  return x.components == y.components;
}
inline bool operator==(const DepartureSpec& x, const DepartureSpec& y) {
  return x.value_ == y.value_;
}

inline DepartureSpec DepartureSpec::constant(double c) {
  if (!(c >= 0.0) || !std::isfinite(c))
    throw ConfigError("constant sojourn must be a finite nonnegative number");
  return DepartureSpec(ConstantSojourn{c});
}

inline DepartureSpec DepartureSpec::exponential(double rate) {
  if (!(rate > 0.0) || !std::isfinite(rate))
    throw ConfigError("exponential sojourn rate must be positive and finite");
  return DepartureSpec(ExponentialSojourn{rate});
}

inline DepartureSpec DepartureSpec::uniform(double a, double b) {
  if (!(a >= 0.0) || !(b > a) || !std::isfinite(b))
    throw ConfigError("uniform sojourn requires 0 <= a < b < inf");
  return DepartureSpec(UniformSojourn{a, b});
}

inline DepartureSpec DepartureSpec::mixture(std::vector<MixtureComponent> components) {
  if (components.empty()) throw ConfigError("mixture needs at least one component");
  double total = 0.0;
  for (const auto& comp : components) {
    if (!(comp.weight > 0.0) || !std::isfinite(comp.weight))
      throw ConfigError("mixture weights must be positive and finite");
    total += comp.weight;
  }
  // weights already normalized up to rounding are kept, so a serialized
  // mixture parses back bit-identical
  if (std::abs(total - 1.0) > 1e-12)
    for (auto& comp : components) comp.weight /= total;
  return DepartureSpec(MixtureSojourn{std::move(components)});
}

inline std::string_view DepartureSpec::kind() const noexcept {
  struct Visitor {
    std::string_view operator()(const ConstantSojourn&) const { return "const"; }
    std::string_view operator()(const ExponentialSojourn&) const { return "exp"; }
    std::string_view operator()(const UniformSojourn&) const { return "unif"; }
    std::string_view operator()(const NeverPerish&) const { return "never"; }
    std::string_view operator()(const MixtureSojourn&) const { return "mix"; }
  };
  return std::visit(Visitor{}, value_);
}

/// One draw of the maximum sojourn time; +infinity for NeverPerish.
inline double sample_sojourn(const DepartureSpec& spec, RandomStream& rng) {
  struct Visitor {
    RandomStream& rng;
    double operator()(const ConstantSojourn& s) const { return s.c; }
    double operator()(const ExponentialSojourn& s) const {
      return exponential_from_uniform(s.rate, rng.uniform());
    }
    double operator()(const UniformSojourn& s) const {
      return s.a + (s.b - s.a) * rng.uniform();
    }
    double operator()(const NeverPerish&) const { return kInfinity; }
    double operator()(const MixtureSojourn& s) const {
      const double u = rng.uniform();
      double acc = 0.0;
      for (const auto& comp : s.components) {
        acc += comp.weight;
        if (u < acc) return sample_sojourn(comp.spec, rng);
      }
      // rounding left u >= sum of weights
      return sample_sojourn(s.components.back().spec, rng);
    }
  };
  return std::visit(Visitor{rng}, spec.value());
}

/// mu([0, x]) for x in [0, +inf]; zero for negative x.
inline double departure_cdf(const DepartureSpec& spec, double x) {
  if (x < 0.0) return 0.0;
  struct Visitor {
    double x;
    double operator()(const ConstantSojourn& s) const { return x >= s.c ? 1.0 : 0.0; }
    double operator()(const ExponentialSojourn& s) const {
      if (x == kInfinity) return 1.0;
      return -std::expm1(-s.rate * x);
    }
    double operator()(const UniformSojourn& s) const {
      if (x <= s.a) return 0.0;
      if (x >= s.b) return 1.0;
      return (x - s.a) / (s.b - s.a);
    }
    double operator()(const NeverPerish&) const { return x == kInfinity ? 1.0 : 0.0; }
    double operator()(const MixtureSojourn& s) const {
      double acc = 0.0;
      for (const auto& comp : s.components) acc += comp.weight * departure_cdf(comp.spec, x);
      return acc;
    }
  };
  return std::visit(Visitor{x}, spec.value());
}

}  // namespace dynmatch
