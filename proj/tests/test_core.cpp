#include <gtest/gtest.h>

#include <cmath>
#include <set>
#include <vector>

#include "dynmatch/compatibility.hpp"
#include "dynmatch/config.hpp"
#include "dynmatch/departure.hpp"
#include "dynmatch/random.hpp"
#include "support.hpp"

using namespace dynmatch;

TEST(Random, SplitmixIsDeterministicAndMixesWords) {
  EXPECT_EQ(splitmix64(0), splitmix64(0));
  EXPECT_NE(mix_seed(7, {1, 2}), mix_seed(7, {2, 1}));
  EXPECT_NE(mix_seed(7, {1}), mix_seed(8, {1}));
  // h0 = splitmix64(master), h1 = splitmix64(h0 ^ w0)
  EXPECT_EQ(mix_seed(42, {5}), splitmix64(splitmix64(42) ^ 5));
  EXPECT_EQ(mix_seed(42, {}), splitmix64(42));
}

TEST(Random, SameSeedReproducesSequence) {
  RandomStream a(99, StreamTag::kArrivals), b(99, StreamTag::kArrivals);
  RandomStream c(99, StreamTag::kSojourns);
  bool differs = false;
  for (int i = 0; i < 1000; ++i) {
    const auto x = a.next_u64();
    EXPECT_EQ(x, b.next_u64());
    differs = differs || x != c.next_u64();
  }
  EXPECT_TRUE(differs);
}

TEST(Random, UniformRanges) {
  RandomStream g(3);
  for (int i = 0; i < 100000; ++i) {
    const double u = g.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    const double v = g.uniform_positive();
    ASSERT_GT(v, 0.0);
    ASSERT_LE(v, 1.0);
    ASSERT_LT(g.index(7), 7u);
  }
}

TEST(Random, GeometricFailuresMean) {
  RandomStream g(11);
  const double p = 0.05;
  std::vector<double> v;
  for (int i = 0; i < 200000; ++i) v.push_back(static_cast<double>(g.geometric_failures(p)));
  const auto m = testsupport::moments(v);
  EXPECT_NEAR(m.mean, (1 - p) / p, 3 * m.se);
  EXPECT_EQ(g.geometric_failures(1.0), 0u);
  EXPECT_EQ(g.geometric_failures(0.0), std::numeric_limits<std::uint64_t>::max());
}

TEST(Interarrival, InverseCdfExamples) {
  const double u = 1.0 - std::exp(-1.0);
  EXPECT_NEAR(exponential_from_uniform(1.0, u), 1.0, 1e-15);
  EXPECT_NEAR(exponential_from_uniform(2.0, u), 0.5, 1e-15);
  EXPECT_EQ(exponential_from_uniform(3.0, 0.0), 0.0);
}

TEST(Interarrival, UnitWindowCountsArePoisson) {
  // 10^4 unit windows at m = 1000
  RandomStream g(2024, StreamTag::kArrivals);
  const int windows = 10000;
  std::vector<double> counts(windows, 0.0);
  double t = sample_interarrival(1000.0, g);
  while (t < windows) {
    counts[static_cast<std::size_t>(t)] += 1.0;
    t += sample_interarrival(1000.0, g);
  }
  const auto m = testsupport::moments(counts);
  EXPECT_NEAR(m.mean, 1000.0, 1.0);
  EXPECT_GE(m.var / m.mean, 0.95);
  EXPECT_LE(m.var / m.mean, 1.05);
}

TEST(Departure, Validation) {
  EXPECT_THROW(DepartureSpec::constant(-1), ConfigError);
  EXPECT_THROW(DepartureSpec::constant(kInfinity), ConfigError);
  EXPECT_THROW(DepartureSpec::exponential(0), ConfigError);
  EXPECT_THROW(DepartureSpec::uniform(1, 1), ConfigError);
  EXPECT_THROW(DepartureSpec::uniform(-0.5, 1), ConfigError);
  EXPECT_THROW(DepartureSpec::mixture({}), ConfigError);
  EXPECT_THROW(DepartureSpec::mixture({{0.0, DepartureSpec::constant(1)}}), ConfigError);
  EXPECT_NO_THROW(DepartureSpec::constant(0));
}

TEST(Departure, MixtureWeightsNormalize) {
  const auto spec = DepartureSpec::mixture(
      {{3.0, DepartureSpec::constant(1)}, {1.0, DepartureSpec::exponential(2)}, {0.1, DepartureSpec::never()}});
  const auto& mix = std::get<MixtureSojourn>(spec.value());
  double total = 0.0;
  for (const auto& c : mix.components) total += c.weight;
  EXPECT_NEAR(total, 1.0, 1e-12);
  EXPECT_EQ(spec.kind(), "mix");
}

TEST(Departure, SamplingExamples) {
  RandomStream g(5);
  EXPECT_EQ(sample_sojourn(DepartureSpec::constant(1), g), 1.0);
  EXPECT_EQ(sample_sojourn(DepartureSpec::never(), g), kInfinity);
  const auto mix = DepartureSpec::mixture(
      {{0.5, DepartureSpec::constant(1)}, {0.5, DepartureSpec::constant(3)}});
  double acc = 0.0;
  for (int i = 0; i < 100000; ++i) acc += sample_sojourn(mix, g);
  EXPECT_NEAR(acc / 100000, 2.0, 0.02);
}

TEST(Departure, CdfExamples) {
  EXPECT_EQ(departure_cdf(DepartureSpec::constant(1), 0.5), 0.0);
  EXPECT_EQ(departure_cdf(DepartureSpec::constant(1), 1.0), 1.0);
  EXPECT_NEAR(departure_cdf(DepartureSpec::exponential(1), 1.0), 0.63212055882855767, 1e-15);
  EXPECT_EQ(departure_cdf(DepartureSpec::never(), 1e300), 0.0);
  EXPECT_EQ(departure_cdf(DepartureSpec::never(), kInfinity), 1.0);
  EXPECT_EQ(departure_cdf(DepartureSpec::uniform(1, 3), 2.0), 0.5);
  const auto mix = DepartureSpec::mixture(
      {{1.0, DepartureSpec::constant(1)}, {3.0, DepartureSpec::uniform(0, 2)}});
  EXPECT_NEAR(departure_cdf(mix, 1.0), 0.25 + 0.75 * 0.5, 1e-15);
}

// Every sampler agrees with its CDF at the 0.1% KS level.
TEST(Departure, SamplesMatchCdfProperty) {
  RandomStream gen(77);
  std::vector<DepartureSpec> specs = {
      DepartureSpec::constant(0.7), DepartureSpec::exponential(1.0), DepartureSpec::exponential(4.5),
      DepartureSpec::uniform(0.5, 1.5), DepartureSpec::never(),
      DepartureSpec::mixture({{0.3, DepartureSpec::constant(1)}, {0.7, DepartureSpec::exponential(1)}})};
  for (int i = 0; i < 6; ++i) specs.push_back(testsupport::random_departure(gen));
  for (std::size_t k = 0; k < specs.size(); ++k) {
    RandomStream g(1000 + k);
    std::vector<double> xs;
    for (int i = 0; i < 100000; ++i) xs.push_back(sample_sojourn(specs[k], g));
    const double d = testsupport::ks_statistic(xs, [&](double x) { return departure_cdf(specs[k], x); });
    EXPECT_LE(d, testsupport::ks_critical_001(xs.size())) << "spec " << k << " kind " << specs[k].kind();
  }
}

TEST(Compatibility, SuccessRateWithinThreeStandardErrors) {
  for (double p : {0.005, 0.1, 0.5}) {
    PairCompatibilityOracle o(9, p);
    int hits = 0;
    const int n = 100000;
    for (int i = 0; i < n; ++i) hits += o.query() ? 1 : 0;
    const double se = std::sqrt(p * (1 - p) / n);
    EXPECT_NEAR(hits / static_cast<double>(n), p, 3 * se);
    EXPECT_EQ(o.queries(), static_cast<std::uint64_t>(n));
  }
}

// Skip-ahead scanning has the law of independent per-position draws: each
// position succeeds with probability p and the count is Binomial(n, p).
TEST(Compatibility, ScanMatchesBernoulliLaw) {
  const double p = 0.03;
  const std::size_t n = 50;
  PairCompatibilityOracle o(123, p);
  std::vector<double> per_position(n, 0.0), counts;
  const int reps = 200000;
  for (int r = 0; r < reps; ++r) {
    std::size_t c = 0, last = 0;
    bool first = true;
    o.scan(n, [&](std::size_t j) {
      ASSERT_LT(j, n);
      if (!first) {
        ASSERT_GT(j, last);
      }
      first = false;
      last = j;
      per_position[j] += 1.0;
      ++c;
    });
    counts.push_back(static_cast<double>(c));
  }
  const double se = std::sqrt(p * (1 - p) / reps);
  for (std::size_t j = 0; j < n; ++j) EXPECT_NEAR(per_position[j] / reps, p, 4 * se) << j;
  const auto m = testsupport::moments(counts);
  EXPECT_NEAR(m.mean, n * p, 3 * m.se);
  EXPECT_NEAR(m.var, n * p * (1 - p), 0.05 * n * p * (1 - p));
  EXPECT_EQ(o.queries(), static_cast<std::uint64_t>(n) * reps);
}

TEST(Compatibility, CertainCompatibility) {
  PairCompatibilityOracle o(1, 1.0);
  std::vector<std::size_t> hits;
  o.scan(5, [&](std::size_t j) { hits.push_back(j); });
  EXPECT_EQ(hits, (std::vector<std::size_t>{0, 1, 2, 3, 4}));
  o.scan(0, [&](std::size_t) { FAIL(); });
}

TEST(Config, Validation) {
  MarketConfig c;
  EXPECT_NO_THROW(validate(c));
  EXPECT_EQ(c.compat_probability(), 0.005);
  auto bad = c;
  bad.d = 2000;
  EXPECT_THROW(validate(bad), ConfigError);
  bad = c;
  bad.m = 0;
  EXPECT_THROW(validate(bad), ConfigError);
  bad = c;
  bad.T = -1;
  EXPECT_THROW(validate(bad), ConfigError);
  bad = c;
  bad.d = 0;
  EXPECT_THROW(validate(bad), ConfigError);
  bad = c;
  bad.burn_in = c.T;
  EXPECT_THROW(validate(bad), ConfigError);
  bad = c;
  bad.d = bad.m;  // p = 1 is allowed
  EXPECT_NO_THROW(validate(bad));
}

TEST(Config, PolicyNames) {
  for (auto p : {PolicyKind::Greedy, PolicyKind::Patient, PolicyKind::GreedySojourn})
    EXPECT_EQ(parse_policy(to_string(p)), p);
  EXPECT_THROW(parse_policy("eager"), ConfigError);
}
