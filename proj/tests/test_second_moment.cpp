#include <gtest/gtest.h>

#include <cmath>
#include <memory>
#include <random>

#include "rcs/experiments.hpp"
#include "rcs/second_moment.hpp"

using namespace rcs;

namespace {

BitString bits(const char* s) { return parse_bitstring(s); }

const Params kTwoOne(2, Rational(1));

// O(4^n) double sum with the pair probability written out from scratch.
double brute_second_moment(const DyadicMeasure& mu, const HittingTarget& a, std::size_t n, const Params& q) {
  const double gamma = q.gamma().to_double();
  const std::size_t k = static_cast<std::size_t>(q.k());
  double total = 0;
  for (std::uint64_t s = 0; s < (1u << n); ++s) {
    BitString bs = bits_of_index(s, n);
    if (!a.hits(bs)) continue;
    for (std::uint64_t t = 0; t < (1u << n); ++t) {
      BitString bt = bits_of_index(t, n);
      if (!a.hits(bt)) continue;
      std::size_t m = 0;
      while (m < n && bs.bits[m] == bt.bits[m]) ++m;
      std::size_t shared_blocks = m / k, blocks = n / k;
      double p_both = std::pow(q.membership_probability(), static_cast<double>(2 * blocks - shared_blocks));
      total += mu.mass(bs) * mu.mass(bt) * std::exp2(2 * gamma * static_cast<double>(n)) * p_both;
    }
  }
  return total;
}

double brute_common_bound(const DyadicMeasure& mu, const HittingTarget& a, std::size_t n, const Params& q) {
  double total = 0;
  for (std::uint64_t s = 0; s < (1u << n); ++s) {
    for (std::uint64_t t = 0; t < (1u << n); ++t) {
      BitString bs = bits_of_index(s, n), bt = bits_of_index(t, n);
      if (!a.hits(bs) || !a.hits(bt)) continue;
      std::size_t m = n - static_cast<std::size_t>(std::bit_width(s ^ t));
      total += mu.mass(bs) * mu.mass(bt) * std::exp2(q.gamma().to_double() * static_cast<double>(m));
    }
  }
  return total;
}

// Exact distribution of Y_n by enumerating every membership pattern of the
// K-ary strings of length 1..n/k (only feasible for tiny trees).
std::pair<double, double> enumerated_moments(const DyadicMeasure& mu, const HittingTarget& a, std::size_t n,
                                             const Params& q) {
  const std::size_t depth = n / static_cast<std::size_t>(q.k());
  std::vector<KString> nodes;
  for (std::uint64_t i = 1;; ++i) {
    KString s = f_enumerate(i, q);
    if (s.size() > depth) break;
    nodes.push_back(s);
  }
  const double p = q.membership_probability();
  YStatistic y(mu, a, n, q);
  double m1 = 0, m2 = 0;
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << nodes.size()); ++mask) {
    double w = 1;
    std::set<KString> present;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      bool in = (mask >> i) & 1;
      w *= in ? p : 1 - p;
      if (in) present.insert(nodes[i]);
    }
    std::vector<std::uint64_t> codes;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      const KString& s = nodes[i];
      if (s.size() != depth) continue;
      bool alive = true;
      for (std::size_t j = 1; j <= depth; ++j) alive = alive && present.count(s.prefix(j));
      if (!alive) continue;
      std::uint64_t c = 0;
      for (auto sym : s.symbols) c = (c << q.k()) | sym;
      codes.push_back(c);
    }
    std::sort(codes.begin(), codes.end());
    double v = y.evaluate(codes);
    m1 += w * v;
    m2 += w * v * v;
  }
  return {m1, m2};
}

}  // namespace

TEST(YStatistic, Examples) {
  DyadicMeasure mu = build_uniform(4);
  HittingTarget all = HittingTarget::whole_space();
  SampledTree empty(kTwoOne, 1, 0, {{0}, {}});
  EXPECT_EQ(y_statistic(empty, mu, all, 2), 0.0);
  SampledTree one(kTwoOne, 1, 0, {{0}, {3}});
  EXPECT_DOUBLE_EQ(y_statistic(one, mu, all, 2), 0.5);
  std::vector<std::uint64_t> level2(16);
  for (std::uint64_t i = 0; i < 16; ++i) level2[i] = i;
  SampledTree full(kTwoOne, 2, 0, {{0}, {0, 1, 2, 3}, level2});
  EXPECT_DOUBLE_EQ(y_statistic(full, mu, all, 4), std::exp2(4 * 0.5));
  EXPECT_THROW(y_statistic(one, mu, all, 4), std::invalid_argument);
  EXPECT_THROW(YStatistic(mu, all, 3, kTwoOne), std::invalid_argument);
  EXPECT_THROW(YStatistic(mu, all, 6, kTwoOne), std::invalid_argument);
}

TEST(HitFlags, MatchesMeets) {
  HittingTarget a(ClopenSet({bits("01"), bits("1101")}));
  auto flags = hit_flags(a, 3);
  for (std::uint64_t i = 0; i < 8; ++i) EXPECT_EQ(flags[i] != 0, a.hits(bits_of_index(i, 3))) << i;
}

TEST(FirstMoment, Examples) {
  Params q = kTwoOne;
  EXPECT_EQ(exact_first_moment(build_uniform(4), HittingTarget::whole_space(), 4, q).exact, Rational(1));
  EXPECT_EQ(exact_first_moment(build_uniform(4), HittingTarget(ClopenSet({bits("1")})), 4, q).exact, Rational(1, 2));
  EXPECT_EQ(exact_first_moment(build_diluted(8), HittingTarget(ClopenSet({bits("11")})), 4, q).exact, Rational(0));
  EXPECT_EQ(exact_first_moment(build_diluted(8), HittingTarget(ClopenSet({bits("11")})), 8, q).value, 0.0);
}

TEST(SecondMoment, WorkedCase) {
  MomentReport r = moment_report(build_uniform(2), HittingTarget::whole_space(), 2, kTwoOne);
  EXPECT_EQ(r.first_moment.exact, Rational(1));
  EXPECT_EQ(r.second_moment.exact, Rational(5, 4));
  EXPECT_DOUBLE_EQ(r.pz.value, 0.8);
  EXPECT_FALSE(r.pz.clamped);
  EXPECT_EQ(exact_second_moment(build_diluted(4), HittingTarget(ClopenSet({bits("11")})), 4, kTwoOne).exact,
            Rational(0));
}

TEST(SecondMoment, BruteForceOracle) {
  std::mt19937_64 rng(21);
  for (int t = 0; t < 40; ++t) {
    int k = 1 + static_cast<int>(rng() % 4);
    Params q(k, rng() % 2 ? Rational(1) : Rational(1 + static_cast<std::int64_t>(rng() % 3), 2));
    std::size_t n = static_cast<std::size_t>(k) * (1 + rng() % (8 / k));
    DyadicMeasure mu = rng() % 2 ? build_uniform(n) : build_diluted(n);
    HittingTarget a(random_clopen(rng(), n, 3));
    double expect = brute_second_moment(mu, a, n, q);
    EXPECT_NEAR(exact_second_moment(mu, a, n, q).value, expect, 1e-10 * std::max(1.0, expect));
    double bound = brute_common_bound(mu, a, n, q);
    EXPECT_NEAR(second_moment_common_bound(mu, a, n, q), bound, 1e-10 * std::max(1.0, bound));
  }
}

TEST(SecondMoment, EnumeratedDistribution) {
  struct Case {
    Params q;
    std::size_t n;
  };
  for (const Case& c : {Case{Params(1, Rational(1)), 3}, Case{kTwoOne, 2}, Case{Params(1, Rational(1, 2)), 3}}) {
    for (const ClopenSet& s : {ClopenSet::whole_space(), ClopenSet({bits("01")}), ClopenSet({bits("1"), bits("001")})}) {
      DyadicMeasure mu = build_diluted(c.n);
      HittingTarget a(s);
      auto [m1, m2] = enumerated_moments(mu, a, c.n, c.q);
      EXPECT_NEAR(exact_first_moment(mu, a, c.n, c.q).value, m1, 1e-12);
      EXPECT_NEAR(exact_second_moment(mu, a, c.n, c.q).value, m2, 1e-12);
    }
  }
}

TEST(SecondMoment, Invariants) {
  std::mt19937_64 rng(22);
  for (int t = 0; t < 60; ++t) {
    int k = 1 + static_cast<int>(rng() % 4);
    Params q(k, Rational(1));
    std::size_t n = static_cast<std::size_t>(k) * (1 + rng() % (10 / k));
    DyadicMeasure mu = rng() % 2 ? build_uniform(n) : build_diluted(n);
    HittingTarget a(random_clopen(rng(), n, 4));
    MomentReport r = moment_report(mu, a, n, q);
    ASSERT_GE(r.first_moment.value, r.mu_a.value - 1e-12);
    ASSERT_GE(r.pz.value, 0.0);
    ASSERT_LE(r.pz.value, 1.0);
    if (r.second_moment.value > 0) ASSERT_GE(r.pz.value, r.mu_a.value * r.mu_a.value / r.second_moment.value - 1e-12);
    ASSERT_LE(r.second_moment.value, r.second_moment_common_bound * (1 + 1e-12));
    if (q.gamma() < Rational(1)) {
      ASSERT_LE(r.second_moment.value, energy(mu, q.gamma().to_double()).total * (1 + 1e-12));
    }
  }
}

TEST(SecondMoment, ExactOverflowFallsBack) {
  Params q(1, Rational(40));
  MomentValue v = exact_second_moment(build_uniform(20), HittingTarget::whole_space(), 20, q);
  EXPECT_GT(v.value, 0);
  EXPECT_FALSE(v.exact.has_value());
}

TEST(PzBound, Examples) {
  EXPECT_DOUBLE_EQ(pz_bound(1, 1.25).value, 0.8);
  EXPECT_DOUBLE_EQ(pz_bound(3, 9).value, 1.0);
  EXPECT_DOUBLE_EQ(pz_bound(0, 2).value, 0.0);
  EXPECT_EQ(pz_bound(0, 0).value, 0.0);
  EXPECT_TRUE(pz_bound(2, 3).clamped);
  EXPECT_THROW(pz_bound(-1, 1), std::invalid_argument);
  EXPECT_THROW(pz_bound(1, 0), std::invalid_argument);
}

TEST(HittingBound, Examples) {
  HittingBound b = hitting_lower_bound(build_uniform(12), HittingTarget::whole_space(), kTwoOne);
  EXPECT_NEAR(b.bound, 2 - std::sqrt(2.0), 1e-9);
  EXPECT_LE(b.bound, survival_limit(kTwoOne));
  EXPECT_EQ(hitting_lower_bound(build_diluted(8), HittingTarget(ClopenSet({bits("11")})), kTwoOne).bound, 0.0);
  HittingBound diverge = hitting_lower_bound(build_uniform(4), HittingTarget::whole_space(), Params(1, Rational(1)));
  EXPECT_EQ(diverge.bound, 0.0);
  EXPECT_FALSE(diverge.diagnostic.empty());

  std::vector<BitString> support;
  DyadicMeasure dil = build_diluted(8);
  for (std::uint64_t i = 0; i < 256; ++i) {
    if (dil.level(8)[i] > 0) support.push_back(bits_of_index(i, 8));
  }
  HittingBound d = hitting_lower_bound(dil, HittingTarget(ClopenSet(support)), Params(4, Rational(1)));
  EXPECT_DOUBLE_EQ(d.mu_a, 1.0);
  EXPECT_GE(d.bound, 1 / 4.4445);
}

TEST(MonteCarlo, MomentsMatchExact) {
  struct Case {
    Params q;
    std::size_t depth;
    bool diluted;
    ClopenSet target;
  };
  std::vector<Case> cases{{kTwoOne, 2, false, ClopenSet::whole_space()},
                          {kTwoOne, 4, true, ClopenSet({bits("1000"), bits("001")})},
                          {Params(1, Rational(1, 2)), 8, false, ClopenSet({bits("0110")})},
                          {Params(4, Rational(2)), 2, true, ClopenSet({bits("10")})}};
  for (const Case& c : cases) {
    std::size_t n = static_cast<std::size_t>(c.q.k()) * c.depth;
    auto mu = std::make_shared<const DyadicMeasure>(c.diluted ? build_diluted(n) : build_uniform(n));
    TrialPlan plan{c.q, c.depth, 100000, 99, HittingTarget(c.target), mu, 1};
    YMonteCarlo mc = run_y_monte_carlo(plan);
    MomentReport r = moment_report(*mu, HittingTarget(c.target), n, c.q);
    EXPECT_NEAR(mc.y.mean, r.first_moment.value, 4 * mc.y.standard_error()) << n;
    EXPECT_NEAR(mc.y_squared.mean, r.second_moment.value, 4 * mc.y_squared.standard_error()) << n;
    ProportionInterval pi = proportion_interval(mc.positive, mc.trials, 3);
    EXPECT_GE(pi.high, r.pz.value);
    EXPECT_EQ(mc.monotonicity_failures, 0u);
  }
}
