#include <cmath>
#include <map>
#include <random>

#include <boost/math/distributions/chi_squared.hpp>
#include <gtest/gtest.h>

#include "econorder/sampler.hpp"

using namespace econorder;

namespace {

const Regime kMon = Regime::monopolistic;
const Regime kPer = Regime::perfect;

// p-value of Pearson's statistic for outcome counts against the uniform law
// over `support` outcomes.
double uniform_p_value(const std::map<MicroOutcome, std::uint64_t>& counts, std::size_t support, std::uint64_t draws) {
  const double expected = static_cast<double>(draws) / static_cast<double>(support);
  double stat = 0.0;
  for (const auto& [o, c] : counts) stat += (static_cast<double>(c) - expected) * (static_cast<double>(c) - expected) / expected;
  stat += expected * static_cast<double>(support - counts.size());  // never-drawn outcomes
  if (support < 2) return 1.0;
  boost::math::chi_squared dist(static_cast<double>(support - 1));
  return boost::math::cdf(boost::math::complement(dist, stat));
}

std::map<MicroOutcome, std::uint64_t> draw_counts(const RevenueGrid& grid, const EconomyConfig& cfg,
                                                  SamplerOptions opt, std::uint64_t draws) {
  OutcomeSampler s(grid, cfg, opt);
  std::map<MicroOutcome, std::uint64_t> counts;
  for (std::uint64_t i = 0; i < draws; ++i) ++counts[s.next()];
  return counts;
}

SamplerOptions options(SamplingMethod m, std::uint64_t seed = 3) {
  SamplerOptions o;
  o.seed = seed;
  o.method = m;
  o.burn_in = 5000;
  o.thinning = 40;
  return o;
}

}  // namespace

TEST(Sampler, constrained_two_firm_economy_visits_only_mixed_outcomes) {
  const RevenueGrid grid({1, 2});
  const EconomyConfig cfg(2, 3, kMon);
  for (auto m : {SamplingMethod::exact, SamplingMethod::chain}) {
    const auto counts = draw_counts(grid, cfg, options(m), 20'000);
    ASSERT_EQ(counts.size(), 2u);
    for (const auto& [o, c] : counts) {
      EXPECT_EQ(o.order(), (EconomicOrder{1, 1}));
      // Binomial(20000, 1/2): 3 sigma is about 212.
      EXPECT_NEAR(static_cast<double>(c), 10'000.0, 212.0);
    }
  }
}

TEST(Sampler, single_firm_single_outcome) {
  const RevenueGrid grid({1, 2, 3});
  const EconomyConfig cfg(1, 2, kMon);
  for (auto m : {SamplingMethod::exact, SamplingMethod::chain}) {
    const auto counts = draw_counts(grid, cfg, options(m), 100);
    ASSERT_EQ(counts.size(), 1u);
    EXPECT_EQ(counts.begin()->first.order(), (EconomicOrder{0, 1, 0}));
  }
}

TEST(Sampler, four_firm_frequencies_within_three_sigma) {
  const RevenueGrid grid({1, 2});
  const EconomyConfig cfg(4, 6, kMon);
  const auto cat = catalog(grid, cfg);
  const auto outcomes = sample_outcomes(grid, cfg, options(SamplingMethod::automatic), 100'000);
  const auto freq = empirical_frequencies(outcomes);
  for (const auto& e : cat.entries) {
    const double p = e.probability.convert_to<double>();
    const double se = std::sqrt(p * (1.0 - p) / 1e5);
    EXPECT_NEAR(freq.count(e.order) ? freq.at(e.order) : 0.0, p, 3.0 * se + 1e-12);
  }
}

TEST(Sampler, outcomes_uniform_exact_and_chain) {
  struct Case {
    RevenueGrid grid;
    EconomyConfig cfg;
  };
  const std::vector<Case> cases{
      {RevenueGrid({1, 2, 3}, {2, 1, 2}), EconomyConfig(3, 6, kMon)},
      {RevenueGrid({1, 2, 3}, {2, 1, 2}), EconomyConfig(4, 8, kPer)},
      {RevenueGrid({1, 2, 3, 4}, {1, 3, 1, 2}), EconomyConfig(3, 7, kPer)},
      {RevenueGrid({1, 2}, {2, 3}), EconomyConfig(3, std::nullopt, kMon)},
      {RevenueGrid({1, 2}, {2, 3}), EconomyConfig(3, std::nullopt, kPer)},
  };
  for (const auto& c : cases) {
    const auto support = total_outcomes(c.grid, c.cfg).convert_to<std::size_t>();
    ASSERT_LE(support, 200u);
    for (auto m : {SamplingMethod::exact, SamplingMethod::chain}) {
      const auto counts = draw_counts(c.grid, c.cfg, options(m), 60'000);
      EXPECT_EQ(counts.size(), support);
      EXPECT_GT(uniform_p_value(counts, support, 60'000), 0.01)
          << "regime " << to_string(c.cfg.regime) << " method " << static_cast<int>(m);
    }
  }
}

TEST(Sampler, chi_square_on_small_random_instances) {
  std::mt19937_64 rng(31);
  int tested = 0;
  while (tested < 12) {
    const auto n = static_cast<std::size_t>(std::uniform_int_distribution<int>(2, 3)(rng));
    std::vector<Money> lv;
    for (std::size_t k = 0; k < n; ++k) lv.push_back(static_cast<Money>(k + 1));
    std::vector<std::int64_t> g(n);
    for (auto& x : g) x = std::uniform_int_distribution<int>(1, 2)(rng);
    const std::int64_t firms = std::uniform_int_distribution<int>(2, 4)(rng);
    const Money pi = std::uniform_int_distribution<Money>(firms, firms * static_cast<Money>(n))(rng);
    const Regime regime = tested % 2 ? kPer : kMon;
    const RevenueGrid grid(lv, g);
    const EconomyConfig cfg(firms, pi, regime);
    if (enumerate_orders(grid, cfg).empty() || total_outcomes(grid, cfg) > 50) continue;
    const auto cat = catalog(grid, cfg);
    if (cat.entries.size() < 2) continue;
    FrequencyTable table;
    OutcomeSampler s(grid, cfg, options(SamplingMethod::exact, 100 + static_cast<std::uint64_t>(tested)));
    for (int i = 0; i < 100'000; ++i) table.add(s.next());
    const auto chi = chi_square_against(table, cat);
    EXPECT_TRUE(chi.pass) << "p = " << chi.p_value;
    EXPECT_TRUE(chi.support_ok);
    ++tested;
  }
}

// Thinned chain draws are still mildly correlated, so the band is 4 sigma of
// the iid standard error.
TEST(Sampler, three_level_chain_matches_catalog) {
  const RevenueGrid grid({1, 2, 3});
  const EconomyConfig cfg(6, 12, kMon);
  const auto cat = catalog(grid, cfg);
  auto opt = options(SamplingMethod::chain, 9);
  opt.thinning = 60;
  FrequencyTable table;
  OutcomeSampler s(grid, cfg, opt);
  EXPECT_FALSE(s.exact());
  for (int i = 0; i < 100'000; ++i) table.add(s.next());
  for (const auto& e : cat.entries) {
    const double p = e.probability.convert_to<double>();
    EXPECT_NEAR(table.frequency(e.order), p, 4.0 * std::sqrt(p * (1.0 - p) / 1e5) + 1e-12) << to_string(e.order);
  }
  EXPECT_GT(s.acceptance_rate(), 0.0);
  EXPECT_LT(s.acceptance_rate(), 1.0);
}

TEST(Sampler, same_seed_same_stream) {
  const RevenueGrid grid({1, 2, 3}, {2, 1, 2});
  for (Regime r : {kMon, kPer}) {
    const EconomyConfig cfg(4, 8, r);
    for (auto m : {SamplingMethod::exact, SamplingMethod::chain}) {
      const auto a = sample_outcomes(grid, cfg, options(m, 77), 500);
      const auto b = sample_outcomes(grid, cfg, options(m, 77), 500);
      const auto c = sample_outcomes(grid, cfg, options(m, 78), 500);
      EXPECT_EQ(a, b);
      EXPECT_NE(a, c);
    }
  }
}

TEST(Sampler, automatic_switches_to_chain_above_cap) {
  const RevenueGrid grid({1, 2, 3});
  const EconomyConfig cfg(12, 24, kMon);
  auto opt = options(SamplingMethod::automatic);
  opt.cap = 100;
  EXPECT_FALSE(OutcomeSampler(grid, cfg, opt).exact());
  opt.cap = kDefaultOutcomeCap;
  EXPECT_TRUE(OutcomeSampler(grid, cfg, opt).exact());
}

TEST(Sampler, infeasible_economy_is_refused) {
  for (auto m : {SamplingMethod::exact, SamplingMethod::chain}) {
    try {
      OutcomeSampler(RevenueGrid({2, 4}), EconomyConfig(3, 7, kMon), options(m));
      FAIL();
    } catch (const Error& e) {
      EXPECT_EQ(e.kind(), ErrorKind::infeasible);
    }
  }
}

TEST(EmpiricalFrequencies, basics) {
  const RevenueGrid grid({1, 2});
  const auto groups = enumerate_outcomes(grid, EconomyConfig(2, std::nullopt, kMon));
  std::vector<MicroOutcome> all;
  for (const auto& g : groups)
    for (const auto& o : g.outcomes) all.push_back(o);
  ASSERT_EQ(all.size(), 4u);
  auto freq = empirical_frequencies(all);
  EXPECT_DOUBLE_EQ(freq.at(EconomicOrder{1, 1}), 0.5);
  EXPECT_DOUBLE_EQ(freq.at(EconomicOrder{0, 2}), 0.25);

  freq = empirical_frequencies(std::vector<MicroOutcome>{all.front()});
  EXPECT_EQ(freq.size(), 1u);
  EXPECT_DOUBLE_EQ(freq.begin()->second, 1.0);

  EXPECT_THROW(empirical_frequencies(std::vector<MicroOutcome>{}), Error);
}

TEST(ChiSquare, flags_wrong_distribution_and_support) {
  const auto cat = catalog(RevenueGrid({1, 2}), EconomyConfig(2, std::nullopt, kMon));
  FrequencyTable skewed;
  for (int i = 0; i < 3000; ++i) skewed.add(EconomicOrder{2, 0});
  for (int i = 0; i < 1000; ++i) skewed.add(EconomicOrder{1, 1});
  EXPECT_FALSE(chi_square_against(skewed, cat).pass);

  FrequencyTable outside;
  outside.add(EconomicOrder{1, 1});
  outside.add(EconomicOrder{3, 0});
  EXPECT_FALSE(chi_square_against(outside, cat).support_ok);
}
