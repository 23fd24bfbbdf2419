#include <gtest/gtest.h>

#include <random>

#include "udn/mdp.hpp"

using namespace udn;

namespace {

std::uint64_t binomial_by_pascal(int n, int k) {
  std::vector<std::vector<std::uint64_t>> c(n + 1, std::vector<std::uint64_t>(n + 1, 0));
  for (int i = 0; i <= n; ++i) {
    c[i][0] = 1;
    for (int j = 1; j <= i; ++j) c[i][j] = c[i - 1][j - 1] + (j <= i - 1 ? c[i - 1][j] : 0);
  }
  return k < 0 || k > n ? 0 : c[n][k];
}

}  // namespace

TEST(Binomial, MatchesPascalTriangle) {
  for (int n = 0; n <= 60; ++n)
    for (int k = -1; k <= n + 1; ++k) ASSERT_EQ(binomial(n, k), binomial_by_pascal(n, k)) << n << "," << k;
}

TEST(Binomial, Errors) {
  EXPECT_THROW(binomial(-1, 0), std::invalid_argument);
  EXPECT_THROW(binomial(200, 100), std::overflow_error);
}

TEST(StateSpaceBound, SingleSbsIsOne) {
  for (std::int64_t cap : {0, 3, 100}) {
    const std::vector<std::int64_t> caps = {cap};
    const auto b = state_space_bound(1, caps, 700);
    EXPECT_EQ(b.tight, 1u);
    EXPECT_EQ(b.loose, 1u);
  }
}

TEST(StateSpaceBound, TwoSbs) {
  const std::vector<std::int64_t> caps = {3, 3};
  const auto b = state_space_bound(2, caps, 6);
  EXPECT_EQ(b.tight, 5u);
  EXPECT_EQ(b.loose, 5u);
}

TEST(StateSpaceBound, TightNeverExceedsLoose) {
  for (std::size_t b = 1; b <= 3; ++b)
    for (std::int64_t a = 0; a <= 6; ++a)
      for (std::int64_t c = 0; c <= 6; ++c)
        for (std::int64_t d = 0; d <= 6; ++d) {
          const std::vector<std::int64_t> caps = {a, c, d};
          std::int64_t sum = 0;
          for (std::size_t s = 0; s < b; ++s) sum += caps[s];
          for (std::int64_t U = std::max<std::int64_t>(sum, 1); U <= sum + 3; ++U) {
            const auto bound = state_space_bound(b, caps, U);
            ASSERT_LE(bound.tight, bound.loose) << b << " U=" << U;
          }
        }
}

TEST(StateSpaceBound, LooseBoundGrowsPolynomially) {
  // C(U - b + 1, b - 1) ~ U^(b-1) / (b-1)!, so doubling U scales it by 2^(b-1).
  for (std::size_t b = 1; b <= 4; ++b) {
    const std::vector<std::int64_t> caps(b, 1);
    const double small = static_cast<double>(state_space_bound(b, caps, 100000).loose);
    const double large = static_cast<double>(state_space_bound(b, caps, 200000).loose);
    EXPECT_NEAR(large / small, std::pow(2.0, static_cast<double>(b) - 1.0), 1e-3) << b;
  }
}

TEST(StateSpaceBound, Errors) {
  const std::vector<std::int64_t> caps = {1, 2};
  EXPECT_THROW(state_space_bound(0, caps, 5), std::invalid_argument);
  EXPECT_THROW(state_space_bound(3, caps, 5), std::invalid_argument);
  const std::vector<std::int64_t> negative = {-1, 2};
  EXPECT_THROW(state_space_bound(1, negative, 5), std::invalid_argument);
}

TEST(EnumerateStates, Examples) {
  EXPECT_EQ(enumerate_states(1, std::vector<std::int64_t>{4}), 5u);
  EXPECT_EQ(enumerate_states(2, std::vector<std::int64_t>{2, 2}), 9u);
  EXPECT_EQ(enumerate_states(3, std::vector<std::int64_t>{1, 1, 1}), 8u);
}

TEST(EnumerateStates, EqualsProductOfCaps) {
  for (std::int64_t a = 0; a <= 4; ++a)
    for (std::int64_t c = 0; c <= 4; ++c)
      for (std::int64_t d = 0; d <= 4; ++d) {
        const std::vector<std::int64_t> caps = {a, c, d};
        EXPECT_EQ(enumerate_states(3, caps), static_cast<std::uint64_t>((a + 1) * (c + 1) * (d + 1)));
      }
}

TEST(EnumerateStates, RefusesHugeSpaces) {
  EXPECT_THROW(enumerate_states(3, std::vector<std::int64_t>{1000, 1000, 1000}), std::length_error);
}

namespace {

RadioParams random_params(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  RadioParams p;
  p.bandwidth_hz = 1e6 + 19e6 * u(rng);
  p.tx_power_w = 0.01 + u(rng);
  p.interference_coeff = std::pow(10.0, -16.0 + 6.0 * u(rng));
  p.congestion_coeff = std::pow(10.0, 1.0 + 6.0 * u(rng));
  return p;
}

}  // namespace

TEST(EstimateLoad, TopOfRange) {
  const RadioParams p;
  const double h = channel_gain(80.0, p);
  EXPECT_EQ(estimate_load(throughput(h, 1, p), h, p, 700), 1);
}

TEST(EstimateLoad, Seventeen) {
  const RadioParams p;
  const double h = channel_gain(80.0, p);
  EXPECT_EQ(estimate_load(throughput(h, 17, p), h, p, 700), 17);
}

TEST(EstimateLoad, RoundTripOverRandomParameters) {
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> dist(1.0, 900.0);
  for (int draw = 0; draw < 20; ++draw) {
    const RadioParams p = random_params(rng);
    const double h = channel_gain(dist(rng), p);
    for (int n = 1; n <= 700; ++n) ASSERT_EQ(estimate_load(throughput(h, n, p), h, p, 700), n) << draw;
  }
}

TEST(EstimateLoad, OutOfRangeRejected) {
  const RadioParams p;
  const double h = channel_gain(80.0, p);
  EXPECT_THROW(estimate_load(throughput(h, 1, p) * 1.01 + 1.0, h, p, 10), load_estimation_error);
  EXPECT_THROW(estimate_load(throughput(h, 50, p), h, p, 10), load_estimation_error);
  EXPECT_THROW(estimate_load(std::nan(""), h, p, 10), load_estimation_error);
  EXPECT_THROW(estimate_load(0.0, h, p, 0), std::invalid_argument);
}

TEST(EstimateLoad, NoisyRewardSnapsToNearest) {
  const RadioParams p;
  const double h = channel_gain(80.0, p);
  const double r5 = throughput(h, 5, p), r6 = throughput(h, 6, p);
  EXPECT_EQ(estimate_load(r5 - 0.1 * (r5 - r6), h, p, 700), 5);
  EXPECT_EQ(estimate_load(r6 + 0.1 * (r5 - r6), h, p, 700), 6);
}

TEST(Observation, SingleUserSingleSbs) {
  AssociationState s(1, 1);
  s.assign(0, 0);
  LoadCache cache(1);
  cache.record(0, 1.0);
  const std::vector<std::size_t> candidates = {0};
  const auto obs = build_observation(0, s, candidates, cache, false, {});
  EXPECT_EQ(obs.features, (std::vector<double>{1.0, 1.0}));
}

TEST(Observation, NonImitatorLengthIgnoresSimilarity) {
  const auto t = place_uniform(30, 4, 100.0, 3, {1e9, std::nullopt, 1e9});
  AssociationState s(30, 4);
  for (std::size_t u = 0; u < 30; ++u) s.assign(u, u % 4);
  LoadCache cache(t.candidate_sets[0].size());
  const auto plain = build_observation(0, s, t, cache, false);
  EXPECT_EQ(plain.size(), 2 * t.candidate_sets[0].size());
  const auto imit = build_observation(0, s, t, cache, true);
  EXPECT_EQ(imit.size(), 3 * t.candidate_sets[0].size());
}

TEST(Observation, FeaturesInUnitInterval) {
  std::mt19937_64 rng(4);
  const auto t = place_uniform(80, 5, 300.0, 8, {200.0, std::nullopt, 60.0});
  AssociationState s(80, 5);
  for (std::size_t u = 0; u < 80; ++u) {
    const auto& c = t.candidate_sets[u];
    s.assign(u, c[rng() % c.size()]);
  }
  for (std::size_t u = 0; u < 80; ++u) {
    LoadCache cache(t.candidate_sets[u].size());
    for (std::size_t k = 0; k < cache.loads.size(); ++k) cache.record(k, static_cast<double>(rng() % 100));
    for (bool imit : {false, true}) {
      const auto obs = build_observation(u, s, t, cache, imit);
      for (double x : obs.features) {
        ASSERT_GE(x, 0.0);
        ASSERT_LE(x, 1.0);
      }
    }
  }
}

TEST(Observation, ImitatorSharesOfSimilarUsers) {
  AssociationState s(4, 3);
  s.assign(0, 0);
  s.assign(1, 2);
  s.assign(2, 2);
  s.assign(3, 0);
  LoadCache cache(2);
  cache.record(0, 2.0);
  cache.record(1, 1.0);
  const std::vector<std::size_t> candidates = {0, 2};
  const std::vector<std::size_t> similar = {1, 2, 3};
  const auto obs = build_observation(0, s, candidates, cache, true, similar);
  const std::vector<double> expected = {0.5, 0.25, 1.0, 0.0, 1.0 / 3.0, 2.0 / 3.0};
  ASSERT_EQ(obs.size(), expected.size());
  for (std::size_t i = 0; i < expected.size(); ++i) EXPECT_DOUBLE_EQ(obs.features[i], expected[i]) << i;
}

TEST(LoadCache, KeepsLastEstimateUntilRevisited) {
  // Replay: visit candidate 0, then 1, then 0 again.
  const RadioParams p;
  const std::vector<double> gains = {channel_gain(50.0, p), channel_gain(90.0, p)};
  LoadCache cache(2);
  const std::vector<std::pair<std::size_t, int>> trace = {{0, 7}, {1, 3}, {0, 4}};
  std::vector<std::vector<double>> seen;
  for (const auto& [k, load] : trace) {
    cache.record(k, estimate_load(throughput(gains[k], load, p), gains[k], p, 100));
    seen.push_back(cache.loads);
  }
  EXPECT_EQ(seen[0], (std::vector<double>{7.0, 0.0}));
  EXPECT_EQ(seen[1], (std::vector<double>{7.0, 3.0}));
  EXPECT_EQ(seen[2], (std::vector<double>{4.0, 3.0}));
}
