#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "udn/association.hpp"
#include "udn/topology.hpp"

using namespace udn;

TEST(Placement, DefaultScaleHasNonemptyCandidateSets) {
  const auto t = place_uniform(700, 10, 1000.0, 42);
  EXPECT_EQ(t.num_users(), 700u);
  EXPECT_EQ(t.num_sbs(), 10u);
  for (const auto& c : t.candidate_sets) {
    ASSERT_FALSE(c.empty());
    EXPECT_TRUE(std::is_sorted(c.begin(), c.end()));
  }
}

TEST(Placement, SingleUserSingleSbs) {
  const auto t = place_uniform(1, 1, 100.0, 123);
  ASSERT_EQ(t.candidate_sets.size(), 1u);
  EXPECT_EQ(t.candidate_sets[0], std::vector<std::size_t>{0});
}

TEST(Placement, SameSeedSameTopology) {
  EXPECT_EQ(place_uniform(5, 2, 10.0, 7), place_uniform(5, 2, 10.0, 7));
  EXPECT_FALSE(place_uniform(5, 2, 10.0, 7) == place_uniform(5, 2, 10.0, 8));
}

TEST(Placement, PositionsInsideArea) {
  const auto t = place_uniform(200, 6, 250.0, 3);
  for (const auto& p : t.user_positions) {
    EXPECT_GE(p.x, 0.0);
    EXPECT_LE(p.x, 250.0);
    EXPECT_GE(p.y, 0.0);
    EXPECT_LE(p.y, 250.0);
  }
}

TEST(Placement, RejectsEmptyOrBadArea) {
  EXPECT_THROW(place_uniform(0, 1, 10.0, 1), std::invalid_argument);
  EXPECT_THROW(place_uniform(1, 0, 10.0, 1), std::invalid_argument);
  EXPECT_THROW(place_uniform(1, 1, 0.0, 1), std::invalid_argument);
  EXPECT_THROW(place_uniform(1, 1, -5.0, 1), std::invalid_argument);
}

TEST(Candidates, OutOfRangeUserFallsBackToNearest) {
  const std::vector<Point> users = {{0, 0}};
  const std::vector<Point> sbss = {{100, 0}, {50, 0}, {50, 0}};
  const auto sets = compute_candidate_sets(users, sbss, 10.0);
  EXPECT_EQ(sets[0], std::vector<std::size_t>{1});
}

TEST(Candidates, RadiusIsInclusive) {
  const auto sets = compute_candidate_sets({{0, 0}}, {{3, 4}, {6, 8}}, 5.0);
  EXPECT_EQ(sets[0], std::vector<std::size_t>{0});
}

TEST(Similarity, ZeroRadiusIsIdentity) {
  const std::vector<Point> users = {{0, 0}, {1, 0}, {2, 0}};
  EXPECT_EQ(compute_similarity(users, 0.0), BoolMatrix::identity(3));
}

TEST(Similarity, PairWithinRadius) {
  const auto f = compute_similarity({{0, 0}, {3, 4}}, 10.0);
  EXPECT_TRUE(f(0, 1));
  EXPECT_TRUE(f(1, 0));
}

TEST(Similarity, LineMatchesPairwiseDistances) {
  std::vector<Point> users;
  for (int i = 0; i < 5; ++i) users.push_back({static_cast<double>(i), 0.0});
  const auto f = compute_similarity(users, 1.5);
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 5; ++j) EXPECT_EQ(f(i, j), std::abs(i - j) <= 1.5) << i << "," << j;
}

TEST(Similarity, NegativeRadiusRejected) {
  EXPECT_THROW(compute_similarity(std::vector<Point>{{0, 0}}, -1.0), std::invalid_argument);
}

TEST(Similarity, SymmetricWithTrueDiagonalOverRandomSeeds) {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    PlacementOptions opt;
    opt.similarity_radius = 30.0 + static_cast<double>(seed % 7) * 10.0;
    const auto t = place_uniform(60, 4, 300.0, seed, opt);
    ASSERT_TRUE(t.similarity.is_symmetric()) << seed;
    ASSERT_TRUE(t.sbs_adjacency.is_symmetric()) << seed;
    for (std::size_t u = 0; u < t.num_users(); ++u) ASSERT_TRUE(t.similarity(u, u));
    for (std::size_t s = 0; s < t.num_sbs(); ++s) ASSERT_FALSE(t.sbs_adjacency(s, s));
  }
}

TEST(SbsGraph, ZeroRadiusFallsBackToCompleteGraph) {
  const auto g = build_sbs_graph({{0, 0}, {10, 0}, {0, 10}}, 0.0);
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j) EXPECT_EQ(g(i, j), i != j);
}

TEST(SbsGraph, AllPairsWithinRadius) {
  const auto g = build_sbs_graph({{0, 0}, {10, 0}, {0, 10}}, 100.0);
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j) EXPECT_EQ(g(i, j), i != j);
}

TEST(SbsGraph, SquareMatchesPairwiseDistances) {
  const std::vector<Point> sbss = {{0, 0}, {200, 0}, {0, 200}, {200, 200}};
  const auto g = build_sbs_graph(sbss, 250.0);
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 4; ++j) {
      const double d = std::hypot(sbss[i].x - sbss[j].x, sbss[i].y - sbss[j].y);
      EXPECT_EQ(g(i, j), d > 0.0 && d <= 250.0) << i << "," << j;
    }
  EXPECT_TRUE(is_connected(g));
}

TEST(SbsGraph, DisconnectedResultIsReplaced) {
  // Two far-apart pairs: each pair is linked but the pairs are not.
  const auto g = build_sbs_graph({{0, 0}, {1, 0}, {1000, 0}, {1001, 0}}, 5.0);
  EXPECT_TRUE(is_connected(g));
  EXPECT_TRUE(g(0, 3));
}

TEST(SimilarityLists, SkipDiagonal) {
  BoolMatrix f = BoolMatrix::identity(3);
  f.set_symmetric(0, 2, true);
  const auto lists = similarity_lists(f);
  EXPECT_EQ(lists[0], std::vector<std::size_t>{2});
  EXPECT_TRUE(lists[1].empty());
  EXPECT_EQ(lists[2], std::vector<std::size_t>{0});
}

TEST(Association, LoadsTrackAssignments) {
  AssociationState s(4, 2);
  EXPECT_EQ(s.active_users(), 0);
  s.assign(0, 1);
  s.assign(1, 1);
  s.assign(2, 0);
  EXPECT_EQ(s.load(0), 1);
  EXPECT_EQ(s.load(1), 2);
  s.assign(1, 0);
  EXPECT_EQ(s.load(0), 2);
  EXPECT_EQ(s.load(1), 1);
  s.detach(2);
  EXPECT_EQ(s.sbs_of(2), kUnassociated);
  EXPECT_EQ(s.active_users(), 2);
  EXPECT_TRUE(s.consistent());
  EXPECT_THROW(s.assign(3, 2), std::out_of_range);
}

TEST(Association, RandomMovesStayConsistent) {
  std::mt19937_64 rng(5);
  AssociationState s(30, 5);
  std::uniform_int_distribution<std::size_t> user(0, 29), sbs(0, 5);
  for (int i = 0; i < 2000; ++i) {
    const std::size_t u = user(rng), k = sbs(rng);
    if (k == 5)
      s.detach(u);
    else
      s.assign(u, k);
    ASSERT_TRUE(s.consistent());
  }
}
