#include <gtest/gtest.h>

#include <numeric>
#include <vector>

#include "activerank/baselines.hpp"

namespace activerank {
namespace {

std::vector<ItemId> iota_items(std::size_t n) {
  std::vector<ItemId> v(n);
  std::iota(v.begin(), v.end(), 0);
  return v;
}

TrueRanking shuffled(std::size_t n, std::uint64_t seed) {
  RngStream rng(seed);
  return TrueRanking::random(n, rng);
}

void expect_same_run(const RunRecord& a, const RunRecord& b) {
  EXPECT_EQ(a.ranking, b.ranking);
  EXPECT_EQ(a.total_queries, b.total_queries);
  EXPECT_EQ(a.per_user_queries, b.per_user_queries);
  ASSERT_EQ(a.trace.size(), b.trace.size());
  for (std::size_t k = 0; k < a.trace.size(); ++k) {
    EXPECT_EQ(a.trace[k].total_responses, b.trace[k].total_responses);
  }
}

TEST(AlgorithmKind, NamesRoundTrip) {
  for (AlgorithmKind k : kAllAlgorithms) EXPECT_EQ(parse_algorithm(to_string(k)), k);
  EXPECT_FALSE(parse_algorithm("bogus").has_value());
}

TEST(Oracle, SingleUserMatchesAdaptiveTrace) {
  const TrueRanking truth = shuffled(12, 1);
  const std::vector<double> margins{0.3};
  SimulatedSource s1 = make_bernoulli_source(truth, margins);
  SimulatedSource s2 = make_bernoulli_source(truth, margins);
  RngStreams r1(77), r2(77);
  const RunRecord oracle = run_oracle(iota_items(12), 0.1, s1, r1);
  const RunRecord adaptive = run_adaptive(iota_items(12), 0.1, s2, r2);
  expect_same_run(oracle, adaptive);
}

TEST(Oracle, QueriesOnlyTheBestUser) {
  const std::vector<double> margins{0.2, 0.4, 0.4, 0.1};
  SimulatedSource src = make_bernoulli_source(shuffled(10, 2), margins);
  RngStreams rng(3);
  const RunRecord rec = run_oracle(iota_items(10), 0.1, src, rng);
  EXPECT_EQ(rec.final_active_set, std::vector<UserId>{1});
  EXPECT_EQ(rec.per_user_queries[1], rec.total_queries);
  EXPECT_EQ(rec.ranking, src.truth().best_first());
}

TEST(NonAdaptive, SingleUserPoolMatchesOracle) {
  const TrueRanking truth = shuffled(9, 4);
  const std::vector<double> margins{0.25};
  SimulatedSource s1 = make_bernoulli_source(truth, margins);
  SimulatedSource s2 = make_bernoulli_source(truth, margins);
  RngStreams r1(8), r2(8);
  expect_same_run(run_nonadaptive(iota_items(9), 0.1, s1, r1), run_oracle(iota_items(9), 0.1, s2, r2));
}

TEST(Adaptive, StartingFromBestUserMatchesOracle) {
  const TrueRanking truth = shuffled(15, 5);
  const std::vector<double> margins{0.1, 0.1, 0.45, 0.1};
  SimulatedSource s1 = make_bernoulli_source(truth, margins);
  SimulatedSource s2 = make_bernoulli_source(truth, margins);
  RngStreams r1(21), r2(21);
  const RunRecord adaptive = run_adaptive(iota_items(15), 0.1, s1, r1, {}, ActiveSet{2});
  const RunRecord oracle = run_oracle(iota_items(15), 0.1, s2, r2);
  expect_same_run(adaptive, oracle);
}

TEST(AllAlgorithms, NoiselessSourceGivesExactRankingAndConsistentAccounting) {
  const std::vector<double> margins{0.5, 0.5, 0.5};
  for (AlgorithmKind kind : kAllAlgorithms) {
    for (std::size_t n : {1u, 2u, 5u, 17u}) {
      SimulatedSource src = make_bernoulli_source(shuffled(n, n * 7 + 1), margins);
      RngStreams rng(n);
      const RunRecord rec = run_algorithm(kind, iota_items(n), AlgorithmParams{}, src, rng);
      EXPECT_EQ(rec.ranking, src.truth().best_first()) << to_string(kind) << " n=" << n;
      EXPECT_EQ(rec.total_queries, src.total_queries());
      EXPECT_EQ(std::accumulate(rec.per_user_queries.begin(), rec.per_user_queries.end(), std::uint64_t{0}),
                rec.total_queries);
      EXPECT_EQ(rec.ranking_queries + rec.selection_queries, rec.total_queries);
    }
  }
}

TEST(AllAlgorithms, NoisyAccountingInvariant) {
  const std::vector<double> margins{0.45, 0.2, 0.2, 0.2, 0.2};
  for (AlgorithmKind kind : kAllAlgorithms) {
    SimulatedSource src = make_bernoulli_source(shuffled(12, 99), margins);
    RngStreams rng(1234);
    const RunRecord rec = run_algorithm(kind, iota_items(12), AlgorithmParams{}, src, rng);
    EXPECT_EQ(rec.total_queries, src.total_queries()) << to_string(kind);
    EXPECT_EQ(rec.ranking_queries + rec.selection_queries, rec.total_queries) << to_string(kind);
  }
}

// ---------------------------------------------------------------------------
// User selection

TEST(NaiveUserSelection, NoiselessPoolOrdersPairFirst) {
  const std::vector<double> margins{0.5, 0.5};
  SimulatedSource src = make_bernoulli_source(TrueRanking({3, 1, 0, 2}), margins);
  RngStreams rng(1);
  const UserSelection sel = naive_user_selection(ActiveSet::all(2), ArmSelector{}, 0.05, 0.05, 0, 1, src, rng);
  EXPECT_EQ(sel.reference_pair, (std::vector<ItemId>{1, 0}));
  EXPECT_GT(sel.pair_queries, 0u);
  EXPECT_EQ(sel.pair_queries + sel.arm_pulls, src.total_queries());
}

TEST(NaiveUserSelection, SingleUserNeedsNoArmPulls) {
  const std::vector<double> margins{0.3};
  SimulatedSource src = make_bernoulli_source(TrueRanking::identity(4), margins);
  RngStreams rng(2);
  const UserSelection sel = naive_user_selection(ActiveSet{0}, ArmSelector{}, 0.05, 0.05, 2, 3, src, rng);
  EXPECT_EQ(sel.user, 0);
  EXPECT_EQ(sel.arm_pulls, 0u);
}

TEST(NaiveUserSelection, MedianEliminationFindsTheExpert) {
  std::vector<double> margins(9, 0.01);
  margins[4] = 0.49;
  ArmSelector me;
  me.kind = ArmSelector::Kind::MedianElimination;
  me.alpha = 0.1;
  int found = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    SimulatedSource src = make_bernoulli_source(shuffled(4, seed), margins);
    RngStreams rng(seed);
    found += naive_user_selection(ActiveSet::all(9), me, 0.05, 0.05, 0, 1, src, rng).user == 4 ? 1 : 0;
  }
  EXPECT_GE(found, 90);
}

TEST(SubsetUserSelection, RejectsOutOfRangeSubset) {
  const std::vector<double> margins{0.3, 0.3};
  SimulatedSource src = make_bernoulli_source(TrueRanking::identity(2), margins);
  RngStreams rng(1);
  EXPECT_THROW(subset_user_selection(ActiveSet::all(2), 0, ArmSelector{}, 0.1, 0.1, 0, 1, src, rng),
               std::invalid_argument);
  EXPECT_THROW(subset_user_selection(ActiveSet::all(2), 3, ArmSelector{}, 0.1, 0.1, 0, 1, src, rng),
               std::invalid_argument);
}

TEST(SubsetUserSelection, SubsetOfOneSkipsArmSelection) {
  const std::vector<double> margins{0.3, 0.2, 0.1};
  SimulatedSource src = make_bernoulli_source(TrueRanking::identity(2), margins);
  RngStreams rng(6);
  const UserSelection sel = subset_user_selection(ActiveSet::all(3), 1, ArmSelector{}, 0.1, 0.1, 0, 1, src, rng);
  EXPECT_EQ(sel.arm_pulls, 0u);
  EXPECT_EQ(sel.candidates, std::vector<UserId>{sel.user});
}

TEST(SubsetUserSelection, FullSubsetMatchesNaiveSelection) {
  const std::vector<double> margins{0.1, 0.3, 0.45, 0.2};
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    SimulatedSource s1 = make_bernoulli_source(TrueRanking::identity(3), margins);
    SimulatedSource s2 = make_bernoulli_source(TrueRanking::identity(3), margins);
    RngStreams r1(seed), r2(seed);
    const UserSelection a = subset_user_selection(ActiveSet::all(4), 4, ArmSelector{}, 0.1, 0.1, 0, 1, s1, r1);
    const UserSelection b = naive_user_selection(ActiveSet::all(4), ArmSelector{}, 0.1, 0.1, 0, 1, s2, r2);
    EXPECT_EQ(a.user, b.user);
    EXPECT_EQ(a.arm_pulls, b.arm_pulls);
    EXPECT_EQ(s1.tallies(), s2.tallies());
  }
}

TEST(SubsetUserSelection, OutlierChosenAboutOneThirdOfTheTime) {
  // One expert among nine; a random 3-subset contains it with probability
  // 1 - C(8,3)/C(9,3) = 1/3.
  std::vector<double> margins(9, 0.05);
  margins[7] = 0.45;
  constexpr int kTrials = 1500;
  int included = 0;
  int selected = 0;
  for (int t = 0; t < kTrials; ++t) {
    SimulatedSource src = make_bernoulli_source(TrueRanking::identity(2), margins);
    RngStreams rng(static_cast<std::uint64_t>(t));
    const UserSelection sel = subset_user_selection(ActiveSet::all(9), 3, ArmSelector{}, 0.05, 0.05, 0, 1, src, rng);
    included += std::count(sel.candidates.begin(), sel.candidates.end(), 7) > 0 ? 1 : 0;
    selected += sel.user == 7 ? 1 : 0;
  }
  EXPECT_NEAR(included / static_cast<double>(kTrials), 1.0 / 3.0, 0.04);
  EXPECT_NEAR(selected / static_cast<double>(kTrials), 1.0 / 3.0, 0.04);
  EXPECT_LE(selected, included);
}

TEST(TwoStage, DegenerateInputs) {
  const std::vector<double> margins{0.3, 0.2};
  SimulatedSource src = make_bernoulli_source(TrueRanking::identity(1), margins);
  RngStreams rng(1);
  const RunRecord rec = two_stage_ranking({0}, ActiveSet::all(2), ArmSelector{}, 0.03, 0.03, 0.03, src, rng);
  EXPECT_EQ(rec.ranking, std::vector<ItemId>{0});
  EXPECT_EQ(rec.total_queries, 0u);
}

TEST(TwoStage, RanksWithTheSelectedUserOnly) {
  const std::vector<double> margins{0.1, 0.1, 0.45, 0.1};
  SimulatedSource src = make_bernoulli_source(shuffled(10, 3), margins);
  RngStreams rng(3);
  const RunRecord rec = two_stage_ranking(iota_items(10), ActiveSet::all(4), ArmSelector{}, 0.03, 0.03, 0.03, src, rng);
  ASSERT_TRUE(rec.selected_user.has_value());
  EXPECT_EQ(*rec.selected_user, 2);
  EXPECT_EQ(rec.final_active_set, std::vector<UserId>{2});
  EXPECT_EQ(rec.ranking, src.truth().best_first());
  EXPECT_GT(rec.selection_queries, 0u);
}

}  // namespace
}  // namespace activerank
