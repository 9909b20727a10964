#include <gtest/gtest.h>

#include <cmath>
#include <set>
#include <vector>

#include "activerank/core.hpp"

namespace activerank {
namespace {

TEST(TrueRanking, RejectsNonPermutation) {
  EXPECT_THROW(TrueRanking({0, 0, 1}), std::invalid_argument);
  EXPECT_THROW(TrueRanking({0, 3, 1}), std::invalid_argument);
  EXPECT_NO_THROW(TrueRanking({2, 0, 1}));
}

TEST(TrueRanking, RandomIsPermutationAndSeedStable) {
  RngStream a(11), b(11);
  const TrueRanking ra = TrueRanking::random(50, a);
  const TrueRanking rb = TrueRanking::random(50, b);
  EXPECT_EQ(ra.best_first(), rb.best_first());
  std::set<ItemId> seen(ra.best_first().begin(), ra.best_first().end());
  EXPECT_EQ(seen.size(), 50u);
  EXPECT_EQ(*seen.begin(), 0);
  EXPECT_EQ(*seen.rbegin(), 49);
}

TEST(RngStream, UniformIndexCoversRangeWithoutBias) {
  RngStream rng(3);
  std::vector<int> hist(7, 0);
  constexpr int kDraws = 70000;
  for (int k = 0; k < kDraws; ++k) ++hist[rng.uniform_index(7)];
  for (int h : hist) EXPECT_NEAR(h, kDraws / 7.0, 5 * std::sqrt(kDraws / 7.0));
}

TEST(RngStreams, PurposesAreIndependentAndDeterministic) {
  RngStreams a(5), b(5);
  EXPECT_NE(a.votes.seed(), a.users.seed());
  EXPECT_NE(a.users.seed(), a.selection.seed());
  EXPECT_EQ(a.votes.next_u64(), b.votes.next_u64());
  // Drawing from one stream does not move another.
  for (int k = 0; k < 10; ++k) a.users.next_u64();
  EXPECT_EQ(a.votes.next_u64(), b.votes.next_u64());
}

TEST(BernoulliSource, RejectsMarginsOutsideHalfOpenInterval) {
  const TrueRanking truth = TrueRanking::identity(3);
  const std::vector<double> zero{0.0};
  const std::vector<double> big{0.6};
  const std::vector<double> neg{-0.1};
  EXPECT_THROW(make_bernoulli_source(truth, zero), std::invalid_argument);
  EXPECT_THROW(make_bernoulli_source(truth, big), std::invalid_argument);
  EXPECT_THROW(make_bernoulli_source(truth, neg), std::invalid_argument);
}

TEST(BernoulliSource, PerfectUserAlwaysAgreesWithTruth) {
  const TrueRanking truth({3, 1, 0, 2});
  const std::vector<double> margins{0.5};
  SimulatedSource src = make_bernoulli_source(truth, margins);
  RngStream rng(1);
  int correct = 0;
  for (int k = 0; k < 1000; ++k) {
    const ItemId i = k % 4;
    const ItemId j = (i + 1 + k / 4 % 3) % 4;
    const bool i_wins = src.respond(0, i, j, rng) == Vote::IPreferred;
    correct += (i_wins == truth.prefers(i, j)) ? 1 : 0;
  }
  EXPECT_EQ(correct, 1000);
}

TEST(BernoulliSource, EmpiricalAccuracyMatchesMargin) {
  const std::vector<double> margins{0.3};
  SimulatedSource src = make_bernoulli_source(TrueRanking::identity(2), margins);
  RngStream rng(2024);
  constexpr int kCalls = 100000;
  int correct = 0;
  for (int k = 0; k < kCalls; ++k) correct += src.respond(0, 0, 1, rng) == Vote::IPreferred ? 1 : 0;
  EXPECT_NEAR(static_cast<double>(correct) / kCalls, 0.8, 0.005);
  // Three standard errors of a Bernoulli(0.8) mean.
  EXPECT_NEAR(static_cast<double>(correct) / kCalls, 0.8, 3 * std::sqrt(0.8 * 0.2 / kCalls));
}

TEST(BernoulliSource, SwappedArgumentsGiveMirroredVotes) {
  const std::vector<double> margins{0.2};
  SimulatedSource src = make_bernoulli_source(TrueRanking::identity(2), margins);
  RngStream rng_a(9), rng_b(10);
  constexpr int kCalls = 100000;
  int a_first = 0;
  int a_second = 0;
  for (int k = 0; k < kCalls; ++k) {
    a_first += src.respond(0, 0, 1, rng_a) == Vote::IPreferred ? 1 : 0;
    a_second += src.respond(0, 1, 0, rng_b) == Vote::JPreferred ? 1 : 0;
  }
  EXPECT_NEAR(static_cast<double>(a_first) / kCalls, static_cast<double>(a_second) / kCalls, 0.01);
}

TEST(LogisticSource, AccuracyMatchesFormula) {
  const std::vector<double> gammas{2.5, 0.5, 0.0};
  const SimulatedSource src = make_logistic_source(TrueRanking::identity(4), gammas, 3.0);
  EXPECT_NEAR(src.accuracy(0), 0.999447, 1e-6);
  EXPECT_NEAR(src.accuracy(1), 0.817574, 1e-6);
  EXPECT_DOUBLE_EQ(src.accuracy(2), 0.5);
  EXPECT_EQ(src.best_user(), 0);
}

TEST(LogisticSource, ZeroScaleIsAFairCoin) {
  const std::vector<double> gammas{0.0};
  SimulatedSource src = make_logistic_source(TrueRanking::identity(2), gammas, 3.0);
  RngStream rng(77);
  constexpr int kCalls = 100000;
  int i_wins = 0;
  for (int k = 0; k < kCalls; ++k) i_wins += src.respond(0, 0, 1, rng) == Vote::IPreferred ? 1 : 0;
  EXPECT_NEAR(static_cast<double>(i_wins) / kCalls, 0.5, 3 * std::sqrt(0.25 / kCalls));
}

TEST(LogisticSource, RejectsBadParameters) {
  const TrueRanking truth = TrueRanking::identity(2);
  const std::vector<double> neg{-0.5};
  const std::vector<double> ok{1.0};
  EXPECT_THROW(make_logistic_source(truth, neg, 3.0), std::invalid_argument);
  EXPECT_THROW(make_logistic_source(truth, ok, 0.0), std::invalid_argument);
  EXPECT_THROW(make_logistic_source(truth, ok, -1.0), std::invalid_argument);
}

TEST(SimulatedSource, TalliesConserveCallCount) {
  const std::vector<double> margins{0.1, 0.2, 0.3, 0.4};
  SimulatedSource src = make_bernoulli_source(TrueRanking::identity(5), margins);
  RngStream rng(4), pick(5);
  constexpr int kCalls = 5000;
  for (int k = 0; k < kCalls; ++k) {
    src.respond(static_cast<UserId>(pick.uniform_index(4)), 1, 3, rng);
  }
  EXPECT_EQ(src.total_queries(), static_cast<std::uint64_t>(kCalls));
  std::uint64_t sum = 0;
  for (UserId u = 0; u < 4; ++u) sum += src.query_count(u);
  EXPECT_EQ(sum, static_cast<std::uint64_t>(kCalls));
}

}  // namespace
}  // namespace activerank
