#pragma once

// Domain types, the randomness contract and simulated comparison sources.
//
// Items and users are 0-based. A TrueRanking lists items best-first; the
// simulated sources answer "is z better than j?" for a given user, correctly
// with a per-user probability p_u in [1/2, 1].

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstdint>
#include <limits>
#include <numeric>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace activerank {

using ItemId = std::int32_t;
using UserId = std::int32_t;

enum class Vote : std::uint8_t { IPreferred, JPreferred };

// ---------------------------------------------------------------------------
// Randomness

// SplitMix64 finalizer. Used for seed mixing and sub-stream derivation only.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t hash_combine(std::uint64_t seed, std::uint64_t value) noexcept {
  return mix64(seed ^ mix64(value + 0x632be59bd9b4e019ULL));
}

// FNV-1a; stable across platforms, used to turn names into seed tags.
constexpr std::uint64_t fnv1a(std::string_view s) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

// A deterministic stream. The engine is mt19937_64 (fully specified by the
// standard); the distributions below are hand-rolled because the standard
// library distributions are implementation-defined.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed = 0) : seed_(seed), engine_(seed) {}

  std::uint64_t seed() const noexcept { return seed_; }

  std::uint64_t next_u64() { return engine_(); }

  // Uniform on [0, 1) with 53 bits of resolution.
  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  bool bernoulli(double p) { return uniform01() < p; }

  // Uniform on [0, n), unbiased (rejection on the top zone).
  std::uint64_t uniform_index(std::uint64_t n) {
    if (n == 0) throw std::invalid_argument("uniform_index: empty range");
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % n;
    std::uint64_t x;
    do {
      x = engine_();
    } while (x >= limit);
    return x % n;
  }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::swap(v[i - 1], v[uniform_index(i)]);
    }
  }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

// One root seed per run, one independent stream per purpose.
struct RngStreams {
  RngStream votes;
  RngStream users;
  RngStream selection;

  explicit RngStreams(std::uint64_t root)
      : votes(hash_combine(root, fnv1a("votes"))),
        users(hash_combine(root, fnv1a("users"))),
        selection(hash_combine(root, fnv1a("selection"))) {}
};

// ---------------------------------------------------------------------------
// Ground truth

class TrueRanking {
 public:
  // `order` is best-first and must be a permutation of [0, order.size()).
  explicit TrueRanking(std::vector<ItemId> order) : order_(std::move(order)), rank_(order_.size(), -1) {
    for (std::size_t r = 0; r < order_.size(); ++r) {
      const ItemId item = order_[r];
      if (item < 0 || static_cast<std::size_t>(item) >= order_.size() || rank_[item] != -1) {
        throw std::invalid_argument("TrueRanking: order is not a permutation of [0, N)");
      }
      rank_[item] = static_cast<std::int32_t>(r);
    }
  }

  static TrueRanking identity(std::size_t n) {
    std::vector<ItemId> order(n);
    std::iota(order.begin(), order.end(), 0);
    return TrueRanking(std::move(order));
  }

  static TrueRanking random(std::size_t n, RngStream& rng) {
    std::vector<ItemId> order(n);
    std::iota(order.begin(), order.end(), 0);
    rng.shuffle(order);
    return TrueRanking(std::move(order));
  }

  std::size_t size() const noexcept { return order_.size(); }
  const std::vector<ItemId>& best_first() const noexcept { return order_; }
  std::int32_t rank_of(ItemId item) const { return rank_.at(item); }

  // True iff `a` is strictly better than `b`.
  bool prefers(ItemId a, ItemId b) const { return rank_of(a) < rank_of(b); }

 private:
  std::vector<ItemId> order_;
  std::vector<std::int32_t> rank_;
};

// ---------------------------------------------------------------------------
// Accuracy models

inline double logistic_accuracy(double gamma, double score_gap) {
  return 1.0 / (1.0 + std::exp(-gamma * score_gap));
}

// A comparison source answers one query at a time and keeps per-user tallies.
template <typename S>
concept ComparisonSource = requires(S& s, const S& cs, UserId u, ItemId i, RngStream& rng) {
  { s.respond(u, i, i, rng) } -> std::same_as<Vote>;
  { cs.num_users() } -> std::convertible_to<std::size_t>;
  { cs.num_items() } -> std::convertible_to<std::size_t>;
  { cs.query_count(u) } -> std::convertible_to<std::uint64_t>;
  { cs.total_queries() } -> std::convertible_to<std::uint64_t>;
};

// Pair-independent simulated users: user u answers correctly with
// probability accuracy(u), independently across calls.
class SimulatedSource {
 public:
  SimulatedSource(TrueRanking truth, std::vector<double> correct_prob)
      : truth_(std::move(truth)), prob_(std::move(correct_prob)), tally_(prob_.size(), 0) {
    if (prob_.empty()) throw std::invalid_argument("SimulatedSource: no users");
    for (double p : prob_) {
      if (!(p >= 0.5 && p <= 1.0)) throw std::invalid_argument("SimulatedSource: accuracy outside [1/2, 1]");
    }
  }

  Vote respond(UserId u, ItemId i, ItemId j, RngStream& rng) {
    const double p = prob_.at(u);
    ++tally_[u];
    const bool correct = rng.bernoulli(p);
    const bool i_better = truth_.prefers(i, j);
    return (i_better == correct) ? Vote::IPreferred : Vote::JPreferred;
  }

  std::size_t num_users() const noexcept { return prob_.size(); }
  std::size_t num_items() const noexcept { return truth_.size(); }
  const TrueRanking& truth() const noexcept { return truth_; }

  double accuracy(UserId u) const { return prob_.at(u); }
  double margin(UserId u) const { return prob_.at(u) - 0.5; }
  std::span<const double> accuracies() const noexcept { return prob_; }

  std::uint64_t query_count(UserId u) const { return tally_.at(u); }
  const std::vector<std::uint64_t>& tallies() const noexcept { return tally_; }
  std::uint64_t total_queries() const noexcept {
    return std::accumulate(tally_.begin(), tally_.end(), std::uint64_t{0});
  }

  // Simulation privilege: the best user by true accuracy, ties to the smaller id.
  UserId best_user() const {
    return static_cast<UserId>(std::max_element(prob_.begin(), prob_.end()) - prob_.begin());
  }

 private:
  TrueRanking truth_;
  std::vector<double> prob_;
  std::vector<std::uint64_t> tally_;
};

static_assert(ComparisonSource<SimulatedSource>);

// Margins are Δ_u in (0, 1/2]; p_u = 1/2 + Δ_u.
inline SimulatedSource make_bernoulli_source(TrueRanking truth, std::span<const double> margins) {
  std::vector<double> prob;
  prob.reserve(margins.size());
  for (double d : margins) {
    if (!(d > 0.0 && d <= 0.5)) {
      throw std::invalid_argument("make_bernoulli_source: margin " + std::to_string(d) + " outside (0, 1/2]");
    }
    prob.push_back(0.5 + d);
  }
  return SimulatedSource(std::move(truth), std::move(prob));
}

// The better item carries the higher score; every pair has the same |s_i - s_j|.
inline SimulatedSource make_logistic_source(TrueRanking truth, std::span<const double> gammas, double score_gap) {
  if (!(score_gap > 0.0)) throw std::invalid_argument("make_logistic_source: score_gap must be positive");
  std::vector<double> prob;
  prob.reserve(gammas.size());
  for (double g : gammas) {
    if (!(g >= 0.0) || !std::isfinite(g)) {
      throw std::invalid_argument("make_logistic_source: gamma must be a nonnegative finite number");
    }
    prob.push_back(logistic_accuracy(g, score_gap));
  }
  return SimulatedSource(std::move(truth), std::move(prob));
}

}  // namespace activerank
