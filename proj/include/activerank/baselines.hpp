#pragma once

// The comparison algorithms: an oracle that knows the best user, uniform
// (non-adaptive) user sampling, adaptive sampling with user elimination, and
// the two-stage family that first selects a near-best user on a reference
// pair and then ranks with that user alone.

#include <algorithm>
#include <array>
#include <chrono>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "activerank/core.hpp"
#include "activerank/elimination.hpp"
#include "activerank/engine.hpp"

namespace activerank {

enum class AlgorithmKind : std::uint8_t { Oracle, NonAdaptive, Adaptive, TwoStage, ModifiedTwoStage };

inline constexpr std::array<AlgorithmKind, 5> kAllAlgorithms{AlgorithmKind::Oracle, AlgorithmKind::NonAdaptive,
                                                             AlgorithmKind::Adaptive, AlgorithmKind::TwoStage,
                                                             AlgorithmKind::ModifiedTwoStage};

inline std::string_view to_string(AlgorithmKind k) {
  switch (k) {
    case AlgorithmKind::Oracle: return "oracle";
    case AlgorithmKind::NonAdaptive: return "nonadaptive";
    case AlgorithmKind::Adaptive: return "adaptive";
    case AlgorithmKind::TwoStage: return "two_stage";
    case AlgorithmKind::ModifiedTwoStage: return "modified_two_stage";
  }
  return "unknown";
}

inline std::optional<AlgorithmKind> parse_algorithm(std::string_view name) {
  for (AlgorithmKind k : kAllAlgorithms) {
    if (to_string(k) == name) return k;
  }
  return std::nullopt;
}

// Which best-arm routine the two-stage algorithms use.
struct ArmSelector {
  enum class Kind : std::uint8_t { MedianElimination, SuccessiveElimination };
  Kind kind = Kind::SuccessiveElimination;
  double alpha = 0.1;  // median elimination: near-optimality level
  double eps = 0.15;   // successive elimination: stopping width
};

struct RunOptions {
  std::uint64_t query_budget = std::numeric_limits<std::uint64_t>::max();
};

// Outcome of one ranking run. The algorithm fills the ranking and accounting
// fields; the harness adds the grid coordinates, seed and exactness.
struct RunRecord {
  AlgorithmKind algorithm = AlgorithmKind::Oracle;
  std::size_t num_items = 0;
  std::size_t num_users = 0;
  double gamma_a = 0.0;
  double gamma_b = 0.0;
  std::uint64_t seed = 0;

  std::vector<ItemId> ranking;  // best-first
  std::uint64_t total_queries = 0;
  std::vector<std::uint64_t> per_user_queries;
  std::uint64_t ranking_queries = 0;    // ledger increments over all ranking passes
  std::uint64_t selection_queries = 0;  // arm pulls during user selection
  std::vector<UserId> final_active_set;
  std::optional<UserId> selected_user;
  std::vector<InsertionStep> trace;

  bool exact = false;
  bool failed = false;
  std::string error;
  std::chrono::nanoseconds wall_time{0};
};

namespace detail {

template <ComparisonSource Source>
struct Accounting {
  const Source& source;
  std::vector<std::uint64_t> before;

  explicit Accounting(const Source& s) : source(s), before(s.num_users()) {
    for (std::size_t u = 0; u < s.num_users(); ++u) before[u] = s.query_count(static_cast<UserId>(u));
  }

  void fill(RunRecord& rec) const {
    rec.num_users = source.num_users();
    rec.per_user_queries.assign(source.num_users(), 0);
    rec.total_queries = 0;
    for (std::size_t u = 0; u < source.num_users(); ++u) {
      rec.per_user_queries[u] = source.query_count(static_cast<UserId>(u)) - before[u];
      rec.total_queries += rec.per_user_queries[u];
    }
  }
};

template <ComparisonSource Source>
RunRecord run_iir(AlgorithmKind kind, const std::vector<ItemId>& items, double delta, const ActiveSet& users,
                  bool eliminate, Source& source, RngStreams& rng, const RunOptions& opts) {
  const Accounting<Source> acct(source);
  ResponseLedger ledger(source.num_items(), source.num_users());
  QueryContext<Source> ctx{source, ledger, rng.votes, rng.users, opts.query_budget};
  IirResult res = iir(items, delta, users, ctx, eliminate);

  RunRecord rec;
  rec.algorithm = kind;
  rec.num_items = items.size();
  rec.ranking = std::move(res.ranking);
  rec.ranking_queries = res.queries;
  rec.final_active_set = res.final_users.members();
  rec.trace = std::move(res.trace);
  acct.fill(rec);
  return rec;
}

}  // namespace detail

// Queries only the most accurate user (simulation privilege).
template <ComparisonSource Source>
RunRecord run_oracle(const std::vector<ItemId>& items, double delta, Source& source, RngStreams& rng,
                     const RunOptions& opts = {}) {
  return detail::run_iir(AlgorithmKind::Oracle, items, delta, ActiveSet{source.best_user()}, false, source, rng,
                         opts);
}

// Each query goes to a user drawn uniformly from the whole pool.
template <ComparisonSource Source>
RunRecord run_nonadaptive(const std::vector<ItemId>& items, double delta, Source& source, RngStreams& rng,
                          const RunOptions& opts = {}) {
  return detail::run_iir(AlgorithmKind::NonAdaptive, items, delta, ActiveSet::all(source.num_users()), false, source,
                         rng, opts);
}

template <ComparisonSource Source>
RunRecord run_adaptive(const std::vector<ItemId>& items, double delta, Source& source, RngStreams& rng,
                       const RunOptions& opts = {}, std::optional<ActiveSet> initial_users = std::nullopt) {
  const ActiveSet users = initial_users ? *initial_users : ActiveSet::all(source.num_users());
  return detail::run_iir(AlgorithmKind::Adaptive, items, delta, users, true, source, rng, opts);
}

// ---------------------------------------------------------------------------
// Two-stage family

struct UserSelection {
  UserId user = 0;
  std::vector<ItemId> reference_pair;  // best-first
  std::uint64_t pair_queries = 0;
  std::uint64_t arm_pulls = 0;
  std::vector<UserId> candidates;
};

namespace detail {

template <ComparisonSource Source>
UserSelection select_user(const ActiveSet& pool, const ActiveSet& candidates, const ArmSelector& selector,
                          double delta_i, double delta_m, ItemId i, ItemId j, Source& source, RngStreams& rng,
                          const RunOptions& opts) {
  if (i == j) throw std::invalid_argument("user selection: reference items must differ");

  UserSelection out;
  out.candidates = candidates.members();
  {
    ResponseLedger ledger(source.num_items(), source.num_users());
    QueryContext<Source> ctx{source, ledger, rng.votes, rng.users, opts.query_budget};
    IirResult pair = iir({i, j}, delta_i, pool, ctx, false);
    out.reference_pair = std::move(pair.ranking);
    out.pair_queries = pair.queries;
  }

  const ItemId better = out.reference_pair[0];
  const ItemId worse = out.reference_pair[1];
  const RewardOracle reward = [&](UserId u) {
    if (source.total_queries() >= opts.query_budget) {
      throw QueryBudgetExceeded("query budget exhausted during user selection");
    }
    return source.respond(u, better, worse, rng.votes) == Vote::IPreferred;
  };

  const ArmSelection arm = selector.kind == ArmSelector::Kind::MedianElimination
                               ? median_elimination(candidates, selector.alpha, delta_m, reward)
                               : successive_elimination(candidates, selector.eps, delta_m, reward);
  out.user = arm.user;
  out.arm_pulls = arm.pulls;
  return out;
}

template <ComparisonSource Source>
RunRecord rank_with_selection(AlgorithmKind kind, const std::vector<ItemId>& items, const UserSelection& sel,
                              double delta_r, Source& source, RngStreams& rng, const RunOptions& opts) {
  RunRecord rec = run_iir(kind, items, delta_r, ActiveSet{sel.user}, false, source, rng, opts);
  rec.selected_user = sel.user;
  rec.selection_queries = sel.arm_pulls;
  rec.ranking_queries += sel.pair_queries;
  return rec;
}

}  // namespace detail

// Ranks the pair {i, j} by polling the whole pool, then runs the configured
// best-arm routine over `users` with rewards defined by that pair's order.
template <ComparisonSource Source>
UserSelection naive_user_selection(const ActiveSet& users, const ArmSelector& selector, double delta_i,
                                   double delta_m, ItemId i, ItemId j, Source& source, RngStreams& rng,
                                   const RunOptions& opts = {}) {
  return detail::select_user(users, users, selector, delta_i, delta_m, i, j, source, rng, opts);
}

// As naive_user_selection, but arm selection runs over a uniformly drawn
// L-subset of the users.
template <ComparisonSource Source>
UserSelection subset_user_selection(const ActiveSet& users, std::size_t subset_size, const ArmSelector& selector,
                                    double delta_i, double delta_m, ItemId i, ItemId j, Source& source,
                                    RngStreams& rng, const RunOptions& opts = {}) {
  if (subset_size < 1 || subset_size > users.size()) {
    throw std::invalid_argument("subset_user_selection: L = " + std::to_string(subset_size) + " outside [1, " +
                                std::to_string(users.size()) + "]");
  }
  // Partial Fisher-Yates over the member list.
  std::vector<UserId> pool = users.members();
  for (std::size_t k = 0; k < subset_size; ++k) {
    const std::size_t pick = k + static_cast<std::size_t>(rng.selection.uniform_index(pool.size() - k));
    std::swap(pool[k], pool[pick]);
  }
  pool.resize(subset_size);
  return detail::select_user(users, ActiveSet(std::move(pool)), selector, delta_i, delta_m, i, j, source, rng,
                             opts);
}

namespace detail {

template <ComparisonSource Source>
RunRecord trivial_record(AlgorithmKind kind, const std::vector<ItemId>& items, const Source& source,
                         const ActiveSet& users) {
  RunRecord rec;
  rec.algorithm = kind;
  rec.num_items = items.size();
  rec.num_users = source.num_users();
  rec.ranking = items;
  rec.per_user_queries.assign(source.num_users(), 0);
  rec.final_active_set = users.members();
  return rec;
}

}  // namespace detail

// The reference pair is the first two items of the input.
template <ComparisonSource Source>
RunRecord two_stage_ranking(const std::vector<ItemId>& items, const ActiveSet& users, const ArmSelector& selector,
                            double delta_i, double delta_m, double delta_r, Source& source, RngStreams& rng,
                            const RunOptions& opts = {}) {
  if (items.size() < 2) return detail::trivial_record(AlgorithmKind::TwoStage, items, source, users);
  const detail::Accounting<Source> acct(source);
  const UserSelection sel =
      naive_user_selection(users, selector, delta_i, delta_m, items[0], items[1], source, rng, opts);
  RunRecord rec = detail::rank_with_selection(AlgorithmKind::TwoStage, items, sel, delta_r, source, rng, opts);
  acct.fill(rec);
  return rec;
}

template <ComparisonSource Source>
RunRecord modified_two_stage_ranking(const std::vector<ItemId>& items, const ActiveSet& users,
                                     std::size_t subset_size, const ArmSelector& selector, double delta_i,
                                     double delta_m, double delta_r, Source& source, RngStreams& rng,
                                     const RunOptions& opts = {}) {
  if (items.size() < 2) return detail::trivial_record(AlgorithmKind::ModifiedTwoStage, items, source, users);
  const detail::Accounting<Source> acct(source);
  const UserSelection sel = subset_user_selection(users, subset_size, selector, delta_i, delta_m, items[0], items[1],
                                                  source, rng, opts);
  RunRecord rec =
      detail::rank_with_selection(AlgorithmKind::ModifiedTwoStage, items, sel, delta_r, source, rng, opts);
  acct.fill(rec);
  return rec;
}

// Runs one algorithm with the default confidence split: thirds for the
// two-stage ranking, quarters for the modified variant.
struct AlgorithmParams {
  double delta = 0.1;
  ArmSelector selector;
  std::size_t subset_size = 0;  // 0: ceil(M / 2)
  RunOptions options;
};

template <ComparisonSource Source>
RunRecord run_algorithm(AlgorithmKind kind, const std::vector<ItemId>& items, const AlgorithmParams& p,
                        Source& source, RngStreams& rng) {
  const ActiveSet everyone = ActiveSet::all(source.num_users());
  switch (kind) {
    case AlgorithmKind::Oracle: return run_oracle(items, p.delta, source, rng, p.options);
    case AlgorithmKind::NonAdaptive: return run_nonadaptive(items, p.delta, source, rng, p.options);
    case AlgorithmKind::Adaptive: return run_adaptive(items, p.delta, source, rng, p.options);
    case AlgorithmKind::TwoStage: {
      const double d = p.delta / 3.0;
      return two_stage_ranking(items, everyone, p.selector, d, d, d, source, rng, p.options);
    }
    case AlgorithmKind::ModifiedTwoStage: {
      const double d = p.delta / 4.0;
      const std::size_t l = p.subset_size == 0 ? (source.num_users() + 1) / 2 : p.subset_size;
      return modified_two_stage_ranking(items, everyone, l, p.selector, d, d, d, source, rng, p.options);
    }
  }
  throw std::invalid_argument("run_algorithm: unknown algorithm");
}

}  // namespace activerank
