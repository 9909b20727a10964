#pragma once

// Active ranking by iterative insertion.
//
//   iir  inserts items one at a time into a worst-first answer list and,
//        after each insertion, credits users and optionally shrinks the
//        active user set;
//   iai  retries ati with a halving error parameter until it inserts;
//   ati  walks a Preference Interval Tree, backtracking on inconsistent
//        answers, and certifies a leaf by counting confirmations;
//   atc  compares two items by polling random active users until an anytime
//        confidence bound separates the vote share from 1/2.
//
// All query traffic goes through a QueryContext that owns nothing: it points
// at the run's source, ledger and random streams.

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "activerank/core.hpp"
#include "activerank/elimination.hpp"
#include "activerank/pit.hpp"

namespace activerank {

// Raised when a run exceeds its configured query budget.
class QueryBudgetExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Raised when iai runs out of attempts (only possible when no user is better
// than a coin flip).
class InsertionFailed : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Per-run response bookkeeping. A/B hold, for the item currently being
// inserted, how often each user judged it better/worse than item j. s and n
// are cumulative per-user response and correct-response counts.
class ResponseLedger {
 public:
  ResponseLedger(std::size_t num_items, std::size_t num_users)
      : items_(num_items), users_(num_users), a_(num_items * num_users, 0), b_(num_items * num_users, 0),
        s_(num_users, 0), n_(num_users, 0) {}

  std::size_t num_items() const noexcept { return items_; }
  std::size_t num_users() const noexcept { return users_; }

  void begin_item() {
    std::fill(a_.begin(), a_.end(), 0);
    std::fill(b_.begin(), b_.end(), 0);
  }

  void record(ItemId j, UserId u, bool z_better) {
    auto& cell = z_better ? a_[index(j, u)] : b_[index(j, u)];
    ++cell;
    ++s_[u];
    ++increments_;
  }

  // Adds A[j, .] (z placed above j) or B[j, .] to n.
  void credit(ItemId j, bool z_above_j) {
    const auto& src = z_above_j ? a_ : b_;
    for (std::size_t u = 0; u < users_; ++u) n_[u] += src[index(j, static_cast<UserId>(u))];
  }

  std::uint64_t a(ItemId j, UserId u) const { return a_[index(j, u)]; }
  std::uint64_t b(ItemId j, UserId u) const { return b_[index(j, u)]; }
  const std::vector<std::uint64_t>& responses() const noexcept { return s_; }
  const std::vector<std::uint64_t>& correct() const noexcept { return n_; }
  std::uint64_t total_responses() const noexcept { return increments_; }

 private:
  std::size_t index(ItemId j, UserId u) const {
    if (j < 0 || static_cast<std::size_t>(j) >= items_ || u < 0 || static_cast<std::size_t>(u) >= users_) {
      throw std::out_of_range("ResponseLedger: index out of range");
    }
    return static_cast<std::size_t>(j) * users_ + static_cast<std::size_t>(u);
  }

  std::size_t items_;
  std::size_t users_;
  std::vector<std::uint64_t> a_;
  std::vector<std::uint64_t> b_;
  std::vector<std::uint64_t> s_;
  std::vector<std::uint64_t> n_;
  std::uint64_t increments_ = 0;
};

template <ComparisonSource Source>
struct QueryContext {
  Source& source;
  ResponseLedger& ledger;
  RngStream& votes;
  RngStream& picks;
  std::uint64_t query_budget = std::numeric_limits<std::uint64_t>::max();
};

// ---------------------------------------------------------------------------
// ATC

// The opponent of the inserted item: a real item or one of the list-end sentinels.
struct Opponent {
  enum class Kind : std::uint8_t { Item, Worst, Best };
  Kind kind = Kind::Item;
  ItemId item = -1;

  static Opponent of(ItemId j) { return {Kind::Item, j}; }
  static Opponent worst() { return {Kind::Worst, -1}; }
  static Opponent best() { return {Kind::Best, -1}; }
};

struct AtcOutcome {
  bool z_preferred = true;  // y_hat
  std::uint64_t rounds_used = 0;
};

inline std::uint64_t atc_max_rounds(double eps, double delta) {
  const double r = std::ceil(0.5 / (eps * eps) * std::log(2.0 / delta));
  constexpr double kCap = 9.0e18;
  return r >= kCap ? static_cast<std::uint64_t>(kCap) : static_cast<std::uint64_t>(r);
}

// Anytime stopping radius after n votes.
inline double atc_radius(std::uint64_t n, double delta) {
  const double nd = static_cast<double>(n);
  const double pi2 = std::numbers::pi * std::numbers::pi;
  return std::sqrt(std::log(pi2 * nd * nd / (3.0 * delta)) / (2.0 * nd));
}

template <ComparisonSource Source>
AtcOutcome atc(ItemId z, Opponent j, const ActiveSet& users, double eps, double delta, QueryContext<Source>& ctx) {
  if (j.kind == Opponent::Kind::Worst) return {true, 0};
  if (j.kind == Opponent::Kind::Best) return {false, 0};
  if (!(eps > 0.0 && eps <= 0.5)) throw std::invalid_argument("atc: eps outside (0, 1/2]");
  if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("atc: delta outside (0, 1)");

  const std::uint64_t r_max = atc_max_rounds(eps, delta);
  std::uint64_t wins = 0;
  std::uint64_t n = 0;
  double p_hat = 0.0;
  while (n < r_max) {
    if (ctx.source.total_queries() >= ctx.query_budget) {
      throw QueryBudgetExceeded("query budget of " + std::to_string(ctx.query_budget) + " exhausted");
    }
    const UserId u = users[ctx.picks.uniform_index(users.size())];
    const bool z_better = ctx.source.respond(u, z, j.item, ctx.votes) == Vote::IPreferred;
    ctx.ledger.record(j.item, u, z_better);
    if (z_better) ++wins;
    ++n;
    p_hat = static_cast<double>(wins) / static_cast<double>(n);
    if (std::abs(p_hat - 0.5) >= atc_radius(n, delta)) break;
  }
  return {p_hat > 0.5, n};
}

// ---------------------------------------------------------------------------
// ATI

struct InsertOutcome {
  std::optional<std::size_t> position;  // into the worst-first list; empty means unsure
  std::uint64_t queries_used = 0;
  std::uint64_t steps = 0;

  bool inserted() const { return position.has_value(); }
};

inline std::uint64_t ati_max_steps(std::size_t depth, double delta) {
  const double bound = std::max(4.0 * static_cast<double>(depth), 512.0 / 25.0 * std::log(2.0 / delta));
  return static_cast<std::uint64_t>(std::ceil(bound));
}

// Confirmation count a leaf must exceed at step t to be accepted.
inline double ati_leaf_threshold(std::uint64_t t, double delta) {
  const double td = static_cast<double>(t);
  const double pi2 = std::numbers::pi * std::numbers::pi;
  return td / 2.0 + std::sqrt(td / 2.0 * std::log(pi2 * td * td / (3.0 * delta))) + 1.0;
}

template <ComparisonSource Source>
InsertOutcome ati(ItemId z, const std::vector<ItemId>& ranked, double eps, double delta, const ActiveSet& users,
                  QueryContext<Source>& ctx) {
  constexpr double q = 15.0 / 16.0;
  const double root_delta = 1.0 - q;
  const double leaf_delta = 1.0 - std::sqrt(q);
  const double inner_delta = 1.0 - std::cbrt(q);

  const Pit pit = build_pit(ranked);
  const std::uint64_t t_max = ati_max_steps(pit.nominal_depth(), delta);
  std::vector<std::uint64_t> count(pit.node_count(), 0);
  const std::uint64_t start = ctx.source.total_queries();

  auto bound = [&](ExtIndex idx) {
    if (idx.is_neg_inf()) return Opponent::worst();
    if (idx.is_pos_inf()) return Opponent::best();
    return Opponent::of(pit.item_at(idx));
  };
  // true iff z is judged better than the opponent at list index idx
  auto beats = [&](ExtIndex idx, double d) { return atc(z, bound(idx), users, eps, d, ctx).z_preferred; };

  InsertOutcome out;
  NodeIndex x = Pit::kRoot;
  for (std::uint64_t t = 1; t <= t_max; ++t) {
    const PitNode& node = pit.node(x);
    out.steps = t;
    if (node.is_root()) {
      x = beats({node.mid}, root_delta) ? *node.rchild : *node.lchild;
    } else if (node.is_leaf()) {
      if (beats(node.left, leaf_delta) && !beats(node.right, leaf_delta)) {
        ++count[x];
        if (static_cast<double>(count[x]) > ati_leaf_threshold(t, delta)) {
          out.position = leaf_interval_to_position(pit, x);
          break;
        }
      } else if (count[x] > 0) {
        --count[x];
      } else {
        x = *node.parent;
      }
    } else {
      if (!beats(node.left, inner_delta) || beats(node.right, inner_delta)) {
        x = *node.parent;
      } else if (beats({node.mid}, inner_delta)) {
        x = *node.rchild;
      } else {
        x = *node.lchild;
      }
    }
  }

  if (!out.position) {
    const double accept = 1.0 + 5.0 / 16.0 * static_cast<double>(t_max);
    for (NodeIndex leaf : pit.leaves()) {
      if (static_cast<double>(count[leaf]) >= accept) {
        out.position = leaf_interval_to_position(pit, leaf);
        break;
      }
    }
  }
  out.queries_used = ctx.source.total_queries() - start;
  return out;
}

// ---------------------------------------------------------------------------
// IAI

struct AttemptSchedule {
  double eps;
  double delta;
};

inline AttemptSchedule iai_schedule(unsigned attempt, double delta) {
  const double tau = static_cast<double>(attempt);
  return {std::ldexp(1.0, -static_cast<int>(attempt + 1)),
          6.0 * delta / (std::numbers::pi * std::numbers::pi * tau * tau)};
}

struct IaiOutcome {
  std::size_t position = 0;
  unsigned attempts = 0;
};

// eps = 2^-25 is far below any margin a simulation can resolve.
inline constexpr unsigned kMaxInsertAttempts = 24;

template <ComparisonSource Source>
IaiOutcome iai(ItemId z, const std::vector<ItemId>& ranked, double delta, const ActiveSet& users,
               QueryContext<Source>& ctx) {
  if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("iai: delta outside (0, 1)");
  for (unsigned tau = 1; tau <= kMaxInsertAttempts; ++tau) {
    const AttemptSchedule s = iai_schedule(tau, delta);
    const InsertOutcome r = ati(z, ranked, s.eps, s.delta, users, ctx);
    if (r.inserted()) return {*r.position, tau};
  }
  throw InsertionFailed("iai: item " + std::to_string(z) + " not inserted after " +
                        std::to_string(kMaxInsertAttempts) + " attempts");
}

// ---------------------------------------------------------------------------
// IIR

// State after inserting one item.
struct InsertionStep {
  ItemId item = 0;
  std::size_t active_set_size = 0;    // after the elimination that follows the insertion
  std::uint64_t total_responses = 0;  // S after the insertion
};

struct IirResult {
  std::vector<ItemId> ranking;  // best-first
  ActiveSet final_users;
  std::vector<InsertionStep> trace;
  std::uint64_t queries = 0;  // ledger increments during this call
};

template <ComparisonSource Source>
IirResult iir(const std::vector<ItemId>& items, double delta, const ActiveSet& initial_users,
              QueryContext<Source>& ctx, bool eliminate) {
  if (items.empty()) throw std::invalid_argument("iir: no items");
  if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("iir: delta outside (0, 1)");

  const std::uint64_t start = ctx.ledger.total_responses();
  const std::size_t num_items = items.size();
  ActiveSet users = initial_users;
  std::vector<InsertionStep> trace;
  std::vector<ItemId> answer{items.front()};  // worst-first

  if (num_items > 1) {
    const double per_item = delta / static_cast<double>(num_items - 1);
    for (std::size_t k = 1; k < num_items; ++k) {
      const ItemId z = items[k];
      ctx.ledger.begin_item();
      const std::size_t pos = iai(z, answer, per_item, users, ctx).position;
      answer.insert(answer.begin() + static_cast<std::ptrdiff_t>(pos), z);

      for (std::size_t p = 0; p < answer.size(); ++p) {
        if (p != pos) ctx.ledger.credit(answer[p], p < pos);
      }
      if (eliminate) {
        users = eliminate_user(users, ctx.ledger.correct(), ctx.ledger.responses(), per_item, num_items,
                               ctx.ledger.num_users());
      }
      std::uint64_t s_total = 0;
      for (std::uint64_t s : ctx.ledger.responses()) s_total += s;
      trace.push_back({z, users.size(), s_total});
    }
  }

  return {std::vector<ItemId>(answer.rbegin(), answer.rend()), std::move(users), std::move(trace),
          ctx.ledger.total_responses() - start};
}

}  // namespace activerank
