#pragma once

// Bandit routines over users. Each user is an arm whose reward is 1 when its
// answer is correct. eliminate_user is the gated UCB/LCB filter applied
// between insertions; median_elimination and successive_elimination pick a
// near-best user from an explicit reward oracle.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <limits>
#include <numbers>
#include <span>
#include <stdexcept>
#include <vector>

#include "activerank/core.hpp"

namespace activerank {

// Sorted, duplicate-free, non-empty set of users.
class ActiveSet {
 public:
  ActiveSet(std::vector<UserId> members) : members_(std::move(members)) {
    std::sort(members_.begin(), members_.end());
    members_.erase(std::unique(members_.begin(), members_.end()), members_.end());
    if (members_.empty()) throw std::invalid_argument("ActiveSet: empty");
    if (members_.front() < 0) throw std::invalid_argument("ActiveSet: negative user id");
  }
  ActiveSet(std::initializer_list<UserId> members) : ActiveSet(std::vector<UserId>(members)) {}

  static ActiveSet all(std::size_t num_users) {
    std::vector<UserId> v(num_users);
    for (std::size_t u = 0; u < num_users; ++u) v[u] = static_cast<UserId>(u);
    return ActiveSet(std::move(v));
  }

  std::size_t size() const noexcept { return members_.size(); }
  UserId operator[](std::size_t k) const { return members_[k]; }
  const std::vector<UserId>& members() const noexcept { return members_; }
  auto begin() const noexcept { return members_.begin(); }
  auto end() const noexcept { return members_.end(); }

  bool contains(UserId u) const { return std::binary_search(members_.begin(), members_.end(), u); }
  bool is_subset_of(const ActiveSet& other) const {
    return std::includes(other.members_.begin(), other.members_.end(), members_.begin(), members_.end());
  }

  friend bool operator==(const ActiveSet&, const ActiveSet&) = default;

 private:
  std::vector<UserId> members_;
};

// ---------------------------------------------------------------------------
// EliminateUser

// Total response count S at which elimination switches on: 2 M^2 log(N M / delta).
inline double elimination_gate(std::size_t num_items, std::size_t num_users, double delta) {
  const double m = static_cast<double>(num_users);
  return 2.0 * m * m * std::log(static_cast<double>(num_items) * m / delta);
}

struct ConfidenceBand {
  std::vector<double> mu;  // indexed like the active set
  double radius = std::numeric_limits<double>::infinity();

  double lcb(std::size_t k) const { return mu[k] - radius; }
  double ucb(std::size_t k) const { return mu[k] + radius; }
};

// mu_u = n_u / s_u and a common radius sqrt(log(2|U|/delta) / (2 s_min)).
// A user with no responses yields an infinite radius.
inline ConfidenceBand confidence_band(const ActiveSet& users, std::span<const std::uint64_t> correct,
                                      std::span<const std::uint64_t> responses, double delta) {
  ConfidenceBand band;
  band.mu.reserve(users.size());
  std::uint64_t s_min = std::numeric_limits<std::uint64_t>::max();
  for (UserId u : users) {
    const std::uint64_t s = responses[u];
    s_min = std::min(s_min, s);
    band.mu.push_back(s == 0 ? 0.0 : static_cast<double>(correct[u]) / static_cast<double>(s));
  }
  if (s_min > 0) {
    band.radius = std::sqrt(std::log(2.0 * static_cast<double>(users.size()) / delta) /
                            (2.0 * static_cast<double>(s_min)));
  }
  return band;
}

inline ActiveSet eliminate_user(const ActiveSet& users, std::span<const std::uint64_t> correct,
                                std::span<const std::uint64_t> responses, double delta, std::size_t num_items,
                                std::size_t num_users) {
  if (correct.size() < num_users || responses.size() < num_users) {
    throw std::invalid_argument("eliminate_user: count vectors shorter than the user pool");
  }
  if (users.size() == 1) return users;

  std::uint64_t total = 0;
  for (std::size_t u = 0; u < num_users; ++u) total += responses[u];
  if (static_cast<double>(total) < elimination_gate(num_items, num_users, delta)) return users;

  const ConfidenceBand band = confidence_band(users, correct, responses, delta);
  if (!std::isfinite(band.radius)) return users;

  const double best_lcb = *std::max_element(band.mu.begin(), band.mu.end()) - band.radius;
  std::vector<UserId> kept;
  for (std::size_t k = 0; k < users.size(); ++k) {
    if (!(band.ucb(k) < best_lcb)) kept.push_back(users[k]);
  }
  return ActiveSet(std::move(kept));
}

// ---------------------------------------------------------------------------
// Best-arm identification with 0/1 rewards

// Draws one reward for a user; 1 means the user answered correctly.
using RewardOracle = std::function<bool(UserId)>;

struct ArmSelection {
  UserId user = 0;
  std::uint64_t pulls = 0;
  std::size_t rounds = 0;
};

struct MedianEliminationRound {
  double eps;
  double delta;
  std::uint64_t pulls_per_arm;
  std::size_t arms;
};

// The full round schedule for a pool of `arms` users; deterministic.
inline std::vector<MedianEliminationRound> median_elimination_schedule(std::size_t arms, double alpha, double delta) {
  std::vector<MedianEliminationRound> rounds;
  double eps = alpha / 4.0;
  double d = delta / 2.0;
  while (arms > 1) {
    const auto pulls = static_cast<std::uint64_t>(std::ceil(4.0 / (eps * eps) * std::log(3.0 / d)));
    rounds.push_back({eps, d, pulls, arms});
    arms = (arms + 1) / 2;
    eps *= 0.75;
    d *= 0.5;
  }
  return rounds;
}

// Median elimination: each round samples every survivor equally, then keeps
// the better half (ties to the smaller id) until one user is left.
inline ArmSelection median_elimination(const ActiveSet& users, double alpha, double delta, const RewardOracle& reward) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("median_elimination: alpha outside (0, 1)");
  if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("median_elimination: delta outside (0, 1)");

  ArmSelection out;
  std::vector<UserId> survivors = users.members();
  for (const MedianEliminationRound& round : median_elimination_schedule(survivors.size(), alpha, delta)) {
    std::vector<std::pair<std::uint64_t, UserId>> wins;
    wins.reserve(survivors.size());
    for (UserId u : survivors) {
      std::uint64_t w = 0;
      for (std::uint64_t k = 0; k < round.pulls_per_arm; ++k) w += reward(u) ? 1 : 0;
      out.pulls += round.pulls_per_arm;
      wins.emplace_back(w, u);
    }
    std::stable_sort(wins.begin(), wins.end(), [](const auto& a, const auto& b) {
      return a.first != b.first ? a.first > b.first : a.second < b.second;
    });
    survivors.clear();
    for (std::size_t k = 0; k < (wins.size() + 1) / 2; ++k) survivors.push_back(wins[k].second);
    std::sort(survivors.begin(), survivors.end());
    ++out.rounds;
  }
  out.user = survivors.front();
  return out;
}

// Anytime radius after t pulls per arm with `arms` survivors.
inline double successive_elimination_radius(std::uint64_t t, std::size_t arms, double delta) {
  const double td = static_cast<double>(t);
  const double pi2 = std::numbers::pi * std::numbers::pi;
  return std::sqrt(std::log(2.0 * static_cast<double>(arms) * td * td * pi2 / (3.0 * delta)) / (2.0 * td));
}

// Successive elimination: one pull per survivor per round; drop users whose
// UCB falls below the best LCB. Stops with one survivor, or with the empirical
// best once the radius is at most eps/2.
inline ArmSelection successive_elimination(const ActiveSet& users, double eps, double delta,
                                           const RewardOracle& reward) {
  if (!(eps > 0.0 && eps < 1.0)) throw std::invalid_argument("successive_elimination: eps outside (0, 1)");
  if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("successive_elimination: delta outside (0, 1)");

  ArmSelection out;
  std::vector<UserId> survivors = users.members();
  std::vector<std::uint64_t> wins(survivors.size(), 0);
  std::uint64_t t = 0;

  auto empirical_best = [&] {
    std::size_t best = 0;
    for (std::size_t k = 1; k < survivors.size(); ++k) {
      if (wins[k] > wins[best]) best = k;
    }
    return best;
  };

  while (survivors.size() > 1) {
    ++t;
    for (std::size_t k = 0; k < survivors.size(); ++k) {
      wins[k] += reward(survivors[k]) ? 1 : 0;
      ++out.pulls;
    }
    ++out.rounds;

    const double radius = successive_elimination_radius(t, survivors.size(), delta);
    const double td = static_cast<double>(t);
    const double best_lcb = static_cast<double>(wins[empirical_best()]) / td - radius;

    std::vector<UserId> next;
    std::vector<std::uint64_t> next_wins;
    for (std::size_t k = 0; k < survivors.size(); ++k) {
      if (!(static_cast<double>(wins[k]) / td + radius < best_lcb)) {
        next.push_back(survivors[k]);
        next_wins.push_back(wins[k]);
      }
    }
    survivors = std::move(next);
    wins = std::move(next_wins);
    if (survivors.size() > 1 && radius <= eps / 2.0) {
      out.user = survivors[empirical_best()];
      return out;
    }
  }
  out.user = survivors.front();
  return out;
}

}  // namespace activerank
