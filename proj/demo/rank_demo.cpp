// Ranks 20 items with nine simulated users, three of them accurate, and
// compares adaptive sampling against the best-user oracle.

#include <iostream>
#include <numeric>
#include <vector>

#include "activerank/activerank.hpp"

int main() {
  using namespace activerank;

  constexpr std::size_t kItems = 20;
  const std::vector<double> gammas{2.5, 2.5, 2.5, 0.5, 0.5, 0.5, 0.5, 0.5, 0.5};

  RngStream truth_rng(7);
  const TrueRanking truth = TrueRanking::random(kItems, truth_rng);
  std::vector<ItemId> items(kItems);
  std::iota(items.begin(), items.end(), 0);

  for (AlgorithmKind kind : {AlgorithmKind::Oracle, AlgorithmKind::Adaptive}) {
    SimulatedSource source = make_logistic_source(truth, gammas, 3.0);
    RngStreams rng(42);
    const RunRecord rec = run_algorithm(kind, items, AlgorithmParams{}, source, rng);
    std::cout << to_string(kind) << ": " << rec.total_queries << " queries, "
              << (rec.ranking == truth.best_first() ? "exact" : "not exact") << ", final users";
    for (UserId u : rec.final_active_set) std::cout << ' ' << u;
    std::cout << '\n';
  }
}
