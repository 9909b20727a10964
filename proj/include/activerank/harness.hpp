#pragma once

// Experiment grids: every (algorithm, N, repeat) cell gets its own seed, a
// freshly sampled true ranking and a fresh simulated user pool.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <map>
#include <numbers>
#include <numeric>
#include <ostream>
#include <stdexcept>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

#include "activerank/baselines.hpp"
#include "activerank/core.hpp"

namespace activerank {

class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string field, const std::string& message, int line = 0)
      : std::runtime_error((line > 0 ? "line " + std::to_string(line) + ": " : std::string()) + field + ": " +
                           message),
        field_(std::move(field)),
        line_(line) {}

  const std::string& field() const noexcept { return field_; }
  int line() const noexcept { return line_; }

 private:
  std::string field_;
  int line_;
};

enum class UserModel : std::uint8_t { Logistic, Bernoulli };

struct ExperimentConfig {
  std::vector<AlgorithmKind> algorithms{AlgorithmKind::Oracle, AlgorithmKind::NonAdaptive, AlgorithmKind::Adaptive,
                                        AlgorithmKind::TwoStage};
  std::vector<std::size_t> n_grid{10, 20, 30, 40, 50, 60, 70, 80, 90, 100};
  std::size_t num_users = 9;
  double accurate_fraction = 1.0 / 3.0;

  UserModel model = UserModel::Logistic;
  double gamma_a = 0.5;
  double gamma_b = 2.5;
  double score_gap = 3.0;
  double margin_a = 0.3;  // bernoulli model only
  double margin_b = 0.5;

  double delta = 0.1;
  std::size_t repeats = 100;
  std::uint64_t base_seed = 0;

  ArmSelector selector;
  std::size_t subset_size = 0;  // 0: ceil(M / 2)
  std::uint64_t query_budget = 100'000'000;

  // Source line of each key when parsed from a file; used in error messages.
  std::map<std::string, int> key_lines;

  int line_of(const std::string& key) const {
    const auto it = key_lines.find(key);
    return it == key_lines.end() ? 0 : it->second;
  }

  std::size_t accurate_users() const {
    const double k = std::ceil(accurate_fraction * static_cast<double>(num_users) - 1e-9);
    return std::min(num_users, static_cast<std::size_t>(std::max(0.0, k)));
  }

  // Values written to the gamma_A / gamma_B columns. The bernoulli model
  // reports its margins there.
  double column_a() const { return model == UserModel::Logistic ? gamma_a : margin_a; }
  double column_b() const { return model == UserModel::Logistic ? gamma_b : margin_b; }

  void validate() const {
    auto fail = [&](const std::string& key, const std::string& msg) { throw ConfigError(key, msg, line_of(key)); };
    if (algorithms.empty()) fail("algorithms", "at least one algorithm is required");
    if (n_grid.empty()) fail("N_grid", "at least one N is required");
    for (std::size_t n : n_grid) {
      if (n < 2) fail("N_grid", "entries must be >= 2");
    }
    if (num_users < 1) fail("M", "must be >= 1");
    if (!(accurate_fraction > 0.0 && accurate_fraction <= 1.0)) fail("accurate_fraction", "must be in (0, 1]");
    if (model == UserModel::Logistic) {
      if (!(gamma_a >= 0.0)) fail("gamma_A", "must be >= 0");
      if (!(gamma_b >= 0.0)) fail("gamma_B", "must be >= 0");
      if (!(score_gap > 0.0)) fail("score_gap", "must be > 0");
    } else {
      if (!(margin_a > 0.0 && margin_a <= 0.5)) fail("margin_A", "must be in (0, 1/2]");
      if (!(margin_b > 0.0 && margin_b <= 0.5)) fail("margin_B", "must be in (0, 1/2]");
    }
    if (!(delta > 0.0 && delta < 1.0)) fail("delta", "must be in (0, 1)");
    if (repeats < 1) fail("repeats", "must be >= 1");
    if (selector.kind == ArmSelector::Kind::SuccessiveElimination && !(selector.eps > 0.0 && selector.eps < 1.0)) {
      fail("selector_eps", "must be in (0, 1)");
    }
    if (selector.kind == ArmSelector::Kind::MedianElimination && !(selector.alpha > 0.0 && selector.alpha < 1.0)) {
      fail("selector_alpha", "must be in (0, 1)");
    }
    if (subset_size > num_users) fail("subset_size", "must be <= M");
    if (query_budget < 1) fail("query_budget", "must be >= 1");
  }

  // Correct-answer probability of every user: the first ceil(fraction * M)
  // users form the accurate group.
  std::vector<double> user_accuracies() const {
    const std::size_t k = accurate_users();
    std::vector<double> p(num_users);
    for (std::size_t u = 0; u < num_users; ++u) {
      const bool accurate = u < k;
      p[u] = model == UserModel::Logistic ? logistic_accuracy(accurate ? gamma_b : gamma_a, score_gap)
                                          : 0.5 + (accurate ? margin_b : margin_a);
    }
    return p;
  }

  SimulatedSource make_source(TrueRanking truth) const { return SimulatedSource(std::move(truth), user_accuracies()); }

  AlgorithmParams algorithm_params() const {
    AlgorithmParams p;
    p.delta = delta;
    p.selector = selector;
    p.subset_size = subset_size;
    p.options.query_budget = query_budget;
    return p;
  }
};

// Stable per-cell seed; adding algorithms or N values never moves other cells.
inline std::uint64_t cell_seed(std::uint64_t base_seed, AlgorithmKind kind, std::size_t n, std::size_t repeat) {
  std::uint64_t h = hash_combine(base_seed, fnv1a(to_string(kind)));
  h = hash_combine(h, static_cast<std::uint64_t>(n));
  return hash_combine(h, static_cast<std::uint64_t>(repeat));
}

inline RunRecord execute_run(const ExperimentConfig& config, AlgorithmKind kind, std::size_t n, std::uint64_t seed) {
  const auto start = std::chrono::steady_clock::now();
  RngStream truth_rng(hash_combine(seed, fnv1a("truth")));
  TrueRanking truth = TrueRanking::random(n, truth_rng);
  SimulatedSource source = config.make_source(truth);
  RngStreams rng(seed);

  std::vector<ItemId> items(n);
  std::iota(items.begin(), items.end(), 0);

  RunRecord rec;
  try {
    rec = run_algorithm(kind, items, config.algorithm_params(), source, rng);
    rec.exact = rec.ranking == truth.best_first();
    if (rec.total_queries != source.total_queries()) {
      throw std::logic_error("query accounting mismatch");
    }
  } catch (const std::exception& e) {
    rec = RunRecord{};
    rec.failed = true;
    rec.exact = false;
    rec.error = e.what();
    rec.per_user_queries = source.tallies();
    rec.total_queries = source.total_queries();
  }
  rec.algorithm = kind;
  rec.num_items = n;
  rec.num_users = config.num_users;
  rec.gamma_a = config.column_a();
  rec.gamma_b = config.column_b();
  rec.seed = seed;
  rec.wall_time = std::chrono::duration_cast<std::chrono::nanoseconds>(std::chrono::steady_clock::now() - start);
  return rec;
}

struct GridOptions {
  unsigned jobs = 1;
  const std::atomic<bool>* cancel = nullptr;  // checked before each run starts
};

// Records come back in (algorithm, N, repeat) order regardless of `jobs`.
// A cancelled grid returns only the runs that completed.
inline std::vector<RunRecord> run_grid(const ExperimentConfig& config, const GridOptions& options = {}) {
  config.validate();
  struct Cell {
    AlgorithmKind kind;
    std::size_t n;
    std::uint64_t seed;
  };
  std::vector<Cell> cells;
  for (AlgorithmKind kind : config.algorithms) {
    for (std::size_t n : config.n_grid) {
      for (std::size_t r = 0; r < config.repeats; ++r) cells.push_back({kind, n, cell_seed(config.base_seed, kind, n, r)});
    }
  }

  std::vector<RunRecord> records(cells.size());
  std::vector<char> done(cells.size(), 0);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (;;) {
      if (options.cancel && options.cancel->load()) return;
      const std::size_t k = next.fetch_add(1);
      if (k >= cells.size()) return;
      records[k] = execute_run(config, cells[k].kind, cells[k].n, cells[k].seed);
      done[k] = 1;
    }
  };

  const unsigned jobs = std::max(1u, options.jobs);
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned j = 0; j < jobs; ++j) pool.emplace_back(worker);
  }

  std::vector<RunRecord> out;
  out.reserve(cells.size());
  for (std::size_t k = 0; k < cells.size(); ++k) {
    if (done[k]) out.push_back(std::move(records[k]));
  }
  return out;
}

struct SummaryRow {
  AlgorithmKind algorithm = AlgorithmKind::Oracle;
  std::size_t num_items = 0;
  std::size_t num_users = 0;
  double gamma_a = 0.0;
  double gamma_b = 0.0;
  std::size_t runs = 0;
  double mean_queries = 0.0;
  double std_queries = 0.0;  // sample standard deviation; 0 for a single run
  double exact_rate = 0.0;
};

// Groups by (algorithm, N, M, gamma_A, gamma_B) in order of first appearance.
inline std::vector<SummaryRow> summarize(const std::vector<RunRecord>& records) {
  if (records.empty()) throw std::invalid_argument("summarize: no records");
  using Key = std::tuple<AlgorithmKind, std::size_t, std::size_t, double, double>;
  std::vector<Key> order;
  std::map<Key, std::vector<const RunRecord*>> groups;
  for (const RunRecord& r : records) {
    const Key key{r.algorithm, r.num_items, r.num_users, r.gamma_a, r.gamma_b};
    auto [it, inserted] = groups.try_emplace(key);
    if (inserted) order.push_back(key);
    it->second.push_back(&r);
  }

  std::vector<SummaryRow> rows;
  rows.reserve(order.size());
  for (const Key& key : order) {
    const auto& group = groups[key];
    SummaryRow row;
    std::tie(row.algorithm, row.num_items, row.num_users, row.gamma_a, row.gamma_b) = key;
    row.runs = group.size();
    double sum = 0.0;
    std::size_t exact = 0;
    for (const RunRecord* r : group) {
      sum += static_cast<double>(r->total_queries);
      exact += r->exact ? 1 : 0;
    }
    row.mean_queries = sum / static_cast<double>(group.size());
    if (group.size() > 1) {
      double ss = 0.0;
      for (const RunRecord* r : group) {
        const double d = static_cast<double>(r->total_queries) - row.mean_queries;
        ss += d * d;
      }
      row.std_queries = std::sqrt(ss / static_cast<double>(group.size() - 1));
    }
    row.exact_rate = static_cast<double>(exact) / static_cast<double>(group.size());
    rows.push_back(row);
  }
  return rows;
}

// ---------------------------------------------------------------------------
// Diagnostics

struct ComplexityReference {
  double value = 0.0;
  bool clamped = false;  // x > 1/e: the log log term was negative and set to 0
};

// Per-item complexity scale x^-2 (log log(1/x) + log(N / delta)).
inline ComplexityReference complexity_reference(double x, std::size_t num_items, double delta) {
  if (!(x > 0.0 && x <= 0.5)) throw std::invalid_argument("complexity_reference: x outside (0, 1/2]");
  ComplexityReference out;
  double loglog = std::log(std::log(1.0 / x));
  if (x > 1.0 / std::numbers::e) out.clamped = true;
  if (!(loglog > 0.0)) loglog = 0.0;
  out.value = (loglog + std::log(static_cast<double>(num_items) / delta)) / (x * x);
  return out;
}

// Active-set size after each insertion, one sequence per run.
inline std::vector<std::vector<std::size_t>> elimination_trace(const std::vector<RunRecord>& records) {
  std::vector<std::vector<std::size_t>> out;
  out.reserve(records.size());
  for (const RunRecord& r : records) {
    std::vector<std::size_t> sizes;
    sizes.reserve(r.trace.size());
    for (const InsertionStep& s : r.trace) sizes.push_back(s.active_set_size);
    out.push_back(std::move(sizes));
  }
  return out;
}

// ---------------------------------------------------------------------------
// CSV output

inline std::string format_real(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

inline void write_records_csv(std::ostream& os, const std::vector<RunRecord>& records) {
  os << "algorithm,N,M,gamma_A,gamma_B,seed,queries,exact\n";
  for (const RunRecord& r : records) {
    os << to_string(r.algorithm) << ',' << r.num_items << ',' << r.num_users << ',' << format_real(r.gamma_a) << ','
       << format_real(r.gamma_b) << ',' << r.seed << ',' << r.total_queries << ',' << (r.exact ? 1 : 0) << '\n';
  }
}

inline void write_summary_csv(std::ostream& os, const std::vector<SummaryRow>& rows) {
  os << "algorithm,N,M,gamma_A,gamma_B,mean_queries,std_queries,exact_rate\n";
  for (const SummaryRow& r : rows) {
    os << to_string(r.algorithm) << ',' << r.num_items << ',' << r.num_users << ',' << format_real(r.gamma_a) << ','
       << format_real(r.gamma_b) << ',' << format_real(r.mean_queries) << ',' << format_real(r.std_queries) << ','
       << format_real(r.exact_rate) << '\n';
  }
}

// One row per insertion: z is the 1-based insertion step.
inline void write_trace_csv(std::ostream& os, const std::vector<RunRecord>& records) {
  os << "seed,z,active_set_size,S_z\n";
  for (const RunRecord& r : records) {
    for (std::size_t k = 0; k < r.trace.size(); ++k) {
      os << r.seed << ',' << (k + 1) << ',' << r.trace[k].active_set_size << ',' << r.trace[k].total_responses
         << '\n';
    }
  }
}

}  // namespace activerank
