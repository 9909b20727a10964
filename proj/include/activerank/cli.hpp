#pragma once

// Command implementations behind the `activerank` executable, kept in a
// header so tests can drive them with in-memory streams.
//
// Config files are flat `key = value` text. `#` starts a comment, lists are
// comma separated, and every key is optional:
//
//   algorithms        = oracle, nonadaptive, adaptive, two_stage, modified_two_stage
//   N_grid            = 10, 20, 40
//   M                 = 9
//   accurate_fraction = 1/3            (a decimal or a ratio)
//   model             = logistic | bernoulli
//   gamma_A, gamma_B  = 0.5, 2.5       (logistic scale of the two groups)
//   score_gap         = 3
//   margin_A, margin_B                 (bernoulli margins in (0, 1/2])
//   delta             = 0.1
//   repeats           = 100
//   base_seed         = 0
//   selector          = successive_elimination | median_elimination
//   selector_eps      = 0.15
//   selector_alpha    = 0.1
//   subset_size       = 0              (0 means ceil(M / 2))
//   query_budget      = 100000000

#include <atomic>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "activerank/baselines.hpp"
#include "activerank/elimination.hpp"
#include "activerank/harness.hpp"

namespace activerank {

namespace config_detail {

inline std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline std::vector<std::string_view> split_list(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const auto comma = s.find(',', start);
    out.push_back(trim(s.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

template <typename T>
T parse_integer(std::string_view text, const std::string& key, int line) {
  T value{};
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw ConfigError(key, "expected a nonnegative integer, got '" + std::string(text) + "'", line);
  }
  return value;
}

inline double parse_real(std::string_view text, const std::string& key, int line) {
  const std::string s(text);
  const auto slash = s.find('/');
  try {
    std::size_t used = 0;
    if (slash != std::string::npos) {
      const double num = std::stod(s.substr(0, slash), &used);
      if (used != slash) throw std::invalid_argument("numerator");
      const std::string den_text = s.substr(slash + 1);
      const double den = std::stod(den_text, &used);
      if (used != den_text.size() || den == 0.0) throw std::invalid_argument("denominator");
      return num / den;
    }
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw ConfigError(key, "expected a number, got '" + s + "'", line);
  }
}

}  // namespace config_detail

// Parses and validates a config; every error names its key and, when known, its line.
inline ExperimentConfig parse_config(std::string_view text) {
  using namespace config_detail;
  ExperimentConfig cfg;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto eol = text.find('\n', pos);
    std::string_view line = text.substr(pos, eol == std::string_view::npos ? std::string_view::npos : eol - pos);
    pos = eol == std::string_view::npos ? text.size() + 1 : eol + 1;
    ++line_no;

    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;

    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ConfigError(std::string(line), "expected 'key = value'", line_no);
    const std::string key(trim(line.substr(0, eq)));
    const std::string_view value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError("(empty key)", "expected 'key = value'", line_no);
    if (value.empty()) throw ConfigError(key, "missing value", line_no);
    if (!cfg.key_lines.emplace(key, line_no).second) throw ConfigError(key, "duplicate key", line_no);

    if (key == "algorithms") {
      cfg.algorithms.clear();
      for (std::string_view name : split_list(value)) {
        const auto kind = parse_algorithm(name);
        if (!kind) throw ConfigError(key, "unknown algorithm '" + std::string(name) + "'", line_no);
        cfg.algorithms.push_back(*kind);
      }
    } else if (key == "N_grid") {
      cfg.n_grid.clear();
      for (std::string_view n : split_list(value)) cfg.n_grid.push_back(parse_integer<std::size_t>(n, key, line_no));
    } else if (key == "M") {
      cfg.num_users = parse_integer<std::size_t>(value, key, line_no);
    } else if (key == "accurate_fraction") {
      cfg.accurate_fraction = parse_real(value, key, line_no);
    } else if (key == "model") {
      if (value == "logistic") {
        cfg.model = UserModel::Logistic;
      } else if (value == "bernoulli") {
        cfg.model = UserModel::Bernoulli;
      } else {
        throw ConfigError(key, "expected 'logistic' or 'bernoulli'", line_no);
      }
    } else if (key == "gamma_A") {
      cfg.gamma_a = parse_real(value, key, line_no);
    } else if (key == "gamma_B") {
      cfg.gamma_b = parse_real(value, key, line_no);
    } else if (key == "score_gap") {
      cfg.score_gap = parse_real(value, key, line_no);
    } else if (key == "margin_A") {
      cfg.margin_a = parse_real(value, key, line_no);
    } else if (key == "margin_B") {
      cfg.margin_b = parse_real(value, key, line_no);
    } else if (key == "delta") {
      cfg.delta = parse_real(value, key, line_no);
    } else if (key == "repeats") {
      cfg.repeats = parse_integer<std::size_t>(value, key, line_no);
    } else if (key == "base_seed") {
      cfg.base_seed = parse_integer<std::uint64_t>(value, key, line_no);
    } else if (key == "selector") {
      if (value == "successive_elimination") {
        cfg.selector.kind = ArmSelector::Kind::SuccessiveElimination;
      } else if (value == "median_elimination") {
        cfg.selector.kind = ArmSelector::Kind::MedianElimination;
      } else {
        throw ConfigError(key, "expected 'successive_elimination' or 'median_elimination'", line_no);
      }
    } else if (key == "selector_eps") {
      cfg.selector.eps = parse_real(value, key, line_no);
    } else if (key == "selector_alpha") {
      cfg.selector.alpha = parse_real(value, key, line_no);
    } else if (key == "subset_size") {
      cfg.subset_size = parse_integer<std::size_t>(value, key, line_no);
    } else if (key == "query_budget") {
      cfg.query_budget = parse_integer<std::uint64_t>(value, key, line_no);
    } else {
      throw ConfigError(key, "unknown key", line_no);
    }
  }
  cfg.validate();
  return cfg;
}

inline ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("--config", "cannot open '" + path.string() + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

// ---------------------------------------------------------------------------
// Commands

struct CliInvocation {
  enum class Subcommand : std::uint8_t { Rank, Sweep, Diagnose };
  Subcommand subcommand = Subcommand::Rank;
  std::filesystem::path config_path;
  std::filesystem::path out_dir;  // empty: no files written
  std::optional<std::uint64_t> seed;
  unsigned jobs = 1;
  std::optional<std::string> algorithm;
  int verbosity = 0;
  bool write_trace = false;
  bool write_jsonl = false;
};

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 1;
inline constexpr int kExitRankingFailed = 2;
inline constexpr int kExitInterrupted = 130;

namespace cli_detail {

inline std::optional<ExperimentConfig> load(const CliInvocation& inv, std::ostream& err) {
  try {
    ExperimentConfig cfg = load_config(inv.config_path);
    if (inv.seed) cfg.base_seed = *inv.seed;
    return cfg;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return std::nullopt;
  }
}

template <typename Fn>
bool write_file(const std::filesystem::path& path, std::ostream& err, Fn&& body) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    err << "cannot write '" << path.string() << "'\n";
    return false;
  }
  body(out);
  return static_cast<bool>(out);
}

inline bool prepare_out_dir(const std::filesystem::path& dir, std::ostream& err) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) {
    err << "cannot create output directory '" << dir.string() << "': " << ec.message() << '\n';
    return false;
  }
  return true;
}

template <typename T>
void print_list(std::ostream& os, const std::vector<T>& v) {
  for (std::size_t k = 0; k < v.size(); ++k) os << (k ? " " : "") << v[k];
  os << '\n';
}

}  // namespace cli_detail

// One structured JSON object per run, one run per line.
inline void write_records_jsonl(std::ostream& os, const std::vector<RunRecord>& records) {
  for (const RunRecord& r : records) {
    nlohmann::json j;
    j["algorithm"] = to_string(r.algorithm);
    j["N"] = r.num_items;
    j["M"] = r.num_users;
    j["gamma_A"] = r.gamma_a;
    j["gamma_B"] = r.gamma_b;
    j["seed"] = r.seed;
    j["queries"] = r.total_queries;
    j["per_user_queries"] = r.per_user_queries;
    j["ranking_queries"] = r.ranking_queries;
    j["selection_queries"] = r.selection_queries;
    j["exact"] = r.exact;
    j["failed"] = r.failed;
    if (r.failed) j["error"] = r.error;
    j["ranking"] = r.ranking;
    j["final_active_set"] = r.final_active_set;
    if (r.selected_user) j["selected_user"] = *r.selected_user;
    nlohmann::json trace = nlohmann::json::array();
    for (const InsertionStep& s : r.trace) {
      trace.push_back({{"item", s.item}, {"active_set_size", s.active_set_size}, {"S", s.total_responses}});
    }
    j["trace"] = std::move(trace);
    j["wall_time_ms"] = static_cast<double>(r.wall_time.count()) / 1e6;
    os << j.dump() << '\n';
  }
}

// Runs one seeded ranking and prints it. Exit 0 iff the ranking is exact.
inline int cmd_rank(const CliInvocation& inv, std::ostream& out, std::ostream& err) {
  std::optional<ExperimentConfig> cfg = cli_detail::load(inv, err);
  if (!cfg) return kExitConfig;

  AlgorithmKind kind{};
  if (inv.algorithm) {
    const auto parsed = parse_algorithm(*inv.algorithm);
    if (!parsed) {
      err << "config error: --algorithm: unknown algorithm '" << *inv.algorithm << "'\n";
      return kExitConfig;
    }
    kind = *parsed;
  } else if (cfg->algorithms.size() == 1) {
    kind = cfg->algorithms.front();
  } else {
    err << "config error: " << ConfigError("algorithms", "rank needs exactly one algorithm (or --algorithm)",
                                           cfg->line_of("algorithms")).what()
        << '\n';
    return kExitConfig;
  }
  if (cfg->n_grid.size() != 1) {
    err << "config error: " << ConfigError("N_grid", "rank needs exactly one N", cfg->line_of("N_grid")).what()
        << '\n';
    return kExitConfig;
  }

  const std::size_t n = cfg->n_grid.front();
  const std::uint64_t seed = cell_seed(cfg->base_seed, kind, n, 0);
  const RunRecord rec = execute_run(*cfg, kind, n, seed);

  out << "algorithm: " << to_string(kind) << '\n';
  out << "N: " << n << '\n';
  out << "M: " << rec.num_users << '\n';
  out << "seed: " << seed << '\n';
  if (rec.failed) {
    out << "failed: " << rec.error << '\n';
  } else {
    out << "ranking: ";
    cli_detail::print_list(out, rec.ranking);
  }
  out << "exact: " << (rec.exact ? "yes" : "no") << '\n';
  out << "total_queries: " << rec.total_queries << '\n';
  out << "per_user_queries: ";
  cli_detail::print_list(out, rec.per_user_queries);
  out << "final_active_set: ";
  cli_detail::print_list(out, rec.final_active_set);
  if (rec.selected_user) out << "selected_user: " << *rec.selected_user << '\n';
  if (inv.verbosity > 0) {
    out << "wall_time_ms: " << format_real(static_cast<double>(rec.wall_time.count()) / 1e6) << '\n';
  }
  return rec.exact ? kExitOk : kExitRankingFailed;
}

// Runs the full grid and writes records.csv and summary.csv (plus trace.csv
// and records.jsonl on request) into --out.
inline int cmd_sweep(const CliInvocation& inv, std::ostream& out, std::ostream& err,
                     const std::atomic<bool>* cancel = nullptr) {
  std::optional<ExperimentConfig> cfg = cli_detail::load(inv, err);
  if (!cfg) return kExitConfig;
  if (inv.out_dir.empty()) {
    err << "config error: --out: an output directory is required\n";
    return kExitConfig;
  }
  if (!cli_detail::prepare_out_dir(inv.out_dir, err)) return kExitConfig;

  const std::vector<RunRecord> records = run_grid(*cfg, GridOptions{inv.jobs, cancel});
  const bool interrupted = cancel && cancel->load();

  bool ok = cli_detail::write_file(inv.out_dir / "records.csv", err,
                                   [&](std::ostream& os) { write_records_csv(os, records); });
  if (!records.empty()) {
    const std::vector<SummaryRow> rows = summarize(records);
    ok = ok && cli_detail::write_file(inv.out_dir / "summary.csv", err,
                                      [&](std::ostream& os) { write_summary_csv(os, rows); });
    if (inv.verbosity > 0) write_summary_csv(out, rows);
  }
  if (inv.write_trace) {
    ok = ok && cli_detail::write_file(inv.out_dir / "trace.csv", err,
                                      [&](std::ostream& os) { write_trace_csv(os, records); });
  }
  if (inv.write_jsonl) {
    ok = ok && cli_detail::write_file(inv.out_dir / "records.jsonl", err,
                                      [&](std::ostream& os) { write_records_jsonl(os, records); });
  }
  std::size_t failed = 0;
  for (const RunRecord& r : records) failed += r.failed ? 1 : 0;
  out << records.size() << " runs written to " << inv.out_dir.string();
  if (failed) out << " (" << failed << " failed)";
  out << '\n';
  if (!ok) return kExitConfig;
  return interrupted ? kExitInterrupted : kExitOk;
}

struct DiagnosticRow {
  AlgorithmKind algorithm{};
  std::size_t num_items = 0;
  std::size_t num_users = 0;
  double gamma_a = 0.0;
  double gamma_b = 0.0;
  double mean_queries = 0.0;
  double gate_threshold = 0.0;
  double gate_first_rate = 0.0;  // runs whose S after the first insertion reached the gate
  std::size_t min_active = 0;
  std::size_t max_active = 0;
  double margin_best = 0.0;
  double margin_avg = 0.0;
  ComplexityReference f_best;
  ComplexityReference f_avg;
};

inline std::vector<DiagnosticRow> diagnose(const ExperimentConfig& cfg, const std::vector<RunRecord>& records) {
  const std::vector<double> p = cfg.user_accuracies();
  const double best = *std::max_element(p.begin(), p.end()) - 0.5;
  const double avg = std::accumulate(p.begin(), p.end(), 0.0) / static_cast<double>(p.size()) - 0.5;

  std::vector<DiagnosticRow> rows;
  for (const SummaryRow& s : summarize(records)) {
    DiagnosticRow row;
    row.algorithm = s.algorithm;
    row.num_items = s.num_items;
    row.num_users = s.num_users;
    row.gamma_a = s.gamma_a;
    row.gamma_b = s.gamma_b;
    row.mean_queries = s.mean_queries;
    row.gate_threshold = elimination_gate(s.num_items, s.num_users, cfg.delta);
    row.margin_best = best;
    row.margin_avg = avg;
    row.min_active = std::numeric_limits<std::size_t>::max();
    std::size_t runs = 0;
    std::size_t passed = 0;
    for (const RunRecord& r : records) {
      if (r.algorithm != s.algorithm || r.num_items != s.num_items) continue;
      ++runs;
      if (!r.trace.empty() && static_cast<double>(r.trace.front().total_responses) >= row.gate_threshold) ++passed;
      for (const InsertionStep& step : r.trace) {
        row.min_active = std::min(row.min_active, step.active_set_size);
        row.max_active = std::max(row.max_active, step.active_set_size);
      }
    }
    if (row.min_active == std::numeric_limits<std::size_t>::max()) row.min_active = 0;
    row.gate_first_rate = runs ? static_cast<double>(passed) / static_cast<double>(runs) : 0.0;
    if (best > 0.0) row.f_best = complexity_reference(best, s.num_items, cfg.delta);
    if (avg > 0.0) row.f_avg = complexity_reference(avg, s.num_items, cfg.delta);
    rows.push_back(row);
  }
  return rows;
}

inline void write_diagnostics_csv(std::ostream& os, const std::vector<DiagnosticRow>& rows) {
  os << "algorithm,N,M,gamma_A,gamma_B,mean_queries,gate_threshold,gate_first_rate,min_active,max_active,"
        "margin_best,margin_avg,F_best,F_avg,NF_best,NF_avg,F_clamped\n";
  for (const DiagnosticRow& r : rows) {
    const double n = static_cast<double>(r.num_items);
    os << to_string(r.algorithm) << ',' << r.num_items << ',' << r.num_users << ',' << format_real(r.gamma_a) << ','
       << format_real(r.gamma_b) << ',' << format_real(r.mean_queries) << ',' << format_real(r.gate_threshold) << ','
       << format_real(r.gate_first_rate) << ',' << r.min_active << ',' << r.max_active << ','
       << format_real(r.margin_best) << ',' << format_real(r.margin_avg) << ',' << format_real(r.f_best.value) << ','
       << format_real(r.f_avg.value) << ',' << format_real(n * r.f_best.value) << ','
       << format_real(n * r.f_avg.value) << ',' << ((r.f_best.clamped || r.f_avg.clamped) ? 1 : 0) << '\n';
  }
}

// Elimination trace and complexity references next to the observed means.
inline int cmd_diagnose(const CliInvocation& inv, std::ostream& out, std::ostream& err) {
  std::optional<ExperimentConfig> cfg = cli_detail::load(inv, err);
  if (!cfg) return kExitConfig;
  if (!inv.out_dir.empty() && !cli_detail::prepare_out_dir(inv.out_dir, err)) return kExitConfig;

  const std::vector<RunRecord> records = run_grid(*cfg, GridOptions{inv.jobs, nullptr});
  const std::vector<DiagnosticRow> rows = diagnose(*cfg, records);
  write_diagnostics_csv(out, rows);
  if (!inv.out_dir.empty()) {
    const bool ok = cli_detail::write_file(inv.out_dir / "diagnose.csv", err,
                                           [&](std::ostream& os) { write_diagnostics_csv(os, rows); }) &&
                    cli_detail::write_file(inv.out_dir / "trace.csv", err,
                                           [&](std::ostream& os) { write_trace_csv(os, records); });
    if (!ok) return kExitConfig;
  }
  return kExitOk;
}

}  // namespace activerank
