#include <atomic>
#include <csignal>
#include <iostream>

#include <CLI11.hpp>

#include "activerank/cli.hpp"

namespace {

std::atomic<bool> g_interrupted{false};

extern "C" void on_sigint(int) { g_interrupted.store(true); }

}  // namespace

int main(int argc, char** argv) {
  using activerank::CliInvocation;

  CLI::App app{"Active exact ranking from noisy pairwise comparisons by heterogeneous users"};
  app.require_subcommand(1);

  CliInvocation inv;
  std::uint64_t seed = 0;
  std::string algorithm;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", inv.config_path, "Experiment config file")->required();
    sub->add_option("--seed", seed, "Override base_seed");
    sub->add_option("--jobs", inv.jobs, "Worker threads")->check(CLI::PositiveNumber);
    sub->add_flag("-v,--verbose", inv.verbosity, "Verbose output");
  };

  CLI::App* rank = app.add_subcommand("rank", "One seeded ranking run");
  add_common(rank);
  rank->add_option("--algorithm", algorithm, "Algorithm (overrides the config)");

  CLI::App* sweep = app.add_subcommand("sweep", "Run the full grid and write CSVs");
  add_common(sweep);
  sweep->add_option("--out", inv.out_dir, "Output directory")->required();
  sweep->add_flag("--trace", inv.write_trace, "Also write trace.csv");
  sweep->add_flag("--jsonl", inv.write_jsonl, "Also write records.jsonl");

  CLI::App* diag = app.add_subcommand("diagnose", "Elimination trace and complexity references");
  add_common(diag);
  diag->add_option("--out", inv.out_dir, "Output directory for diagnose.csv and trace.csv");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : activerank::kExitConfig;
  }

  if (app.get_subcommands().front()->count("--seed") > 0) inv.seed = seed;
  if (!algorithm.empty()) inv.algorithm = algorithm;

  if (*rank) return activerank::cmd_rank(inv, std::cout, std::cerr);
  if (*sweep) {
    std::signal(SIGINT, on_sigint);
    return activerank::cmd_sweep(inv, std::cout, std::cerr, &g_interrupted);
  }
  return activerank::cmd_diagnose(inv, std::cout, std::cerr);
}
