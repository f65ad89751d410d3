// twohop_cli: exponent regions, frontiers, simulation and validation
// reports for two-hop hypothesis testing sources.
#include <CLI11.hpp>

#include <iostream>

#include "twohop/cli_reports.hpp"

int main(int argc, char** argv) {
  twohop::RunConfig cfg;
  CLI::App app{"Two-hop hypothesis testing: exponent regions and scheme simulation"};
  std::string grid;

  app.add_option("--source", cfg.source, "Source config file, or dsbs-example")->capture_default_str();
  app.add_option("--command", cfg.command, "region | frontier | simulate | validate")->required();
  app.add_option("--r1", cfg.r1, "Rate budget of the first hop (bits/symbol)")->capture_default_str();
  app.add_option("--r2", cfg.r2, "Rate budget of the second hop (bits/symbol)")->capture_default_str();
  app.add_option("--eps1", cfg.eps1, "Type-I error bound at the relay")->capture_default_str();
  app.add_option("--eps2", cfg.eps2, "Type-I error bound at the receiver")->capture_default_str();
  app.add_option("--grid", grid, "start:step:end; rates for region, theta1 values for frontier");
  app.add_option("--variant", cfg.variants, "full | tied_u1 | tied_u2 | tied_both (repeatable)")->capture_default_str();
  app.add_option("--theta1", cfg.theta1, "Relay exponent of the simulated operating point (unequal eps)")
      ->capture_default_str();
  app.add_option("--n", cfg.n, "Blocklength")->capture_default_str();
  app.add_option("--mu", cfg.mu, "Typicality slack; 0 selects n^(-1/3)")->capture_default_str();
  app.add_option("--trials", cfg.trials, "Trials per hypothesis")->capture_default_str();
  app.add_option("--seed", cfg.seed, "Master seed")->capture_default_str();
  app.add_option("--codebook", cfg.codebook, "auto | table | ensemble")->capture_default_str();
  app.add_option("--transcript", cfg.transcript, "Write per-trial NDJSON records to this file");
  app.add_option("--threads", cfg.threads, "Worker threads, 0 = all cores")->capture_default_str();
  app.add_option("--oracle-resolution", cfg.oracle_resolution, "Grid step of the validation oracle")
      ->capture_default_str();
  app.add_option("--u-cardinality", cfg.optimizer.u_cardinality, "Auxiliary alphabet size, 0 = input size + 1")
      ->capture_default_str();
  app.add_option("--split-resolution", cfg.optimizer.split_resolution, "Rate-split search grid step")
      ->capture_default_str();
  app.add_option("--out", cfg.out, "Output file (default: stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : twohop::kExitConfigError;
  }
  if (!grid.empty()) cfg.grid = grid;
  cfg.optimizer.threads = cfg.threads;
  return twohop::run(cfg, std::cout, std::cerr);
}
