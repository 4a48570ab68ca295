#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "certify/driver.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Monte-Carlo safety certification of dispatch zones"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "certify a zone");
  std::string run_config;
  std::string run_process = "both";
  std::optional<std::uint64_t> run_seed;
  std::optional<std::size_t> run_budget;
  std::optional<std::string> run_out;
  run->add_option("--config", run_config, "run config or zone JSON")
      ->required();
  run->add_option("--process", run_process, "brute, proxy or both")
      ->check(CLI::IsMember({"brute", "proxy", "both"}));
  run->add_option("--seed", run_seed, "override the config seed");
  run->add_option("--budget", run_budget, "override the simulation budget");
  run->add_option("--out", run_out, "override the output directory");

  auto* sweep = app.add_subcommand(
      "sweep", "simulation counts of the synthetic-coin baseline");
  certify::SweepConfig sweep_cfg;
  std::string sweep_out = "number_of_simulations.csv";
  sweep->add_option("--p", sweep_cfg.p_values, "safety probabilities");
  sweep->add_option("--precision", sweep_cfg.precisions,
                    "relative precision targets");
  sweep->add_option("--repeats", sweep_cfg.repeats, "runs per cell");
  sweep->add_option("--alpha", sweep_cfg.alpha, "interval level");
  sweep->add_option("--seed", sweep_cfg.seed, "sweep seed");
  sweep->add_option("--threads", sweep_cfg.threads, "worker threads");
  sweep->add_option("--out", sweep_out, "output CSV path");

  auto* bench =
      app.add_subcommand("bench-cdf", "time the rectangle probability");
  certify::BenchConfig bench_cfg;
  std::string bench_out = "cdf_timing.csv";
  bench->add_option("--dims", bench_cfg.dims, "dimensions to time")
      ->required();
  bench->add_option("--repeats", bench_cfg.repeats, "evaluations per point");
  bench->add_option("--accuracy", bench_cfg.accuracy, "target accuracy");
  bench->add_option("--seed", bench_cfg.seed, "bench seed");
  bench->add_option("--out", bench_out, "output CSV path");

  auto* make_zone = app.add_subcommand("make-zone", "generate a zone file");
  std::string zone_out = "zone.json";
  int zone_lines = 5;
  int zone_nodes = 10;
  std::uint64_t zone_seed = 1;
  make_zone->add_option("--out", zone_out, "zone JSON path");
  make_zone->add_option("--lines", zone_lines, "monitored lines");
  make_zone->add_option("--nodes", zone_nodes, "injection nodes");
  make_zone->add_option("--seed", zone_seed, "generator seed");

  CLI11_PARSE(app, argc, argv);

  if (run->parsed()) {
    certify::RunOverrides overrides;
    overrides.seed = run_seed;
    overrides.budget = run_budget;
    overrides.output_dir = run_out;
    return certify::cmd_run(run_config, run_process, overrides);
  }
  if (sweep->parsed()) return certify::cmd_sweep(sweep_cfg, sweep_out);
  if (bench->parsed()) return certify::cmd_bench_cdf(bench_cfg, bench_out);
  if (make_zone->parsed())
    return certify::cmd_make_zone(zone_out, zone_lines, zone_nodes, zone_seed);
  return 1;
}
