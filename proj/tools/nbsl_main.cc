// Command-line front end: `nbsl run <config>` and `nbsl check <config>`.

#include <CLI11.hpp>

#include <iostream>

#include "nbsl/commands.h"

int main(int argc, char** argv) {
  nbsl::configure_logging_from_env();

  CLI::App app{"Non-Bayesian social learning with Gaussian uncertain models"};
  app.require_subcommand(1);

  std::string run_config;
  nbsl::RunOverrides overrides;
  std::uint64_t seed = 0, horizon = 0, runs = 0;
  std::string out_path, plan;
  bool linear = false;
  auto* run = app.add_subcommand("run", "Simulate a scenario and write results");
  run->add_option("config", run_config, "Scenario file")->required()->check(CLI::ExistingFile);
  auto* seed_opt = run->add_option("--seed", seed, "Master seed");
  auto* horizon_opt = run->add_option("--horizon,-T", horizon, "Number of time steps")->check(CLI::PositiveNumber);
  auto* runs_opt = run->add_option("--runs", runs, "Monte Carlo runs")->check(CLI::PositiveNumber);
  auto* out_opt = run->add_option("--out", out_path, "Results CSV path");
  auto* plan_opt = run->add_option("--evidence", plan, "Evidence plan name");
  run->add_flag("--linear", linear, "Write beliefs instead of log-beliefs");
  run->add_option("--threads", overrides.threads, "Worker threads (0: all cores)");

  std::string check_config;
  auto* check = app.add_subcommand("check", "Validate a scenario and print diagnostics");
  check->add_option("config", check_config, "Scenario file")->required()->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : nbsl::kExitUsage;
  }

  if (*run) {
    if (*seed_opt) overrides.seed = seed;
    if (*horizon_opt) overrides.horizon = horizon;
    if (*runs_opt) overrides.runs = runs;
    if (*out_opt) overrides.out = out_path;
    if (*plan_opt) overrides.evidence = plan;
    if (linear) overrides.linear = true;
    return nbsl::cmd_run(run_config, overrides, std::cout, std::cerr);
  }
  return nbsl::cmd_check(check_config, std::cout, std::cerr);
}
