#include <iostream>

#include <CLI11.hpp>

#include "gfvi/experiment.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Coalescent flows with immigration and their measure-valued duals"};
  app.require_subcommand(1);

  gfvi::Overrides overrides;
  std::string config_path, out;
  std::uint64_t seed = 0;
  long replicates = 0;
  unsigned threads = 0;

  using gfvi::ExperimentKind;
  const std::vector<std::pair<ExperimentKind, std::string>> kinds{
      {ExperimentKind::SimulateCoalescent, "block statistics of the coalescent vs the exact semigroup"},
      {ExperimentKind::SimulateGfvi, "moments of the particle population"},
      {ExperimentKind::DualityCheck, "population moments vs the exact coalescent dual"},
      {ExperimentKind::MarginalCheck, "chi-square of the flow marginal on [p]"},
      {ExperimentKind::CdiReport, "coming-down and extinction diagnostics"},
      {ExperimentKind::RatesTable, "jump rates of every event on [n]"},
  };
  std::vector<std::pair<CLI::App*, ExperimentKind>> commands;
  for (const auto& [kind, description] : kinds) {
    auto* sub = app.add_subcommand(gfvi::to_string(kind), description);
    sub->add_option("--config", config_path, "TOML experiment config")->check(CLI::ExistingFile);
    sub->add_option("--seed", seed, "base seed (overrides the config)");
    sub->add_option("--out", out, "output directory (overrides the config)");
    sub->add_option("--replicates", replicates, "replicate count")->check(CLI::PositiveNumber);
    sub->add_option("--threads", threads, "worker threads")->check(CLI::PositiveNumber);
    commands.emplace_back(sub, kind);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : gfvi::kExitConfig;
  }

  for (const auto& [sub, kind] : commands) {
    if (!sub->parsed()) continue;
    if (sub->count("--config")) overrides.config_path = config_path;
    if (sub->count("--seed")) overrides.seed = seed;
    if (sub->count("--out")) overrides.out = out;
    if (sub->count("--replicates")) overrides.replicates = replicates;
    if (sub->count("--threads")) overrides.threads = threads;
    return gfvi::run_command(kind, overrides, std::cerr);
  }
  return gfvi::kExitConfig;
}
