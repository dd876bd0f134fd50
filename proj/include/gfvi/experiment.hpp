#pragma once

#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "gfvi/config.hpp"

namespace gfvi {

struct ResultRow {
  std::vector<std::string> parameters;
  double estimate = 0.0;
  double se = NAN;
  double exact = NAN;
  double z = NAN;
  std::string verdict;  // pass, fail, or a descriptive label
};

struct ResultTable {
  std::string experiment;
  std::vector<std::string> parameter_names;
  std::vector<ResultRow> rows;
  nlohmann::json details = nlohmann::json::object();

  bool failed() const;
};

ResultTable run_experiment(const ExperimentConfig& config);

/// Header `experiment,<parameter names>,estimate,se,exact,z,verdict`.
std::string render_csv(const ResultTable& table);
std::string render_summary(const ExperimentConfig& config, const ResultTable& table);

/// Writes <out>/<experiment>.csv, <out>/summary.json and <out>/config.toml.
void emit_report(const ExperimentConfig& config, const ResultTable& table);

enum ExitCode : int { kExitOk = 0, kExitConfig = 2, kExitResource = 3, kExitFailure = 4 };

struct Overrides {
  std::optional<std::string> config_path;
  std::optional<std::uint64_t> seed;
  std::optional<long> replicates;
  std::optional<unsigned> threads;
  std::optional<std::string> out;
};

/// Loads (or defaults) the config for `experiment`, applies overrides, runs,
/// writes the report and maps the outcome to an exit code.
int run_command(ExperimentKind experiment, const Overrides& overrides, std::ostream& log);

}  // namespace gfvi
