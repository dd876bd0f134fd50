#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "gfvi/measure.hpp"
#include "gfvi/population.hpp"

namespace gfvi {

/// Malformed or invalid configuration; carries every violation found.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(std::vector<std::string> violations);
  const std::vector<std::string>& violations() const { return violations_; }

 private:
  std::vector<std::string> violations_;
};

// A small TOML subset: `key = value` lines, `[table]` and `[[array.of.tables]]`
// headers, `#` comments. Values are strings, integers, floats, booleans and
// single-line arrays of those.
namespace toml {

struct Value {
  enum class Kind { String, Integer, Float, Boolean, Array };
  Kind kind = Kind::String;
  std::string string;
  std::int64_t integer = 0;
  double number = 0.0;
  bool boolean = false;
  std::vector<Value> array;

  double as_number() const;
};

using Table = std::map<std::string, Value>;

struct Document {
  Table root;
  std::map<std::string, Table> tables;
  std::map<std::string, std::vector<Table>> arrays;
};

Document parse(std::string_view text);

}  // namespace toml

enum class ExperimentKind { SimulateCoalescent, SimulateGfvi, DualityCheck, MarginalCheck, CdiReport, RatesTable };

std::string to_string(ExperimentKind kind);
ExperimentKind experiment_from_string(std::string_view name);

struct ExperimentConfig {
  ExperimentKind experiment = ExperimentKind::CdiReport;
  CoagulationMeasure measure;
  std::uint64_t seed = 0;
  bool has_seed = false;
  long replicates = 10'000;
  unsigned threads = 1;
  int n = 3;  // resolution or particle count
  int p = 2;  // marginal resolution
  std::vector<double> times{1.0};
  InitialLaw law = InitialLaw::uniform();
  std::vector<std::string> functionals{"poly(0,1)"};
  std::vector<std::string> partitions;  // empty: singletons
  std::vector<int> resolutions;         // fixation bound check (cdi-report)
  long truncation = 1'000'000;
  int max_resolution = 6;
  std::string out = "out";

  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

/// Parses and validates; throws ConfigError with every violation.
ExperimentConfig parse_config(std::string_view text);
ExperimentConfig load_config(const std::string& path);
std::string serialize(const ExperimentConfig& config);

/// Violations that make the config unusable (empty when valid).
std::vector<std::string> config_problems(const ExperimentConfig& config);

}  // namespace gfvi
