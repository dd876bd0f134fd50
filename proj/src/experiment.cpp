#include "gfvi/experiment.hpp"

#include <cmath>
#include <fstream>

#include <fmt/format.h>

#include "gfvi/cdi.hpp"
#include "gfvi/coalescent.hpp"
#include "gfvi/duality.hpp"
#include "gfvi/errors.hpp"
#include "gfvi/exact.hpp"
#include "gfvi/population.hpp"

namespace gfvi {

bool ResultTable::failed() const {
  return std::any_of(rows.begin(), rows.end(), [](const ResultRow& r) { return r.verdict == "fail"; });
}

namespace {

std::string num(double x) { return fmt::format("{}", x); }

ResultRow from_report(std::vector<std::string> parameters, const ComparisonReport& r) {
  return {std::move(parameters), r.estimate, r.se, r.exact, r.z, r.pass ? "pass" : "fail"};
}

nlohmann::json report_json(const ComparisonReport& r) {
  nlohmann::json j{{"name", r.name}, {"pass", r.pass}, {"notes", r.notes}, {"bias_allowance", r.bias_allowance}};
  if (r.chi_square) {
    j["chi_square"] = {{"statistic", r.chi_square->statistic},
                       {"dof", r.chi_square->dof},
                       {"p_value", r.chi_square->p_value},
                       {"cells", r.chi_square->cells},
                       {"merged_cells", r.chi_square->merged_cells}};
  }
  return j;
}

std::vector<DistinguishedPartition> partitions_for(const ExperimentConfig& c, int arity) {
  std::vector<DistinguishedPartition> out;
  for (const auto& text : c.partitions) out.push_back(DistinguishedPartition::parse(text));
  if (out.empty()) out.push_back(singletons(arity));
  return out;
}

ResultTable rates_table(const ExperimentConfig& c) {
  ResultTable table{"rates-table", {"n", "pi"}, {}, {}};
  const PartitionSpace space(c.n, c.max_resolution);
  double sum = 0.0;
  for (const auto& pi : space) {
    if (pi.is_singletons()) continue;
    const double q = jump_rate(c.measure, pi);
    sum += q;
    table.rows.push_back({{std::to_string(c.n), pi.to_string()}, q, NAN, q, NAN, "exact"});
  }
  const double lambda = total_rate(c.measure, c.n);
  const bool ok = std::abs(sum - lambda) <= 1e-12 * std::max(1.0, lambda);
  table.rows.push_back({{std::to_string(c.n), "total"}, sum, NAN, lambda, NAN, ok ? "pass" : "fail"});
  table.details["states"] = space.size();
  return table;
}

ResultTable simulate_coalescent(const ExperimentConfig& c) {
  ResultTable table{"simulate-coalescent", {"n", "t", "statistic"}, {}, {}};
  const EventSampler sampler(c.measure, c.n);
  const bool exact = c.n <= c.max_resolution;
  std::optional<PartitionSpace> space;
  RateMatrix Q;
  Eigen::VectorXd blocks_fn, zero_fn;
  if (exact) {
    space.emplace(c.n, c.max_resolution);
    Q = rate_matrix(c.measure, *space);
    blocks_fn.resize(static_cast<Eigen::Index>(space->size()));
    zero_fn.resize(blocks_fn.size());
    for (std::size_t i = 0; i < space->size(); ++i) {
      const auto& pi = (*space)[i];
      blocks_fn(static_cast<Eigen::Index>(i)) = pi.block_count() - 1;
      zero_fn(static_cast<Eigen::Index>(i)) = pi.block_sizes()[0] - 1;
    }
  }
  for (double t : c.times) {
    struct Draw {
      double blocks = 0.0;
      double zero = 0.0;
      double forward_blocks = 0.0;
    };
    const auto draws = run_replicates<Draw>(static_cast<std::size_t>(c.replicates), c.threads, [&](std::size_t r) {
      auto rng = make_rng(c.seed, r);
      const auto state = sample_coalescent_state(sampler, c.n, t, rng);
      Draw d{static_cast<double>(state.block_count() - 1), static_cast<double>(state.block_sizes()[0] - 1), 0.0};
      if (exact && t > 0.0) {
        d.forward_blocks = forward_state(simulate_events(sampler, c.n, t, rng), t).block_count() - 1;
      } else {
        d.forward_blocks = c.n;
      }
      return d;
    });
    std::vector<double> blocks, zero, forward;
    for (const auto& d : draws) {
      blocks.push_back(d.blocks);
      zero.push_back(d.zero);
      forward.push_back(d.forward_blocks);
    }
    auto add = [&](const std::string& name, const std::vector<double>& values, const Eigen::VectorXd* fn) {
      const auto [mean, se] = mean_and_se(values);
      std::vector<std::string> params{std::to_string(c.n), num(t), name};
      if (!fn) {
        table.rows.push_back({params, mean, se, NAN, NAN, "n/a"});
        return;
      }
      const Eigen::VectorXd evolved = semigroup_apply(Q, t, *fn);
      const double value = evolved(static_cast<Eigen::Index>(space->singletons_index()));
      table.rows.push_back(from_report(params, compare_moment(name, mean, se, value, 0.0)));
    };
    add("blocks", blocks, exact ? &blocks_fn : nullptr);
    add("distinguished_size", zero, exact ? &zero_fn : nullptr);
    if (exact) add("blocks_forward", forward, &blocks_fn);
  }
  return table;
}

ResultTable simulate_gfvi(const ExperimentConfig& c) {
  ResultTable table{"simulate-gfvi", {"n", "t", "f"}, {}, {}};
  std::vector<MomentFunctional> fs;
  for (const auto& text : c.functionals) fs.push_back(MomentFunctional::parse(text));
  const EventSampler sampler(c.measure, c.n);
  for (double t : c.times) {
    const auto draws = run_replicates<std::vector<double>>(
        static_cast<std::size_t>(c.replicates), c.threads, [&](std::size_t r) {
          auto rng = make_rng(c.seed, r);
          const auto types = assign_types(c.n, c.law, rng);
          const auto state = t > 0.0 ? sample_coalescent_state(sampler, c.n, t, rng) : singletons(c.n);
          const auto v = types_of(state, types);
          std::vector<double> out;
          for (const auto& f : fs) out.push_back(empirical_moment(v, f));
          return out;
        });
    for (std::size_t k = 0; k < fs.size(); ++k) {
      std::vector<double> values;
      for (const auto& d : draws) values.push_back(d[k]);
      const auto [mean, se] = mean_and_se(values);
      std::vector<std::string> params{std::to_string(c.n), num(t), fs[k].to_string()};
      if (c.law.kind != InitialLaw::Kind::Discrete) {
        table.rows.push_back({params, mean, se, NAN, NAN, "n/a"});
        continue;
      }
      const int p = fs[k].arity();
      const double exact = exact_dual_expectation(c.measure, singletons(p), c.law.atoms, fs[k], t);
      table.rows.push_back(from_report(params, compare_moment("moment", mean, se, exact, 2.0 * p * p / c.n)));
    }
  }
  return table;
}

ResultTable duality_check(const ExperimentConfig& c) {
  ResultTable table{"duality-check", {"n", "t", "f", "pi"}, {}, {}};
  table.details["reports"] = nlohmann::json::array();
  for (double t : c.times) {
    for (const auto& text : c.functionals) {
      const auto f = MomentFunctional::parse(text);
      for (const auto& pi : partitions_for(c, f.arity())) {
        const auto report =
            duality_moment_test(c.measure, c.law.atoms, f, pi, t, c.n, c.replicates, {c.seed, c.threads});
        table.rows.push_back(from_report({std::to_string(c.n), num(t), f.to_string(), pi.to_string()}, report));
        table.details["reports"].push_back(report_json(report));
      }
    }
  }
  return table;
}

ResultTable marginal_check(const ExperimentConfig& c) {
  ResultTable table{"marginal-check", {"p", "t"}, {}, {}};
  table.details["reports"] = nlohmann::json::array();
  for (double t : c.times) {
    const auto report = marginal_test(c.measure, c.p, t, c.replicates, {c.seed, c.threads});
    table.rows.push_back(from_report({std::to_string(c.p), num(t)}, report));
    table.details["reports"].push_back(report_json(report));
  }
  return table;
}

ResultTable cdi_report(const ExperimentConfig& c) {
  ResultTable table{"cdi-report", {"quantity", "argument"}, {}, {}};
  const auto report = classify(c.measure, c.truncation);
  const auto& s = report.series;
  table.rows.push_back({{"series", std::to_string(s.truncation)}, s.limit, s.limit_halfwidth, NAN, NAN,
                        to_string(s.verdict)});
  if (report.integral) {
    const auto& in = *report.integral;
    table.rows.push_back({{"integral", in.limits.empty() ? "" : num(in.limits.back())}, in.estimate, NAN, NAN, NAN,
                          to_string(in.verdict)});
    table.rows.push_back({{"agreement", ""}, report.diagnostics_agree ? 1.0 : 0.0, NAN, 1.0, NAN,
                          report.diagnostics_agree ? "pass" : "fail"});
  }
  table.rows.push_back({{"diagnosis", ""}, report.condition_i ? 1.0 : 0.0, NAN, NAN, NAN, to_string(report.diagnosis)});

  const auto grid = log_grid(2.0, 1e6, 200);
  const auto band = sandwich(c.measure, grid);
  const double curvature = psi_over_q_curvature(c.measure, grid);
  if (psi(c.measure, grid.front()) > 0.0) {
    table.rows.push_back({{"phi/psi min", "[2,1e6]"}, band.min_ratio, NAN, NAN, NAN, band.finite ? "pass" : "fail"});
    table.rows.push_back({{"phi/psi max", "[2,1e6]"}, band.max_ratio, NAN, NAN, NAN, band.finite ? "pass" : "fail"});
  } else {
    table.rows.push_back({{"phi/psi", "[2,1e6]"}, NAN, NAN, NAN, NAN, "n/a"});
  }
  table.rows.push_back({{"psi/q curvature", "[2,1e6]"}, curvature, NAN, 0.0, NAN, curvature <= 1e-12 ? "pass" : "fail"});

  auto& d = table.details;
  d["condition_i"] = report.condition_i;
  d["regularity"] = report.regularity;
  d["pfm_case"] = report.pfm_case;
  d["diagnosis"] = to_string(report.diagnosis);
  d["series"] = {{"truncation", s.truncation},     {"partial_sum", s.partial_sum}, {"tail_lower", s.tail_lower},
                 {"tail_upper", s.tail_upper},     {"limit", s.limit},             {"verdict", to_string(s.verdict)},
                 {"tail_verdict", to_string(s.tail_verdict)}, {"reason", s.reason}};
  if (report.integral) {
    d["integral"] = {{"lower", report.integral->lower},
                     {"limits", report.integral->limits},
                     {"integrals", report.integral->integrals},
                     {"verdict", to_string(report.integral->verdict)},
                     {"reason", report.integral->reason}};
  }
  d["fixation_bound"] = report.fixation_bound ? nlohmann::json(*report.fixation_bound) : nlohmann::json();
  d["notes"] = report.notes;

  if (!c.resolutions.empty()) {
    if (s.verdict != Verdict::Converges) {
      d["fixation_check"] = "bound undefined: series does not converge";
    } else {
      for (const auto& r : fixation_bound_check(c.measure, c.resolutions, c.replicates, {c.seed, c.threads})) {
        table.rows.push_back(from_report({"fixation", r.name.substr(r.name.find('=') + 1)}, r));
      }
    }
  }
  return table;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + '"';
}

std::string csv_number(double x) { return std::isnan(x) ? "" : num(x); }

}  // namespace

ResultTable run_experiment(const ExperimentConfig& config) {
  if (const auto problems = config_problems(config); !problems.empty()) throw ConfigError(problems);
  switch (config.experiment) {
    case ExperimentKind::RatesTable:
      return rates_table(config);
    case ExperimentKind::SimulateCoalescent:
      return simulate_coalescent(config);
    case ExperimentKind::SimulateGfvi:
      return simulate_gfvi(config);
    case ExperimentKind::DualityCheck:
      return duality_check(config);
    case ExperimentKind::MarginalCheck:
      return marginal_check(config);
    case ExperimentKind::CdiReport:
      break;
  }
  return cdi_report(config);
}

std::string render_csv(const ResultTable& table) {
  std::string out = "experiment";
  for (const auto& name : table.parameter_names) out += "," + csv_field(name);
  out += ",estimate,se,exact,z,verdict\n";
  for (const auto& row : table.rows) {
    out += csv_field(table.experiment);
    for (const auto& p : row.parameters) out += "," + csv_field(p);
    out += fmt::format(",{},{},{},{},{}\n", csv_number(row.estimate), csv_number(row.se), csv_number(row.exact),
                       csv_number(row.z), csv_field(row.verdict));
  }
  return out;
}

std::string render_summary(const ExperimentConfig& config, const ResultTable& table) {
  nlohmann::json j;
  j["experiment"] = table.experiment;
  j["seed"] = config.seed;
  j["replicates"] = config.replicates;
  j["rows"] = table.rows.size();
  long passed = 0, failed = 0;
  for (const auto& r : table.rows) {
    passed += r.verdict == "pass";
    failed += r.verdict == "fail";
  }
  j["passed"] = passed;
  j["failed"] = failed;
  j["status"] = failed ? "fail" : "ok";
  j["details"] = table.details;
  return j.dump(2) + "\n";
}

void emit_report(const ExperimentConfig& config, const ResultTable& table) {
  const std::filesystem::path dir(config.out);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  auto write = [&](const std::string& name, const std::string& content) {
    std::ofstream file(dir / name, std::ios::binary | std::ios::trunc);
    if (!file) throw std::runtime_error("cannot write " + (dir / name).string());
    file << content;
    if (!file) throw std::runtime_error("cannot write " + (dir / name).string());
  };
  write(table.experiment + ".csv", render_csv(table));
  write("summary.json", render_summary(config, table));
  write("config.toml", serialize(config));
}

int run_command(ExperimentKind experiment, const Overrides& overrides, std::ostream& log) {
  try {
    ExperimentConfig config;
    if (overrides.config_path) {
      config = load_config(*overrides.config_path);
      if (config.experiment != experiment) {
        throw ConfigError({"config is for " + to_string(config.experiment) + ", not " + to_string(experiment)});
      }
    } else {
      config.experiment = experiment;
    }
    if (overrides.seed) {
      config.seed = *overrides.seed;
      config.has_seed = true;
    }
    if (overrides.replicates) config.replicates = *overrides.replicates;
    if (overrides.threads) config.threads = *overrides.threads;
    if (overrides.out) config.out = *overrides.out;
    if (const auto problems = config_problems(config); !problems.empty()) throw ConfigError(problems);

    const auto table = run_experiment(config);
    emit_report(config, table);
    log << fmt::format("{}: {} rows written to {}\n", table.experiment, table.rows.size(), config.out);
    return table.failed() ? kExitFailure : kExitOk;
  } catch (const ConfigError& e) {
    log << e.what() << '\n';
    return kExitConfig;
  } catch (const PreconditionError& e) {
    log << "invalid input: " << e.what() << '\n';
    return kExitConfig;
  } catch (const ResourceError& e) {
    log << "resource cap: " << e.what() << '\n';
    return kExitResource;
  } catch (const std::runtime_error& e) {
    log << "error: " << e.what() << '\n';
    return kExitConfig;
  }
}

}  // namespace gfvi
