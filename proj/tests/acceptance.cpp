// Acceptance suite: one PASS/FAIL line per criterion.

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>
#include <thread>

#include <fmt/format.h>

#include "gfvi/cdi.hpp"
#include "gfvi/config.hpp"
#include "gfvi/duality.hpp"
#include "gfvi/exact.hpp"
#include "gfvi/experiment.hpp"
#include "gfvi/population.hpp"
#include "oracles.hpp"

using namespace gfvi;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

/// Collects failures; the first few are kept for the summary line.
class Tally {
 public:
  void check(bool ok, const std::string& what) {
    ++checks_;
    if (ok) return;
    ++failures_;
    if (failures_ <= 3) first_ += (first_.empty() ? "" : "; ") + what;
  }
  Outcome outcome(const std::string& summary) const {
    if (failures_ == 0) return {true, fmt::format("{} ({} checks)", summary, checks_)};
    return {false, fmt::format("{} ({} of {} checks failed: {})", summary, failures_, checks_, first_)};
  }

 private:
  long checks_ = 0;
  long failures_ = 0;
  std::string first_;
};

unsigned threads() { return std::max(1u, std::thread::hardware_concurrency()); }

const CoagulationMeasure kKingmanImmigration{1.0, 1.0, {}};
const CoagulationMeasure kImmigration{1.0, 0.0, {}};
const CoagulationMeasure kKingman{0.0, 1.0, {}};
const CoagulationMeasure kMultiAtom{0.5, 0.8, {{0.7, {0.2, {0.4, 0.1}}}, {1.3, {0.0, {0.3}}}}};

std::vector<std::pair<std::string, CoagulationMeasure>> test_measures() {
  return {
      {"(1,1,0)", kKingmanImmigration},
      {"(1,0,0)", kImmigration},
      {"(0,1,0)", kKingman},
      {"multi-atom", kMultiAtom},
      {"atoms only", {0.0, 0.0, {{1.0, {0.3, {0.2}}}, {0.5, {0.0, {0.5, 0.25}}}}}},
      {"heavy kingman", {0.2, 5.0, {{2.0, {0.05, {0.6}}}}}},
  };
}

Outcome paintbox_exactness() {
  Tally tally;
  Rng rng(1001);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = oracle::uniform_int(rng, 1, 6);
    const auto s = oracle::random_mass(oracle::uniform_int(rng, 0, 4), rng, trial % 5 != 0);
    const auto law = oracle::paintbox_law(s, n);
    double total = 0.0;
    for (const auto& pi : PartitionSpace(n)) {
      const double prob = paintbox_prob(s, pi);
      total += prob;
      const auto it = law.find(pi.to_string());
      const double expected = it == law.end() ? 0.0 : it->second;
      tally.check(std::abs(prob - expected) <= 1e-12, fmt::format("n={} {} {} vs {}", n, pi.to_string(), prob, expected));
    }
    tally.check(std::abs(total - 1.0) <= 1e-12, fmt::format("sum {}", total));
  }
  return tally.outcome("50 random (s, n), every pi in P_n, tol 1e-12");
}

Outcome coag_algebra() {
  Tally tally;
  Rng rng(1002);
  const int instances = 10'000;
  for (int i = 0; i < instances; ++i) {
    const int n = oracle::uniform_int(rng, 0, 10);
    const auto a = oracle::random_partition(n, rng);
    const auto b = oracle::random_partition(a.block_count() - 1, rng);
    const auto c = oracle::random_partition(b.block_count() - 1, rng);
    tally.check(coag(coag(a, b), c) == coag(a, coag(b, c)), "associativity");
  }
  for (int i = 0; i < instances; ++i) {
    const int n = oracle::uniform_int(rng, 0, 10);
    const auto a = oracle::random_partition(n, rng);
    tally.check(coag(a, singletons(a.block_count() - 1)) == a, "right neutral");
    tally.check(coag(singletons(n), a) == a, "left neutral");
  }
  for (int i = 0; i < instances; ++i) {
    const int n = oracle::uniform_int(rng, 0, 10);
    const auto a = oracle::random_partition(n, rng);
    const auto b = oracle::random_partition(a.block_count() - 1, rng);
    const auto ab = coag(a, b);
    bool ok = ab == oracle::coag_by_blocks(a, b);
    for (int k = 0; k <= n; ++k) ok = ok && ab.alpha(k) == b.alpha(a.alpha(k));
    tally.check(ok, "alpha composition");
  }
  for (int i = 0; i < instances; ++i) {
    const int n = oracle::uniform_int(rng, 0, 10);
    const auto a = oracle::random_partition(n, rng);
    const auto b = oracle::random_partition(a.block_count() - 1, rng);
    const int m = oracle::uniform_int(rng, 0, n);
    const auto am = restrict(a, m);
    tally.check(restrict(coag(a, b), m) == coag(am, restrict(b, am.block_count() - 1)), "restriction");
  }
  return tally.outcome("1e4 instances each of four identities, exact equality");
}

Outcome rate_consistency() {
  Tally tally;
  Rng rng(1003);
  for (int trial = 0; trial < 10; ++trial) {
    const auto mu = oracle::random_measure(rng);
    for (int n = 1; n <= 4; ++n) {
      double sum = 0.0;
      std::map<std::string, double> by_restriction[4];
      for (const auto& pi : oracle::all_partitions(n)) {
        if (pi.is_singletons()) continue;
        const double q = jump_rate(mu, pi);
        tally.check(std::abs(q - oracle::rate_by_definition(mu, pi)) <= 1e-12, "q vs definition");
        sum += q;
        for (int m = 1; m < n && m <= 3; ++m) by_restriction[m][restrict(pi, m).to_string()] += q;
      }
      tally.check(std::abs(sum - total_rate(mu, n)) <= 1e-12, fmt::format("lambda_{} {} vs {}", n, sum, total_rate(mu, n)));
      for (int m = 1; m < n && m <= 3; ++m) {
        for (const auto& pi : oracle::all_partitions(m)) {
          if (pi.is_singletons()) continue;
          const double lifted = by_restriction[m][pi.to_string()];
          tally.check(std::abs(lifted - jump_rate(mu, pi)) <= 1e-12, fmt::format("restriction {}->{}", n, m));
        }
      }
    }
  }
  return tally.outcome("10 random measures, n <= 4, m <= 3, tol 1e-12");
}

Outcome flow_marginals() {
  Tally tally;
  std::uint64_t seed = 1004;
  double worst = 1.0;
  for (const auto& mu : {kKingmanImmigration, kMultiAtom}) {
    for (int p : {2, 3}) {
      for (double t : {0.5, 1.0, 2.0}) {
        const auto r = marginal_test(mu, p, t, 100'000, {seed++, threads()}, {Direction::Forward, 0});
        worst = std::min(worst, r.chi_square->p_value);
        tally.check(r.pass, fmt::format("{} p={}", r.name, r.chi_square->p_value));
      }
    }
  }
  return tally.outcome(fmt::format("forward state vs e^(tQ), 12 chi-square tests at alpha 0.001, min p {:.3g}", worst));
}

Outcome duality_identity_check() {
  Tally tally;
  const int n = 1000;
  const long replicates = 10'000;
  std::uint64_t seed = 1005;
  double worst = 0.0;
  auto run = [&](const CoagulationMeasure& mu, const DiscreteMeasure& rho, const std::string& f, const std::string& pi,
                 double t) {
    const auto r = duality_moment_test(mu, rho, MomentFunctional::parse(f), DistinguishedPartition::parse(pi), t, n,
                                       replicates, {seed++, threads()});
    worst = std::max(worst, std::abs(r.estimate - r.exact) / (3.0 * r.se + r.bias_allowance));
    tally.check(r.pass, fmt::format("{}: {} vs {}", r.name, r.estimate, r.exact));
    return r;
  };
  // Closed form e^{-t}.
  for (double t : {0.5, 1.0, 2.0}) {
    const auto r = run(kImmigration, DiscreteMeasure::dirac(1.0), "poly(0,1)", "{{0},{1}}", t);
    tally.check(std::abs(r.exact - std::exp(-t)) <= 1e-10, "closed form e^-t");
  }
  const DiscreteMeasure rho{{0.2, 0.5, 1.0}, {0.3, 0.3, 0.4}};
  for (const auto& mu : {kKingmanImmigration, kMultiAtom}) {
    for (double t : {0.3, 1.0}) {
      run(mu, rho, "poly(0,1)*poly(0,1)", "{{0},{1},{2}}", t);
      run(mu, rho, "poly(0,1)*poly(1,-1)", "{{0},{1,2}}", t);
      run(mu, rho, "poly(0,1)*ind(0.5)*poly(0,0,1)", "{{0},{1,3},{2}}", t);
    }
  }
  return tally.outcome(fmt::format("15 cases, n = 1e3, 1e4 replicates, worst |err| / (3 SE + 2p^2/n) = {:.3f}", worst));
}

Outcome generator_identity() {
  Tally tally;
  Rng rng(1006);
  double worst = 0.0;
  for (int trial = 0; trial < 30; ++trial) {
    const auto mu = oracle::random_measure(rng, 2, 3);
    const int p = oracle::uniform_int(rng, 1, 4);
    const auto rho = oracle::random_rho(rng, 3);
    const auto f = oracle::random_functional(p, rng);
    const double diff = std::abs(generator_direct(mu, rho, f) - generator_decomposed(mu, rho, f));
    worst = std::max(worst, diff);
    tally.check(diff <= 1e-10, fmt::format("instance {} diff {}", trial, diff));
  }
  double worst_ratio = 2.0;
  for (int trial = 0; trial < 10; ++trial) {
    const auto mu = oracle::random_measure(rng);
    const int p = oracle::uniform_int(rng, 1, 3);
    const auto rho = oracle::random_rho(rng);
    const auto f = oracle::random_functional(p, rng);
    const double g = generator_direct(mu, rho, f);
    const double base = moment(rho, f);
    auto err = [&](double h) {
      return (exact_dual_expectation(mu, singletons(p), rho, f, h, 1e-15) - base) / h - g;
    };
    const double e1 = err(1e-2), e2 = err(1e-3), e3 = err(5e-4);
    tally.check(std::abs(e2) <= 0.2 * std::abs(e1) + 1e-9, "difference quotient converges");
    if (std::abs(e2) > 1e-8) {
      const double ratio = e2 / e3;
      if (std::abs(ratio - 2.0) > std::abs(worst_ratio - 2.0)) worst_ratio = ratio;
      tally.check(std::abs(ratio - 2.0) <= 0.1, fmt::format("halving ratio {}", ratio));
    }
  }
  return tally.outcome(fmt::format("30 instances, max diff {:.2e}; h-halving error ratio nearest off 2: {:.3f}", worst,
                                   worst_ratio));
}

Outcome composition() {
  Tally tally;
  std::string ks;
  for (const MassPartition& s : {MassPartition{0.2, {0.3, 0.1}}, MassPartition{0.0, {0.5}}, MassPartition{0.4, {}}}) {
    int good = 0;
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      auto rng = make_rng(1007, seed);
      const auto c = composition_ks(s, 10'000, rng);
      good += c.ks <= 0.05;
      ks += fmt::format("{}{:.4f}", ks.empty() ? "" : " ", c.ks);
    }
    tally.check(good >= 4, fmt::format("{} of 5 seeds", good));
  }
  return tally.outcome("3 mass partitions, n = 1e4, KS: " + ks);
}

Outcome phi_oracle_check() {
  Tally tally;
  Rng rng(1008);
  double worst = 0.0;
  for (const auto& mu : {kMultiAtom, CoagulationMeasure{0.0, 0.0, {{1.0, {0.3, {0.2}}}, {0.5, {0.0, {0.5, 0.25}}}}}}) {
    for (int n : {2, 5, 10, 50}) {
      const auto [est, se] = phi_oracle(mu, n, 100'000, rng);
      const double z = std::abs(est - phi(mu, n)) / se;
      worst = std::max(worst, z);
      tally.check(std::abs(est - phi(mu, n)) <= 4.0 * se, fmt::format("n={} {} vs {}", n, est, phi(mu, n)));
    }
  }
  return tally.outcome(fmt::format("2 measures, n in {{2,5,10,50}}, 1e5 samples, max |z| {:.2f}", worst));
}

Outcome cdi_classification() {
  Tally tally;
  const auto a = classify(kKingmanImmigration);
  tally.check(a.diagnosis == Diagnosis::Extinct, "(1,1,0) extinct");
  tally.check(std::abs(a.series.limit - 2.0) <= 1e-6, fmt::format("(1,1,0) limit {}", a.series.limit));
  const auto b = classify(kImmigration);
  tally.check(b.series.verdict == Verdict::Diverges, "(1,0,0) series diverges");
  tally.check(b.diagnosis == Diagnosis::DoesNot, "(1,0,0) not extinct");
  const auto c = classify(kKingman);
  tally.check(!c.condition_i && c.diagnosis == Diagnosis::DoesNot, "(0,1,0) condition i fails");
  for (const auto& [name, mu] : test_measures()) {
    const auto r = classify(mu);
    if (r.integral) {
      tally.check(r.diagnostics_agree, fmt::format("{}: series {} integral {}", name, to_string(r.series.tail_verdict),
                                                   to_string(r.integral->verdict)));
    }
  }
  return tally.outcome(fmt::format("(1,1,0) limit {:.9f}, diagnostics agree on {} measures", a.series.limit,
                                   test_measures().size()));
}

Outcome fixation() {
  Tally tally;
  const auto reports = fixation_bound_check(kKingmanImmigration, {1, 2, 4, 8, 16, 32}, 10'000, {1009, threads()});
  std::string means;
  for (const auto& r : reports) {
    tally.check(r.pass, fmt::format("{} {} vs {}", r.name, r.estimate, r.exact));
    tally.check(r.estimate <= 2.0 + 3.0 * r.se, fmt::format("{} above 2", r.name));
    means += fmt::format("{}{:.3f}", means.empty() ? "" : " ", r.estimate);
  }
  const auto eq = absorption_sample(kImmigration, 1, 10'000, {1010, threads()}, 10.0, 1e5);
  tally.check(eq.censored_fraction == 0.0, "censored runs");
  tally.check(std::abs(eq.mean - 1.0) <= 3.0 * eq.se, fmt::format("(1,0,0) E[zeta_1] {} se {}", eq.mean, eq.se));
  return tally.outcome(fmt::format("(1,1,0) means {}; (1,0,0) E[zeta_1] = {:.4f} +- {:.4f}", means, eq.mean, eq.se));
}

Outcome concavity() {
  Tally tally;
  const auto grid = log_grid(2.0, 1e6, 400);
  double worst = -INFINITY;
  double lo = INFINITY, hi = 0.0;
  for (const auto& [name, mu] : test_measures()) {
    const double curvature = psi_over_q_curvature(mu, grid);
    worst = std::max(worst, curvature);
    tally.check(curvature <= 1e-12, fmt::format("{} curvature {}", name, curvature));
    const auto s = sandwich(mu, grid);
    tally.check(s.finite, fmt::format("{} sandwich [{}, {}]", name, s.min_ratio, s.max_ratio));
    lo = std::min(lo, s.min_ratio);
    hi = std::max(hi, s.max_ratio);
  }
  return tally.outcome(fmt::format("max second difference {:.2e}, phi/psi in [{:.3g}, {:.3g}]", worst, lo, hi));
}

std::map<std::string, std::string> read_dir(const fs::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& entry : fs::directory_iterator(dir)) {
    std::ifstream in(entry.path(), std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    out[entry.path().filename().string()] = ss.str();
  }
  return out;
}

Outcome determinism() {
  Tally tally;
  const auto root = fs::temp_directory_path() / "gfvi-acceptance-determinism";
  fs::remove_all(root);
  const std::string measure = "[measure]\nc0 = 0.5\nc1 = 1.0\n[[measure.atoms]]\nweight = 0.8\ns0 = 0.1\ns = [0.3, 0.2]\n";
  const std::string law = "[law]\nkind = \"discrete\"\nvalues = [0.3, 1.0]\nweights = [0.4, 0.6]\n";
  const std::vector<std::string> configs{
      "experiment = \"rates-table\"\nseed = 1\nn = 4\n" + measure,
      "experiment = \"simulate-coalescent\"\nseed = 2\nn = 5\nreplicates = 2000\ntimes = [0.5, 1.0]\n" + measure,
      "experiment = \"simulate-gfvi\"\nseed = 3\nn = 100\nreplicates = 500\nfunctionals = [\"poly(0,1)*poly(0,1)\"]\n" +
          measure + law,
      "experiment = \"duality-check\"\nseed = 4\nn = 100\nreplicates = 500\nfunctionals = [\"poly(0,1)\"]\n" + measure +
          law,
      "experiment = \"marginal-check\"\nseed = 5\np = 3\nreplicates = 5000\n" + measure,
      "experiment = \"cdi-report\"\nseed = 6\nreplicates = 500\nresolutions = [1, 4]\n" + measure,
  };
  int index = 0;
  for (const auto& text : configs) {
    auto config = parse_config(text);
    const auto dir = root / std::to_string(index++);
    config.out = dir.string();
    emit_report(config, run_experiment(config));
    const auto first = read_dir(dir);
    emit_report(config, run_experiment(config));
    tally.check(first == read_dir(dir), to_string(config.experiment) + " rerun differs");
    tally.check(first.size() == 3, to_string(config.experiment) + " file count");

    // Thread count changes the recorded config only.
    auto other = config;
    other.threads = config.threads + 3;
    const auto a = run_experiment(config);
    const auto b = run_experiment(other);
    tally.check(render_csv(a) == render_csv(b), to_string(config.experiment) + " depends on threads");
  }
  fs::remove_all(root);
  return tally.outcome("6 experiments rerun into the same directory, CSV, summary and config compared bytewise");
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"paint-box exactness", paintbox_exactness},
      {"coag algebra", coag_algebra},
      {"rate consistency", rate_consistency},
      {"marginal duality of the flow", flow_marginals},
      {"duality identity", duality_identity_check},
      {"generator identity", generator_identity},
      {"composed-type law", composition},
      {"phi oracle", phi_oracle_check},
      {"CDI classification", cdi_classification},
      {"fixation bound", fixation},
      {"concavity and sandwich", concavity},
      {"determinism", determinism},
  };
  int failed = 0;
  int k = 0;
  for (const auto& [name, fn] : criteria) {
    ++k;
    const auto start = std::chrono::steady_clock::now();
    Outcome outcome;
    try {
      outcome = fn();
    } catch (const std::exception& e) {
      outcome = {false, std::string("exception: ") + e.what()};
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    failed += !outcome.pass;
    std::cout << fmt::format("[{}] criterion {}: {} - {} [{:.1f} s]", outcome.pass ? "PASS" : "FAIL", k, name,
                             outcome.detail, seconds)
              << std::endl;
  }
  std::cout << fmt::format("{} of {} criteria passed", criteria.size() - failed, criteria.size()) << std::endl;
  return failed == 0 ? 0 : kExitFailure;
}
