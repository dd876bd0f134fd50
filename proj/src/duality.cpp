#include "gfvi/duality.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <boost/math/distributions/chi_squared.hpp>
#include <fmt/format.h>

#include "gfvi/errors.hpp"
#include "gfvi/population.hpp"

namespace gfvi {

ComparisonReport compare_moment(std::string name, double estimate, double se, double exact, double bias_allowance) {
  ComparisonReport r;
  r.name = std::move(name);
  r.estimate = estimate;
  r.se = se;
  r.exact = exact;
  r.bias_allowance = bias_allowance;
  const double diff = estimate - exact;
  r.z = se > 0.0 ? diff / se : (diff == 0.0 ? 0.0 : std::copysign(INFINITY, diff));
  r.pass = std::abs(diff) <= 3.0 * se + bias_allowance;
  return r;
}

std::pair<double, double> mean_and_se(const std::vector<double>& values) {
  if (values.empty()) return {0.0, 0.0};
  const double n = static_cast<double>(values.size());
  const double mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  if (values.size() < 2) return {mean, 0.0};
  double ss = 0.0;
  for (double x : values) ss += (x - mean) * (x - mean);
  return {mean, std::sqrt(ss / (n - 1.0) / n)};
}

ComparisonReport chi_square_test(std::string name, const std::vector<long>& counts, const std::vector<double>& probs,
                                 double alpha) {
  if (counts.size() != probs.size()) throw PreconditionError("chi_square_test: size mismatch");
  ComparisonReport r;
  r.name = std::move(name);
  r.se = NAN;
  r.z = NAN;
  const long total = std::accumulate(counts.begin(), counts.end(), 0L);

  struct Cell {
    double expected;
    long observed;
  };
  std::vector<Cell> cells;
  long impossible = 0;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    if (probs[i] <= 1e-14) {
      impossible += counts[i];
      continue;
    }
    cells.push_back({probs[i] * static_cast<double>(total), counts[i]});
  }
  // Pool every cell below 5 expected, smallest first, until the pool reaches 5.
  std::stable_sort(cells.begin(), cells.end(), [](const Cell& a, const Cell& b) { return a.expected < b.expected; });
  Cell pool{0.0, 0};
  int pooled = 0;
  std::size_t next = 0;
  while (next < cells.size() && (cells[next].expected < 5.0 || (pooled > 0 && pool.expected < 5.0))) {
    pool.expected += cells[next].expected;
    pool.observed += cells[next].observed;
    ++pooled;
    ++next;
  }
  std::vector<Cell> kept(cells.begin() + static_cast<std::ptrdiff_t>(next), cells.end());
  if (pooled > 0) kept.push_back(pool);
  ChiSquare chi;
  chi.cells = static_cast<int>(kept.size());
  chi.merged_cells = pooled > 1 ? pooled : 0;
  for (const auto& c : kept) chi.statistic += (c.observed - c.expected) * (c.observed - c.expected) / c.expected;
  chi.dof = chi.cells - 1;
  if (chi.merged_cells > 0) r.notes.push_back(fmt::format("merged {} cells with expected count < 5", chi.merged_cells));

  if (impossible > 0) {
    r.notes.push_back(fmt::format("{} observations in zero-probability cells", impossible));
    chi.p_value = 0.0;
    r.exact = 0.0;
  } else if (chi.dof <= 0) {
    chi.p_value = chi.statistic == 0.0 ? 1.0 : 0.0;
    r.exact = 0.0;
    r.notes.push_back("single cell: exact match required");
  } else {
    const boost::math::chi_squared dist(chi.dof);
    chi.p_value = boost::math::cdf(boost::math::complement(dist, chi.statistic));
    r.exact = boost::math::quantile(boost::math::complement(dist, alpha));
  }
  r.estimate = chi.statistic;
  r.pass = chi.p_value >= alpha;
  r.chi_square = chi;
  return r;
}

ComparisonReport marginal_test(const CoagulationMeasure& measure, int p, double t, long replicates,
                               const RunOptions& run, const MarginalOptions& options) {
  if (p < 1 || p > 4) throw PreconditionError("marginal_test: need 1 <= p <= 4");
  if (t < 0.0) throw PreconditionError("marginal_test: t must be >= 0");
  const int n = options.simulate_at == 0 ? p : options.simulate_at;
  if (n < p) throw PreconditionError("marginal_test: simulate_at must be >= p");
  const PartitionSpace space(p);
  const auto Q = rate_matrix(measure, space);
  Eigen::VectorXd start = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(space.size()));
  start(static_cast<Eigen::Index>(space.singletons_index())) = 1.0;
  // Row of e^{tQ}: e^{tQ^T} applied to the indicator of the start state.
  const Eigen::MatrixXd Qt = Q.transpose();
  const Eigen::VectorXd row = semigroup_apply(Qt, t, start);
  const EventSampler sampler(measure, n);

  const auto states = run_replicates<std::size_t>(
      static_cast<std::size_t>(replicates), run.threads, [&](std::size_t r) {
        auto rng = make_rng(run.seed, r);
        if (t == 0.0) return space.singletons_index();
        const auto log = simulate_events(sampler, n, t, rng);
        const auto state = options.direction == Direction::Forward ? forward_state(log, t) : backward_state(log, t);
        return space.index_of(restrict(state, p));
      });
  std::vector<long> counts(space.size(), 0);
  for (auto s : states) ++counts[s];
  std::vector<double> probs(row.data(), row.data() + row.size());
  auto report = chi_square_test(fmt::format("marginal p={} t={}", p, t), counts, probs);
  report.notes.push_back(fmt::format("{} replicates, {} states", replicates, space.size()));
  return report;
}

ComparisonReport duality_moment_test(const CoagulationMeasure& measure, const DiscreteMeasure& rho,
                                     const MomentFunctional& f, const DistinguishedPartition& pi, double t,
                                     int n_particles, long replicates, const RunOptions& run, DualityPath path) {
  const int p = f.arity();
  if (pi.bound() != p) throw PreconditionError("duality_moment_test: pi must live on [arity of f]");
  if (n_particles < p) throw PreconditionError("duality_moment_test: need n_particles >= p");
  if (t < 0.0) throw PreconditionError("duality_moment_test: t must be >= 0");
  if (replicates < 2) throw PreconditionError("duality_moment_test: need at least 2 replicates");
  const auto law = InitialLaw::discrete(rho);
  if (const auto problems = law_problems(law); !problems.empty()) {
    throw PreconditionError("duality_moment_test: " + problems.front());
  }
  const EventSampler sampler(measure, n_particles);

  const auto values = run_replicates<double>(static_cast<std::size_t>(replicates), run.threads, [&](std::size_t r) {
    auto rng = make_rng(run.seed, r);
    const auto types = assign_types(n_particles, law, rng);
    DistinguishedPartition state = singletons(n_particles);
    if (t > 0.0) {
      state = path == DualityPath::Thinned ? sample_coalescent_state(sampler, n_particles, t, rng)
                                           : forward_state(simulate_events(sampler, n_particles, t, rng), t);
    }
    return empirical_phi(types_of(state, types), pi, f);
  });
  const auto [mean, se] = mean_and_se(values);
  const double exact = exact_dual_expectation(measure, pi, rho, f, t);
  auto report = compare_moment(fmt::format("duality t={} f={} pi={}", t, f.to_string(), pi.to_string()), mean, se,
                               exact, 2.0 * p * p / n_particles);
  report.notes.push_back(fmt::format("{} replicates, n = {}", replicates, n_particles));
  return report;
}

}  // namespace gfvi
