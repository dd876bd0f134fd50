#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "gfvi/coalescent.hpp"
#include "gfvi/exact.hpp"
#include "gfvi/functional.hpp"
#include "gfvi/measure.hpp"

namespace gfvi {

inline constexpr double kChiSquareAlpha = 0.001;

struct ChiSquare {
  double statistic = 0.0;
  int dof = 0;
  double p_value = 1.0;
  int cells = 0;         // after merging
  int merged_cells = 0;  // cells folded into a pooled cell
};

/// Estimate against an exact value. Moment reports pass iff
/// |estimate - exact| <= 3 se + bias_allowance. Chi-square reports carry the
/// statistic as `estimate`, the critical value as `exact`, and pass iff
/// p >= alpha.
struct ComparisonReport {
  std::string name;
  double estimate = 0.0;
  double se = 0.0;
  double exact = 0.0;
  double z = 0.0;
  double bias_allowance = 0.0;
  bool pass = false;
  std::vector<std::string> notes;
  std::optional<ChiSquare> chi_square;
};

ComparisonReport compare_moment(std::string name, double estimate, double se, double exact, double bias_allowance);

/// Pearson test of `counts` against `probs` at level alpha. Cells with
/// expected count below 5 are pooled; observations in cells of probability
/// <= 1e-14 fail the test outright.
ComparisonReport chi_square_test(std::string name, const std::vector<long>& counts, const std::vector<double>& probs,
                                 double alpha = kChiSquareAlpha);

/// Mean and standard error of a sample, summed in index order.
std::pair<double, double> mean_and_se(const std::vector<double>& values);

struct RunOptions {
  std::uint64_t seed = 1;
  unsigned threads = 1;
};

struct MarginalOptions {
  Direction direction = Direction::Forward;
  /// Resolution at which the log is simulated before restricting to [p];
  /// 0 means p itself.
  int simulate_at = 0;
};

/// Law of the flow state at time t on [p] over `replicates` event logs, by
/// chi-square against the singletons row of e^{tQ}.
ComparisonReport marginal_test(const CoagulationMeasure& measure, int p, double t, long replicates,
                               const RunOptions& run, const MarginalOptions& options = {});

enum class DualityPath {
  Thinned,  // sample_coalescent_state
  Log,      // full event log and forward fold
};

/// E[Phi_f(Z_t, pi)] over n-particle populations with types iid rho versus
/// E^pi[Phi_f(rho, Pi(t))] from the exact engine, with bias 2 p^2 / n.
ComparisonReport duality_moment_test(const CoagulationMeasure& measure, const DiscreteMeasure& rho,
                                     const MomentFunctional& f, const DistinguishedPartition& pi, double t,
                                     int n_particles, long replicates, const RunOptions& run,
                                     DualityPath path = DualityPath::Thinned);

}  // namespace gfvi
