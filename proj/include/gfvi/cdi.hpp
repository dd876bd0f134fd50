#pragma once

#include <optional>
#include <string>
#include <vector>

#include "gfvi/duality.hpp"
#include "gfvi/measure.hpp"
#include "gfvi/random.hpp"

namespace gfvi {

/// Block-count decrease rate
///   c0 q + c1 q(q-1)/2 + sum_k w_k (q s0 + sum_i (q s_i - 1 + (1 - s_i)^q)).
double phi(const CoagulationMeasure& measure, double q);
/// c0 q + c1 q^2/2 + sum_k w_k (q s0 + sum_i (e^{-q s_i} - 1 + q s_i)).
double psi(const CoagulationMeasure& measure, double q);
/// psi without the immigration terms c0 q and q s0.
double zeta(const CoagulationMeasure& measure, double q);

enum class Verdict { Converges, Diverges, Inconclusive };
std::string to_string(Verdict v);

struct SeriesDiagnostic {
  long truncation = 0;
  double partial_sum = 0.0;  // sum_{n=1}^N 1 / phi(n)
  double tail_lower = 0.0;   // int_{N+1}^inf dq / phi
  double tail_upper = 0.0;   // int_N^inf dq / phi
  double limit = 0.0;        // partial_sum + midpoint of the tail bracket
  double limit_halfwidth = 0.0;
  Verdict verdict = Verdict::Inconclusive;
  /// Same question for sum_{n>=2}, which ignores a vanishing phi(1).
  Verdict tail_verdict = Verdict::Inconclusive;
  std::string reason;
};

SeriesDiagnostic series_diagnostic(const CoagulationMeasure& measure, long truncation = 1'000'000);

struct IntegralDiagnostic {
  double lower = 1.0;
  std::vector<double> limits;     // upper limits Q tried
  std::vector<double> integrals;  // int_a^Q dq / zeta
  double estimate = 0.0;
  Verdict verdict = Verdict::Inconclusive;
  std::string reason;
};

/// int_a^Q dq / zeta(q) for Q = 1e2, 1e4, 1e6, judged by the ratio of the
/// last two increments; extended by factors of 100 up to 1e12 while the
/// ratio is in (0.1, 0.5).
IntegralDiagnostic integral_diagnostic(const CoagulationMeasure& measure, double a = 1.0);

enum class Diagnosis { Extinct, DoesNot, Inconclusive };
std::string to_string(Diagnosis d);

struct CDIReport {
  bool condition_i = false;
  double regularity = 0.0;  // sum_k w_k (sum_i s_i)^2
  std::string pfm_case;     // "zero", "finite-positive" or "n/a"
  SeriesDiagnostic series;
  std::optional<IntegralDiagnostic> integral;
  bool diagnostics_agree = true;
  Diagnosis diagnosis = Diagnosis::Inconclusive;
  std::optional<double> fixation_bound;  // sum_{n>=1} 1 / phi(n)
  std::vector<std::string> notes;
};

CDIReport classify(const CoagulationMeasure& measure, long truncation = 1'000'000);

/// Monte Carlo estimate of phi(n) from one-event block-count decreases: the
/// Kingman parts are counted exactly, each atom by `samples` paint-box
/// colorings of n items.
std::pair<double, double> phi_oracle(const CoagulationMeasure& measure, int n, long samples, Rng& rng);

struct Sandwich {
  double min_ratio = 0.0;  // min phi / psi on the grid
  double max_ratio = 0.0;
  bool finite = false;
};

std::vector<double> log_grid(double lo, double hi, int points);
Sandwich sandwich(const CoagulationMeasure& measure, const std::vector<double>& grid);
/// Largest second divided difference of psi(q)/q over consecutive grid
/// triples; concavity means <= 0 up to rounding.
double psi_over_q_curvature(const CoagulationMeasure& measure, const std::vector<double>& grid);

struct AbsorptionOptions {
  double horizon = 0.0;  // 0: ten times the bound
  double horizon_cap = 0.0;  // 0: 1e4 times the initial horizon
};

/// Mean absorption time of the backward coalescent at resolution n, with
/// the horizon doubled until no replicate is censored or the cap is hit.
struct AbsorptionSample {
  double mean = 0.0;
  double se = 0.0;
  double horizon = 0.0;
  double censored_fraction = 0.0;
};

AbsorptionSample absorption_sample(const CoagulationMeasure& measure, int n, long replicates, const RunOptions& run,
                                   double horizon, double horizon_cap);

/// E[zeta_n] <= sum_{k=1}^n 1/phi(k) for each n. Refuses measures whose
/// series diverges.
std::vector<ComparisonReport> fixation_bound_check(const CoagulationMeasure& measure, const std::vector<int>& ns,
                                                   long replicates, const RunOptions& run,
                                                   const AbsorptionOptions& options = {});

}  // namespace gfvi
