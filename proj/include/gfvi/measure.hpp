#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "gfvi/partition.hpp"
#include "gfvi/random.hpp"

namespace gfvi {

/// One atom w * delta_s of the multiple-collision measure nu.
struct Atom {
  double weight = 0.0;
  MassPartition mass;
  friend bool operator==(const Atom&, const Atom&) = default;
};

/// Coagulation measure
///   mu = c0 sum_i delta_K(0,i) + c1 sum_{i<j} delta_K(i,j) + int rho_s nu(ds)
/// with nu atomic and finite.
struct CoagulationMeasure {
  double c0 = 0.0;
  double c1 = 0.0;
  std::vector<Atom> atoms;
  friend bool operator==(const CoagulationMeasure&, const CoagulationMeasure&) = default;
};

struct MeasureDiagnostics {
  std::vector<std::string> violations;
  /// sum_k w_k (s0 + sum_i s_i^2), the integrability functional of nu.
  double nu_integral = 0.0;
  bool valid() const { return violations.empty(); }
};

MeasureDiagnostics validate(const CoagulationMeasure& measure);
void require_valid(const CoagulationMeasure& measure);

/// q_pi = mu(partitions of Z+ restricting to pi). Undefined for singletons.
double jump_rate(const CoagulationMeasure& measure, const DistinguishedPartition& pi);

/// lambda_n, the total rate of events that are non-trivial on [n].
double total_rate(const CoagulationMeasure& measure, int n);

/// Category weights of the event law at a fixed resolution. Category order is
/// fixed: distinguished Kingman, binary Kingman, then atoms in list order.
struct EventCategories {
  double distinguished = 0.0;
  double binary = 0.0;
  std::vector<double> atoms;
  double total() const;
};

/// A sampled event, kept in the cheapest form: Kingman events carry only
/// their pair, atom events carry the paint-box partition.
struct EventMark {
  enum class Kind { Distinguished, Binary, Atom };
  Kind kind = Kind::Distinguished;
  int i = 0;
  int j = 0;
  std::size_t atom = 0;
  DistinguishedPartition partition;

  DistinguishedPartition to_partition(int n) const;
};

/// Samples marks of the Poisson event measure restricted to [b] for every
/// resolution b <= max_resolution. Per-level rates are tabulated once.
class EventSampler {
 public:
  /// Rejection-sampling budget for a single atom event.
  static constexpr long kMaxRejections = 1'000'000;

  EventSampler(CoagulationMeasure measure, int max_resolution);

  const CoagulationMeasure& measure() const { return measure_; }
  int max_resolution() const { return max_resolution_; }
  EventCategories categories(int b) const;
  double total_rate(int b) const;

  /// Draws a mark with law q_pi / lambda_b over non-trivial pi on [b].
  EventMark sample_mark(int b, Rng& rng) const;
  DistinguishedPartition sample(int b, Rng& rng) const { return sample_mark(b, rng).to_partition(b); }

 private:
  CoagulationMeasure measure_;
  int max_resolution_;
  // trivial_[k][b] = rho_{s_k}(0_[b]).
  std::vector<std::vector<double>> trivial_;
  std::vector<double> totals_;
};

/// rho_s(0_[b]) for b = 0..n.
std::vector<double> singleton_probabilities(const MassPartition& s, int n);

/// (waiting time ~ Exp(lambda_n), event partition on [n]).
std::pair<double, DistinguishedPartition> sample_event(const CoagulationMeasure& measure, int n,
                                                       Rng& rng);

}  // namespace gfvi
