#pragma once

#include <span>
#include <string>
#include <vector>

#include "gfvi/coalescent.hpp"
#include "gfvi/functional.hpp"
#include "gfvi/partition.hpp"
#include "gfvi/random.hpp"

namespace gfvi {

/// Law of the initial types U_1..U_n on (0,1]. Type 0 is reserved for the
/// immigrant.
struct InitialLaw {
  enum class Kind { Discrete, Uniform, DistinctLabels };
  Kind kind = Kind::Uniform;
  DiscreteMeasure atoms;  // Discrete only

  static InitialLaw discrete(DiscreteMeasure atoms) { return {Kind::Discrete, std::move(atoms)}; }
  static InitialLaw uniform() { return {Kind::Uniform, {}}; }
  static InitialLaw distinct_labels() { return {Kind::DistinctLabels, {}}; }

  friend bool operator==(const InitialLaw&, const InitialLaw&) = default;
};

std::vector<std::string> law_problems(const InitialLaw& law);

struct TypeAssignment {
  std::vector<double> U;  // U[0] = 0
  int n() const { return static_cast<int>(U.size()) - 1; }
};

TypeAssignment assign_types(int n, const InitialLaw& law, Rng& rng);

/// v[k-1] = U[alpha_pi(k)] for k = 1..n.
std::vector<double> types_of(const DistinguishedPartition& pi, const TypeAssignment& types);
std::vector<double> types_at(const EventLog& log, const TypeAssignment& types, double t);

/// Empirical law of the particle types, atoms sorted by value.
DiscreteMeasure empirical_measure(std::span<const double> v);

/// G_f of the empirical measure, summed exactly over its atoms.
double empirical_moment(std::span<const double> v, const MomentFunctional& f);
/// Same quantity by averaging f over `samples` tuples drawn with replacement.
double empirical_moment_mc(std::span<const double> v, const MomentFunctional& f, int samples, Rng& rng);
/// Phi_f(Z, pi) with Z the empirical measure of v.
double empirical_phi(std::span<const double> v, const DistinguishedPartition& pi, const MomentFunctional& f);

/// One realization of the composed-type check: a paint-box pi on [n] and iid
/// uniform types, compared to s0 delta_0 + sum_j s_j delta_{U_j} + dust * Unif.
struct CompositionCheck {
  double ks = 0.0;
  int blocks = 0;
};

CompositionCheck composition_ks(const MassPartition& s, int n, Rng& rng);

}  // namespace gfvi
