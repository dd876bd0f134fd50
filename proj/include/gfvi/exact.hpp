#pragma once

#include <cmath>
#include <cstdint>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

#include "gfvi/errors.hpp"
#include "gfvi/functional.hpp"
#include "gfvi/measure.hpp"
#include "gfvi/partition.hpp"

namespace gfvi {

/// All distinguished partitions of [p] (Bell(p+1) of them), in
/// restricted-growth-string order, with a reverse index.
class PartitionSpace {
 public:
  /// Bell(7) = 877 states at the default cap.
  static constexpr int kDefaultMaxResolution = 6;

  explicit PartitionSpace(int p, int max_resolution = kDefaultMaxResolution);

  int resolution() const { return p_; }
  std::size_t size() const { return partitions_.size(); }
  const DistinguishedPartition& operator[](std::size_t i) const { return partitions_[i]; }
  std::size_t index_of(const DistinguishedPartition& pi) const;
  std::size_t singletons_index() const { return index_of(singletons(p_)); }
  std::size_t single_block_index() const { return 0; }

  auto begin() const { return partitions_.begin(); }
  auto end() const { return partitions_.end(); }

 private:
  static std::uint64_t key(const DistinguishedPartition& pi);

  int p_;
  std::vector<DistinguishedPartition> partitions_;
  std::unordered_map<std::uint64_t, std::size_t> index_;
};

PartitionSpace enumerate(int p, int max_resolution = PartitionSpace::kDefaultMaxResolution);

/// Generator of the restricted chain Pi_|[p]:
///   Q(pi, pi'') = sum over events pi' with coag(pi, pi') = pi'' of q_pi'.
using RateMatrix = Eigen::MatrixXd;

RateMatrix rate_matrix(const CoagulationMeasure& measure, const PartitionSpace& space);

namespace detail {

// Poisson(mean) probabilities w_0..w_K, with K the first index past the
// mean whose geometric tail bound w_K r / (1 - r), r = mean / (K + 1),
// is at most `tolerance`.
inline std::vector<double> poisson_weights(double mean, double tolerance) {
  std::vector<double> w;
  double term = std::exp(-mean);
  for (int k = 0;; ++k) {
    if (k > 0) term *= mean / k;
    w.push_back(term);
    const double r = mean / (k + 1.0);
    if (r < 1.0 && term * r / (1.0 - r) <= tolerance) break;
  }
  return w;
}

}  // namespace detail

/// e^{tQ} X by uniformization. Each entry is within `tolerance` * max|X|
/// of the exact value: the Poisson tail mass of every slice is bounded and
/// I + Q/Lambda is stochastic.
template <typename DerivedQ, typename DerivedX>
Eigen::Matrix<typename DerivedX::Scalar, Eigen::Dynamic, DerivedX::ColsAtCompileTime> semigroup_apply(
    const Eigen::MatrixBase<DerivedQ>& Q, double t, const Eigen::MatrixBase<DerivedX>& X,
    double tolerance = 1e-10) {
  using Scalar = typename DerivedX::Scalar;
  using Result = Eigen::Matrix<Scalar, Eigen::Dynamic, DerivedX::ColsAtCompileTime>;
  if (t < 0.0) throw PreconditionError("semigroup: t must be >= 0");
  if (Q.rows() != Q.cols() || Q.rows() != X.rows()) throw PreconditionError("semigroup: shape mismatch");
  Result current = X;
  const double lambda = Q.diagonal().cwiseAbs().maxCoeff();
  if (t == 0.0 || lambda == 0.0) return current;

  const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> step =
      Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>::Identity(Q.rows(), Q.cols()) + Q / lambda;
  // Slices with Lambda * dt <= 30 keep exp(-Lambda dt) far from underflow.
  const auto slices = static_cast<int>(std::ceil(lambda * t / 30.0));
  const double dt = t / slices;
  const auto weights = detail::poisson_weights(lambda * dt, tolerance / slices);
  for (int s = 0; s < slices; ++s) {
    Result power = current;
    Result acc = weights[0] * power;
    for (std::size_t k = 1; k < weights.size(); ++k) {
      power = step * power;
      acc.noalias() += weights[k] * power;
    }
    current = std::move(acc);
  }
  return current;
}

/// e^{tQ}, a stochastic matrix when Q is a generator.
template <typename Derived>
Eigen::MatrixXd transition_probs(const Eigen::MatrixBase<Derived>& Q, double t, double tolerance = 1e-10) {
  return semigroup_apply(Q, t, Eigen::MatrixXd::Identity(Q.rows(), Q.cols()), tolerance);
}

/// Phi_f(rho, pi) for every pi in the space.
Eigen::VectorXd phi_vector(const PartitionSpace& space, const DiscreteMeasure& rho, const MomentFunctional& f);

/// E^pi[Phi_f(rho, Pi_|[p](t))] with p = arity of f.
double exact_dual_expectation(const CoagulationMeasure& measure, const DistinguishedPartition& start,
                              const DiscreteMeasure& rho, const MomentFunctional& f, double t,
                              double tolerance = 1e-10);

/// L G_f(rho) = sum_{pi != 0_[p]} q_pi (Phi_f(rho, pi) - Phi_f(rho, 0_[p])).
double generator_direct(const CoagulationMeasure& measure, const DiscreteMeasure& rho, const MomentFunctional& f);

/// Largest enumeration generator_decomposed attempts: A^p (m+2)^p terms.
inline constexpr double kDecomposedEnumerationCap = 5e7;

/// L^{c0} G_f + L^{c1} G_f + L^{nu} G_f, each integrated exactly by
/// enumerating atoms of rho, without going through partitions.
double generator_decomposed(const CoagulationMeasure& measure, const DiscreteMeasure& rho,
                            const MomentFunctional& f, double cap = kDecomposedEnumerationCap);

}  // namespace gfvi
