#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "gfvi/random.hpp"

namespace gfvi {

/// A partition of {0,...,n} whose block containing 0 is distinguished.
///
/// Stored as the assignment k -> block index with blocks numbered in
/// increasing order of their least element. Every constructor canonicalizes,
/// so equality is plain equality of assignments. As a consequence
/// min(block i) >= i, and the restriction to {0,...,m} keeps block indices.
class DistinguishedPartition {
 public:
  /// The single-element partition {{0}}.
  DistinguishedPartition();

  /// Builds from arbitrary integer labels (labels[k] is any tag for the
  /// block of k). Elements sharing a tag share a block.
  static DistinguishedPartition from_labels(std::span<const int> labels);
  /// Builds from explicit blocks that must cover {0,...,n} exactly once.
  static DistinguishedPartition from_blocks(const std::vector<std::vector<int>>& blocks);
  /// Parses the `{{0,2},{1},{3}}` notation produced by to_string().
  static DistinguishedPartition parse(std::string_view text);

  int bound() const { return static_cast<int>(assignment_.size()) - 1; }
  int block_count() const { return block_count_; }
  /// Index of the block containing k (the ancestor map).
  int alpha(int k) const;
  std::span<const int> assignment() const { return assignment_; }

  std::vector<std::vector<int>> blocks() const;
  std::vector<int> block_sizes() const;
  bool is_singletons() const { return block_count_ == bound() + 1; }
  bool is_single_block() const { return block_count_ == 1; }

  std::string to_string() const;

  friend bool operator==(const DistinguishedPartition&, const DistinguishedPartition&) = default;

 private:
  // Trusted constructor: labels already canonical.
  DistinguishedPartition(std::vector<int> assignment, int block_count);

  std::vector<int> assignment_;
  int block_count_ = 1;

  friend DistinguishedPartition coag(const DistinguishedPartition&, const DistinguishedPartition&);
  friend DistinguishedPartition restrict(const DistinguishedPartition&, int);
  friend DistinguishedPartition singletons(int);
};

/// 0_[n], the partition of {0,...,n} into singletons.
DistinguishedPartition singletons(int n);

/// coag(pi, pi2)_i is the union of the blocks pi_j over j in pi2_i. Only the
/// restriction of pi2 to {0,...,blocks(pi)-1} matters.
DistinguishedPartition coag(const DistinguishedPartition& pi, const DistinguishedPartition& pi2);

DistinguishedPartition restrict(const DistinguishedPartition& pi, int m);

/// (1 + largest m with equal restrictions to [m])^-1. Equal partitions on
/// [n] give 1/(1+n), the finite-resolution stand-in for distance zero.
double distance(const DistinguishedPartition& pi, const DistinguishedPartition& pi2);

/// Simple partition of [n] whose only non-singleton block is {i, j}.
DistinguishedPartition kingman(int n, int i, int j);

/// s = (s0; s1 >= s2 >= ... >= sm) with dust 1 - s0 - sum(s).
struct MassPartition {
  double s0 = 0.0;
  std::vector<double> s;

  double dust() const;
  int size() const { return static_cast<int>(s.size()); }
  friend bool operator==(const MassPartition&, const MassPartition&) = default;
};

/// Human-readable reasons `s` is not an element of P_m (or is trivial).
std::vector<std::string> mass_partition_problems(const MassPartition& s);
/// Throws PreconditionError listing the problems, if any.
void require_valid(const MassPartition& s);

/// Largest number of non-dust colors paintbox_prob accepts.
inline constexpr int kMaxPaintboxColors = 20;

/// An s-distinguished paint-box restricted to [n]: each of 1..n independently
/// joins the block of 0 (prob s0), color j (prob s_j) or stays dust.
DistinguishedPartition paintbox_sample(const MassPartition& s, int n, Rng& rng);

/// Exact probability that an s-paint-box restricted to [n] equals pi.
double paintbox_prob(const MassPartition& s, const DistinguishedPartition& pi);

}  // namespace gfvi
