#include "gfvi/partition.hpp"

#include <algorithm>
#include <cassert>
#include <charconv>
#include <cmath>
#include <numeric>
#include <unordered_map>

#include "gfvi/errors.hpp"

namespace gfvi {

DistinguishedPartition::DistinguishedPartition() : assignment_{0}, block_count_{1} {}

DistinguishedPartition::DistinguishedPartition(std::vector<int> assignment, int block_count)
    : assignment_(std::move(assignment)), block_count_(block_count) {}

DistinguishedPartition DistinguishedPartition::from_labels(std::span<const int> labels) {
  if (labels.empty()) throw PreconditionError("partition needs at least the element 0");
  std::vector<int> out(labels.size());
  int next = 0;
  const auto [lo, hi] = std::minmax_element(labels.begin(), labels.end());
  const long long span = static_cast<long long>(*hi) - *lo + 1;
  if (span <= 4 * static_cast<long long>(labels.size()) + 16) {
    std::vector<int> seen(static_cast<std::size_t>(span), -1);
    for (std::size_t k = 0; k < labels.size(); ++k) {
      int& slot = seen[static_cast<std::size_t>(labels[k] - *lo)];
      if (slot < 0) slot = next++;
      out[k] = slot;
    }
  } else {
    std::unordered_map<int, int> seen;
    for (std::size_t k = 0; k < labels.size(); ++k) {
      auto [it, inserted] = seen.try_emplace(labels[k], next);
      if (inserted) ++next;
      out[k] = it->second;
    }
  }
  return DistinguishedPartition(std::move(out), next);
}

DistinguishedPartition DistinguishedPartition::from_blocks(
    const std::vector<std::vector<int>>& blocks) {
  std::size_t total = 0;
  for (const auto& b : blocks) total += b.size();
  if (total == 0) throw PreconditionError("partition needs at least the element 0");
  std::vector<int> labels(total, -1);
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    if (blocks[b].empty()) throw PreconditionError("empty block");
    for (int k : blocks[b]) {
      if (k < 0 || static_cast<std::size_t>(k) >= total || labels[k] >= 0) {
        throw PreconditionError("blocks must cover {0,...,n} exactly once");
      }
      labels[k] = static_cast<int>(b);
    }
  }
  return from_labels(labels);
}

DistinguishedPartition DistinguishedPartition::parse(std::string_view text) {
  std::vector<std::vector<int>> blocks;
  std::size_t i = 0;
  auto skip_ws = [&] {
    while (i < text.size() && (text[i] == ' ' || text[i] == '\t')) ++i;
  };
  auto expect = [&](char c) {
    skip_ws();
    if (i >= text.size() || text[i] != c) {
      throw PreconditionError("malformed partition '" + std::string(text) + "'");
    }
    ++i;
  };
  expect('{');
  skip_ws();
  while (i < text.size() && text[i] == '{') {
    ++i;
    std::vector<int> block;
    for (;;) {
      skip_ws();
      int value = 0;
      auto [ptr, ec] = std::from_chars(text.data() + i, text.data() + text.size(), value);
      if (ec != std::errc()) throw PreconditionError("malformed partition '" + std::string(text) + "'");
      i = static_cast<std::size_t>(ptr - text.data());
      block.push_back(value);
      skip_ws();
      if (i < text.size() && text[i] == ',') {
        ++i;
        continue;
      }
      break;
    }
    expect('}');
    blocks.push_back(std::move(block));
    skip_ws();
    if (i < text.size() && text[i] == ',') ++i;
    skip_ws();
  }
  expect('}');
  skip_ws();
  if (i != text.size()) throw PreconditionError("trailing characters in partition '" + std::string(text) + "'");
  return from_blocks(blocks);
}

int DistinguishedPartition::alpha(int k) const {
  if (k < 0 || k > bound()) throw PreconditionError("alpha: element outside {0,...,n}");
  return assignment_[static_cast<std::size_t>(k)];
}

std::vector<std::vector<int>> DistinguishedPartition::blocks() const {
  std::vector<std::vector<int>> out(static_cast<std::size_t>(block_count_));
  for (std::size_t k = 0; k < assignment_.size(); ++k) {
    out[static_cast<std::size_t>(assignment_[k])].push_back(static_cast<int>(k));
  }
  return out;
}

std::vector<int> DistinguishedPartition::block_sizes() const {
  std::vector<int> out(static_cast<std::size_t>(block_count_), 0);
  for (int a : assignment_) ++out[static_cast<std::size_t>(a)];
  return out;
}

std::string DistinguishedPartition::to_string() const {
  std::string out = "{";
  const auto bs = blocks();
  for (std::size_t b = 0; b < bs.size(); ++b) {
    if (b) out += ',';
    out += '{';
    for (std::size_t e = 0; e < bs[b].size(); ++e) {
      if (e) out += ',';
      out += std::to_string(bs[b][e]);
    }
    out += '}';
  }
  out += '}';
  return out;
}

DistinguishedPartition singletons(int n) {
  if (n < 0) throw PreconditionError("singletons: n must be >= 0");
  std::vector<int> a(static_cast<std::size_t>(n) + 1);
  std::iota(a.begin(), a.end(), 0);
  return DistinguishedPartition(std::move(a), n + 1);
}

DistinguishedPartition coag(const DistinguishedPartition& pi, const DistinguishedPartition& pi2) {
  if (pi2.bound() < pi.block_count() - 1) {
    throw PreconditionError("coag: second partition must cover the block indices of the first");
  }
  std::vector<int> a(pi.assignment_.size());
  int top = 0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    a[k] = pi2.assignment_[static_cast<std::size_t>(pi.assignment_[k])];
    top = std::max(top, a[k]);
  }
  // The restriction of pi2 to [B-1] occupies a prefix of block indices, and
  // first appearances in `a` follow least elements, so `a` is canonical.
  return DistinguishedPartition(std::move(a), top + 1);
}

DistinguishedPartition restrict(const DistinguishedPartition& pi, int m) {
  if (m < 0 || m > pi.bound()) throw PreconditionError("restrict: need 0 <= m <= n");
  std::vector<int> a(pi.assignment_.begin(), pi.assignment_.begin() + m + 1);
  const int top = *std::max_element(a.begin(), a.end());
  return DistinguishedPartition(std::move(a), top + 1);
}

double distance(const DistinguishedPartition& pi, const DistinguishedPartition& pi2) {
  if (pi.bound() != pi2.bound()) throw PreconditionError("distance: ground sets differ");
  const auto a = pi.assignment();
  const auto b = pi2.assignment();
  const auto mismatch = std::mismatch(a.begin(), a.end(), b.begin());
  // Canonical labels of a restriction are a prefix of the full labels.
  const auto agree = static_cast<int>(mismatch.first - a.begin()) - 1;
  return 1.0 / (1.0 + agree);
}

DistinguishedPartition kingman(int n, int i, int j) {
  if (i < 0 || j > n || i >= j) throw PreconditionError("kingman: need 0 <= i < j <= n");
  std::vector<int> labels(static_cast<std::size_t>(n) + 1);
  std::iota(labels.begin(), labels.end(), 0);
  labels[static_cast<std::size_t>(j)] = i;
  return DistinguishedPartition::from_labels(labels);
}

double MassPartition::dust() const {
  const double used = s0 + std::accumulate(s.begin(), s.end(), 0.0);
  return std::max(0.0, 1.0 - used);
}

std::vector<std::string> mass_partition_problems(const MassPartition& s) {
  std::vector<std::string> out;
  constexpr double slack = 1e-12;
  if (!(s.s0 >= 0.0) || !std::isfinite(s.s0)) out.push_back("s0 must be a finite number >= 0");
  for (double x : s.s) {
    if (!(x >= 0.0) || !std::isfinite(x)) {
      out.push_back("mass entries must be finite numbers >= 0");
      break;
    }
  }
  if (!std::is_sorted(s.s.begin(), s.s.end(), std::greater<>())) {
    out.push_back("masses s1 >= s2 >= ... must be sorted descending");
  }
  const double used = s.s0 + std::accumulate(s.s.begin(), s.s.end(), 0.0);
  if (used > 1.0 + slack) out.push_back("total mass s0 + sum(s) exceeds 1");
  const bool trivial = !(s.s0 > 0.0) && std::none_of(s.s.begin(), s.s.end(), [](double x) { return x > 0.0; });
  if (trivial) out.push_back("trivial atom charges 0_[inf] (s0 = 0 and all s_i = 0)");
  return out;
}

void require_valid(const MassPartition& s) {
  const auto problems = mass_partition_problems(s);
  if (problems.empty()) return;
  std::string msg = "invalid mass partition:";
  for (const auto& p : problems) msg += " " + p + ";";
  throw PreconditionError(msg);
}

DistinguishedPartition paintbox_sample(const MassPartition& s, int n, Rng& rng) {
  if (n < 0) throw PreconditionError("paintbox_sample: n must be >= 0");
  const int m = s.size();
  std::vector<double> cumulative(static_cast<std::size_t>(m) + 1);
  cumulative[0] = s.s0;
  for (int j = 0; j < m; ++j) cumulative[j + 1] = cumulative[j] + s.s[j];
  // label 0: block of 0; 1..m: colors; m+k: dust element k (k >= 1).
  std::vector<int> labels(static_cast<std::size_t>(n) + 1);
  labels[0] = 0;
  for (int k = 1; k <= n; ++k) {
    const double u = uniform01(rng);
    const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
    const auto color = static_cast<int>(it - cumulative.begin());
    labels[static_cast<std::size_t>(k)] = color <= m ? color : m + k;
  }
  return DistinguishedPartition::from_labels(labels);
}

double paintbox_prob(const MassPartition& s, const DistinguishedPartition& pi) {
  const int m = s.size();
  if (m > kMaxPaintboxColors) {
    throw ResourceError("paintbox_prob: more than " + std::to_string(kMaxPaintboxColors) + " colors");
  }
  const auto sizes = pi.block_sizes();
  const double dust = s.dust();
  double head = std::pow(s.s0, sizes[0] - 1);
  if (head == 0.0) return 0.0;

  // dp[mask] = probability mass of block-color assignments so far using the
  // colors in `mask`, each non-distinguished block getting its own color or,
  // for a singleton, the dust.
  const std::size_t states = std::size_t{1} << m;
  std::vector<double> dp(states, 0.0), next(states);
  dp[0] = 1.0;
  std::vector<double> power(static_cast<std::size_t>(m));
  for (std::size_t b = 1; b < sizes.size(); ++b) {
    std::fill(next.begin(), next.end(), 0.0);
    for (int j = 0; j < m; ++j) power[j] = std::pow(s.s[j], sizes[b]);
    for (std::size_t mask = 0; mask < states; ++mask) {
      const double w = dp[mask];
      if (w == 0.0) continue;
      if (sizes[b] == 1) next[mask] += w * dust;
      for (int j = 0; j < m; ++j) {
        const std::size_t bit = std::size_t{1} << j;
        if (!(mask & bit)) next[mask | bit] += w * power[j];
      }
    }
    dp.swap(next);
  }
  return head * std::accumulate(dp.begin(), dp.end(), 0.0);
}

}  // namespace gfvi
