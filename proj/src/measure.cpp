#include "gfvi/measure.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "gfvi/errors.hpp"

namespace gfvi {

MeasureDiagnostics validate(const CoagulationMeasure& measure) {
  MeasureDiagnostics out;
  if (!(measure.c0 >= 0.0) || !std::isfinite(measure.c0)) out.violations.push_back("c0 must be a finite rate >= 0");
  if (!(measure.c1 >= 0.0) || !std::isfinite(measure.c1)) out.violations.push_back("c1 must be a finite rate >= 0");
  for (std::size_t k = 0; k < measure.atoms.size(); ++k) {
    const auto& atom = measure.atoms[k];
    const std::string tag = "atom " + std::to_string(k) + ": ";
    if (!(atom.weight > 0.0) || !std::isfinite(atom.weight)) out.violations.push_back(tag + "weight must be > 0");
    for (const auto& p : mass_partition_problems(atom.mass)) out.violations.push_back(tag + p);
    if (atom.mass.size() > kMaxPaintboxColors) {
      out.violations.push_back(tag + "more than " + std::to_string(kMaxPaintboxColors) + " colors");
    }
    double squares = 0.0;
    for (double x : atom.mass.s) squares += x * x;
    out.nu_integral += atom.weight * (atom.mass.s0 + squares);
  }
  return out;
}

void require_valid(const CoagulationMeasure& measure) {
  const auto diag = validate(measure);
  if (diag.valid()) return;
  std::string msg = "invalid coagulation measure:";
  for (const auto& v : diag.violations) msg += " " + v + ";";
  throw PreconditionError(msg);
}

namespace {

// Shape of a partition relevant to the Kingman part.
struct SimpleShape {
  bool distinguished_pair = false;  // K(0,i)
  bool binary_pair = false;         // K(i,j), 1 <= i < j
};

SimpleShape shape_of(const DistinguishedPartition& pi) {
  const auto sizes = pi.block_sizes();
  int big = 0;
  for (std::size_t b = 1; b < sizes.size(); ++b) {
    if (sizes[b] > 2) return {};
    if (sizes[b] == 2) ++big;
  }
  SimpleShape out;
  out.distinguished_pair = sizes[0] == 2 && big == 0;
  out.binary_pair = sizes[0] == 1 && big == 1;
  return out;
}

}  // namespace

double jump_rate(const CoagulationMeasure& measure, const DistinguishedPartition& pi) {
  if (pi.is_singletons()) {
    throw PreconditionError("jump_rate: the trivial partition has no rate (mu charges no 0_[inf])");
  }
  const auto shape = shape_of(pi);
  double q = 0.0;
  if (shape.distinguished_pair) q += measure.c0;
  if (shape.binary_pair) q += measure.c1;
  for (const auto& atom : measure.atoms) q += atom.weight * paintbox_prob(atom.mass, pi);
  return q;
}

std::vector<double> singleton_probabilities(const MassPartition& s, int n) {
  const int m = s.size();
  if (m > kMaxPaintboxColors) throw ResourceError("singleton_probabilities: too many colors");
  const double dust = s.dust();
  const std::size_t states = std::size_t{1} << m;
  std::vector<double> dp(states, 0.0), next(states);
  dp[0] = 1.0;
  std::vector<double> out(static_cast<std::size_t>(n) + 1, 0.0);
  out[0] = 1.0;
  for (int b = 1; b <= n; ++b) {
    std::fill(next.begin(), next.end(), 0.0);
    double total = 0.0;
    for (std::size_t mask = 0; mask < states; ++mask) {
      const double w = dp[mask];
      if (w == 0.0) continue;
      next[mask] += w * dust;
      for (int j = 0; j < m; ++j) {
        const std::size_t bit = std::size_t{1} << j;
        if (!(mask & bit)) next[mask | bit] += w * s.s[j];
      }
    }
    dp.swap(next);
    total = std::accumulate(dp.begin(), dp.end(), 0.0);
    out[static_cast<std::size_t>(b)] = total;
    if (total == 0.0) break;  // all further levels are 0 as well
  }
  return out;
}

double total_rate(const CoagulationMeasure& measure, int n) {
  if (n < 0) throw PreconditionError("total_rate: n must be >= 0");
  double rate = measure.c0 * n + measure.c1 * 0.5 * n * (n - 1.0);
  for (const auto& atom : measure.atoms) {
    rate += atom.weight * (1.0 - singleton_probabilities(atom.mass, n).back());
  }
  return rate;
}

double EventCategories::total() const {
  return distinguished + binary + std::accumulate(atoms.begin(), atoms.end(), 0.0);
}

DistinguishedPartition EventMark::to_partition(int n) const {
  switch (kind) {
    case Kind::Distinguished:
      return kingman(n, 0, j);
    case Kind::Binary:
      return kingman(n, i, j);
    case Kind::Atom:
      break;
  }
  return partition;
}

EventSampler::EventSampler(CoagulationMeasure measure, int max_resolution)
    : measure_(std::move(measure)), max_resolution_(max_resolution) {
  require_valid(measure_);
  if (max_resolution < 0) throw PreconditionError("EventSampler: resolution must be >= 0");
  trivial_.reserve(measure_.atoms.size());
  for (const auto& atom : measure_.atoms) {
    trivial_.push_back(singleton_probabilities(atom.mass, max_resolution));
  }
  totals_.reserve(static_cast<std::size_t>(max_resolution) + 1);
  for (int b = 0; b <= max_resolution; ++b) totals_.push_back(categories(b).total());
}

EventCategories EventSampler::categories(int b) const {
  if (b < 0 || b > max_resolution_) throw PreconditionError("EventSampler: resolution out of range");
  EventCategories c;
  c.distinguished = measure_.c0 * b;
  c.binary = measure_.c1 * 0.5 * b * (b - 1.0);
  c.atoms.reserve(measure_.atoms.size());
  for (std::size_t k = 0; k < measure_.atoms.size(); ++k) {
    c.atoms.push_back(measure_.atoms[k].weight * (1.0 - trivial_[k][static_cast<std::size_t>(b)]));
  }
  return c;
}

double EventSampler::total_rate(int b) const {
  if (b < 0 || b > max_resolution_) throw PreconditionError("EventSampler: resolution out of range");
  return totals_[static_cast<std::size_t>(b)];
}

EventMark EventSampler::sample_mark(int b, Rng& rng) const {
  const auto c = categories(b);
  std::vector<double> weights{c.distinguished, c.binary};
  weights.insert(weights.end(), c.atoms.begin(), c.atoms.end());
  const double total = c.total();
  if (!(total > 0.0)) throw PreconditionError("no events at this resolution (lambda_n = 0)");

  double u = uniform01(rng) * total;
  std::size_t pick = weights.size();
  for (std::size_t k = 0; k < weights.size(); ++k) {
    if (weights[k] > 0.0) pick = k;  // last positive category absorbs rounding
    if (u < weights[k]) {
      pick = k;
      break;
    }
    u -= weights[k];
  }

  EventMark mark;
  if (pick == 0) {
    mark.kind = EventMark::Kind::Distinguished;
    mark.j = std::uniform_int_distribution<int>(1, b)(rng);
    return mark;
  }
  if (pick == 1) {
    mark.kind = EventMark::Kind::Binary;
    const int i = std::uniform_int_distribution<int>(1, b)(rng);
    int j = std::uniform_int_distribution<int>(1, b - 1)(rng);
    if (j >= i) ++j;
    mark.i = std::min(i, j);
    mark.j = std::max(i, j);
    return mark;
  }
  const std::size_t k = pick - 2;
  mark.kind = EventMark::Kind::Atom;
  mark.atom = k;
  for (long trial = 0; trial < kMaxRejections; ++trial) {
    auto pi = paintbox_sample(measure_.atoms[k].mass, b, rng);
    if (!pi.is_singletons()) {
      mark.partition = std::move(pi);
      return mark;
    }
  }
  throw ResourceError("atom event rejection sampling exceeded 1e6 trials");
}

std::pair<double, DistinguishedPartition> sample_event(const CoagulationMeasure& measure, int n,
                                                       Rng& rng) {
  const EventSampler sampler(measure, n);
  const double rate = sampler.total_rate(n);
  if (!(rate > 0.0)) throw PreconditionError("no events at this resolution (lambda_n = 0)");
  const double wait = exponential(rng, rate);
  return {wait, sampler.sample(n, rng)};
}

}  // namespace gfvi
