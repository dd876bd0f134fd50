#include "gfvi/coalescent.hpp"

#include <algorithm>
#include <numeric>

#include "gfvi/errors.hpp"

namespace gfvi {

EventLog simulate_events(const EventSampler& sampler, int n, double horizon, Rng& rng) {
  if (!(horizon > 0.0)) throw PreconditionError("simulate_events: horizon must be > 0");
  if (n > sampler.max_resolution()) throw PreconditionError("simulate_events: sampler resolution too small");
  EventLog log{n, horizon, {}, 0};
  const double rate = sampler.total_rate(n);
  if (!(rate > 0.0)) return log;
  double t = 0.0;
  for (;;) {
    t += exponential(rng, rate);
    if (t > horizon) break;
    log.events.push_back({t, sampler.sample(n, rng)});
  }
  return log;
}

EventLog simulate_events(const CoagulationMeasure& measure, int n, double horizon, Rng& rng) {
  return simulate_events(EventSampler(measure, n), n, horizon, rng);
}

EventLog restrict(const EventLog& log, int m) {
  if (m < 0 || m > log.n) throw PreconditionError("restrict: need 0 <= m <= n");
  EventLog out{m, log.horizon, {}, log.seed};
  for (const auto& e : log.events) {
    auto r = restrict(e.partition, m);
    if (!r.is_singletons()) out.events.push_back({e.time, std::move(r)});
  }
  return out;
}

namespace {

void check_time(const EventLog& log, double t) {
  if (t < 0.0 || t > log.horizon) throw PreconditionError("time outside [0, horizon]");
}

DistinguishedPartition fold(const EventLog& log, double s, double t, Direction direction) {
  auto state = singletons(log.n);
  for (const auto& e : log.events) {
    if (e.time <= s) continue;
    if (e.time > t) break;
    state = direction == Direction::Backward ? coag(state, e.partition) : coag(e.partition, state);
  }
  return state;
}

}  // namespace

DistinguishedPartition backward_state(const EventLog& log, double t) {
  check_time(log, t);
  return fold(log, 0.0, t, Direction::Backward);
}

DistinguishedPartition forward_state(const EventLog& log, double t) {
  check_time(log, t);
  return fold(log, 0.0, t, Direction::Forward);
}

DistinguishedPartition window_partition(const EventLog& log, double s, double t, Direction direction) {
  check_time(log, s);
  check_time(log, t);
  if (s > t) throw PreconditionError("window_partition: need s <= t");
  return fold(log, s, t, direction);
}

std::optional<double> absorption_time(const EventLog& log, Direction direction) {
  auto state = singletons(log.n);
  if (state.is_single_block()) return 0.0;
  for (const auto& e : log.events) {
    state = direction == Direction::Backward ? coag(state, e.partition) : coag(e.partition, state);
    if (state.is_single_block()) return e.time;
  }
  return std::nullopt;
}

const DistinguishedPartition& Trajectory::at(double t) const {
  const auto it = std::upper_bound(times.begin(), times.end(), t);
  const auto idx = it == times.begin() ? 0 : static_cast<std::size_t>(it - times.begin()) - 1;
  return states[idx];
}

Trajectory trajectory(const EventLog& log, Direction direction) {
  Trajectory out;
  out.times.push_back(0.0);
  out.states.push_back(singletons(log.n));
  for (const auto& e : log.events) {
    const auto& prev = out.states.back();
    auto next = direction == Direction::Backward ? coag(prev, e.partition) : coag(e.partition, prev);
    if (next == prev) continue;
    out.times.push_back(e.time);
    out.states.push_back(std::move(next));
  }
  return out;
}

namespace {

// Blocks of the current state, each represented by its least element, with
// a union-find forest over the elements of [n].
class BlockChain {
 public:
  explicit BlockChain(int n) : parent_(static_cast<std::size_t>(n) + 1), reps_(parent_.size()) {
    std::iota(parent_.begin(), parent_.end(), 0);
    std::iota(reps_.begin(), reps_.end(), 0);
  }

  int blocks() const { return static_cast<int>(reps_.size()); }

  // state <- coag(state, mark restricted to the current block indices).
  void apply(const EventMark& mark) {
    if (mark.kind != EventMark::Kind::Atom) {
      const auto j = static_cast<std::size_t>(mark.j);
      parent_[static_cast<std::size_t>(reps_[j])] = reps_[static_cast<std::size_t>(mark.i)];
      reps_.erase(reps_.begin() + static_cast<std::ptrdiff_t>(j));
      return;
    }
    const auto a = mark.partition.assignment();
    merged_.clear();
    for (std::size_t k = 0; k < a.size(); ++k) {
      const auto blk = static_cast<std::size_t>(a[k]);
      if (blk == merged_.size()) {
        merged_.push_back(reps_[k]);
      } else {
        parent_[static_cast<std::size_t>(reps_[k])] = merged_[blk];
      }
    }
    reps_.swap(merged_);
  }

  DistinguishedPartition state() {
    std::vector<int> labels(parent_.size());
    for (std::size_t k = 0; k < parent_.size(); ++k) labels[k] = find(static_cast<int>(k));
    return DistinguishedPartition::from_labels(labels);
  }

 private:
  int find(int x) {
    int root = x;
    while (parent_[static_cast<std::size_t>(root)] != root) root = parent_[static_cast<std::size_t>(root)];
    while (parent_[static_cast<std::size_t>(x)] != root) {
      const int next = parent_[static_cast<std::size_t>(x)];
      parent_[static_cast<std::size_t>(x)] = root;
      x = next;
    }
    return root;
  }

  std::vector<int> parent_;
  std::vector<int> reps_;
  std::vector<int> merged_;
};

}  // namespace

DistinguishedPartition sample_coalescent_state(const EventSampler& sampler, int n, double t, Rng& rng) {
  if (n > sampler.max_resolution()) throw PreconditionError("sample_coalescent_state: sampler resolution too small");
  if (t < 0.0) throw PreconditionError("sample_coalescent_state: t must be >= 0");
  BlockChain chain(n);
  double time = 0.0;
  while (chain.blocks() > 1) {
    const int b = chain.blocks() - 1;
    const double rate = sampler.total_rate(b);
    if (!(rate > 0.0)) break;
    time += exponential(rng, rate);
    if (time > t) break;
    chain.apply(sampler.sample_mark(b, rng));
  }
  return chain.state();
}

std::optional<double> sample_absorption_time(const EventSampler& sampler, int n, double horizon,
                                             Rng& rng) {
  if (n > sampler.max_resolution()) throw PreconditionError("sample_absorption_time: sampler resolution too small");
  BlockChain chain(n);
  double time = 0.0;
  while (chain.blocks() > 1) {
    const int b = chain.blocks() - 1;
    const double rate = sampler.total_rate(b);
    if (!(rate > 0.0)) return std::nullopt;
    time += exponential(rng, rate);
    if (time > horizon) return std::nullopt;
    chain.apply(sampler.sample_mark(b, rng));
  }
  return time;
}

}  // namespace gfvi
