#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "gfvi/measure.hpp"
#include "gfvi/partition.hpp"

namespace gfvi {

struct Event {
  double time = 0.0;
  DistinguishedPartition partition;
};

/// Atoms of the Poisson event measure in (0, horizon] at resolution n, in
/// increasing time order. The same log drives the backward coalescent, the
/// forward (dual) population and every window partition.
struct EventLog {
  int n = 0;
  double horizon = 0.0;
  std::vector<Event> events;
  std::uint64_t seed = 0;
};

enum class Direction { Backward, Forward };

EventLog simulate_events(const EventSampler& sampler, int n, double horizon, Rng& rng);
EventLog simulate_events(const CoagulationMeasure& measure, int n, double horizon, Rng& rng);

/// The same randomness seen at resolution m <= n: events are restricted and
/// those becoming trivial are dropped.
EventLog restrict(const EventLog& log, int m);

/// Pi(0,t): left fold state <- coag(state, event) over events with time <= t.
DistinguishedPartition backward_state(const EventLog& log, double t);
/// Pi-hat(t): fold state <- coag(event, state), newest event first argument.
DistinguishedPartition forward_state(const EventLog& log, double t);
/// Fold over the events in (s, t] only.
DistinguishedPartition window_partition(const EventLog& log, double s, double t, Direction direction);

/// First event time at which the state is the single block {0,...,n};
/// nullopt when not reached by the horizon (censored).
std::optional<double> absorption_time(const EventLog& log, Direction direction = Direction::Forward);

/// Piecewise-constant, right-continuous state path. states[0] is the state
/// on [0, times[1]) and times[0] = 0.
struct Trajectory {
  std::vector<double> times;
  std::vector<DistinguishedPartition> states;

  const DistinguishedPartition& at(double t) const;
};

Trajectory trajectory(const EventLog& log, Direction direction);

/// Pi(t) at resolution n drawn without a full event log: only events that
/// are non-trivial on the current block indices are generated (rate
/// lambda_{B-1} with B the current block count). Exact in law for the
/// backward coalescent and, by time reversal of the event measure, for the
/// forward population Pi-hat(t) at fixed t.
DistinguishedPartition sample_coalescent_state(const EventSampler& sampler, int n, double t, Rng& rng);

/// Absorption time of the backward coalescent at resolution n using the same
/// thinned chain; nullopt if not absorbed by `horizon`.
std::optional<double> sample_absorption_time(const EventSampler& sampler, int n, double horizon,
                                             Rng& rng);

}  // namespace gfvi
