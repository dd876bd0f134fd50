#include <doctest.h>

#include "gfvi/coalescent.hpp"
#include "gfvi/duality.hpp"
#include "gfvi/errors.hpp"
#include "gfvi/exact.hpp"
#include "oracles.hpp"

using namespace gfvi;
using P = DistinguishedPartition;

namespace {

const CoagulationMeasure kImmigration{1.0, 0.0, {}};
const CoagulationMeasure kKingman{0.0, 1.0, {}};
const CoagulationMeasure kMixed{0.5, 1.0, {{0.8, {0.2, {0.5, 0.2}}}, {1.5, {0.0, {0.3}}}}};

EventLog hand_log(int n, std::vector<std::pair<double, std::string>> events, double horizon = 10.0) {
  EventLog log{n, horizon, {}, 0};
  for (auto& [t, text] : events) log.events.push_back({t, P::parse(text)});
  return log;
}

std::vector<double> singletons_row(const CoagulationMeasure& mu, int p, double t, const PartitionSpace& space) {
  Eigen::VectorXd start = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(space.size()));
  start(static_cast<Eigen::Index>(space.singletons_index())) = 1.0;
  const Eigen::MatrixXd Qt = rate_matrix(mu, space).transpose();
  const Eigen::VectorXd row = semigroup_apply(Qt, t, start);
  (void)p;
  return {row.data(), row.data() + row.size()};
}

}  // namespace

TEST_CASE("event counts are Poisson(lambda_n T)") {
  const double T = 3.0;
  const long runs = 10'000;
  const EventSampler sampler(kMixed, 3);
  const double lambda = sampler.total_rate(3);
  std::vector<double> counts;
  for (long r = 0; r < runs; ++r) {
    auto rng = make_rng(7, static_cast<std::uint64_t>(r));
    const auto log = simulate_events(sampler, 3, T, rng);
    double prev = 0.0;
    for (const auto& e : log.events) {
      CHECK(e.time > prev);
      CHECK(e.time <= T);
      CHECK_FALSE(e.partition.is_singletons());
      prev = e.time;
    }
    counts.push_back(static_cast<double>(log.events.size()));
  }
  const auto [mean, se] = mean_and_se(counts);
  CHECK(std::abs(mean - lambda * T) <= 4.0 * se);
  double var = 0.0;
  for (double c : counts) var += (c - mean) * (c - mean);
  var /= runs - 1;
  // Var of the sample variance for Poisson(m): m/N (1 + 2m) approximately.
  const double m = lambda * T;
  CHECK(std::abs(var - m) <= 4.0 * std::sqrt(m * (1.0 + 2.0 * m) / runs));

  Rng rng(1);
  CHECK(simulate_events(CoagulationMeasure{}, 4, T, rng).events.empty());
  CHECK_THROWS_AS(simulate_events(kMixed, 3, 0.0, rng), PreconditionError);
}

TEST_CASE("single distinguished merge: event count mean T") {
  std::vector<double> counts;
  for (long r = 0; r < 10'000; ++r) {
    auto rng = make_rng(8, static_cast<std::uint64_t>(r));
    counts.push_back(static_cast<double>(simulate_events(kImmigration, 1, 2.0, rng).events.size()));
  }
  const auto [mean, se] = mean_and_se(counts);
  CHECK(std::abs(mean - 2.0) <= 4.0 * se);
}

TEST_CASE("folds on hand-built logs") {
  const auto log = hand_log(3, {{1.0, "{{0,2},{1},{3}}"}, {2.0, "{{0},{1,2},{3}}"}});
  CHECK(backward_state(log, 0.5) == singletons(3));
  CHECK(forward_state(log, 0.5) == singletons(3));
  CHECK(backward_state(log, 1.0) == P::parse("{{0,2},{1},{3}}"));
  CHECK(backward_state(log, 2.0) == P::parse("{{0,2},{1,3}}"));
  CHECK(forward_state(log, 2.0) == coag(P::parse("{{0},{1,2},{3}}"), P::parse("{{0,2},{1},{3}}")));
  CHECK(forward_state(log, 2.0) == P::parse("{{0,3},{1,2}}"));
  CHECK(window_partition(log, 1.0, 2.0, Direction::Backward) == P::parse("{{0},{1,2},{3}}"));
  CHECK(window_partition(log, 1.5, 1.5, Direction::Forward) == singletons(3));
  CHECK_THROWS_AS(backward_state(log, 11.0), PreconditionError);
  CHECK_THROWS_AS(window_partition(log, 2.0, 1.0, Direction::Backward), PreconditionError);
}

TEST_CASE("flow property on random logs") {
  for (std::uint64_t r = 0; r < 300; ++r) {
    auto rng = make_rng(9, r);
    const auto log = simulate_events(kMixed, 6, 2.0, rng);
    double s = 2.0 * uniform01(rng), t = 2.0 * uniform01(rng), u = 2.0 * uniform01(rng);
    if (s > t) std::swap(s, t);
    if (t > u) std::swap(t, u);
    if (s > t) std::swap(s, t);
    CHECK(coag(window_partition(log, s, t, Direction::Backward), window_partition(log, t, u, Direction::Backward)) ==
          window_partition(log, s, u, Direction::Backward));
    CHECK(coag(window_partition(log, t, u, Direction::Forward), window_partition(log, s, t, Direction::Forward)) ==
          window_partition(log, s, u, Direction::Forward));
    CHECK(window_partition(log, s, s, Direction::Backward) == singletons(6));

    // Backward changes always coarsen; forward changes may relabel without
    // merging, but never add blocks.
    for (auto dir : {Direction::Backward, Direction::Forward}) {
      const auto path = trajectory(log, dir);
      for (std::size_t k = 1; k < path.states.size(); ++k) {
        if (dir == Direction::Backward) {
          CHECK(path.states[k].block_count() < path.states[k - 1].block_count());
        } else {
          CHECK(path.states[k].block_count() <= path.states[k - 1].block_count());
        }
        CHECK(path.times[k] > path.times[k - 1]);
      }
      CHECK(path.at(u) == (dir == Direction::Backward ? backward_state(log, u) : forward_state(log, u)));
    }
  }
}

TEST_CASE("restricted logs drop events that become trivial") {
  const auto log = hand_log(3, {{1.0, "{{0},{1},{2,3}}"}, {2.0, "{{0,1},{2},{3}}"}});
  const auto small = restrict(log, 1);
  REQUIRE(small.events.size() == 1);
  CHECK(small.events[0].time == 2.0);
  CHECK(backward_state(small, 3.0) == restrict(backward_state(log, 3.0), 1));
}

TEST_CASE("absorption times") {
  std::vector<double> times;
  for (std::uint64_t r = 0; r < 10'000; ++r) {
    auto rng = make_rng(10, r);
    const auto t = absorption_time(simulate_events(kImmigration, 1, 60.0, rng));
    REQUIRE(t.has_value());
    times.push_back(*t);
  }
  const auto [mean, se] = mean_and_se(times);
  CHECK(std::abs(mean - 1.0) <= 4.0 * se);

  const CoagulationMeasure no_immigration{0.0, 2.0, {{1.0, {0.0, {0.6}}}}};
  for (std::uint64_t r = 0; r < 50; ++r) {
    auto rng = make_rng(11, r);
    CHECK_FALSE(absorption_time(simulate_events(no_immigration, 4, 20.0, rng)).has_value());
    CHECK_FALSE(sample_absorption_time(EventSampler(no_immigration, 4), 4, 20.0, rng).has_value());
  }
  CHECK(absorption_time(hand_log(0, {})) == 0.0);
}

TEST_CASE("backward and forward marginals match the exact semigroup") {
  for (auto dir : {Direction::Backward, Direction::Forward}) {
    for (int p : {2, 3}) {
      const auto report = marginal_test(kMixed, p, 0.7, 100'000, {17, 2}, {dir, 0});
      CHECK_MESSAGE(report.pass, report.name, " p-value ", report.chi_square->p_value);
    }
  }
  // Kingman block counts for n = 3 reach one block only through pairwise merges.
  const auto report = marginal_test(kKingman, 3, 1.0, 100'000, {18, 1}, {Direction::Backward, 0});
  CHECK(report.pass);
}

TEST_CASE("restriction consistency: resolution 4 seen on [2]") {
  const auto report = marginal_test(kMixed, 2, 1.0, 100'000, {19, 1}, {Direction::Forward, 4});
  CHECK_MESSAGE(report.pass, report.chi_square->p_value);
}

TEST_CASE("thinned block chain has the semigroup law") {
  const int n = 3;
  const PartitionSpace space(n);
  const double t = 0.8;
  const auto probs = singletons_row(kMixed, n, t, space);
  const EventSampler sampler(kMixed, n);
  std::vector<long> counts(space.size(), 0);
  for (std::uint64_t r = 0; r < 100'000; ++r) {
    auto rng = make_rng(20, r);
    ++counts[space.index_of(sample_coalescent_state(sampler, n, t, rng))];
  }
  const auto report = chi_square_test("thinned", counts, probs);
  CHECK_MESSAGE(report.pass, report.chi_square->p_value);
}

TEST_CASE("thinned absorption time for a single particle is Exp(c0)") {
  const EventSampler sampler(kImmigration, 1);
  std::vector<double> times;
  for (std::uint64_t r = 0; r < 10'000; ++r) {
    auto rng = make_rng(21, r);
    times.push_back(*sample_absorption_time(sampler, 1, 1e3, rng));
  }
  const auto [mean, se] = mean_and_se(times);
  CHECK(std::abs(mean - 1.0) <= 4.0 * se);
}
