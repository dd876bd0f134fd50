#include <doctest.h>

#include <map>

#include "gfvi/errors.hpp"
#include "gfvi/exact.hpp"
#include "gfvi/partition.hpp"
#include "oracles.hpp"

using namespace gfvi;
using P = DistinguishedPartition;

TEST_CASE("canonical form orders blocks by least element") {
  const std::vector<int> labels{7, 3, 7, 9};
  const auto pi = P::from_labels(labels);
  CHECK(pi.to_string() == "{{0,2},{1},{3}}");
  CHECK(pi == P::parse("{{0,2},{1},{3}}"));
  CHECK(pi == P::from_blocks({{3}, {2, 0}, {1}}));
  CHECK(pi.block_count() == 3);
  CHECK(pi.alpha(2) == 0);
  CHECK(pi.alpha(3) == 2);
  CHECK_THROWS_AS(pi.alpha(4), PreconditionError);
  CHECK_THROWS_AS(P::from_blocks({{0, 1}, {1, 2}}), PreconditionError);
  CHECK_THROWS_AS(P::parse("{{0},{2}}"), PreconditionError);
}

TEST_CASE("singletons") {
  CHECK(singletons(0).to_string() == "{{0}}");
  CHECK(singletons(2).to_string() == "{{0},{1},{2}}");
  for (int k = 0; k <= 5; ++k) CHECK(singletons(5).alpha(k) == k);
}

TEST_CASE("coag worked example and neutral element") {
  const auto pi = P::parse("{{0,2},{1},{3}}");
  CHECK(coag(pi, P::parse("{{0},{1,2}}")).to_string() == "{{0,2},{1,3}}");
  CHECK(coag(pi, singletons(2)) == pi);
  CHECK(coag(singletons(3), pi) == pi);
  CHECK_THROWS_AS(coag(pi, singletons(1)), PreconditionError);
}

TEST_CASE("coag matches block-union definition on random inputs") {
  Rng rng(11);
  for (int trial = 0; trial < 2000; ++trial) {
    const int n = oracle::uniform_int(rng, 0, 8);
    const auto pi = oracle::random_partition(n, rng);
    const auto pi2 = oracle::random_partition(pi.block_count() - 1 + oracle::uniform_int(rng, 0, 2), rng);
    const auto got = coag(pi, pi2);
    CHECK(got == oracle::coag_by_blocks(pi, pi2));
    CHECK(got == P::from_labels(got.assignment()));
  }
}

TEST_CASE("coag algebra on random triples") {
  Rng rng(12);
  for (int trial = 0; trial < 2000; ++trial) {
    const int n = oracle::uniform_int(rng, 0, 9);
    const auto a = oracle::random_partition(n, rng);
    const auto b = oracle::random_partition(a.block_count() - 1, rng);
    const auto c = oracle::random_partition(b.block_count() - 1, rng);
    CHECK(coag(coag(a, b), c) == coag(a, coag(b, c)));
    const auto ab = coag(a, b);
    for (int k = 0; k <= n; ++k) CHECK(ab.alpha(k) == b.alpha(a.alpha(k)));
    const int m = oracle::uniform_int(rng, 0, n);
    const auto am = restrict(a, m);
    CHECK(restrict(ab, m) == coag(am, restrict(b, am.block_count() - 1)));
  }
}

TEST_CASE("restrict") {
  CHECK(restrict(P::parse("{{0,2},{1,3}}"), 1).to_string() == "{{0},{1}}");
  CHECK(restrict(singletons(5), 2) == singletons(2));
  const auto pi = P::parse("{{0,4},{1,3},{2}}");
  CHECK(restrict(pi, 4) == pi);
  CHECK(restrict(kingman(5, 1, 2), 3) == kingman(3, 1, 2));
  CHECK_THROWS_AS(restrict(pi, 5), PreconditionError);
}

TEST_CASE("distance") {
  const auto a = P::parse("{{0,1}}");
  const auto b = P::parse("{{0},{1}}");
  // Agree on {0} only: (1 + 0)^-1.
  CHECK(distance(a, b) == doctest::Approx(1.0));
  CHECK(distance(P::parse("{{0},{1,2}}"), P::parse("{{0},{1},{2}}")) == doctest::Approx(0.5));
  CHECK(distance(b, a) == distance(a, b));
  CHECK(distance(singletons(4), singletons(4)) == doctest::Approx(0.2));
  Rng rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    const auto x = oracle::random_partition(5, rng);
    const auto y = oracle::random_partition(5, rng);
    int agree = -1;
    for (int m = 0; m <= 5 && restrict(x, m) == restrict(y, m); ++m) agree = m;
    CHECK(distance(x, y) == doctest::Approx(1.0 / (1.0 + agree)));
  }
}

TEST_CASE("kingman partitions") {
  CHECK(kingman(3, 1, 2).to_string() == "{{0},{1,2},{3}}");
  CHECK(kingman(2, 0, 1).to_string() == "{{0,1},{2}}");
  CHECK_THROWS_AS(kingman(3, 2, 2), PreconditionError);
  CHECK_THROWS_AS(kingman(3, 1, 4), PreconditionError);
}

TEST_CASE("mass partition validation") {
  CHECK(mass_partition_problems({0.3, {0.5}}).empty());
  CHECK(mass_partition_problems({0.0, {0.5, 0.5}}).empty());
  CHECK(MassPartition{0.3, {0.5}}.dust() == doctest::Approx(0.2));
  CHECK_FALSE(mass_partition_problems({0.0, {}}).empty());
  CHECK_FALSE(mass_partition_problems({0.0, {0.2, 0.5}}).empty());
  CHECK_FALSE(mass_partition_problems({0.6, {0.5}}).empty());
  CHECK_FALSE(mass_partition_problems({-0.1, {0.5}}).empty());
}

TEST_CASE("paint-box probabilities: worked example") {
  const MassPartition s{0.3, {0.5}};
  CHECK(paintbox_prob(s, P::parse("{{0,1},{2}}")) == doctest::Approx(0.21).epsilon(1e-14));
  CHECK(paintbox_prob(s, P::parse("{{0},{1,2}}")) == doctest::Approx(0.25).epsilon(1e-14));
  CHECK(paintbox_prob(s, P::parse("{{0,1,2}}")) == doctest::Approx(0.09).epsilon(1e-14));
  CHECK(paintbox_prob(s, singletons(2)) == doctest::Approx(0.24).epsilon(1e-14));
  const MassPartition all{1.0, {}};
  CHECK(paintbox_prob(all, P::parse("{{0,1,2}}")) == 1.0);
  CHECK(paintbox_prob(all, singletons(2)) == 0.0);
}

TEST_CASE("paint-box probabilities match brute-force colorings") {
  Rng rng(21);
  for (int trial = 0; trial < 40; ++trial) {
    const int n = oracle::uniform_int(rng, 1, 5);
    const auto s = oracle::random_mass(oracle::uniform_int(rng, 0, 3), rng, trial % 4 != 0);
    const auto law = oracle::paintbox_law(s, n);
    double total = 0.0;
    for (const auto& pi : PartitionSpace(n)) {
      const double prob = paintbox_prob(s, pi);
      total += prob;
      const auto it = law.find(pi.to_string());
      CHECK(std::abs(prob - (it == law.end() ? 0.0 : it->second)) <= 1e-12);
    }
    CHECK(std::abs(total - 1.0) <= 1e-12);
  }
}

TEST_CASE("paint-box sampling frequencies match probabilities") {
  const MassPartition s{0.2, {0.4, 0.1}};
  const int n = 3;
  const long draws = 100'000;
  Rng rng(31);
  std::map<std::string, long> counts;
  for (long r = 0; r < draws; ++r) {
    const auto pi = paintbox_sample(s, n, rng);
    CHECK(pi == P::from_labels(pi.assignment()));
    ++counts[pi.to_string()];
  }
  for (const auto& pi : PartitionSpace(n)) {
    const double prob = paintbox_prob(s, pi);
    const double freq = static_cast<double>(counts[pi.to_string()]) / draws;
    const double se = std::sqrt(prob * (1.0 - prob) / draws);
    CHECK(std::abs(freq - prob) <= 4.0 * se + 1e-12);
  }
  Rng r2(1);
  CHECK(paintbox_sample({1.0, {}}, 4, r2).is_single_block());
}
