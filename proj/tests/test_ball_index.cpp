#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <set>

#include "oracles.hpp"
#include "porous/ball_index.hpp"
#include "porous/measure.hpp"

using namespace porous;

namespace {

// Radii spread over several octaves so the index uses more than one stratum.
std::vector<Ball> random_balls(std::uint64_t seed, std::size_t count, int n) {
  const CounterRng rng(seed);
  std::uint64_t ctr = 0;
  std::vector<Ball> balls;
  for (std::size_t i = 0; i < count; ++i) {
    Ball b;
    b.center.resize(static_cast<std::size_t>(n));
    for (double& c : b.center) c = rng.uniform(ctr++);
    b.radius = 0.002 * std::pow(2.0, 6.0 * rng.uniform(ctr++));
    balls.push_back(b);
  }
  return balls;
}

}  // namespace

TEST_CASE("index queries agree with a linear scan on 10^4 probes") {
  for (int n : {3, 4}) {
    const std::vector<Ball> balls = random_balls(11 + static_cast<std::uint64_t>(n), 2000, n);
    const BallIndex index(balls);
    CHECK(index.stratum_count() > 1);
    const CounterRng rng(42);
    std::uint64_t ctr = 0;
    std::size_t nonempty = 0;
    for (int p = 0; p < 10000; ++p) {
      Point x(static_cast<std::size_t>(n));
      for (double& c : x) c = rng.uniform(ctr++);
      // Every fourth probe sits next to a ball centre so most probes hit something.
      if (p % 4 == 0) {
        const Ball& b = balls[static_cast<std::size_t>(p) % balls.size()];
        for (std::size_t d = 0; d < x.size(); ++d) x[d] = b.center[d] + 0.5 * b.radius * (2.0 * x[d] - 1.0) / std::sqrt(n);
      }
      const auto got = index.query(x);
      const auto want = linear_scan_query(balls, x);
      REQUIRE(got == want);
      CHECK(index.any_contains(x) == !want.empty());
      nonempty += want.empty() ? 0 : 1;
    }
    CHECK(nonempty > 2500);
  }
}

TEST_CASE("inflated index reports membership in the inflated balls") {
  const std::vector<Ball> balls = random_balls(5, 300, 3);
  const BallInflation infl{1.5, 0.001};
  const BallIndex index(balls, infl);
  std::vector<Ball> inflated;
  for (const Ball& b : balls) inflated.push_back(Ball{b.center, b.radius * 1.5 + 0.001});
  const CounterRng rng(6);
  std::uint64_t ctr = 0;
  for (int p = 0; p < 5000; ++p) {
    Point x(3);
    for (double& c : x) c = rng.uniform(ctr++);
    REQUIRE(index.query(x) == linear_scan_query(inflated, x));
  }
}

TEST_CASE("candidate pairs include every intersecting pair exactly once") {
  const std::vector<Ball> balls = random_balls(8, 800, 3);
  const BallIndex index(balls);
  std::set<std::pair<std::uint32_t, std::uint32_t>> cand;
  std::size_t reported = 0;
  index.for_each_candidate_pair([&](std::uint32_t i, std::uint32_t j) {
    CHECK(i < j);
    cand.insert({i, j});
    ++reported;
  });
  CHECK(reported == cand.size());
  for (std::uint32_t i = 0; i < balls.size(); ++i)
    for (std::uint32_t j = i + 1; j < balls.size(); ++j)
      if (!satisfies_disjoint(balls[i], balls[j])) REQUIRE(cand.count({i, j}) == 1);
}

TEST_CASE("indexed pairwise audit matches the exhaustive audit") {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const std::vector<Ball> balls = random_balls(seed, 600, 3);
    for (PairRule rule : {PairRule::disjoint, PairRule::disjoint_or_nested}) {
      const PairAudit fast = pairwise_audit(balls, rule, 1000000);
      const PairAudit slow = pairwise_audit_reference(balls, rule, 1000000);
      CHECK(fast.violation_count == slow.violation_count);
      REQUIRE(fast.violations.size() == slow.violations.size());
      for (std::size_t v = 0; v < fast.violations.size(); ++v) {
        CHECK(fast.violations[v].i == slow.violations[v].i);
        CHECK(fast.violations[v].j == slow.violations[v].j);
      }
    }
  }
}

TEST_CASE("pairwise audit flags a single injected overlap") {
  std::vector<Ball> balls;
  for (int i = 0; i < 10; ++i) balls.push_back(Ball{{0.1 * i, 0.0, 0.0}, 0.04});
  CHECK(pairwise_audit(balls, PairRule::disjoint).ok());
  balls[3].radius = 0.07;
  const PairAudit a = pairwise_audit(balls, PairRule::disjoint);
  CHECK(a.violation_count == 2);
  CHECK_FALSE(a.ok());
}
