#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "porous/geometry.hpp"
#include "porous/planes.hpp"
#include "porous/quadrature.hpp"
#include "porous/rng.hpp"
#include "porous/sampling.hpp"

using namespace porous;

TEST_CASE("unit ball volumes match closed forms") {
  CHECK(unit_ball_volume(1) == doctest::Approx(2.0));
  CHECK(unit_ball_volume(2) == doctest::Approx(M_PI));
  CHECK(unit_ball_volume(3) == doctest::Approx(4.0 * M_PI / 3.0));
  CHECK(unit_ball_volume(4) == doctest::Approx(M_PI * M_PI / 2.0));
  CHECK(cross_section_area(0.5, 3) == doctest::Approx(4.0 * M_PI / 3.0 / 8.0));
}

TEST_CASE("disjoint and nested predicates") {
  const Ball a{{0.0, 0.0}, 1.0};
  CHECK(satisfies_disjoint(a, Ball{{2.0, 0.0}, 1.0}));  // tangent counts as disjoint for open balls
  CHECK_FALSE(satisfies_disjoint(a, Ball{{1.9, 0.0}, 1.0}));
  CHECK(satisfies_disjoint_or_nested(a, Ball{{0.5, 0.0}, 0.5}));
  CHECK_FALSE(satisfies_disjoint_or_nested(a, Ball{{0.6, 0.0}, 0.5}));
  CHECK(contains(a, Ball{{0.5, 0.0}, 0.5}));
  CHECK(disjoint(a, Ball{{3.0, 0.0}, 1.0}));
  const Ball e = enlarge(a, 1.5);
  CHECK(e.radius == 1.5);
  CHECK(e.center == a.center);
}

TEST_CASE("open containment excludes the boundary") {
  const Ball b{{0.0, 0.0, 0.0}, 1.0};
  const Point on{1.0, 0.0, 0.0}, in{0.999, 0.0, 0.0};
  CHECK_FALSE(contains_open(b, on));
  CHECK(contains_open(b, in));
}

TEST_CASE("affine planes are centred at (1/2, ..., 1/2)") {
  AffinePlane a;
  a.gradient = {0.1, -0.2, 0.3};
  a.offset = 0.05;
  const Point c = base_center(3);
  CHECK(a(c) == doctest::Approx(0.05));
  const Point x{0.6, 0.5, 0.5};
  CHECK(a(x) == doctest::Approx(0.05 + 0.01));
  CHECK(a.slope() == doctest::Approx(std::sqrt(0.14)));
}

TEST_CASE("counter generator depends only on key and index") {
  const CounterRng a(stream_key(5, {1, 2})), b(stream_key(5, {1, 2})), c(stream_key(5, {2, 1}));
  for (std::uint64_t i = 0; i < 100; ++i) {
    CHECK(a.bits(i) == b.bits(i));
    const double u = a.uniform(i);
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
  }
  CHECK(a.bits(0) != c.bits(0));
}

TEST_CASE("uniform draws have mean 1/2 and variance 1/12") {
  const CounterRng rng(stream_key(1, {}));
  const int N = 200000;
  double s = 0.0, s2 = 0.0;
  for (int i = 0; i < N; ++i) {
    const double u = rng.uniform(static_cast<std::uint64_t>(i));
    s += u;
    s2 += u * u;
  }
  const double mean = s / N, var = s2 / N - mean * mean;
  CHECK(std::abs(mean - 0.5) < 5.0 * std::sqrt(1.0 / 12.0 / N));
  CHECK(var == doctest::Approx(1.0 / 12.0).epsilon(0.01));
}

TEST_CASE("ball sampler accepts points inside the ball at the volume ratio") {
  const Ball region{{0.5, 0.5, 0.5}, 0.25};
  const std::uint64_t attempts = 1u << 16;
  const BallSampler sampler(region, 99, attempts);
  CHECK(sampler.volume() == doctest::Approx(cross_section_area(0.25, 3)));
  Point x(3);
  std::uint64_t accepted = 0;
  for (std::uint64_t i = 0; i < attempts; ++i) {
    if (!sampler.attempt(i, x)) continue;
    ++accepted;
    REQUIRE(distance(x, region.center) < region.radius);
  }
  const double ratio = static_cast<double>(accepted) / attempts;
  CHECK(ratio == doctest::Approx(M_PI / 6.0).epsilon(0.01));
}

TEST_CASE("mean estimate of a constant integrand is exact") {
  const Ball region{{0.0, 0.0, 0.0}, 2.0};
  const BallSampler sampler(region, 3, 4096);
  const Moments m = sample_moments(sampler, 4096, [](std::span<const double>) { return 1.0; });
  const MeasureEstimate e = mean_estimate(m, sampler.volume());
  CHECK(e.value == sampler.volume());
  CHECK(e.half_width == 0.0);
}

TEST_CASE("Wilson interval brackets the proportion") {
  for (std::uint64_t hits : {0u, 1u, 50u, 99u, 100u}) {
    const Proportion p = wilson(hits, 100);
    CHECK(p.lower <= p.p);
    CHECK(p.p <= p.upper);
    CHECK(p.lower >= 0.0);
    CHECK(p.upper <= 1.0);
  }
  CHECK(wilson(0, 100).lower == 0.0);
}

TEST_CASE("Gauss-Legendre rules integrate polynomials of degree 2m-1 exactly") {
  for (int m : {1, 2, 5, 9, 20}) {
    const GaussLegendre rule = gauss_legendre(m);
    double wsum = 0.0;
    for (double w : rule.weights) wsum += w;
    CHECK(wsum == doctest::Approx(2.0).epsilon(1e-14));
    const int deg = 2 * m - 1;
    const double got = integrate([deg](double x) { return std::pow(x, deg - 1) + std::pow(x, deg); }, 0.0, 1.0, rule);
    CHECK(got == doctest::Approx(1.0 / deg + 1.0 / (deg + 1)).epsilon(1e-12));
  }
}

TEST_CASE("m_sequence enumerates 1; 1,2; 1,2,3; ...") {
  const std::vector<std::uint64_t> want{1, 1, 2, 1, 2, 3, 1, 2, 3, 4};
  for (std::size_t k = 0; k < want.size(); ++k) CHECK(m_sequence(k + 1) == want[k]);
}

TEST_CASE("plane catalogue respects the slope and offset bound") {
  const double r = 1.0 / 64.0;
  const PlaneCatalog cat(3, r);
  const AffinePlane a1 = cat.plane(1);
  CHECK(a1.slope() == 0.0);
  CHECK(a1.offset == 0.0);
  std::vector<std::pair<std::vector<double>, double>> seen;
  for (std::uint64_t l = 1; l <= 400; ++l) {
    const AffinePlane a = cat.plane(l);
    CHECK(a.dim() == 3);
    CHECK(a.slope() <= r * (1.0 + 1e-12));
    CHECK(std::abs(a.offset) <= r * (1.0 + 1e-12));
    seen.emplace_back(a.gradient, a.offset);
  }
  std::sort(seen.begin(), seen.end());
  CHECK(std::adjacent_find(seen.begin(), seen.end()) == seen.end());
}
