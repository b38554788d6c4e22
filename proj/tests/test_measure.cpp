#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "oracles.hpp"
#include "porous/errors.hpp"
#include "porous/measure.hpp"

using namespace porous;

namespace {

std::vector<Ball> overlapping_family(std::uint64_t seed, const Ball& region, std::size_t count) {
  const CounterRng rng(seed);
  std::uint64_t ctr = 0;
  std::vector<Ball> balls;
  for (std::size_t i = 0; i < count; ++i) {
    const double r = 0.02 + 0.08 * rng.uniform(ctr++);
    // Centres may sit near the boundary so some balls stick out of the region.
    balls.push_back(Ball{oracle::uniform_in_ball(rng, ctr, region.center, region.radius), r});
  }
  return balls;
}

}  // namespace

TEST_CASE("disjoint contained balls are summed exactly") {
  const Ball region{{0.5, 0.5, 0.5}, 0.5};
  std::vector<Ball> balls;
  double want = 0.0;
  for (int i = -2; i <= 2; ++i) {
    balls.push_back(Ball{{0.5 + 0.15 * i, 0.5, 0.5}, 0.05});
    want += cross_section_area(0.05, 3);
  }
  const MeasureEstimate e = union_measure(balls, region, SamplingBudget{});
  CHECK(e.method == MeasureMethod::exact);
  CHECK(e.value == doctest::Approx(want).epsilon(1e-15));
}

TEST_CASE("union measure agrees with a 256^3 grid on 20 random families") {
  const Ball region{{0.5, 0.5, 0.5}, 0.25};
  for (std::uint64_t f = 0; f < 20; ++f) {
    const std::vector<Ball> balls = overlapping_family(100 + f, region, 50);
    const MeasureEstimate mc = union_measure(balls, region, SamplingBudget{1u << 18}, f);
    const oracle::GridMeasure grid = oracle::grid_union_measure_3d(balls, region, 256);
    CAPTURE(f);
    CHECK(mc.method == MeasureMethod::monte_carlo);
    CHECK(std::abs(mc.value - grid.value) <= mc.half_width + grid.error);
  }
}

TEST_CASE("union measure is reproducible and independent of the execution policy") {
  const Ball region{{0.5, 0.5, 0.5}, 0.25};
  const std::vector<Ball> balls = overlapping_family(7, region, 40);
  const MeasureEstimate a = union_measure(balls, region, SamplingBudget{1u << 16}, 3, kernels::Exec::serial);
  const MeasureEstimate b = union_measure(balls, region, SamplingBudget{1u << 16}, 3, kernels::Exec::parallel);
  CHECK(a.value == b.value);
  CHECK(a.half_width == b.half_width);
}

TEST_CASE("union measure rejects mixed dimensions") {
  const Ball region{{0.0, 0.0, 0.0}, 1.0};
  const std::vector<Ball> balls{Ball{{0.0, 0.0}, 0.1}};
  CHECK_THROWS_AS(union_measure(balls, region, SamplingBudget{}), InvalidArgument);
}
