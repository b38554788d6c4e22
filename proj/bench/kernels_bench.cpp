// Serial reference vs OpenMP execution of the main sweeps. Arg 0 = serial, 1 = parallel.

#include <benchmark/benchmark.h>

#include <cmath>
#include <vector>

#include "porous/construction.hpp"
#include "porous/kernels.hpp"
#include "porous/measure.hpp"
#include "porous/surfaces.hpp"
#include "porous/verification.hpp"

using namespace porous;

namespace {

kernels::Exec exec_of(const benchmark::State& st) {
  return st.range(0) == 0 ? kernels::Exec::serial : kernels::Exec::parallel;
}

void label(benchmark::State& st) {
  st.SetLabel(st.range(0) == 0 ? "serial" : "openmp x" + std::to_string(kernels::workers()));
}

const Ball kRegion{{0.5, 0.5, 0.5}, 0.25};

std::vector<Ball> random_balls(std::size_t count) {
  const CounterRng rng(17);
  std::uint64_t ctr = 0;
  std::vector<Ball> balls;
  for (std::size_t i = 0; i < count; ++i) {
    Point c(3);
    for (double& v : c) v = 0.25 + 0.5 * rng.uniform(ctr++);
    balls.push_back(Ball{c, 0.02 + 0.06 * rng.uniform(ctr++)});
  }
  return balls;
}

BuildConfig small_config() {
  BuildConfig c;
  c.epsilons = {0.45, 0.45};
  c.stop_fractions = {0.97, 0.96};
  c.seed = 7;
  return c;
}

const HoleFamily& small_family() {
  static const HoleFamily f = build_family(small_config()).family;
  return f;
}

void BM_BlockReduce(benchmark::State& st) {
  const std::uint64_t n = 1u << 22;
  for (auto _ : st) {
    const double s = kernels::block_reduce(
        n, exec_of(st), 0.0,
        [](std::uint64_t lo, std::uint64_t hi) {
          double acc = 0.0;
          for (std::uint64_t i = lo; i < hi; ++i) acc += std::sin(static_cast<double>(i) * 1e-3);
          return acc;
        },
        [](double a, double b) { return a + b; });
    benchmark::DoNotOptimize(s);
  }
  st.SetItemsProcessed(static_cast<std::int64_t>(st.iterations() * n));
  label(st);
}
BENCHMARK(BM_BlockReduce)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_UnionMeasure(benchmark::State& st) {
  const std::vector<Ball> balls = random_balls(200);
  for (auto _ : st) benchmark::DoNotOptimize(union_measure(balls, kRegion, SamplingBudget{1u << 18}, 1, exec_of(st)));
  label(st);
}
BENCHMARK(BM_UnionMeasure)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_GraphMeasure(benchmark::State& st) {
  const std::vector<Bump> bumps{Bump{{0.5, 0.5, 0.5}, 0.3, 0.003}, Bump{{0.6, 0.45, 0.5}, 0.2, -0.002}};
  const ScalarField g = bump_field(kRegion, bumps);
  const PointPredicate above = [](std::span<const double> z) { return z[3] > 0.001; };
  for (auto _ : st) benchmark::DoNotOptimize(graph_measure_in(g, above, SamplingBudget{1u << 18}, 1, exec_of(st)));
  label(st);
}
BENCHMARK(BM_GraphMeasure)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_BuildFamily(benchmark::State& st) {
  const BuildConfig cfg = small_config();
  for (auto _ : st) benchmark::DoNotOptimize(build_family(cfg, exec_of(st)).family.records.size());
  label(st);
}
BENCHMARK(BM_BuildFamily)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

// The budget sweep follows the library default policy; switch it for the run.
void BM_BudgetHitDistances(benchmark::State& st) {
  const HoleFamily& fam = small_family();
  const std::vector<Bump> bumps{Bump{{0.5, 0.5, 0.5}, 0.6, 0.004}};
  const GraphPatch patch = make_patch(bump_field(kRegion, bumps), bumps_sup_bound(bumps), "bump");
  BudgetOptions opt;
  opt.energy = SamplingBudget{1u << 12};
  const kernels::Exec saved = kernels::default_exec();
  kernels::set_default_exec(exec_of(st));
  for (auto _ : st) benchmark::DoNotOptimize(budget(patch, fam, opt).mass_plain);
  kernels::set_default_exec(saved);
  label(st);
}
BENCHMARK(BM_BudgetHitDistances)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
