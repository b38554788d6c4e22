#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "porous/kernels.hpp"
#include "porous/rng.hpp"

using namespace porous;

TEST_CASE("parallel_for visits every index once") {
  for (std::uint64_t n : {0u, 1u, 4095u, 4096u, 4097u, 100000u}) {
    std::vector<int> seen(n, 0);
    kernels::parallel_for(n, kernels::Exec::parallel, [&](std::uint64_t i) { ++seen[i]; });
    for (int s : seen) REQUIRE(s == 1);
  }
}

TEST_CASE("block reductions are bitwise identical across policies and worker counts") {
  const CounterRng rng(17);
  const std::uint64_t n = 300000;
  auto block = [&](std::uint64_t lo, std::uint64_t hi) {
    double s = 0.0;
    for (std::uint64_t i = lo; i < hi; ++i) s += std::sin(1e3 * rng.uniform(i)) * 1e-3 + 1e8 * (i % 3 == 0);
    return s;
  };
  auto merge = [](double a, double b) { return a + b; };
  const double serial = kernels::block_reduce(n, kernels::Exec::serial, 0.0, block, merge);
  for (int w : {1, 2, 3, 8}) {
    kernels::set_workers(w);
    const double par = kernels::block_reduce(n, kernels::Exec::parallel, 0.0, block, merge);
    CHECK(par == serial);
  }
  kernels::set_workers(0);
}

TEST_CASE("exceptions inside a parallel sweep reach the caller") {
  CHECK_THROWS_AS(kernels::parallel_for(50000, kernels::Exec::parallel,
                                        [](std::uint64_t i) {
                                          if (i == 12345) throw std::runtime_error("boom");
                                        }),
                  std::runtime_error);
}

TEST_CASE("default execution policy can be switched") {
  const kernels::Exec before = kernels::default_exec();
  kernels::set_default_exec(kernels::Exec::serial);
  CHECK(kernels::default_exec() == kernels::Exec::serial);
  kernels::set_default_exec(before);
}
