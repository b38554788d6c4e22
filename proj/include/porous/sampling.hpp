#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>

#include "porous/geometry.hpp"
#include "porous/kernels.hpp"
#include "porous/rng.hpp"

namespace porous {

/// Two-sided 99% normal quantile.
inline constexpr double kZ99 = 2.5758293035489004;

struct SamplingBudget {
  std::uint64_t samples = 1u << 16;
};

/// Stratified (jittered) uniform sampling of a ball: attempt i falls in cube
/// stratum i mod H of the bounding cube and is rejected when outside the ball.
class BallSampler {
 public:
  BallSampler(Ball region, std::uint64_t key, std::uint64_t expected_attempts);

  /// Writes attempt `i` into `out` (size dim) and reports whether it lies in the ball.
  bool attempt(std::uint64_t i, std::span<double> out) const;

  const Ball& region() const { return region_; }
  int dim() const { return region_.dim(); }
  double volume() const;

 private:
  Ball region_;
  CounterRng rng_;
  std::uint64_t per_dim_ = 1;
  std::uint64_t strata_ = 1;
};

struct Moments {
  double sum = 0.0;
  double sum_sq = 0.0;
  double max = -std::numeric_limits<double>::infinity();
  std::uint64_t accepted = 0;
  std::uint64_t attempts = 0;

  Moments& operator+=(const Moments& o) {
    sum += o.sum;
    sum_sq += o.sum_sq;
    max = std::max(max, o.max);
    accepted += o.accepted;
    attempts += o.attempts;
    return *this;
  }
  double mean() const { return accepted ? sum / static_cast<double>(accepted) : 0.0; }
};

/// Sample moments of f over accepted attempts [0, attempts).
template <class F>
Moments sample_moments(const BallSampler& sampler, std::uint64_t attempts, F&& f,
                       kernels::Exec exec = kernels::default_exec()) {
  return kernels::block_reduce(
      attempts, exec, Moments{},
      [&](std::uint64_t lo, std::uint64_t hi) {
        Moments m;
        std::array<double, kMaxDim> buf{};
        std::span<double> x(buf.data(), static_cast<std::size_t>(sampler.dim()));
        for (std::uint64_t i = lo; i < hi; ++i) {
          ++m.attempts;
          if (!sampler.attempt(i, x)) continue;
          const double v = f(std::span<const double>(x));
          m.sum += v;
          m.sum_sq += v * v;
          m.max = std::max(m.max, v);
          ++m.accepted;
        }
        return m;
      },
      [](Moments a, const Moments& b) { return a += b; });
}

struct Proportion {
  double p = 0.0;
  double lower = 0.0;
  double upper = 1.0;
  std::uint64_t n = 0;
};

/// Wilson score interval for hits/n.
Proportion wilson(std::uint64_t hits, std::uint64_t n, double z = kZ99);

/// volume * mean(f) with a normal-approximation 99% half-width.
MeasureEstimate mean_estimate(const Moments& m, double volume);

/// volume * fraction for a {0,1} integrand with a Wilson 99% half-width.
MeasureEstimate indicator_estimate(const Moments& m, double volume);

}  // namespace porous
