#include "porous/sampling.hpp"

#include <algorithm>
#include <cmath>

#include "porous/errors.hpp"

namespace porous {

namespace kernels {
namespace {
Exec g_exec = Exec::parallel;
}

void set_workers(int n) {
  if (n > 0) {
    omp_set_num_threads(n);
  } else {
    omp_set_num_threads(omp_get_num_procs());
  }
}

int workers() { return omp_get_max_threads(); }

Exec default_exec() { return g_exec; }
void set_default_exec(Exec e) { g_exec = e; }
}  // namespace kernels

BallSampler::BallSampler(Ball region, std::uint64_t key, std::uint64_t expected_attempts)
    : region_(std::move(region)), rng_(key) {
  if (region_.dim() < 1 || region_.dim() > kMaxDim)
    throw InvalidArgument("BallSampler: unsupported dimension");
  if (!(region_.radius > 0.0)) throw InvalidArgument("BallSampler: radius must be positive");
  // About four attempts per stratum.
  const double target = std::max(1.0, static_cast<double>(expected_attempts) / 4.0);
  per_dim_ = std::max<std::uint64_t>(1, static_cast<std::uint64_t>(std::floor(std::pow(target, 1.0 / region_.dim()))));
  strata_ = 1;
  for (int j = 0; j < region_.dim(); ++j) strata_ *= per_dim_;
}

bool BallSampler::attempt(std::uint64_t i, std::span<double> out) const {
  const int d = region_.dim();
  std::uint64_t h = i % strata_;
  const double inv = 1.0 / static_cast<double>(per_dim_);
  double r2 = 0.0;
  for (int j = 0; j < d; ++j) {
    const std::uint64_t cell = h % per_dim_;
    h /= per_dim_;
    const double u = (static_cast<double>(cell) + rng_.uniform(i * static_cast<std::uint64_t>(d) + j)) * inv;
    const double y = 2.0 * u - 1.0;
    r2 += y * y;
    out[j] = region_.center[j] + region_.radius * y;
  }
  return r2 < 1.0;
}

double BallSampler::volume() const {
  return unit_ball_volume(region_.dim()) * std::pow(region_.radius, region_.dim());
}

Proportion wilson(std::uint64_t hits, std::uint64_t n, double z) {
  if (n == 0) return {};
  const double nn = static_cast<double>(n);
  const double p = static_cast<double>(hits) / nn;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / nn;
  const double centre = (p + z2 / (2.0 * nn)) / denom;
  const double half = z * std::sqrt(p * (1.0 - p) / nn + z2 / (4.0 * nn * nn)) / denom;
  return {p, std::max(0.0, centre - half), std::min(1.0, centre + half), n};
}

MeasureEstimate mean_estimate(const Moments& m, double volume) {
  MeasureEstimate e;
  e.method = MeasureMethod::monte_carlo;
  e.sample_count = m.accepted;
  if (m.accepted == 0) return e;
  const double n = static_cast<double>(m.accepted);
  const double mean = m.sum / n;
  double var = m.sum_sq / n - mean * mean;
  if (var < 0.0) var = 0.0;
  if (m.accepted > 1) var *= n / (n - 1.0);
  e.value = volume * mean;
  e.half_width = volume * kZ99 * std::sqrt(var / n);
  return e;
}

MeasureEstimate indicator_estimate(const Moments& m, double volume) {
  MeasureEstimate e;
  e.method = MeasureMethod::monte_carlo;
  e.sample_count = m.accepted;
  if (m.accepted == 0) return e;
  const auto hits = static_cast<std::uint64_t>(std::llround(m.sum));
  const Proportion w = wilson(hits, m.accepted);
  e.value = volume * w.p;
  e.half_width = volume * std::max(w.upper - w.p, w.p - w.lower);
  return e;
}

}  // namespace porous
