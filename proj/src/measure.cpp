#include "porous/measure.hpp"

#include <algorithm>
#include <cmath>

#include "porous/ball_index.hpp"
#include "porous/errors.hpp"

namespace porous {

bool satisfies_disjoint(const Ball& a, const Ball& b) { return distance(a.center, b.center) >= a.radius + b.radius; }

bool satisfies_disjoint_or_nested(const Ball& a, const Ball& b) {
  const double d = distance(a.center, b.center);
  return d >= a.radius + b.radius || d <= std::abs(a.radius - b.radius);
}

namespace {

bool check(PairRule rule, const Ball& a, const Ball& b) {
  return rule == PairRule::disjoint ? satisfies_disjoint(a, b) : satisfies_disjoint_or_nested(a, b);
}

void record(PairAudit& audit, std::span<const Ball> balls, std::uint32_t i, std::uint32_t j, std::size_t cap) {
  ++audit.violation_count;
  if (audit.violations.size() < cap)
    audit.violations.push_back({i, j, distance(balls[i].center, balls[j].center), balls[i].radius, balls[j].radius});
}

void sort_report(PairAudit& audit) {
  std::sort(audit.violations.begin(), audit.violations.end(),
            [](const PairViolation& a, const PairViolation& b) { return a.i != b.i ? a.i < b.i : a.j < b.j; });
}

}  // namespace

PairAudit pairwise_audit(std::span<const Ball> balls, PairRule rule, std::size_t max_reported) {
  PairAudit audit;
  if (balls.size() < 2) return audit;
  const BallIndex index(std::vector<Ball>(balls.begin(), balls.end()));
  // Keep every violation until the end so the reported prefix matches the reference scan.
  std::vector<std::pair<std::uint32_t, std::uint32_t>> bad;
  index.for_each_candidate_pair([&](std::uint32_t i, std::uint32_t j) {
    ++audit.pairs_checked;
    if (!check(rule, balls[i], balls[j])) bad.emplace_back(i, j);
  });
  std::sort(bad.begin(), bad.end());
  for (auto [i, j] : bad) record(audit, balls, i, j, max_reported);
  return audit;
}

PairAudit pairwise_audit_reference(std::span<const Ball> balls, PairRule rule, std::size_t max_reported) {
  PairAudit audit;
  for (std::uint32_t i = 0; i < balls.size(); ++i) {
    for (std::uint32_t j = i + 1; j < balls.size(); ++j) {
      ++audit.pairs_checked;
      if (!check(rule, balls[i], balls[j])) record(audit, balls, i, j, max_reported);
    }
  }
  sort_report(audit);
  return audit;
}

MeasureEstimate union_measure(std::span<const Ball> balls, const Ball& region, const SamplingBudget& budget,
                              std::uint64_t seed, kernels::Exec exec) {
  for (const Ball& b : balls)
    if (b.dim() != region.dim()) throw InvalidArgument("union_measure: dimension mismatch");
  if (balls.empty()) return MeasureEstimate::exact(0.0);

  const int n = region.dim();
  const bool inside = std::all_of(balls.begin(), balls.end(), [&](const Ball& b) { return contains(region, b); });
  if (inside && pairwise_audit(balls, PairRule::disjoint, 0).ok()) {
    double sum = 0.0;
    for (const Ball& b : balls) sum += cross_section_area(b.radius, n);
    return MeasureEstimate::exact(sum);
  }

  const BallIndex index(std::vector<Ball>(balls.begin(), balls.end()));
  const BallSampler sampler(region, stream_key(seed, {fnv1a("union_measure")}), budget.samples);
  const Moments m = sample_moments(
      sampler, budget.samples, [&](std::span<const double> x) { return index.any_contains(x) ? 1.0 : 0.0; }, exec);
  return indicator_estimate(m, sampler.volume());
}

}  // namespace porous
