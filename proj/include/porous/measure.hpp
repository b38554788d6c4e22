#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "porous/geometry.hpp"
#include "porous/sampling.hpp"

namespace porous {

/// L^n(region ∩ ∪balls). Exact summation when the balls are certified pairwise
/// disjoint and contained in `region`, otherwise stratified Monte Carlo.
MeasureEstimate union_measure(std::span<const Ball> balls, const Ball& region, const SamplingBudget& budget,
                              std::uint64_t seed = 0, kernels::Exec exec = kernels::default_exec());

enum class PairRule { disjoint, disjoint_or_nested };

struct PairViolation {
  std::uint32_t i = 0;
  std::uint32_t j = 0;
  double distance = 0.0;
  double radius_i = 0.0;
  double radius_j = 0.0;
};

struct PairAudit {
  std::uint64_t pairs_checked = 0;
  std::uint64_t violation_count = 0;
  /// First violations in (i, j) order, capped.
  std::vector<PairViolation> violations;

  bool ok() const { return violation_count == 0; }
};

/// Holds for open balls a, b: |c_a - c_b| >= R_a + R_b.
bool satisfies_disjoint(const Ball& a, const Ball& b);
/// Disjoint, or |c_a - c_b| <= |R_a - R_b| (one contains the other).
bool satisfies_disjoint_or_nested(const Ball& a, const Ball& b);

/// Audits every pair of balls against `rule`, using a spatial index to skip
/// pairs whose bounding boxes do not meet.
PairAudit pairwise_audit(std::span<const Ball> balls, PairRule rule, std::size_t max_reported = 16);

/// Same audit by exhaustive O(N^2) scan.
PairAudit pairwise_audit_reference(std::span<const Ball> balls, PairRule rule, std::size_t max_reported = 16);

}  // namespace porous
