#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "porous/analysis.hpp"
#include "porous/construction.hpp"
#include "porous/geometry.hpp"
#include "porous/measure.hpp"
#include "porous/planes.hpp"
#include "porous/sampling.hpp"
#include "porous/scalar_field.hpp"
#include "porous/surfaces.hpp"

namespace porous {

/// K_k = 2 - sum_{i<=k} 2^-i; K_0 = 2.
double hit_scale(int k);

// ---- hit detection ------------------------------------------------------------------

/// Minimum over x of |(x, g(x)) - z| for a ball B(z, t) in R^(n+1), searched over
/// B(z', reach). `certified_far` means `value` is only a certified lower bound that
/// already reaches `reach`.
struct GraphDistance {
  double value = 0.0;
  bool certified_far = false;
  Point argmin;
};

GraphDistance graph_distance(const ScalarField& g, const Ball& hole, double reach);

/// Relative safety margin: a hole counts as hit unless the minimum exceeds K t (1 + margin).
inline constexpr double kHitMargin = 1e-6;

/// Whether G(g) meets K B given a distance computed with reach >= K t.
bool hits(const GraphDistance& d, const Ball& hole, double K);
bool hit_test(const ScalarField& g, const Ball& hole, double K);

// ---- residue regions and classification ----------------------------------------------

/// Radius of B' for a stage-k hole of radius t: t / eps_k^3 in strict mode, E t otherwise.
double primed_radius(const FamilyHeader& h, int k, double t);

struct ResidueRegion {
  std::uint32_t hole = 0;
  Ball primed;             // B' in R^n
  AffinePlane plane;       // a_{m_k}
  double threshold = 0.0;  // t / 4
  MeasureEstimate measure; // L^n(B' ∩ {|g - a| > t/4})

  bool contains(const ScalarField& g, std::span<const double> x) const;
};

/// Throws PreconditionError unless the certified gradient bound of g is <= 1/32.
ResidueRegion residue_region(const HoleFamily& family, std::uint32_t hole, const ScalarField& g,
                             const PlaneCatalog& planes, const SamplingBudget& budget, std::uint64_t seed = 0);

enum class HoleClass { u, d, indeterminate };
std::string to_string(HoleClass c);

struct ClassifiedHole {
  std::uint32_t hole = 0;
  HoleClass cls = HoleClass::indeterminate;
  ResidueRegion region;
  /// Samples behind the final region estimate (escalated holes use 4x).
  std::uint64_t samples = 0;
  bool escalated = false;
};

struct StageClassification {
  int k = 0;
  double K = 1.5;
  /// Record positions of stage-k holes with G(g) ∩ K B nonempty, ascending.
  std::vector<std::uint32_t> hit;
  std::vector<ClassifiedHole> holes;  // parallel to `hit`

  std::vector<std::uint32_t> members(HoleClass c) const;
  double mass(const HoleFamily& family, HoleClass c) const;
};

/// B in u iff |B| <= eps_k lower(L(R_k(B))), d iff |B| > eps_k upper(...); ambiguous holes
/// are re-estimated once at 4x samples and otherwise reported as indeterminate.
StageClassification classify_holes(const HoleFamily& family, int k, const ScalarField& g, const PlaneCatalog& planes,
                                   const SamplingBudget& budget, std::uint64_t seed = 0, double K = 1.5);

struct DisjointPair {
  std::uint32_t a = 0;
  std::uint32_t b = 0;
  std::uint64_t joint_hits = 0;
  std::uint64_t probes = 0;
  Point witness;
  /// 4 t_2 + 2 t_2' / 16 <= t_1 / 4 for the smaller hole t_2 (same-level pairs: B' disjoint).
  bool proof_bound_holds = false;
};

struct DisjointnessAudit {
  int k = 0;
  std::uint64_t pairs_checked = 0;   // hit pairs with overlapping B'
  std::uint64_t violations = 0;
  std::uint64_t proof_bound_failures = 0;
  std::vector<DisjointPair> failures; // capped
  bool ok() const { return violations == 0; }
};

/// Samples R_k(B1) ∩ R_k(B2) for every pair of hit holes whose B' overlap.
DisjointnessAudit disjointness_audit(const HoleFamily& family, const StageClassification& cls, const ScalarField& g,
                                     std::uint64_t probes_per_pair = 4096, std::uint64_t seed = 0);

struct SubfamilySelection {
  std::vector<std::uint32_t> selected;
  /// For every d-hole (in classification order), the selected hole whose B' contains it.
  std::vector<std::uint32_t> cover;
  /// Pairs of B' that neither nest nor are disjoint.
  std::vector<std::pair<std::uint32_t, std::uint32_t>> nesting_violations;
};

/// Maximal B' among the d-holes, larger radius first, then record order.
SubfamilySelection select_subfamily_s(const HoleFamily& family, int k, std::span<const std::uint32_t> d_holes);

// ---- budget ledger --------------------------------------------------------------------

struct StageLedger {
  int k = 0;
  double K = 0.0;               // K_k
  std::uint64_t hits_plain = 0; // G(g) ∩ B
  double mass_plain = 0.0;
  std::uint64_t hits_K = 0;     // G(g) ∩ K_k B
  double mass_K = 0.0;
  std::uint64_t u_count = 0, d_count = 0, s_count = 0, indeterminate_count = 0;
  double u_mass = 0.0;
  double d_mass = 0.0;
  double epsilon = 0.0;
  /// max over d-holes of |B| / lower(∫_{R} |grad(g - a)|^2); 0 without d-holes, inf when a lower CI vanishes.
  double dbound_c = 0.0;
  DisjointnessAudit disjoint;
  /// Smoothed comparison field (stages k >= 2).
  double smoothing_gap = 0.0;       // sampled sup |g - g~|
  double smoothing_gap_bound = 0.0; // eps_k r_{k-1}
  double smoothed_grad = 0.0;       // sampled sup |grad g~|
  double smoothed_grad_bound = 0.0;
  /// Holes of earlier stages with G(g) ∩ K_k B nonempty, and how many of those G(g~) ∩ K_{k-1} B misses.
  std::uint64_t consistency_checked = 0;
  std::uint64_t consistency_failures = 0;
};

struct BudgetLedger {
  std::string field;
  double grad_bound = 0.0;
  double c1_bound = 0.0;
  MeasureEstimate energy;  // ∫_{B(c,s)} |grad g|^2
  double epsilon_sum = 0.0;
  std::vector<StageLedger> stages;
  /// Record positions with G(g) ∩ B nonempty, ascending.
  std::vector<std::uint32_t> hit_plain;
  double mass_plain = 0.0;  // Σ_{G(g) ∩ B ≠ ∅} |B|
  double mass_K = 0.0;      // Σ over stages of the K_K-enlarged hits
  /// mass_K / (energy + Σ eps).
  double empirical_c = 0.0;
};

struct BudgetOptions {
  SamplingBudget residue{4096};
  SamplingBudget energy{1u << 16};
  std::uint64_t disjoint_probes = 4096;
  std::uint64_t smoothing_probes = 4096;
  int mollifier_nodes = 5;
  std::uint64_t seed = 0;
};

/// Throws PreconditionError unless the certified C^1 bound of the patch is <= 1/64.
BudgetLedger budget(const GraphPatch& patch, const HoleFamily& family, const BudgetOptions& opt = {});

// ---- coverage, porosity, hole mass -------------------------------------------------------

/// H^n(A_m ∩ (B(c,s) x R) \ P_k) via the area formula.
MeasureEstimate coverage_deficit(const HoleFamily& family, std::uint64_t m, int k, const SamplingBudget& budget,
                                 std::uint64_t seed = 0);
/// H^n(A_m ∩ (B(c,s) x R) ∩ P_k).
MeasureEstimate plane_coverage(const HoleFamily& family, std::uint64_t m, int k, const SamplingBudget& budget,
                               std::uint64_t seed = 0);
/// Strict: omega_n s^n / 2^(k+2). Relaxed: 2 stop_fraction(k) omega_n s^n sqrt(1 + |grad a_m|^2).
double coverage_deficit_bound(const FamilyHeader& h, const AffinePlane& a, int k);

struct PorosityWitness {
  std::uint32_t hole = 0;
  double ratio = 0.0;  // t / |y_c - x|
};

/// t / |y - x| for the hole B(y, t).
double porosity_ratio(std::span<const double> x, const Ball& hole);

/// Best witness among holes of P_K whose L-enlargement contains x; nullopt if none.
std::optional<PorosityWitness> porosity_witness(std::span<const double> x, const TruncatedP& p,
                                                const HoleFamily& family);
/// Same by exhaustive scan over every record.
std::optional<PorosityWitness> porosity_witness_reference(std::span<const double> x, const HoleFamily& family,
                                                          double L);

/// Points of the truncated P: a uniform point of a random hole's L-enlargement, kept when in P.
std::vector<Point> sample_truncated_p(const TruncatedP& p, const HoleFamily& family, std::size_t count,
                                      std::uint64_t seed);

/// H^n(G(g) ∩ H).
MeasureEstimate hole_intersection_mass(const ScalarField& g, const HoleFamily& family, const SamplingBudget& budget,
                                       std::uint64_t seed = 0);
/// Same against a prebuilt H = assemble_H(family), for repeated fields.
MeasureEstimate hole_intersection_mass(const ScalarField& g, const HoleUnion& h, const HoleFamily& family,
                                       const SamplingBudget& budget, std::uint64_t seed = 0);

// ---- construction audits ----------------------------------------------------------------------

struct LevelAudit {
  int k = 0;
  int l = 0;
  double radius = 0.0;
  std::size_t balls = 0;
  PairAudit disjoint;  // E-enlarged base balls of one level
  double covered_fraction = 0.0;
  double guarantee = 0.0;
};

struct StageAudit {
  int k = 0;
  PairAudit nested;  // E-enlarged base balls of the whole stage
  double uncovered_fraction = 0.0;
  double stop_fraction = 0.0;
  /// Largest ratio r^{l+1} / r^l within the stage and r_k^1 / r_{k-1} (must be <= 1/E).
  double worst_decay = 0.0;
  double decay_bound = 0.0;
  std::uint64_t containment_failures = 0; // enlarged base ball not inside B(c,s)
  std::uint64_t lift_failures = 0;        // |z_{n+1} - a(z')| != 2t
  std::uint64_t plane_index = 1;
};

struct ConstructionAudit {
  std::vector<LevelAudit> levels;
  std::vector<StageAudit> stages;
  /// P_{k+1} members form a subset of P_k members.
  bool pk_nested = true;
};

ConstructionAudit audit_construction(const HoleFamily& family);

}  // namespace porous
