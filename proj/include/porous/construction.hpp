#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "porous/ball_index.hpp"
#include "porous/geometry.hpp"
#include "porous/planes.hpp"
#include "porous/sampling.hpp"

namespace porous {

struct BuildBudgets {
  /// Uncovered-point samples used to certify a level radius.
  std::uint64_t radius_samples = 1u << 16;
  /// Fresh samples used to certify that the doubled enlargements cover half the uncovered set.
  std::uint64_t coverage_samples = 1u << 16;
  /// Candidate centres streamed per volume of one enlarged ball.
  double packing_density = 12.0;
  int max_levels = 80;
  std::uint64_t max_balls = 500'000;
  int max_radius_halvings = 60;
};

struct BuildConfig {
  int n = 3;
  double s = 0.25;
  double r = 1.0 / 64.0;
  double L = 3.1622776601683795;
  /// epsilon_1 .. epsilon_K; the depth K is their count.
  std::vector<double> epsilons;
  /// Enlargement factor E in relaxed mode. Strict mode uses 1 / epsilon_k^3 per stage.
  double enlargement = 1.5;
  /// Per-stage stopping threshold as a fraction of omega_n s^n. Strict mode uses 2^-(k+3).
  std::vector<double> stop_fractions;
  bool strict = false;
  std::uint64_t seed = 1;
  int workers = 0;
  BuildBudgets budgets;
  /// Hash of the configuration document this was loaded from.
  std::string config_hash;

  int depth() const { return static_cast<int>(epsilons.size()); }
  double epsilon(int k) const { return epsilons.at(static_cast<std::size_t>(k - 1)); }
  double enlargement_for(int k) const;
  double stop_fraction(int k) const;
  /// Absolute stopping threshold on the uncovered base measure.
  double stop_threshold(int k) const;
  /// Throws InvalidArgument describing the first violated constraint.
  void validate() const;
};

enum class EpsilonVerdict { strict, relaxed };

/// Strict iff eps_i < 2^-i for every i and 3 * sum(eps) <= 1/64 over the given prefix.
EpsilonVerdict validate_epsilons(std::span<const double> eps);

/// omega_n s^n / 2^(k+3): the strict stopping threshold.
double strict_stop_threshold(int n, double s, int k);
/// omega_n s^n / 2^(k+2): the strict plane-coverage deficit bound.
double strict_cover_bound(int n, double s, int k);
/// eps^(3n) / 2^(n+1): strict per-level coverage fraction.
double strict_level_coverage(int n, double eps);
/// (1 / (2E))^n / 2: per-level coverage fraction guaranteed for enlargement E.
double level_coverage_guarantee(int n, double E);
/// Levels needed to shrink the uncovered fraction from 1 to `stop_fraction` if each level
/// removes at least the guaranteed fraction: ln(1/stop) / guarantee.
double level_count_bound(int n, double E, double stop_fraction);

struct FeasibilityEstimate {
  /// log10 of a lower bound on the number of balls in the first stage.
  double log10_min_balls = 0.0;
  bool feasible = true;
  std::string message;
};

/// Every first-stage ball has radius <= s/E, and the stage must cover 1 - stop of B(c,s).
FeasibilityEstimate estimate_feasibility(const BuildConfig& cfg);

/// Balls already chosen in one stage, viewed in the base space, with the
/// uncovered set B(c,s) \ ∪B and the boundary set (R^n \ B(c,s)) ∪ ∪∂(E·B).
class StageState {
 public:
  StageState(Ball base, double E);

  void add(std::span<const Ball> balls);
  /// Rebuilds the lookup structure; `cap` bounds the admissible radii returned afterwards.
  void prepare(double cap);

  bool covered(std::span<const double> x) const;
  /// Largest r <= cap / E with B(x, rE) clear of the boundary set and B(x, r) clear of
  /// every chosen ball; negative when x is covered or outside the base ball.
  double admissible_radius(std::span<const double> x) const;
  /// Distance from x to the boundary set, capped at `cap`.
  double boundary_distance(std::span<const double> x) const;

  /// Exact: omega_n s^n minus the chosen volume (the chosen balls are disjoint).
  double uncovered_measure() const;
  const Ball& base() const { return base_; }
  double enlargement() const { return E_; }
  std::span<const Ball> balls() const { return balls_; }

 private:
  Ball base_;
  double E_;
  double cap_ = 0.0;
  double covered_volume_ = 0.0;
  std::vector<Ball> balls_;
  BallIndex index_;  // E-enlargements padded by cap_
};

struct RadiusChoice {
  double radius = 0.0;
  int halvings = 0;
  Proportion far_fraction;
};

/// Halves from r_prev / E until at least half of the uncovered set is at distance >= rE
/// from the boundary set (sampled, Wilson lower bound >= 1/2 and point estimate >= 0.51).
/// Expects state.prepare(r_prev) to have been called.
RadiusChoice choose_level_radius(const StageState& state, double r_prev, const BuildBudgets& budget,
                                 std::uint64_t key, kernels::Exec exec = kernels::default_exec());

struct LevelFamily {
  int k = 0;
  int l = 0;
  double radius = 0.0;
  std::vector<Ball> balls;
};

struct LevelDiagnostics {
  int k = 0;
  int l = 0;
  double radius = 0.0;
  int halvings = 0;
  std::size_t balls = 0;
  std::uint64_t candidates = 0;
  Proportion far_fraction;
  Proportion double_cover;
  double uncovered_before = 0.0;
  double uncovered_after = 0.0;
  /// Fraction of the previously uncovered measure covered by this level (exact).
  double covered_fraction = 0.0;
};

/// Greedy packing from a stream of candidate centres: keep a candidate whose admissible
/// radius is >= r and whose distance to every kept centre is >= 2rE.
LevelFamily pack_level(const StageState& state, double r, const BuildBudgets& budget, std::uint64_t key,
                       LevelDiagnostics* diag = nullptr, kernels::Exec exec = kernels::default_exec());

struct StageResult {
  int k = 0;
  std::vector<LevelFamily> levels;
  double r_k = 0.0;
  std::vector<LevelDiagnostics> diagnostics;
};

StageResult build_stage(int k, double r_prev, const BuildConfig& cfg, kernels::Exec exec = kernels::default_exec());

struct HoleRecord {
  int k = 0;
  int l = 0;
  std::uint64_t m = 1;
  std::uint32_t selection = 0;
  Point base_center;
  double t = 0.0;
  Point lifted_center;

  Ball hole() const { return {lifted_center, t}; }
  Ball base() const { return {base_center, t}; }
};

struct FamilyHeader {
  int format_version = 1;
  int n = 3;
  double s = 0.25;
  double r = 1.0 / 64.0;
  double L = 3.1622776601683795;
  double E = 1.5;
  std::vector<double> epsilons;
  std::vector<double> stop_fractions;
  bool strict = false;
  std::uint64_t seed = 1;
  std::string config_hash;

  double enlargement_for(int k) const;
  double stop_fraction(int k) const;
};

FamilyHeader make_header(const BuildConfig& cfg);
/// The configuration fields recoverable from a family header (budgets left at defaults).
BuildConfig config_from_header(const FamilyHeader& h);

struct HoleFamily {
  FamilyHeader header;
  std::vector<HoleRecord> records;  // ordered by (k, l, selection)

  int depth() const { return static_cast<int>(header.epsilons.size()); }
  /// Record positions belonging to stage k.
  std::vector<std::uint32_t> stage_members(int k) const;
  /// Smallest hole radius in stage k (r_k); r_0 = s.
  double stage_radius(int k) const;
  std::vector<double> level_radii(int k) const;
};

/// B(x,t) -> B((x, a(x) + 2t), t) for every ball of the stage.
std::vector<HoleRecord> lift(std::span<const LevelFamily> levels, const AffinePlane& plane, int k, std::uint64_t m);

struct BuildResult {
  HoleFamily family;
  std::vector<LevelDiagnostics> levels;
};

/// Builds stages 1..K. Throws ConstructionFailure (with diagnostics) on budget exhaustion.
BuildResult build_family(const BuildConfig& cfg, kernels::Exec exec = kernels::default_exec());

/// Union of enlarge(B, scale) over member holes.
class HoleUnion {
 public:
  HoleUnion() = default;
  HoleUnion(const HoleFamily& family, std::vector<std::uint32_t> members, double scale);

  bool contains(std::span<const double> x) const { return index_.any_contains(x); }
  /// Record positions of members whose scaled ball contains x, ascending.
  std::vector<std::uint32_t> containing(std::span<const double> x) const;
  std::span<const std::uint32_t> members() const { return members_; }
  double scale() const { return scale_; }
  const BallIndex& index() const { return index_; }

 private:
  std::vector<std::uint32_t> members_;
  double scale_ = 1.0;
  BallIndex index_;
};

/// P_k: L-enlargements of holes with diameter < 1/k.
struct PkDescriptor {
  int k = 0;
  HoleUnion set;
};

PkDescriptor assemble_Pk(const HoleFamily& family, double L, int k);
/// H: the union of all holes, un-enlarged.
HoleUnion assemble_H(const HoleFamily& family);

/// (∩_{k<=K} P_k) \ H at finite truncation depth K.
class TruncatedP {
 public:
  TruncatedP(const HoleFamily& family, double L, int K);
  bool contains(std::span<const double> x) const;
  const PkDescriptor& pk(int k) const { return pk_.at(static_cast<std::size_t>(k - 1)); }
  const HoleUnion& holes() const { return h_; }
  int depth() const { return static_cast<int>(pk_.size()); }

 private:
  std::vector<PkDescriptor> pk_;
  HoleUnion h_;
};

/// Direct definition by linear scan, for cross-checking TruncatedP.
bool truncated_p_reference(const HoleFamily& family, double L, int K, std::span<const double> x);

}  // namespace porous
