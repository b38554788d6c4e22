#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "porous/errors.hpp"
#include "porous/verification.hpp"

using namespace porous;

namespace {

const Point kC{0.5, 0.5, 0.5};
const Ball kDom{kC, 0.25};

GraphPatch constant_patch(double h) { return make_patch(ScalarField::constant(kDom, h), std::abs(h), "constant"); }

std::vector<double> stage_radii(const HoleFamily& f) {
  std::vector<double> out;
  for (int k = 1; k <= f.depth(); ++k) out.push_back(f.stage_radius(k));
  return out;
}

}  // namespace

TEST_CASE("hit scales") {
  CHECK(hit_scale(0) == 2.0);
  CHECK(hit_scale(1) == 1.5);
  CHECK(hit_scale(2) == 1.25);
  CHECK(hit_scale(10) == doctest::Approx(1.0 + 1.0 / 1024.0));
  CHECK_THROWS_AS(hit_scale(-1), InvalidArgument);
}

TEST_CASE("graph distance to a tilted plane matches the closed form") {
  AffinePlane a;
  a.gradient = {0.01, -0.005, 0.008};
  a.offset = 0.002;
  const ScalarField g = ScalarField::affine(kDom, a);
  const CounterRng rng(5);
  std::uint64_t ctr = 0;
  for (int i = 0; i < 2000; ++i) {
    Point z = oracle::uniform_in_ball(rng, ctr, kC, 0.2);
    z.push_back(a(z) + 0.04 * (2.0 * rng.uniform(ctr++) - 1.0));
    const double exact = oracle::plane_graph_distance(a, z);
    const GraphDistance d = graph_distance(g, Ball{z, 0.05}, 0.05);
    REQUIRE_FALSE(d.certified_far);
    REQUIRE(d.value == doctest::Approx(exact).epsilon(1e-9).scale(1e-12));
  }
}

TEST_CASE("certified-far distances are lower bounds") {
  std::vector<Bump> bumps{Bump{{0.5, 0.5, 0.5}, 0.2, 0.004}};
  const ScalarField g = bump_field(kDom, bumps);
  const CounterRng rng(6);
  std::uint64_t ctr = 0;
  int far = 0;
  for (int i = 0; i < 300; ++i) {
    Point z = oracle::uniform_in_ball(rng, ctr, kC, 0.15);
    z.push_back(0.02 + 0.02 * rng.uniform(ctr++));
    const double reach = 0.015;
    const GraphDistance d = graph_distance(g, Ball{z, reach}, reach);
    // Brute force over a dense sample of B(z', reach).
    double brute = 1e9;
    std::uint64_t c2 = 0;
    const CounterRng r2(1000 + static_cast<std::uint64_t>(i));
    const std::span<const double> zb(z.data(), 3);
    for (int p = 0; p < 4000; ++p) {
      const Point x = oracle::uniform_in_ball(r2, c2, zb, reach);
      brute = std::min(brute, std::hypot(distance(x, zb), g(x) - z[3]));
    }
    if (d.certified_far) {
      ++far;
      REQUIRE(d.value <= brute);
      REQUIRE(d.value >= reach);
    } else {
      REQUIRE(d.value <= brute + 1e-12);
    }
  }
  CHECK(far > 0);
}

TEST_CASE("budget hit mass equals the exhaustive scan and the closed form") {
  const HoleFamily& fam = fixture::small_family();
  const std::vector<double> t = stage_radii(fam);
  REQUIRE(t.size() == 2);
  // Height between t_2 and 1/64 cuts every stage-2 hole and misses stage 1 (centres 2t_1, radius t_1).
  const double h = 0.015;
  REQUIRE(h > t[1]);
  REQUIRE(h < t[0]);
  const GraphPatch patch = constant_patch(h);
  BudgetOptions opt;
  opt.energy = SamplingBudget{1u << 12};
  const BudgetLedger led = budget(patch, fam, opt);

  std::vector<std::uint32_t> scan;
  for (std::uint32_t i = 0; i < fam.records.size(); ++i)
    if (hit_test(patch.g, fam.records[i].hole(), 1.0)) scan.push_back(i);
  CHECK(led.hit_plain == scan);
  CHECK(led.mass_plain == doctest::Approx(oracle::exhaustive_hit_mass(patch.g, fam, 1.0)).epsilon(1e-13));

  const auto stage2 = fam.stage_members(2);
  CHECK(scan == stage2);
  CHECK(led.mass_plain == doctest::Approx(static_cast<double>(stage2.size()) * cross_section_area(t[1], 3)).epsilon(1e-13));
  REQUIRE(led.stages.size() == 2);
  CHECK(led.stages[0].hits_plain == 0);
  CHECK(led.stages[1].hits_plain == stage2.size());
  CHECK(led.energy.value == 0.0);
}

TEST_CASE("the reference plane meets no hole at any scale") {
  const HoleFamily& fam = fixture::small_family();
  const GraphPatch flat = constant_patch(0.0);
  const BudgetLedger led = budget(flat, fam);
  CHECK(led.mass_plain == 0.0);
  CHECK(led.mass_K == 0.0);
  CHECK(oracle::exhaustive_hit_mass(flat.g, fam, 2.0) == 0.0);
}

TEST_CASE("budget rejects fields above the C^1 threshold") {
  CHECK_THROWS_AS(budget(constant_patch(0.02), fixture::small_family()), PreconditionError);
}

TEST_CASE("porosity witness agrees with the exhaustive scan") {
  const HoleFamily& fam = fixture::small_family();
  const TruncatedP p(fam, fam.header.L, fam.depth());
  std::vector<Point> pts = sample_truncated_p(p, fam, 400, 3);
  REQUIRE(pts.size() == 400);
  const CounterRng rng(8);
  std::uint64_t ctr = 0;
  for (int i = 0; i < 400; ++i) {
    Point z = oracle::uniform_in_ball(rng, ctr, kC, 0.25);
    z.push_back(0.08 * rng.uniform(ctr++));
    pts.push_back(z);
  }
  for (const Point& x : pts) {
    const auto fast = porosity_witness(x, p, fam);
    const auto ref = porosity_witness_reference(x, fam, fam.header.L);
    REQUIRE(fast.has_value() == ref.has_value());
    if (fast) {
      CHECK(fast->hole == ref->hole);
      CHECK(fast->ratio == ref->ratio);
    }
  }
  for (std::size_t i = 0; i < 400; ++i) {
    const auto w = porosity_witness(pts[i], p, fam);
    REQUIRE(w.has_value());
    CHECK(w->ratio > 1.0 / fam.header.L);
  }
}

TEST_CASE("residue regions agree with an independent sampler") {
  const HoleFamily& fam = fixture::small_family();
  const PlaneCatalog planes(3, fam.header.r);
  const std::vector<Bump> bumps{Bump{{0.5, 0.5, 0.5}, 0.45, 0.006}};
  // The offset lifts the centre above t/4 plus the Lipschitz spread of B', so both paths run.
  const ScalarField g = linear_combination(1.0, bump_field(kDom, bumps), 1.0, ScalarField::constant(kDom, 0.001));
  int exact = 0, sampled = 0;
  for (std::uint32_t id : fam.stage_members(1)) {
    const ResidueRegion r = residue_region(fam, id, g, planes, SamplingBudget{4096}, 1);
    const CounterRng rng(id);
    std::uint64_t ctr = 0;
    const int N = 1 << 14;
    int in = 0;
    for (int i = 0; i < N; ++i) {
      const Point x = oracle::uniform_in_ball(rng, ctr, r.primed.center, r.primed.radius);
      if (std::abs(g(x)) > fam.records[id].t / 4.0) ++in;
    }
    const double vol = cross_section_area(r.primed.radius, 3);
    if (r.measure.method == MeasureMethod::exact) {
      ++exact;
      REQUIRE((r.measure.value == 0.0 || r.measure.value == vol));
      REQUIRE(static_cast<double>(in) * vol / N == r.measure.value);
    } else {
      ++sampled;
      const double p = static_cast<double>(in) / N;
      const double oracle_hw = 2.576 * std::sqrt(std::max(p * (1 - p), 1.0 / N) / N) * vol;
      CHECK(std::abs(r.measure.value - p * vol) <= r.measure.half_width + oracle_hw);
    }
  }
  CHECK(exact > 0);
  CHECK(sampled > 0);
  CHECK_THROWS_AS(residue_region(fam, 0, constant_patch(0.0).g.with_grad_bound(0.05), planes, SamplingBudget{4096}),
                  PreconditionError);
}

TEST_CASE("subfamily S keeps maximal primed balls") {
  HoleFamily fam;
  fam.header.n = 3;
  fam.header.E = 1.5;
  fam.header.epsilons = {0.45};
  fam.header.stop_fractions = {0.5};
  auto add = [&](Point c, double t) {
    HoleRecord r;
    r.k = 1;
    r.base_center = c;
    r.t = t;
    r.lifted_center = c;
    r.lifted_center.push_back(2 * t);
    fam.records.push_back(r);
  };
  add({0.5, 0.5, 0.5}, 0.02);    // B' radius 0.03
  add({0.51, 0.5, 0.5}, 0.005);  // inside it
  add({0.6, 0.5, 0.5}, 0.01);    // far away
  add({0.52, 0.5, 0.5}, 0.01);   // straddles the first
  const std::vector<std::uint32_t> d{1, 3, 0, 2};
  const SubfamilySelection s = select_subfamily_s(fam, 1, d);
  CHECK(s.selected == std::vector<std::uint32_t>{0, 2, 3});
  CHECK(s.cover == std::vector<std::uint32_t>{0, 3, 0, 2});
  REQUIRE(s.nesting_violations.size() == 1);
  CHECK(s.nesting_violations[0] == std::pair<std::uint32_t, std::uint32_t>{0, 3});
  fam.records[2].k = 2;
  CHECK_THROWS_AS(select_subfamily_s(fam, 1, d), InvalidArgument);
}

TEST_CASE("coverage deficit bounds") {
  FamilyHeader h;
  h.stop_fractions = {0.95, 0.9};
  h.epsilons = {0.45, 0.45};
  AffinePlane a;
  a.gradient = {0.0, 0.0, 0.0};
  CHECK(coverage_deficit_bound(h, a, 2) == doctest::Approx(2 * 0.9 * 4.0 / 3.0 * M_PI * std::pow(0.25, 3)));
  a.gradient = {0.012, 0.0, 0.009};
  CHECK(coverage_deficit_bound(h, a, 1) ==
        doctest::Approx(2 * 0.95 * 4.0 / 3.0 * M_PI * std::pow(0.25, 3) * std::sqrt(1 + 0.015 * 0.015)));
  h.strict = true;
  CHECK(coverage_deficit_bound(h, a, 2) == strict_cover_bound(3, 0.25, 2));
}

TEST_CASE("construction audit is clean and catches an injected overlap") {
  const HoleFamily& fam = fixture::small_family();
  const ConstructionAudit a = audit_construction(fam);
  REQUIRE(a.stages.size() == 2);
  for (const LevelAudit& l : a.levels) CHECK(l.disjoint.ok());
  for (const StageAudit& s : a.stages) {
    CHECK(s.nested.ok());
    CHECK(s.containment_failures == 0);
    CHECK(s.lift_failures == 0);
    CHECK(s.uncovered_fraction <= s.stop_fraction);
    CHECK(s.worst_decay <= s.decay_bound);
  }
  CHECK(a.pk_nested);

  HoleFamily bad = fam;
  const auto s1 = bad.stage_members(1);
  HoleRecord& victim = bad.records[s1[1]];
  const HoleRecord& anchor = bad.records[s1[0]];
  victim.base_center = anchor.base_center;
  victim.base_center[0] += 0.5 * anchor.t;
  victim.lifted_center = victim.base_center;
  victim.lifted_center.push_back(2.0 * victim.t);
  const ConstructionAudit b = audit_construction(bad);
  CHECK_FALSE(b.levels[0].disjoint.ok());
  CHECK_FALSE(b.stages[0].nested.ok());

  HoleFamily lifted = fam;
  lifted.records[0].lifted_center[3] += 1e-6;
  CHECK(audit_construction(lifted).stages[0].lift_failures == 1);
}

TEST_CASE("hole mass of a horizontal cut matches the closed form") {
  const HoleFamily& fam = fixture::small_family();
  const std::vector<double> t = stage_radii(fam);
  const double h = 0.018;
  REQUIRE(std::abs(h - 2 * t[0]) >= t[0]);
  REQUIRE(std::abs(h - 2 * t[1]) < t[1]);
  // Stage-2 base balls are pairwise disjoint, so the cut is a disjoint union of 3-balls.
  const double rho = std::sqrt(t[1] * t[1] - (h - 2 * t[1]) * (h - 2 * t[1]));
  const double exact = static_cast<double>(fam.stage_members(2).size()) * cross_section_area(rho, 3);
  const MeasureEstimate m = hole_intersection_mass(ScalarField::constant(kDom, h), fam, SamplingBudget{1u << 17}, 4);
  CHECK(std::abs(m.value - exact) <= m.half_width);
  CHECK(m.half_width < 0.05 * exact);
  CHECK(hole_intersection_mass(ScalarField::constant(kDom, 0.0), fam, SamplingBudget{1u << 12}).value == 0.0);
}
