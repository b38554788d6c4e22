#include "porous/verification.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <map>

#include "porous/errors.hpp"
#include "porous/rng.hpp"

namespace porous {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::span<const double> base_part(const Point& z, int n) { return {z.data(), static_cast<std::size_t>(n)}; }

double hole_area(const HoleRecord& rec, int n) { return cross_section_area(rec.t, n); }

void require_gradient(const ScalarField& g, double bound, const char* what) {
  if (g.grad_bound() > bound * (1.0 + 1e-12)) {
    throw PreconditionError(std::string("|grad g| <= ") + what,
                            std::string("certified gradient bound ") + std::to_string(g.grad_bound()) +
                                " exceeds " + what);
  }
}

}  // namespace

double hit_scale(int k) {
  if (k < 0) throw InvalidArgument("hit_scale: k must be >= 0");
  return 2.0 - (1.0 - std::ldexp(1.0, -k));
}

// ---- hit detection ------------------------------------------------------------------

GraphDistance graph_distance(const ScalarField& g, const Ball& hole, double reach) {
  const int n = g.dim();
  const auto nn = static_cast<std::size_t>(n);
  if (hole.dim() != n + 1) throw InvalidArgument("graph_distance: hole must live in R^(n+1)");
  const std::span<const double> zb = base_part(hole.center, n);
  const double h = hole.center[nn];
  const double d0 = std::abs(g(zb) - h);
  const double G = g.grad_bound();

  // Along a ray from z' the height gap shrinks at most at rate G, so for |x - z'| = rho
  // the squared distance is at least rho^2 + max(0, d0 - G rho)^2.
  GraphDistance out;
  const double rho_star = G * d0 / (1.0 + G * G);
  const double lower = rho_star <= reach ? d0 / std::sqrt(1.0 + G * G)
                                         : std::hypot(reach, std::max(0.0, d0 - G * reach));
  if (lower >= reach) {
    out.value = lower;
    out.certified_far = true;
    return out;
  }

  // Gauss–Newton on F(x) = |x - z'|^2 + (g(x) - h)^2 with Hessian model I + v v^T.
  std::array<double, kMaxDim> x{}, v{}, trial{}, step{};
  std::copy(zb.begin(), zb.end(), x.begin());
  auto objective = [&](const std::array<double, kMaxDim>& p, double& gap) {
    gap = g(std::span<const double>(p.data(), nn)) - h;
    double q = gap * gap;
    for (std::size_t j = 0; j < nn; ++j) q += (p[j] - zb[j]) * (p[j] - zb[j]);
    return q;
  };
  double gap = 0.0;
  double F = objective(x, gap);
  for (int it = 0; it < 50; ++it) {
    g.gradient(std::span<const double>(x.data(), nn), std::span<double>(v.data(), nn));
    double vb = 0.0, vv = 0.0;
    for (std::size_t j = 0; j < nn; ++j) {
      step[j] = (x[j] - zb[j]) + gap * v[j];
      vb += v[j] * step[j];
      vv += v[j] * v[j];
    }
    double len = 0.0;
    for (std::size_t j = 0; j < nn; ++j) {
      step[j] -= v[j] * vb / (1.0 + vv);
      len += step[j] * step[j];
    }
    if (std::sqrt(len) <= 1e-15 * (1.0 + reach)) break;
    double lambda = 1.0;
    bool improved = false;
    for (int back = 0; back < 30; ++back) {
      double off = 0.0;
      for (std::size_t j = 0; j < nn; ++j) {
        trial[j] = x[j] - lambda * step[j];
        off += (trial[j] - zb[j]) * (trial[j] - zb[j]);
      }
      off = std::sqrt(off);
      if (off > reach)
        for (std::size_t j = 0; j < nn; ++j) trial[j] = zb[j] + (trial[j] - zb[j]) * reach / off;
      double tgap = 0.0;
      const double Ft = objective(trial, tgap);
      if (Ft < F) {
        x = trial;
        F = Ft;
        gap = tgap;
        improved = true;
        break;
      }
      lambda *= 0.5;
    }
    if (!improved) break;
  }
  out.value = std::sqrt(F);
  out.argmin.assign(x.begin(), x.begin() + static_cast<std::ptrdiff_t>(nn));
  return out;
}

bool hits(const GraphDistance& d, const Ball& hole, double K) {
  const double radius = K * hole.radius;
  if (d.certified_far) return d.value < radius;
  return d.value < radius * (1.0 + kHitMargin);
}

bool hit_test(const ScalarField& g, const Ball& hole, double K) {
  return hits(graph_distance(g, hole, K * hole.radius), hole, K);
}

// ---- residue regions ------------------------------------------------------------------

double primed_radius(const FamilyHeader& h, int k, double t) { return h.enlargement_for(k) * t; }

bool ResidueRegion::contains(const ScalarField& g, std::span<const double> x) const {
  return contains_open(primed, x) && std::abs(g(x) - plane(x)) > threshold;
}

namespace {

ResidueRegion region_estimate(const HoleFamily& family, std::uint32_t hole, const ScalarField& g,
                              const PlaneCatalog& planes, std::uint64_t samples, std::uint64_t key) {
  const HoleRecord& rec = family.records.at(hole);
  ResidueRegion r;
  r.hole = hole;
  r.primed = Ball{rec.base_center, primed_radius(family.header, rec.k, rec.t)};
  r.plane = planes.plane(rec.m);
  r.threshold = rec.t / 4.0;
  // |g - a| is Lipschitz with constant G + |grad a|; when its value at the centre stays
  // on one side of the threshold across B', the region is all of B' or empty.
  const double d0 = std::abs(g(r.primed.center) - r.plane(r.primed.center));
  const double spread = (g.grad_bound() + r.plane.slope()) * r.primed.radius;
  if (d0 - spread > r.threshold) {
    r.measure = MeasureEstimate::exact(cross_section_area(r.primed.radius, r.primed.dim()));
    return r;
  }
  if (d0 + spread <= r.threshold) {
    r.measure = MeasureEstimate::exact(0.0);
    return r;
  }
  const BallSampler sampler(r.primed, key, samples);
  const Moments m = sample_moments(
      sampler, samples, [&](std::span<const double> x) { return std::abs(g(x) - r.plane(x)) > r.threshold ? 1.0 : 0.0; },
      kernels::Exec::serial);
  r.measure = indicator_estimate(m, sampler.volume());
  return r;
}

}  // namespace

ResidueRegion residue_region(const HoleFamily& family, std::uint32_t hole, const ScalarField& g,
                             const PlaneCatalog& planes, const SamplingBudget& budget, std::uint64_t seed) {
  require_gradient(g, 1.0 / 32.0, "1/32");
  return region_estimate(family, hole, g, planes, budget.samples, stream_key(seed, {fnv1a("residue"), hole, 0}));
}

std::string to_string(HoleClass c) {
  switch (c) {
    case HoleClass::u: return "u";
    case HoleClass::d: return "d";
    case HoleClass::indeterminate: return "indeterminate";
  }
  return "indeterminate";
}

std::vector<std::uint32_t> StageClassification::members(HoleClass c) const {
  std::vector<std::uint32_t> out;
  for (const ClassifiedHole& h : holes)
    if (h.cls == c) out.push_back(h.hole);
  return out;
}

double StageClassification::mass(const HoleFamily& family, HoleClass c) const {
  double m = 0.0;
  for (const ClassifiedHole& h : holes)
    if (h.cls == c) m += hole_area(family.records[h.hole], family.header.n);
  return m;
}

StageClassification classify_holes(const HoleFamily& family, int k, const ScalarField& g, const PlaneCatalog& planes,
                                   const SamplingBudget& budget, std::uint64_t seed, double K) {
  require_gradient(g, 1.0 / 32.0, "1/32");
  StageClassification out;
  out.k = k;
  out.K = K;
  const std::vector<std::uint32_t> members = family.stage_members(k);
  std::vector<char> hit(members.size(), 0);
  kernels::parallel_for(members.size(), kernels::default_exec(), [&](std::uint64_t i) {
    hit[i] = hit_test(g, family.records[members[i]].hole(), K) ? 1 : 0;
  });
  for (std::size_t i = 0; i < members.size(); ++i)
    if (hit[i]) out.hit.push_back(members[i]);

  const double eps = family.header.epsilons.at(static_cast<std::size_t>(k - 1));
  const int n = family.header.n;
  out.holes.resize(out.hit.size());
  kernels::parallel_for(out.hit.size(), kernels::default_exec(), [&](std::uint64_t i) {
    const std::uint32_t id = out.hit[i];
    const double area = hole_area(family.records[id], n);
    ClassifiedHole c;
    c.hole = id;
    auto decide = [&](const ResidueRegion& r) {
      if (area <= eps * r.measure.lower()) return HoleClass::u;
      if (area > eps * r.measure.upper()) return HoleClass::d;
      return HoleClass::indeterminate;
    };
    c.samples = budget.samples;
    c.region = region_estimate(family, id, g, planes, c.samples, stream_key(seed, {fnv1a("residue"), id, 0}));
    c.cls = decide(c.region);
    if (c.cls == HoleClass::indeterminate) {
      c.escalated = true;
      c.samples = 4 * budget.samples;
      c.region = region_estimate(family, id, g, planes, c.samples, stream_key(seed, {fnv1a("residue"), id, 1}));
      c.cls = decide(c.region);
    }
    out.holes[i] = std::move(c);
  });
  return out;
}

DisjointnessAudit disjointness_audit(const HoleFamily& family, const StageClassification& cls, const ScalarField& g,
                                     std::uint64_t probes_per_pair, std::uint64_t seed) {
  DisjointnessAudit audit;
  audit.k = cls.k;
  std::vector<Ball> primed;
  for (const ClassifiedHole& h : cls.holes) primed.push_back(h.region.primed);
  const BallIndex index(primed);
  std::vector<std::pair<std::uint32_t, std::uint32_t>> pairs;
  index.for_each_candidate_pair([&](std::uint32_t i, std::uint32_t j) {
    if (distance(primed[i].center, primed[j].center) < primed[i].radius + primed[j].radius) pairs.emplace_back(i, j);
  });
  std::sort(pairs.begin(), pairs.end());

  for (auto [i, j] : pairs) {
    const ClassifiedHole& a = cls.holes[i];
    const ClassifiedHole& b = cls.holes[j];
    const HoleRecord& ra = family.records[a.hole];
    const HoleRecord& rb = family.records[b.hole];
    DisjointPair p;
    p.a = a.hole;
    p.b = b.hole;
    p.probes = probes_per_pair;
    const bool a_larger = ra.t >= rb.t;
    const HoleRecord& big = a_larger ? ra : rb;
    const HoleRecord& small = a_larger ? rb : ra;
    const ResidueRegion& rs = a_larger ? b.region : a.region;
    const ResidueRegion& rbig = a_larger ? a.region : b.region;
    if (big.l == small.l) {
      p.proof_bound_holds = !(distance(rs.primed.center, rbig.primed.center) < rs.primed.radius + rbig.primed.radius);
    } else {
      p.proof_bound_holds = 4.0 * small.t + 2.0 * rs.primed.radius / 16.0 <= big.t / 4.0;
    }
    const BallSampler sampler(rs.primed, stream_key(seed, {fnv1a("disjoint"), p.a, p.b}), probes_per_pair);
    std::array<double, kMaxDim> buf{};
    const std::span<double> x(buf.data(), static_cast<std::size_t>(family.header.n));
    for (std::uint64_t s = 0; s < probes_per_pair; ++s) {
      if (!sampler.attempt(s, x)) continue;
      if (rs.contains(g, x) && rbig.contains(g, x)) {
        if (p.joint_hits == 0) p.witness.assign(x.begin(), x.end());
        ++p.joint_hits;
      }
    }
    ++audit.pairs_checked;
    if (!p.proof_bound_holds) ++audit.proof_bound_failures;
    if (p.joint_hits > 0) {
      ++audit.violations;
      if (audit.failures.size() < 16) audit.failures.push_back(p);
    }
  }
  return audit;
}

SubfamilySelection select_subfamily_s(const HoleFamily& family, int k, std::span<const std::uint32_t> d_holes) {
  SubfamilySelection out;
  struct Entry {
    std::uint32_t id;
    Ball primed;
  };
  std::vector<Entry> order;
  for (std::uint32_t id : d_holes) {
    const HoleRecord& rec = family.records.at(id);
    if (rec.k != k) throw InvalidArgument("select_subfamily_s: hole from another stage");
    order.push_back({id, Ball{rec.base_center, primed_radius(family.header, k, rec.t)}});
  }
  std::vector<std::size_t> perm(order.size());
  for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = i;
  std::stable_sort(perm.begin(), perm.end(), [&](std::size_t a, std::size_t b) {
    if (order[a].primed.radius != order[b].primed.radius) return order[a].primed.radius > order[b].primed.radius;
    return order[a].id < order[b].id;
  });
  std::vector<std::size_t> chosen;
  std::map<std::uint32_t, std::uint32_t> cover_of;
  for (std::size_t pi : perm) {
    const Entry& e = order[pi];
    bool placed = false;
    for (std::size_t ci : chosen) {
      const Entry& c = order[ci];
      const double d = distance(e.primed.center, c.primed.center);
      if (d + e.primed.radius <= c.primed.radius * (1.0 + 1e-12)) {
        cover_of[e.id] = c.id;
        placed = true;
        break;
      }
      if (d < e.primed.radius + c.primed.radius) out.nesting_violations.emplace_back(c.id, e.id);
    }
    if (!placed) {
      chosen.push_back(pi);
      cover_of[e.id] = e.id;
      out.selected.push_back(e.id);
    }
  }
  for (std::uint32_t id : d_holes) out.cover.push_back(cover_of[id]);
  return out;
}

// ---- budget ledger ------------------------------------------------------------------------

namespace {

struct SmoothingResult {
  ScalarField field;
  bool ok = true;
  std::string failure;
};

SmoothingResult smooth_on_subfamily(const ScalarField& g, const HoleFamily& family, int k,
                                    std::span<const std::uint32_t> selected, const BudgetOptions& opt) {
  SmoothingResult out{g, true, {}};
  const double eps = family.header.epsilons.at(static_cast<std::size_t>(k - 1));
  for (std::uint32_t id : selected) {
    const HoleRecord& rec = family.records[id];
    const Ball primed{rec.base_center, primed_radius(family.header, k, rec.t)};
    try {
      const ScalarField local = mollify(g.with_domain(primed), eps * primed.radius, opt.mollifier_nodes);
      const CutoffField w = make_cutoff(primed, eps, opt.mollifier_nodes);
      out.field = blend(local, out.field, w, 1024, stream_key(opt.seed, {fnv1a("blend"), id}));
    } catch (const PreconditionError& e) {
      out.ok = false;
      out.failure = e.what();
      return out;
    }
  }
  return out;
}

}  // namespace

BudgetLedger budget(const GraphPatch& patch, const HoleFamily& family, const BudgetOptions& opt) {
  if (patch.c1_bound() > (1.0 / 64.0) * (1.0 + 1e-12)) {
    throw PreconditionError("||g||_{C^1} <= 1/64", "budget: certified C^1 bound " + std::to_string(patch.c1_bound()) +
                                                       " of " + patch.provenance + " exceeds 1/64");
  }
  const ScalarField& g = patch.g;
  const int n = family.header.n;
  if (g.dim() != n) throw InvalidArgument("budget: field dimension does not match the family");
  const PlaneCatalog planes(n, family.header.r);
  const int depth = family.depth();

  BudgetLedger L;
  L.field = patch.provenance;
  L.grad_bound = g.grad_bound();
  L.c1_bound = patch.c1_bound();
  for (double e : family.header.epsilons) L.epsilon_sum += e;

  {
    const BallSampler sampler(g.domain(), stream_key(opt.seed, {fnv1a("energy")}), opt.energy.samples);
    const Moments m = sample_moments(sampler, opt.energy.samples, [&](std::span<const double> x) {
      const double gn = g.gradient_norm(x);
      return gn * gn;
    });
    L.energy = mean_estimate(m, sampler.volume());
  }

  // One distance per hole, searched out to the largest enlargement K_1.
  const double K1 = hit_scale(1);
  const double KK = hit_scale(depth);
  const std::size_t N = family.records.size();
  std::vector<GraphDistance> dist(N);
  kernels::parallel_for(N, kernels::default_exec(), [&](std::uint64_t i) {
    const Ball hole = family.records[i].hole();
    GraphDistance d = graph_distance(g, hole, K1 * hole.radius);
    d.argmin.clear();
    dist[i] = std::move(d);
  });
  for (std::uint32_t i = 0; i < N; ++i) {
    const Ball hole = family.records[i].hole();
    const double area = hole_area(family.records[i], n);
    if (hits(dist[i], hole, 1.0)) {
      L.hit_plain.push_back(i);
      L.mass_plain += area;
    }
    if (hits(dist[i], hole, KK)) L.mass_K += area;
  }

  for (int k = 1; k <= depth; ++k) {
    StageLedger S;
    S.k = k;
    S.K = hit_scale(k);
    S.epsilon = family.header.epsilons[static_cast<std::size_t>(k - 1)];
    for (std::uint32_t i : family.stage_members(k)) {
      const Ball hole = family.records[i].hole();
      const double area = hole_area(family.records[i], n);
      if (hits(dist[i], hole, 1.0)) {
        ++S.hits_plain;
        S.mass_plain += area;
      }
      if (hits(dist[i], hole, S.K)) {
        ++S.hits_K;
        S.mass_K += area;
      }
    }

    const StageClassification cls =
        classify_holes(family, k, g, planes, opt.residue, stream_key(opt.seed, {fnv1a("classify"), static_cast<std::uint64_t>(k)}), K1);
    S.u_mass = cls.mass(family, HoleClass::u);
    S.d_mass = cls.mass(family, HoleClass::d);
    const std::vector<std::uint32_t> d_holes = cls.members(HoleClass::d);
    S.u_count = cls.members(HoleClass::u).size();
    S.d_count = d_holes.size();
    S.indeterminate_count = cls.members(HoleClass::indeterminate).size();

    // Per-hole |B| <= C ∫_{R_k(B)} |grad(g - a)|^2, with the integral at its lower CI.
    for (const ClassifiedHole& h : cls.holes) {
      if (h.cls != HoleClass::d) continue;
      const ResidueRegion& r = h.region;
      const BallSampler sampler(r.primed, stream_key(opt.seed, {fnv1a("dbound"), h.hole}), opt.residue.samples);
      const Moments m = sample_moments(
          sampler, opt.residue.samples,
          [&](std::span<const double> x) {
            if (!(std::abs(g(x) - r.plane(x)) > r.threshold)) return 0.0;
            std::array<double, kMaxDim> grad{};
            g.gradient(x, std::span<double>(grad.data(), x.size()));
            double q = 0.0;
            for (std::size_t j = 0; j < x.size(); ++j) {
              const double dj = grad[j] - r.plane.gradient[j];
              q += dj * dj;
            }
            return q;
          },
          kernels::Exec::serial);
      const double lower = mean_estimate(m, sampler.volume()).lower();
      const double area = hole_area(family.records[h.hole], n);
      S.dbound_c = std::max(S.dbound_c, lower > 0.0 ? area / lower : kInf);
    }

    S.disjoint = disjointness_audit(family, cls, g, opt.disjoint_probes, stream_key(opt.seed, {fnv1a("disjoint"), static_cast<std::uint64_t>(k)}));
    const SubfamilySelection sel = select_subfamily_s(family, k, d_holes);
    S.s_count = sel.selected.size();

    if (k >= 2) {
      const double r_prev = family.stage_radius(k - 1);
      S.smoothing_gap_bound = S.epsilon * r_prev;
      S.smoothed_grad_bound = 1.0 / 32.0;
      const SmoothingResult sm = smooth_on_subfamily(g, family, k, sel.selected, opt);
      if (!sm.ok) {
        S.smoothing_gap = kInf;
        S.smoothed_grad = kInf;
      } else {
        // g~ differs from g only inside the selected B'; probe each of them and the base ball.
        std::vector<Ball> regions{g.domain()};
        for (std::uint32_t id : sel.selected)
          regions.push_back(Ball{family.records[id].base_center, primed_radius(family.header, k, family.records[id].t)});
        for (std::size_t ri = 0; ri < regions.size(); ++ri) {
          const std::uint64_t probes = ri == 0 ? opt.smoothing_probes : std::max<std::uint64_t>(64, opt.smoothing_probes / 8);
          const BallSampler sampler(regions[ri], stream_key(opt.seed, {fnv1a("smoothing"), static_cast<std::uint64_t>(k), ri}), probes);
          const Moments gap = sample_moments(sampler, probes, [&](std::span<const double> x) {
            return std::abs(g(x) - sm.field(x));
          });
          const Moments grad = sample_moments(sampler, probes, [&](std::span<const double> x) {
            return sm.field.gradient_norm(x);
          });
          if (gap.accepted) S.smoothing_gap = std::max(S.smoothing_gap, gap.max);
          if (grad.accepted) S.smoothed_grad = std::max(S.smoothed_grad, grad.max);
        }
        // G(g) ∩ K_k B ≠ ∅ must carry over to G(g~) ∩ K_{k-1} B ≠ ∅ for earlier stages.
        const double Kprev = hit_scale(k - 1);
        for (std::uint32_t i = 0; i < N; ++i) {
          const HoleRecord& rec = family.records[i];
          if (rec.k >= k) continue;
          if (!hits(dist[i], rec.hole(), S.K)) continue;
          ++S.consistency_checked;
          if (!hit_test(sm.field, rec.hole(), Kprev)) ++S.consistency_failures;
        }
      }
    }
    L.stages.push_back(std::move(S));
  }

  const double denom = L.energy.value + L.epsilon_sum;
  L.empirical_c = denom > 0.0 ? L.mass_K / denom : (L.mass_K > 0.0 ? kInf : 0.0);
  return L;
}

// ---- coverage, porosity, hole mass ------------------------------------------------------------

namespace {

MeasureEstimate plane_measure(const HoleFamily& family, std::uint64_t m, int k, const SamplingBudget& budget,
                              std::uint64_t seed, bool inside) {
  const FamilyHeader& h = family.header;
  const PlaneCatalog planes(h.n, h.r);
  const ScalarField a = ScalarField::affine(Ball{base_center(h.n), h.s}, planes.plane(m));
  const PkDescriptor pk = assemble_Pk(family, h.L, k);
  return graph_measure_in(
      a, [&](std::span<const double> z) { return pk.set.contains(z) == inside; }, budget,
      stream_key(seed, {fnv1a(inside ? "plane-coverage" : "coverage-deficit"), m, static_cast<std::uint64_t>(k)}));
}

}  // namespace

MeasureEstimate coverage_deficit(const HoleFamily& family, std::uint64_t m, int k, const SamplingBudget& budget,
                                 std::uint64_t seed) {
  return plane_measure(family, m, k, budget, seed, false);
}

MeasureEstimate plane_coverage(const HoleFamily& family, std::uint64_t m, int k, const SamplingBudget& budget,
                               std::uint64_t seed) {
  return plane_measure(family, m, k, budget, seed, true);
}

double coverage_deficit_bound(const FamilyHeader& h, const AffinePlane& a, int k) {
  if (h.strict) return strict_cover_bound(h.n, h.s, k);
  const double slope = a.slope();
  return 2.0 * h.stop_fraction(k) * cross_section_area(h.s, h.n) * std::sqrt(1.0 + slope * slope);
}

double porosity_ratio(std::span<const double> x, const Ball& hole) {
  const double d = distance(x, hole.center);
  return d > 0.0 ? hole.radius / d : kInf;
}

std::optional<PorosityWitness> porosity_witness(std::span<const double> x, const TruncatedP& p,
                                                const HoleFamily& family) {
  std::optional<PorosityWitness> best;
  for (std::uint32_t id : p.pk(p.depth()).set.containing(x)) {
    const Ball hole = family.records[id].hole();
    if (contains_open(hole, x)) continue;
    const double ratio = porosity_ratio(x, hole);
    if (!best || ratio > best->ratio) best = PorosityWitness{id, ratio};
  }
  return best;
}

std::optional<PorosityWitness> porosity_witness_reference(std::span<const double> x, const HoleFamily& family,
                                                          double L) {
  const int K = family.depth();
  std::optional<PorosityWitness> best;
  for (std::uint32_t id = 0; id < family.records.size(); ++id) {
    const HoleRecord& rec = family.records[id];
    if (!(2.0 * rec.t < 1.0 / K)) continue;
    const Ball hole = rec.hole();
    if (!(distance(x, hole.center) < L * hole.radius) || contains_open(hole, x)) continue;
    const double ratio = porosity_ratio(x, hole);
    if (!best || ratio > best->ratio) best = PorosityWitness{id, ratio};
  }
  return best;
}

std::vector<Point> sample_truncated_p(const TruncatedP& p, const HoleFamily& family, std::size_t count,
                                      std::uint64_t seed) {
  const auto members = p.pk(p.depth()).set.members();
  std::vector<Point> out;
  if (members.empty() || count == 0) return out;
  const double L = p.pk(p.depth()).set.scale();
  const auto dim = static_cast<std::size_t>(family.header.n + 1);
  const CounterRng rng(stream_key(seed, {fnv1a("truncated-p")}));
  std::uint64_t ctr = 0;
  const std::uint64_t max_attempts = 1000 * static_cast<std::uint64_t>(count);
  Point x(dim);
  for (std::uint64_t attempt = 0; attempt < max_attempts && out.size() < count; ++attempt) {
    const auto pick = std::min<std::size_t>(members.size() - 1,
                                            static_cast<std::size_t>(rng.uniform(ctr++) * static_cast<double>(members.size())));
    const Ball hole = family.records[members[pick]].hole();
    double r2 = 0.0;
    do {
      r2 = 0.0;
      for (std::size_t j = 0; j < dim; ++j) {
        x[j] = 2.0 * rng.uniform(ctr++) - 1.0;
        r2 += x[j] * x[j];
      }
    } while (r2 >= 1.0);
    for (std::size_t j = 0; j < dim; ++j) x[j] = hole.center[j] + L * hole.radius * x[j];
    if (p.contains(x)) out.push_back(x);
  }
  return out;
}

MeasureEstimate hole_intersection_mass(const ScalarField& g, const HoleFamily& family, const SamplingBudget& budget,
                                       std::uint64_t seed) {
  return hole_intersection_mass(g, assemble_H(family), family, budget, seed);
}

MeasureEstimate hole_intersection_mass(const ScalarField& g, const HoleUnion& h, const HoleFamily& family,
                                       const SamplingBudget& budget, std::uint64_t seed) {
  // Area formula split over the base disks of the holes G(g) meets; a graph point is
  // credited to the lowest-index hole containing it, so the pieces add up to H^n(G ∩ H).
  const int n = g.dim();
  const auto nn = static_cast<std::size_t>(n);
  const std::span<const std::uint32_t> members = h.members();
  std::vector<char> hit(members.size(), 0);
  kernels::parallel_for(members.size(), kernels::default_exec(), [&](std::uint64_t i) {
    hit[i] = hit_test(g, family.records[members[i]].hole(), 1.0) ? 1 : 0;
  });
  double total_area = 0.0;
  for (std::size_t i = 0; i < members.size(); ++i)
    if (hit[i]) total_area += hole_area(family.records[members[i]], n);
  if (total_area == 0.0) {
    MeasureEstimate e = MeasureEstimate::exact(0.0);
    e.method = MeasureMethod::monte_carlo;
    return e;
  }

  std::vector<MeasureEstimate> parts(members.size());
  kernels::parallel_for(members.size(), kernels::default_exec(), [&](std::uint64_t i) {
    if (!hit[i]) return;
    const std::uint32_t id = members[i];
    const HoleRecord& rec = family.records[id];
    const double area = hole_area(rec, n);
    const auto samples = std::max<std::uint64_t>(
        64, static_cast<std::uint64_t>(std::ceil(static_cast<double>(budget.samples) * area / total_area)));
    const BallSampler sampler(Ball{rec.base_center, rec.t}, stream_key(seed, {fnv1a("hole-mass"), id}), samples);
    const Ball hole = rec.hole();
    const Moments m = sample_moments(
        sampler, samples,
        [&](std::span<const double> x) {
          std::array<double, kMaxDim> z{};
          std::copy(x.begin(), x.end(), z.begin());
          z[nn] = g(x);
          const std::span<const double> zp(z.data(), nn + 1);
          if (!contains_open(hole, zp)) return 0.0;
          const std::vector<std::uint32_t> owners = h.containing(zp);
          if (owners.empty() || *std::min_element(owners.begin(), owners.end()) != id) return 0.0;
          const double gn = g.gradient_norm(x);
          return std::sqrt(1.0 + gn * gn);
        },
        kernels::Exec::serial);
    parts[i] = mean_estimate(m, area);
  });
  MeasureEstimate out;
  out.method = MeasureMethod::monte_carlo;
  double var = 0.0;
  for (const MeasureEstimate& e : parts) {
    out.value += e.value;
    var += e.half_width * e.half_width;
    out.sample_count += e.sample_count;
  }
  out.half_width = std::sqrt(var);
  return out;
}

// ---- construction audits ------------------------------------------------------------------------

ConstructionAudit audit_construction(const HoleFamily& family) {
  const FamilyHeader& h = family.header;
  const int n = h.n;
  const double total = cross_section_area(h.s, n);
  const Point c = base_center(n);
  const PlaneCatalog planes(n, h.r);
  ConstructionAudit out;

  double r_prev = h.s;
  for (int k = 1; k <= family.depth(); ++k) {
    const double E = h.enlargement_for(k);
    StageAudit sa;
    sa.k = k;
    sa.stop_fraction = h.stop_fraction(k);
    sa.decay_bound = 1.0 / E;
    std::map<int, std::vector<std::uint32_t>> by_level;
    std::vector<Ball> stage_balls;
    for (std::uint32_t i : family.stage_members(k)) {
      const HoleRecord& rec = family.records[i];
      by_level[rec.l].push_back(i);
      stage_balls.push_back(Ball{rec.base_center, E * rec.t});
      sa.plane_index = rec.m;
      if (distance(rec.base_center, c) + E * rec.t > h.s * (1.0 + 1e-12)) ++sa.containment_failures;
      const AffinePlane a = planes.plane(rec.m);
      const double height = rec.lifted_center[static_cast<std::size_t>(n)] - a(base_part(rec.base_center, n));
      if (std::abs(height - 2.0 * rec.t) > 1e-12 * std::max(1.0, rec.t) ||
          !std::equal(rec.base_center.begin(), rec.base_center.end(), rec.lifted_center.begin()))
        ++sa.lift_failures;
    }
    sa.nested = pairwise_audit(stage_balls, PairRule::disjoint_or_nested);

    double uncovered = total;
    double prev_radius = r_prev;
    for (auto& [l, ids] : by_level) {
      LevelAudit la;
      la.k = k;
      la.l = l;
      la.balls = ids.size();
      la.radius = family.records[ids.front()].t;
      std::vector<Ball> enlarged;
      double vol = 0.0;
      for (std::uint32_t i : ids) {
        const HoleRecord& rec = family.records[i];
        la.radius = std::min(la.radius, rec.t);
        enlarged.push_back(Ball{rec.base_center, E * rec.t});
        vol += cross_section_area(rec.t, n);
      }
      la.disjoint = pairwise_audit(enlarged, PairRule::disjoint);
      la.covered_fraction = uncovered > 0.0 ? vol / uncovered : 0.0;
      la.guarantee = level_coverage_guarantee(n, E);
      uncovered -= vol;
      double level_max = 0.0;
      for (std::uint32_t i : ids) level_max = std::max(level_max, family.records[i].t);
      sa.worst_decay = std::max(sa.worst_decay, level_max / prev_radius);
      prev_radius = la.radius;
      out.levels.push_back(std::move(la));
    }
    sa.uncovered_fraction = uncovered / total;
    if (!by_level.empty()) r_prev = family.stage_radius(k);
    out.stages.push_back(std::move(sa));
  }

  for (int k = 1; k < family.depth(); ++k) {
    for (const HoleRecord& rec : family.records) {
      if (2.0 * rec.t < 1.0 / (k + 1) && !(2.0 * rec.t < 1.0 / k)) out.pk_nested = false;
    }
  }
  return out;
}

}  // namespace porous
