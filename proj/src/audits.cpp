#include "porous/audits.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "porous/analysis.hpp"
#include "porous/errors.hpp"
#include "porous/rng.hpp"

namespace porous {

namespace {

constexpr const char* kConstruction = "construction_audits";
constexpr const char* kAnalysis = "analysis_audits";
constexpr const char* kBudget = "budget_ledgers";
constexpr const char* kPorosity = "porosity";
constexpr const char* kVerdicts = "verdicts";

template <class... Args>
std::string cat(Args&&... args) {
  std::ostringstream ss;
  ss.precision(17);
  (ss << ... << args);
  return ss.str();
}

std::string stage_id(int k) { return cat("stage ", k); }

AuditEntry status_entry(std::string section, std::string id, std::string lemma_ref, double measured, Status st,
                        std::string detail) {
  AuditEntry e;
  e.section = std::move(section);
  e.id = std::move(id);
  e.lemma_ref = std::move(lemma_ref);
  e.measured = measured;
  e.status = st;
  e.detail = std::move(detail);
  return e;
}

std::string pair_detail(const PairAudit& a) {
  if (a.ok()) return cat(a.pairs_checked, " candidate pairs");
  const PairViolation& v = a.violations.front();
  return cat(a.violation_count, " violations; first pair (", v.i, ", ", v.j, ") distance ", v.distance, " radii ",
             v.radius_i, ", ", v.radius_j);
}

}  // namespace

// ---- construction ---------------------------------------------------------------------

std::vector<AuditEntry> construction_audits(const HoleFamily& family) {
  std::vector<AuditEntry> out;
  const ConstructionAudit a = audit_construction(family);
  for (const LevelAudit& l : a.levels) {
    const std::string id = cat("level ", l.k, ".", l.l);
    out.push_back(zero_check(kConstruction, id + " disjoint enlargements", "level packing: enlarged balls disjoint",
                             static_cast<double>(l.disjoint.violation_count), pair_detail(l.disjoint)));
    out.push_back(lower_check(kConstruction, id + " coverage fraction", "level packing: covered share of uncovered set",
                              l.covered_fraction, l.guarantee, cat(l.balls, " balls of radius ", l.radius)));
  }
  for (const StageAudit& s : a.stages) {
    const std::string id = stage_id(s.k);
    out.push_back(zero_check(kConstruction, id + " disjoint or nested", "stage packing: enlarged balls disjoint or nested",
                             static_cast<double>(s.nested.violation_count), pair_detail(s.nested)));
    out.push_back(upper_check(kConstruction, id + " radius decay", "stage packing: radii shrink by the enlargement",
                              s.worst_decay, s.decay_bound));
    out.push_back(upper_check(kConstruction, id + " uncovered fraction", "stage packing: stopping threshold",
                              s.uncovered_fraction, s.stop_fraction));
    out.push_back(zero_check(kConstruction, id + " containment", "stage packing: enlarged balls inside B(c,s)",
                             static_cast<double>(s.containment_failures)));
    out.push_back(zero_check(kConstruction, id + " lift height", "lifted holes sit 2t above their plane",
                             static_cast<double>(s.lift_failures), cat("plane index ", s.plane_index)));
  }
  out.push_back(zero_check(kConstruction, "P_k nesting", "P_(k+1) members are P_k members", a.pk_nested ? 0.0 : 1.0));
  return out;
}

// ---- analysis --------------------------------------------------------------------------

std::vector<AuditEntry> analysis_audits(int n, const AuditSettings& settings, std::uint64_t seed) {
  std::vector<AuditEntry> out;
  const Point c = base_center(n);
  const CounterRng rng(stream_key(seed, {fnv1a("analysis-fixtures")}));
  std::uint64_t ctr = 0;
  auto uniform = [&](double lo, double hi) { return lo + (hi - lo) * rng.uniform(ctr++); };
  auto random_unit = [&]() {
    Point v(static_cast<std::size_t>(n));
    double len = 0.0;
    do {
      len = 0.0;
      for (double& x : v) {
        x = uniform(-1.0, 1.0);
        len += x * x;
      }
    } while (len > 1.0 || len < 1e-6);
    len = std::sqrt(len);
    for (double& x : v) x /= len;
    return v;
  };

  // Unit mass of the mollifier.
  for (double eps : {1.0, 0.1}) {
    const Mollifier m(n, eps);
    out.push_back(upper_check(kAnalysis, cat("mollifier mass eps=", eps), "standard mollifier has unit mass",
                              std::abs(m.mass() - 1.0), 1e-6, cat("mass ", m.mass())));
  }

  const Ball dom{c, 0.25};
  const std::uint64_t probes = 1000;
  auto sup_diff = [&](const ScalarField& a, const ScalarField& b, const Ball& region, std::uint64_t key) {
    const BallSampler sampler(region, key, probes);
    const Moments m = sample_moments(sampler, probes, [&](std::span<const double> x) { return std::abs(a(x) - b(x)); });
    return std::max(0.0, m.max);
  };

  // Constants and affine fields are fixed by mollification.
  {
    const ScalarField k37 = ScalarField::constant(dom, 3.7);
    const ScalarField ks = mollify(k37, 0.05);
    out.push_back(upper_check(kAnalysis, "mollified constant", "mollification preserves constants",
                              sup_diff(ks, k37, ks.domain(), stream_key(seed, {fnv1a("const")})), 1e-8));
    double worst = 0.0;
    for (int i = 0; i < 10; ++i) {
      AffinePlane a;
      a.gradient = random_unit();
      for (double& g : a.gradient) g *= uniform(0.0, 1.0);
      a.offset = uniform(-1.0, 1.0);
      const ScalarField ga = ScalarField::affine(dom, a);
      const ScalarField gs = mollify(ga, uniform(0.01, 0.1));
      worst = std::max(worst, sup_diff(gs, ga, gs.domain(), stream_key(seed, {fnv1a("affine"), static_cast<std::uint64_t>(i)})));
    }
    out.push_back(upper_check(kAnalysis, "mollified affine fields", "smoothing leaves an affine plane unchanged",
                              worst, 1e-8, "10 random planes"));
  }

  // |g^eps - g| <= eps for unit-gradient fields.
  {
    double worst_ratio = 0.0;
    const int fields = settings.analysis_fields;
    for (int i = 0; i < fields; ++i) {
      ScalarField g;
      if (i == 0) {
        auto eval = [c](std::span<const double> x) {
          double r2 = 0.0;
          for (std::size_t j = 0; j < x.size(); ++j) r2 += (x[j] - c[j]) * (x[j] - c[j]);
          return std::sin(20.0 * r2) / 10.0;
        };
        auto grad = [c](std::span<const double> x, std::span<double> o) {
          double r2 = 0.0;
          for (std::size_t j = 0; j < x.size(); ++j) r2 += (x[j] - c[j]) * (x[j] - c[j]);
          const double f = std::cos(20.0 * r2) * 40.0 / 10.0;
          for (std::size_t j = 0; j < x.size(); ++j) o[j] = f * (x[j] - c[j]);
        };
        g = ScalarField(dom, eval, grad, 1.0);
      } else {
        Point k = random_unit();
        const double freq = uniform(5.0, 60.0);
        for (double& v : k) v *= freq;
        const double phase = uniform(0.0, 2.0 * std::numbers::pi);
        auto eval = [k, freq, phase](std::span<const double> x) { return std::sin(dot(k, x) + phase) / freq; };
        auto grad = [k, freq, phase](std::span<const double> x, std::span<double> o) {
          const double f = std::cos(dot(k, x) + phase) / freq;
          for (std::size_t j = 0; j < x.size(); ++j) o[j] = f * k[j];
        };
        g = ScalarField(dom, eval, grad, 1.0);
      }
      const double eps = uniform(0.01, 0.1);
      const ScalarField gs = mollify(g, eps, 7);
      const double d = sup_diff(gs, g, gs.domain(), stream_key(seed, {fnv1a("unit-gradient"), static_cast<std::uint64_t>(i)}));
      worst_ratio = std::max(worst_ratio, d / eps);
    }
    out.push_back(upper_check(kAnalysis, "mollification error / eps", "|g^eps - g| <= eps when |grad g| <= 1",
                              worst_ratio, 1.0, cat(fields, " unit-gradient fields, ", probes, " probes each")));
  }

  // Cut-off field.
  {
    const double t = 0.2, eps = 0.25;
    const CutoffField w = make_cutoff(Ball{c, t}, eps);
    const ScalarField wf(Ball{c, t}, [&w](std::span<const double> x) { return w(x); },
                         [&w](std::span<const double> x, std::span<double> o) { w.gradient(x, o); }, w.gradient_bound());
    const FieldSup gs = sampled_sup(wf, true, 1u << 15, stream_key(seed, {fnv1a("cutoff")}));
    const double bound = 3.0 / (eps * t);
    out.push_back(upper_check(kAnalysis, "cutoff gradient", "interpolation cut-off: |grad w| <= 3/(eps t)", gs.value,
                              bound * (1.0 + 1e-6), cat("(t, eps) = (", t, ", ", eps, ")")));
    const FieldSup vs = sampled_sup(wf, false, 1u << 15, stream_key(seed, {fnv1a("cutoff-range")}));
    out.push_back(upper_check(kAnalysis, "cutoff range", "interpolation cut-off: 0 <= w <= 1", vs.value, 1.0));
  }

  // Blend of a bump onto an affine field.
  {
    const double t = 0.2, eps = 0.25;
    const Ball b{c, t};
    AffinePlane a;
    a.gradient = random_unit();
    for (double& g : a.gradient) g *= 0.5;
    a.offset = 0.1;
    const ScalarField g2 = ScalarField::affine(dom, a);
    std::vector<Bump> bumps{Bump{c, t * (1.0 - eps), 0.9 * eps * eps * t}};
    const ScalarField bump = bump_field(dom, bumps);
    const ScalarField g1 = linear_combination(1.0, g2, 1.0, bump);
    const CutoffField w = make_cutoff(b, eps);
    const ScalarField v = blend(g1, g2, w, 4096, seed);
    const FieldSup gs = sampled_sup(v.with_domain(b), true, 1u << 15, stream_key(seed, {fnv1a("blend-grad")}));
    const double bound = std::max(g1.grad_bound(), g2.grad_bound()) + 3.0 * eps;
    out.push_back(upper_check(kAnalysis, "blend gradient", "interpolation: |grad v| <= max|grad g_i| + 3 eps", gs.value,
                              bound + 1e-9, cat("annulus gap allowed ", eps * eps * t)));
  }

  // Flattening identity.
  {
    const double t = 0.2, eps = 0.1;
    const Ball b{c, t};
    double worst_identity = 0.0, worst_c = 0.0;
    for (int i = 0; i < 10; ++i) {
      AffinePlane a;
      a.gradient = random_unit();
      for (double& g : a.gradient) g *= uniform(0.0, 0.5);
      a.offset = uniform(-0.1, 0.1);
      const double width = uniform(0.5, 0.9) * t;
      std::vector<Bump> bumps{Bump{c, width, uniform(-0.9, 0.9) * eps * t}};
      const ScalarField g = linear_combination(1.0, ScalarField::affine(dom, a), 1.0, bump_field(dom, bumps));
      const FlattenCheck f = flatten_residual(g, a, b, eps,
                                              settings.constants.flatten, SamplingBudget{settings.samples},
                                              stream_key(seed, {fnv1a("flatten"), static_cast<std::uint64_t>(i)}));
      worst_identity = std::max(worst_identity, std::abs(f.residual - f.cross_term) / std::max(std::abs(f.cross_term), 1e-300));
      worst_c = std::max(worst_c, f.empirical_c);
    }
    out.push_back(upper_check(kAnalysis, "flatten residual vs cross term", "flattening: residual is the cross term",
                              worst_identity, 1e-6, "relative difference, 10 fields"));
    out.push_back(upper_check(kAnalysis, "flatten constant", "flattening: |residual| <= C eps L^n(B)", worst_c,
                              settings.constants.flatten, "empirical C over 10 fields"));
  }

  // Sobolev-type inequality with exponent 2n/(n-2).
  if (n > 2) {
    out.push_back(upper_check(kAnalysis, "sobolev exponent", "Sobolev conjugate 2n/(n-2)",
                              std::abs(sobolev_exponent(n) - 2.0 * n / (n - 2.0)), 0.0, cat("p = ", sobolev_exponent(n))));
    const Ball b{c, 0.25};
    double worst_ratio = 0.0, worst_drift = 0.0;
    const int fields = settings.analysis_fields;
    bool finite = true;
    for (int i = 0; i < fields; ++i) {
      Point center = c;
      const Point dir = random_unit();
      const double off = uniform(0.0, 0.5) * b.radius;
      for (int j = 0; j < n; ++j) center[static_cast<std::size_t>(j)] += off * dir[static_cast<std::size_t>(j)];
      const double width = uniform(0.35, 0.7) * b.radius;
      std::vector<Bump> bumps{Bump{center, width, uniform(0.001, 0.01)}};
      const ScalarField g = bump_field(b, bumps);
      const std::uint64_t key = stream_key(seed, {fnv1a("sobolev"), static_cast<std::uint64_t>(i)});
      const SobolevResult lo = sobolev_ratio(g, b, 0.5, SamplingBudget{settings.samples}, key);
      const SobolevResult hi = sobolev_ratio(g, b, 0.5, SamplingBudget{2 * settings.samples}, key);
      finite = finite && std::isfinite(lo.ratio) && std::isfinite(hi.ratio);
      worst_ratio = std::max(worst_ratio, hi.ratio);
      worst_drift = std::max(worst_drift, std::abs(hi.ratio - lo.ratio) / lo.ratio);
    }
    out.push_back(status_entry(kAnalysis, "sobolev ratios finite", "Sobolev inequality for fields vanishing on half of B",
                               worst_ratio, finite ? Status::pass : Status::fail,
                               cat("empirical C(1/2) = ", worst_ratio, " over ", fields, " bump fields")));
    out.push_back(upper_check(kAnalysis, "sobolev resolution drift", "Sobolev ratio stable under doubled sampling",
                              worst_drift, 0.05));
  }

  // Area lower bound on a cone of height h.
  {
    std::vector<double> ratios;
    double worst_c = 0.0;
    bool passed = true;
    for (double h : {0.1, 0.05, 0.025}) {
      const Point apex = c;
      auto eval = [apex, h](std::span<const double> x) { return std::max(0.0, h - distance(x, apex)); };
      auto grad = [apex, h](std::span<const double> x, std::span<double> o) {
        const double d = distance(x, apex);
        std::fill(o.begin(), o.end(), 0.0);
        if (d >= h || d == 0.0) return;
        for (std::size_t j = 0; j < o.size(); ++j) o[j] = -(x[j] - apex[j]) / d;
      };
      const Ball b{apex, 2.0 * h};
      const ScalarField g(b, eval, grad, 1.0);
      const AreaCheck ac = area_lower_bound_check(g, b, h, settings.constants.area, SamplingBudget{settings.samples},
                                                  stream_key(seed, {fnv1a("area")}));
      ratios.push_back(ac.empirical_c);
      worst_c = std::max(worst_c, ac.empirical_c);
      passed = passed && ac.passed;
    }
    const auto [mn, mx] = std::minmax_element(ratios.begin(), ratios.end());
    out.push_back(upper_check(kAnalysis, "area ratio spread", "area lower bound: ratio constant under dilation",
                              (*mx - *mn) / *mn, 0.2, cat("ratios ", ratios[0], ", ", ratios[1], ", ", ratios[2])));
    out.push_back(upper_check(kAnalysis, "area constant", "area lower bound: omega h^n <= C ∫_{g >= h/2} |grad g|^2",
                              worst_c, settings.constants.area));
  }

  // Smoothed gradient on a nearly flat field.
  {
    const double t = 0.1, eps = 0.25;
    double worst_c = 0.0;
    for (int i = 0; i < 10; ++i) {
      const Ball b{c, t};
      Point center = c;
      const Point dir = random_unit();
      for (int j = 0; j < n; ++j) center[static_cast<std::size_t>(j)] += uniform(0.0, 0.5) * t * dir[static_cast<std::size_t>(j)];
      std::vector<Bump> bumps{Bump{center, uniform(0.3, 1.0) * t, uniform(-0.9, 0.9) * eps * eps * t}};
      const ScalarField g = bump_field(b, bumps);
      const SmoothedGradientCheck sg = smoothed_gradient_check(g, eps, settings.constants.smoothed, 2048,
                                                               stream_key(seed, {fnv1a("smoothed"), static_cast<std::uint64_t>(i)}), 7);
      worst_c = std::max(worst_c, sg.empirical_c);
    }
    out.push_back(upper_check(kAnalysis, "smoothed gradient constant",
                              "smoothed area: sup |grad g^(eps t)| <= C eps when |g| <= eps^2 t", worst_c,
                              settings.constants.smoothed, "10 fields"));
  }
  return out;
}

// ---- coverage -----------------------------------------------------------------------------

CoverSummary cover_audits(const HoleFamily& family, const AuditSettings& settings, std::uint64_t seed) {
  CoverSummary out;
  const FamilyHeader& h = family.header;
  const PlaneCatalog planes(h.n, h.r);
  const SamplingBudget budget{settings.samples};
  out.alpha_prime = std::numeric_limits<double>::infinity();
  {
    const double strict = strict_cover_bound(h.n, h.s, 1);
    const double direct = unit_ball_volume(h.n) * std::pow(h.s, h.n) / 8.0;
    out.entries.push_back(upper_check(kVerdicts, "strict cover bound k=1", "plane coverage: omega_n s^n / 2^(k+2)",
                                      std::abs(strict - direct), 1e-15 * direct, cat("bound ", strict)));
  }
  for (int k = 1; k <= family.depth(); ++k) {
    const std::uint64_t m = m_sequence(static_cast<std::uint64_t>(k));
    const AffinePlane a = planes.plane(m);
    const MeasureEstimate d = coverage_deficit(family, m, k, budget, seed);
    const double bound = coverage_deficit_bound(h, a, k);
    out.entries.push_back(interval_check(kVerdicts, cat("cover deficit k=", k), "plane coverage: deficit of A_(m_k) outside P_k",
                                         d.lower(), d.value, d.upper(), bound, cat("plane m = ", m)));
    const MeasureEstimate cov = plane_coverage(family, m, k, budget, seed);
    out.alpha_prime = std::min(out.alpha_prime, cov.lower());
    out.entries.push_back(lower_check(kVerdicts, cat("plane coverage k=", k), "plane coverage: achieved alpha'",
                                      cov.lower(), 0.0, cat("estimate ", cov.value, " +- ", cov.half_width)));
  }
  if (!std::isfinite(out.alpha_prime)) out.alpha_prime = 0.0;
  return out;
}

// ---- budget ----------------------------------------------------------------------------------

BudgetSummary budget_audits(const HoleFamily& family, const std::vector<GraphPatch>& corpus,
                            const AuditSettings& settings, std::uint64_t seed) {
  BudgetSummary out;
  BudgetOptions opt;
  opt.residue = SamplingBudget{settings.residue_samples};
  opt.energy = SamplingBudget{settings.samples};
  std::vector<GraphPatch> fields;
  const int n = family.header.n;
  fields.push_back(make_patch(ScalarField::constant(Ball{base_center(n), family.header.s}, 0.0), 0.0, "flat"));
  fields.insert(fields.end(), corpus.begin(), corpus.end());

  std::uint64_t d_total = 0, pairs_total = 0, proof_failures = 0;
  for (std::size_t fi = 0; fi < fields.size(); ++fi) {
    const GraphPatch& patch = fields[fi];
    opt.seed = stream_key(seed, {fnv1a("budget"), fi});
    BudgetLedger L;
    try {
      L = budget(patch, family, opt);
    } catch (const PreconditionError& e) {
      out.entries.push_back(status_entry(kBudget, patch.provenance + " precondition", "budget: ||g||_C1 <= 1/64",
                                         patch.c1_bound(), Status::fail, e.what()));
      continue;
    }
    const std::string f = patch.provenance;
    for (const StageLedger& s : L.stages) {
      const std::string id = f + " " + stage_id(s.k);
      out.entries.push_back(upper_check(kBudget, id + " u-mass", "u-family mass <= eps_k", s.u_mass, s.epsilon,
                                        cat(s.u_count, " u-holes, ", s.d_count, " d-holes, ", s.hits_K, " hits at K_k")));
      out.entries.push_back(zero_check(kBudget, id + " residue disjointness", "residue regions of hit holes are disjoint",
                                       static_cast<double>(s.disjoint.violations),
                                       cat(s.disjoint.pairs_checked, " overlapping pairs sampled, ",
                                           s.disjoint.proof_bound_failures, " outside the radius-ratio proof bound")));
      if (s.indeterminate_count > 0) {
        out.entries.push_back(status_entry(kBudget, id + " classification", "u/d classification",
                                           static_cast<double>(s.indeterminate_count), Status::indeterminate,
                                           "holes whose threshold stays inside the confidence interval"));
      }
      if (s.k >= 2) {
        out.entries.push_back(upper_check(kBudget, id + " smoothing gap", "smoothed field: |g - g~| <= eps_k r_(k-1)",
                                          s.smoothing_gap, s.smoothing_gap_bound, cat(s.s_count, " selected balls")));
        out.entries.push_back(upper_check(kBudget, id + " smoothed gradient", "smoothed field: |grad g~| <= 1/32",
                                          s.smoothed_grad, s.smoothed_grad_bound));
        out.entries.push_back(zero_check(kBudget, id + " hit consistency", "hits of g at K_k carry to g~ at K_(k-1)",
                                         static_cast<double>(s.consistency_failures),
                                         cat(s.consistency_checked, " holes checked")));
      }
      d_total += s.d_count;
      pairs_total += s.disjoint.pairs_checked;
      proof_failures += s.disjoint.proof_bound_failures;
      out.global_dbound_c = std::max(out.global_dbound_c, s.dbound_c);
    }
    if (fi == 0) {
      out.entries.push_back(zero_check(kBudget, "flat field hit mass", "holes do not meet their base plane",
                                       L.mass_plain, cat(L.hit_plain.size(), " holes hit")));
    }
    out.entries.push_back(upper_check(kBudget, f + " ledger", "hit mass <= C energy + C sum eps", L.mass_K,
                                      settings.constants.budget * (L.energy.value + L.epsilon_sum),
                                      cat("energy ", L.energy.value, ", empirical C ", L.empirical_c, ", plain hit mass ",
                                          L.mass_plain)));
    out.global_c = std::max(out.global_c, L.empirical_c);
    out.ledgers.push_back(std::move(L));
  }
  out.entries.push_back(upper_check(kVerdicts, "budget global C", "hit mass <= C energy + C sum eps, one C for the corpus",
                                    out.global_c, settings.constants.budget, cat(fields.size(), " fields")));
  out.entries.push_back(upper_check(kVerdicts, "dbound global C", "d-holes: |B| <= C ∫_R |grad(g - a)|^2",
                                    out.global_dbound_c, settings.constants.dbound,
                                    cat(d_total, " d-holes across the corpus")));
  out.entries.push_back(status_entry(kVerdicts, "residue disjointness pairs", "residue regions of hit holes are disjoint",
                                     static_cast<double>(pairs_total), Status::pass,
                                     cat(proof_failures, " sampled pairs fall outside the radius-ratio proof bound")));
  return out;
}

// ---- porosity --------------------------------------------------------------------------------

std::vector<AuditEntry> porosity_audits(const HoleFamily& family, const AuditSettings& settings, std::uint64_t seed) {
  std::vector<AuditEntry> out;
  const double L = family.header.L;
  const TruncatedP p(family, L, family.depth());
  const std::vector<Point> pts = sample_truncated_p(p, family, settings.porosity_points, seed);
  out.push_back(lower_check(kPorosity, "sampled points", "points of the truncated P", static_cast<double>(pts.size()),
                            static_cast<double>(settings.porosity_points)));
  double worst = std::numeric_limits<double>::infinity();
  std::uint64_t missing = 0;
  for (const Point& x : pts) {
    const auto w = porosity_witness(x, p, family);
    if (!w) {
      ++missing;
      continue;
    }
    worst = std::min(worst, w->ratio);
  }
  out.push_back(zero_check(kPorosity, "points without witness", "every point of P has a hole nearby",
                           static_cast<double>(missing)));
  if (pts.empty()) worst = 0.0;
  out.push_back(lower_check(kPorosity, "worst witness ratio", "porosity constant 1/L", worst, 1.0 / L - settings.porosity_tol,
                            cat("1/L = ", 1.0 / L)));
  return out;
}

// ---- hole mass -----------------------------------------------------------------------------------

std::vector<AuditEntry> holes_mass_audits(const HoleFamily& family, const std::vector<GraphPatch>& corpus,
                                          double alpha_prime, const AuditSettings& settings, std::uint64_t seed) {
  std::vector<AuditEntry> out;
  const int n = family.header.n;
  const HoleUnion holes = assemble_H(family);
  for (std::size_t fi = 0; fi < corpus.size(); ++fi) {
    const GraphPatch& patch = corpus[fi];
    const ScalarField& g = patch.g;
    std::vector<double> area(family.records.size(), 0.0);
    kernels::parallel_for(family.records.size(), kernels::default_exec(), [&](std::uint64_t i) {
      if (hit_test(g, family.records[i].hole(), 1.0)) area[i] = cross_section_area(family.records[i].t, n);
    });
    double hit_mass = 0.0;
    for (double a : area) hit_mass += a;
    const double r = g.grad_bound();
    const double cap = std::sqrt(1.0 + r * r) * hit_mass;
    const MeasureEstimate m = hole_intersection_mass(g, holes, family, SamplingBudget{settings.samples},
                                                     stream_key(seed, {fnv1a("holes-mass"), fi}));
    out.push_back(interval_check(kVerdicts, patch.provenance + " hole mass", "surface-hole mass <= sqrt(1+r^2) sum of hit |B|",
                                 m.lower(), m.value, m.upper(), cap, cat("hit mass ", hit_mass)));
    if (patch.provenance.rfind("plane#", 0) == 0) {
      out.push_back(interval_check(kVerdicts, patch.provenance + " hole mass vs alpha'/4",
                                   "plane surfaces meet H in less than alpha'/4", m.lower(), m.value, m.upper(),
                                   alpha_prime / 4.0, cat("alpha' = ", alpha_prime)));
    }
  }
  return out;
}

// ---- extraction -----------------------------------------------------------------------------------

std::vector<AuditEntry> extraction_audits(const std::vector<GraphPatch>& corpus, const FamilyHeader& header,
                                          const AuditSettings& settings, std::uint64_t seed) {
  std::vector<AuditEntry> out;
  const int n = header.n;
  const std::uint64_t probes = 1000;

  // Graph embeddings: the first n coordinates are the identity, so extraction must return g.
  double worst_round_trip = 0.0;
  for (std::size_t fi = 0; fi < corpus.size(); ++fi) {
    ExtractOptions opt;
    opt.s = header.s;
    opt.r = header.r;
    opt.delta = 1.0;  // the identity base map needs no Newton basin argument
    opt.enforce_r = false;
    const GraphPatch back = graph_extract(embed_graph(corpus[fi]), opt);
    const BallSampler sampler(back.g.domain(), stream_key(seed, {fnv1a("round-trip"), fi}), probes);
    const Moments m = sample_moments(sampler, probes, [&](std::span<const double> x) {
      return std::abs(back.g(x) - corpus[fi].g(x));
    });
    worst_round_trip = std::max(worst_round_trip, std::max(0.0, m.max));
  }
  out.push_back(upper_check(kAnalysis, "graph round trip", "graph extraction inverts graph embedding", worst_round_trip,
                            1e-10, cat(corpus.size(), " fields")));

  // Small vector-bump surfaces: graph identity and the extracted C^1 contract.
  const CounterRng rng(stream_key(seed, {fnv1a("extraction-surfaces")}));
  std::uint64_t ctr = 0;
  double worst_identity = 0.0, worst_c1 = 0.0;
  const int surfaces = 20;
  for (int i = 0; i < surfaces; ++i) {
    std::vector<VectorBump> bumps;
    for (int b = 0; b < 2; ++b) {
      VectorBump vb;
      vb.center = base_center(n);
      for (double& v : vb.center) v += 0.2 * (2.0 * rng.uniform(ctr++) - 1.0);
      vb.width = 0.3 + 0.3 * rng.uniform(ctr++);
      vb.amplitude.resize(static_cast<std::size_t>(n + 1));
      for (double& a : vb.amplitude) a = 2.0 * rng.uniform(ctr++) - 1.0;
      bumps.push_back(std::move(vb));
    }
    SurfaceC1 f(n, AffinePlane{std::vector<double>(static_cast<std::size_t>(n), 0.0), 0.0, 1}, bumps);
    // Scale so that ||f - p||_{C^1} sits at half of delta.
    const double dist = c1_distance_to_reference(f);
    const double scale = 0.5 * settings.extract_delta / dist;
    for (VectorBump& vb : bumps)
      for (double& a : vb.amplitude) a *= scale;
    f = SurfaceC1(n, AffinePlane{std::vector<double>(static_cast<std::size_t>(n), 0.0), 0.0, 1}, bumps, {},
                  cat("vector-bump surface #", i));
    ExtractOptions opt;
    opt.s = header.s;
    opt.r = header.r;
    opt.delta = settings.extract_delta;
    const GraphPatch patch = graph_extract(f, opt);
    worst_c1 = std::max(worst_c1, patch.c1_bound());
    const BallSampler sampler(patch.g.domain(), stream_key(seed, {fnv1a("graph-identity"), static_cast<std::uint64_t>(i)}), probes);
    const Moments m = sample_moments(sampler, probes, [&](std::span<const double> x) {
      const NewtonSolve sol = invert_base_map(f, x);
      std::array<double, kMaxDim> val{};
      f.eval(sol.u, std::span<double>(val.data(), static_cast<std::size_t>(n + 1)));
      double res = std::abs(val[static_cast<std::size_t>(n)] - patch.g(x));
      for (int j = 0; j < n; ++j) res = std::max(res, std::abs(val[static_cast<std::size_t>(j)] - x[static_cast<std::size_t>(j)]));
      return res;
    }, kernels::Exec::serial);
    worst_identity = std::max(worst_identity, std::max(0.0, m.max));
  }
  out.push_back(upper_check(kAnalysis, "graph identity", "f(f~^-1(x)) = (x, g(x)) for extracted graphs", worst_identity,
                            1e-10, cat(surfaces, " surfaces at ||f - p|| = delta/2")));
  out.push_back(upper_check(kAnalysis, "extracted C1 bound", "graph extraction: ||g||_C1 <= r", worst_c1, header.r,
                            cat("delta = ", settings.extract_delta)));
  return out;
}

nlohmann::ordered_json relaxed_mapping(const FamilyHeader& h) {
  nlohmann::ordered_json j = nlohmann::ordered_json::array();
  if (h.strict) {
    j.push_back("strict mode: enlargement 1/eps_k^3, stop 2^-(k+3), primed radius t/eps_k^3");
    return j;
  }
  j.push_back(cat("enlargement 1/eps_k^3 -> E = ", h.E));
  j.push_back("primed radius t' = t/eps_k^3 -> E t");
  j.push_back("stage stop omega_n s^n / 2^(k+3) -> stop_fraction(k) omega_n s^n");
  j.push_back("level coverage eps^(3n) / 2^(n+1) -> (1/(2E))^n / 2");
  j.push_back("cover deficit omega_n s^n / 2^(k+2) -> 2 stop_fraction(k) omega_n s^n sqrt(1 + |grad a|^2)");
  j.push_back("alpha = omega_n s^n / 2 -> alpha' = achieved plane coverage (lower CI)");
  j.push_back("smoothed gradient 1/32 - 3 sum eps_i -> 1/32");
  return j;
}

}  // namespace porous
