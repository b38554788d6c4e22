#include "porous/surfaces.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <memory>
#include <numbers>

#include <Eigen/Dense>

#include "porous/errors.hpp"
#include "porous/rng.hpp"

namespace porous {

namespace {

using SmallMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, kMaxDim, kMaxDim>;
using SmallVector = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, kMaxDim, 1>;

std::span<double> view(std::array<double, kMaxDim>& a, std::size_t d) { return {a.data(), d}; }

}  // namespace

// ---- bumps ----------------------------------------------------------------------------

double bump_profile(double rho) {
  if (rho >= 1.0) return 0.0;
  const double q = rho * rho;
  return std::exp(-q / (1.0 - q));
}

double bump_profile_derivative(double rho) {
  if (rho >= 1.0 || rho <= 0.0) return 0.0;
  const double q = rho * rho;
  return -bump_profile(rho) * 2.0 * rho / ((1.0 - q) * (1.0 - q));
}

double bump_slope_max() {
  const double q = 1.0 / std::sqrt(3.0);
  return 2.0 * std::sqrt(q) / ((1.0 - q) * (1.0 - q)) * std::exp(-q / (1.0 - q));
}

namespace {

bool supports_disjoint(std::span<const Bump> bumps) {
  for (std::size_t i = 0; i < bumps.size(); ++i)
    for (std::size_t j = i + 1; j < bumps.size(); ++j)
      if (distance(bumps[i].center, bumps[j].center) < bumps[i].width + bumps[j].width) return false;
  return true;
}

}  // namespace

double bumps_sup_bound(std::span<const Bump> bumps) {
  double mx = 0.0, sum = 0.0;
  for (const Bump& b : bumps) {
    mx = std::max(mx, std::abs(b.amplitude));
    sum += std::abs(b.amplitude);
  }
  return supports_disjoint(bumps) ? mx : sum;
}

double bumps_grad_bound(std::span<const Bump> bumps) {
  const double slope = bump_slope_max();
  double mx = 0.0, sum = 0.0;
  for (const Bump& b : bumps) {
    const double v = std::abs(b.amplitude) * slope / b.width;
    mx = std::max(mx, v);
    sum += v;
  }
  return supports_disjoint(bumps) ? mx : sum;
}

ScalarField bump_field(const Ball& domain, std::vector<Bump> bumps) {
  for (const Bump& b : bumps) {
    if (b.center.size() != domain.center.size()) throw InvalidArgument("bump_field: dimension mismatch");
    if (!(b.width > 0.0)) throw InvalidArgument("bump_field: width must be positive");
  }
  const double gb = bumps_grad_bound(bumps);
  auto shared = std::make_shared<const std::vector<Bump>>(std::move(bumps));
  auto eval = [shared](std::span<const double> x) {
    double v = 0.0;
    for (const Bump& b : *shared) {
      const double d2 = [&] {
        double s = 0.0;
        for (std::size_t j = 0; j < x.size(); ++j) s += (x[j] - b.center[j]) * (x[j] - b.center[j]);
        return s;
      }();
      if (d2 >= b.width * b.width) continue;
      v += b.amplitude * bump_profile(std::sqrt(d2) / b.width);
    }
    return v;
  };
  auto grad = [shared](std::span<const double> x, std::span<double> out) {
    std::fill(out.begin(), out.end(), 0.0);
    for (const Bump& b : *shared) {
      double d2 = 0.0;
      for (std::size_t j = 0; j < x.size(); ++j) d2 += (x[j] - b.center[j]) * (x[j] - b.center[j]);
      if (d2 >= b.width * b.width || d2 == 0.0) continue;
      const double d = std::sqrt(d2);
      const double f = b.amplitude * bump_profile_derivative(d / b.width) / (b.width * d);
      for (std::size_t j = 0; j < x.size(); ++j) out[j] += f * (x[j] - b.center[j]);
    }
  };
  return ScalarField(domain, eval, grad, gb);
}

// ---- surfaces -----------------------------------------------------------------------------

SurfaceC1::SurfaceC1(int n, AffinePlane plane, std::vector<VectorBump> bumps, std::optional<ScalarField> graph_term,
                     std::string provenance, std::vector<Point> extra_points)
    : n_(n),
      plane_(std::move(plane)),
      bumps_(std::move(bumps)),
      graph_(std::move(graph_term)),
      provenance_(std::move(provenance)),
      extra_points_(std::move(extra_points)) {
  if (n < 1 || n + 1 > kMaxDim) throw InvalidArgument("SurfaceC1: unsupported dimension");
  if (plane_.dim() != n) throw InvalidArgument("SurfaceC1: plane dimension mismatch");
  for (const VectorBump& b : bumps_) {
    if (static_cast<int>(b.center.size()) != n || static_cast<int>(b.amplitude.size()) != n + 1)
      throw InvalidArgument("SurfaceC1: bump dimension mismatch");
    if (!(b.width > 0.0)) throw InvalidArgument("SurfaceC1: bump width must be positive");
  }
  if (graph_ && graph_->dim() != n) throw InvalidArgument("SurfaceC1: graph term dimension mismatch");
}

void SurfaceC1::eval(std::span<const double> u, std::span<double> out) const {
  const auto n = static_cast<std::size_t>(n_);
  for (std::size_t i = 0; i < n; ++i) out[i] = u[i];
  out[n] = plane_(u);
  for (const VectorBump& b : bumps_) {
    const double phi = bump_profile(distance(u, b.center) / b.width);
    if (phi == 0.0) continue;
    for (std::size_t i = 0; i <= n; ++i) out[i] += b.amplitude[i] * phi;
  }
  if (graph_) out[n] += (*graph_)(u);
}

void SurfaceC1::jacobian(std::span<const double> u, std::span<double> out) const {
  const auto n = static_cast<std::size_t>(n_);
  std::fill(out.begin(), out.begin() + static_cast<std::ptrdiff_t>((n + 1) * n), 0.0);
  for (std::size_t i = 0; i < n; ++i) out[i * n + i] = 1.0;
  for (std::size_t j = 0; j < n; ++j) out[n * n + j] = plane_.gradient[j];
  for (const VectorBump& b : bumps_) {
    const double d = distance(u, b.center);
    const double dphi = bump_profile_derivative(d / b.width);
    if (dphi == 0.0) continue;
    for (std::size_t j = 0; j < n; ++j) {
      const double dr = dphi * (u[j] - b.center[j]) / (b.width * d);
      for (std::size_t i = 0; i <= n; ++i) out[i * n + j] += b.amplitude[i] * dr;
    }
  }
  if (graph_) {
    std::array<double, kMaxDim> g{};
    graph_->gradient(u, view(g, n));
    for (std::size_t j = 0; j < n; ++j) out[n * n + j] += g[j];
  }
}

std::vector<Point> SurfaceC1::declared_points() const {
  std::vector<Point> pts = extra_points_;
  const double rho = std::sqrt(1.0 / std::sqrt(3.0));
  for (const VectorBump& b : bumps_) {
    pts.push_back(b.center);
    for (int j = 0; j < n_; ++j) {
      for (double sgn : {-1.0, 1.0}) {
        Point p = b.center;
        p[static_cast<std::size_t>(j)] += sgn * rho * b.width;
        pts.push_back(p);
      }
    }
  }
  std::erase_if(pts, [](const Point& p) {
    return std::any_of(p.begin(), p.end(), [](double v) { return v < 0.0 || v > 1.0; });
  });
  return pts;
}

SurfaceC1 reference_surface(int n) {
  return SurfaceC1(n, AffinePlane{std::vector<double>(static_cast<std::size_t>(n), 0.0), 0.0, 1}, {}, {}, "p");
}

SurfaceC1 embed_plane(const AffinePlane& a) {
  return SurfaceC1(a.dim(), a, {}, {}, "plane " + std::to_string(a.index));
}

SurfaceC1 embed_graph(const GraphPatch& patch) {
  const int n = patch.g.dim();
  return SurfaceC1(n, AffinePlane{std::vector<double>(static_cast<std::size_t>(n), 0.0), 0.0, 1}, {}, patch.g,
                   patch.provenance, patch.declared);
}

namespace {

/// Visits the lattice of [0,1]^n (m per axis) followed by the declared points.
template <class Fn>
void for_each_probe(const SurfaceC1& f, int m, Fn&& fn) {
  const int n = f.n();
  if (m < 2) throw InvalidArgument("c1_norm: lattice needs at least 2 points per axis");
  std::vector<int> idx(static_cast<std::size_t>(n), 0);
  Point u(static_cast<std::size_t>(n));
  while (true) {
    for (int j = 0; j < n; ++j) u[static_cast<std::size_t>(j)] = static_cast<double>(idx[static_cast<std::size_t>(j)]) / (m - 1);
    fn(u);
    int j = 0;
    while (j < n && idx[static_cast<std::size_t>(j)] == m - 1) idx[static_cast<std::size_t>(j++)] = 0;
    if (j == n) break;
    ++idx[static_cast<std::size_t>(j)];
  }
  for (const Point& p : f.declared_points()) fn(p);
}

double c1_on_probes(const SurfaceC1& f, int m, bool relative) {
  const auto n = static_cast<std::size_t>(f.n());
  double best = 0.0;
  std::array<double, kMaxDim> val{};
  std::vector<double> jac((n + 1) * n);
  for_each_probe(f, static_cast<int>(m), [&](const Point& u) {
    f.eval(u, view(val, n + 1));
    if (relative)
      for (std::size_t i = 0; i < n; ++i) val[i] -= u[i];
    best = std::max(best, norm(std::span<const double>(val.data(), n + 1)));
    f.jacobian(u, jac);
    for (std::size_t j = 0; j < n; ++j) {
      double s = 0.0;
      for (std::size_t i = 0; i <= n; ++i) {
        const double v = jac[i * n + j] - (relative && i == j ? 1.0 : 0.0);
        s += v * v;
      }
      best = std::max(best, std::sqrt(s));
    }
  });
  return best;
}

}  // namespace

double c1_norm(const SurfaceC1& f, int lattice_per_dim) { return c1_on_probes(f, lattice_per_dim, false); }

double c1_distance_to_reference(const SurfaceC1& f, int lattice_per_dim) {
  return c1_on_probes(f, lattice_per_dim, true);
}

GraphPatch make_patch(ScalarField g, double sup_bound, std::string provenance, std::vector<Point> declared) {
  return GraphPatch{std::move(g), sup_bound, std::move(provenance), std::move(declared)};
}

// ---- extraction ---------------------------------------------------------------------------

NewtonSolve invert_base_map(const SurfaceC1& f, std::span<const double> x, double tol, int max_iter) {
  const auto n = static_cast<std::size_t>(f.n());
  NewtonSolve out;
  out.u.assign(x.begin(), x.end());
  std::array<double, kMaxDim> val{};
  std::vector<double> jac((n + 1) * n);
  auto residual = [&](const Point& u, SmallVector* F) {
    f.eval(u, view(val, n + 1));
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double r = val[i] - x[i];
      if (F) (*F)(static_cast<Eigen::Index>(i)) = r;
      s += r * r;
    }
    return std::sqrt(s);
  };
  SmallVector F(static_cast<Eigen::Index>(n));
  double res = residual(out.u, &F);
  Point trial(n);
  for (int it = 0; it < max_iter && res > tol; ++it) {
    f.jacobian(out.u, jac);
    SmallMatrix J(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) J(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = jac[i * n + j];
    const SmallVector step = J.partialPivLu().solve(F);
    double lambda = 1.0;
    double next = res;
    for (int h = 0; h < 30; ++h) {
      for (std::size_t i = 0; i < n; ++i) trial[i] = out.u[i] - lambda * step(static_cast<Eigen::Index>(i));
      next = residual(trial, nullptr);
      if (next < res) break;
      lambda *= 0.5;
    }
    if (!(next < res)) break;
    out.u = trial;
    res = residual(out.u, &F);
    out.iterations = it + 1;
  }
  out.residual = res;
  if (!(res <= tol)) {
    std::string where;
    for (double v : x) where += (where.empty() ? "" : ", ") + std::to_string(v);
    throw ExtractionError("graph_extract: Newton did not converge at x = (" + where + "), residual " +
                          std::to_string(res));
  }
  return out;
}

GraphPatch graph_extract(const SurfaceC1& f, const ExtractOptions& opt) {
  const int n = f.n();
  const double dist = c1_distance_to_reference(f, opt.audit_lattice);
  if (!(dist < opt.delta)) {
    throw PreconditionError("||f - p||_{C^1} < delta", "graph_extract: ||f - p||_{C^1} = " + std::to_string(dist) +
                                                           " is not below delta = " + std::to_string(opt.delta));
  }

  // Certified bounds from the analytic representation: the first n coordinates deviate
  // from the identity by at most c_base in each partial and by at most shift in value; the
  // last coordinate has partials at most c_last.
  const double slope = bump_slope_max();
  const double rn = std::sqrt(static_cast<double>(n));
  double c_base = 0.0, shift = 0.0, c_last = f.plane().slope(), sup_bumps = 0.0;
  for (const VectorBump& b : f.bumps()) {
    double base = 0.0;
    for (int i = 0; i < n; ++i) base += b.amplitude[static_cast<std::size_t>(i)] * b.amplitude[static_cast<std::size_t>(i)];
    c_base += std::sqrt(base) * slope / b.width;
    shift += std::sqrt(base);
    c_last += std::abs(b.amplitude[static_cast<std::size_t>(n)]) * slope / b.width;
    sup_bumps += std::abs(b.amplitude[static_cast<std::size_t>(n)]);
  }
  if (f.graph_term()) c_last += f.graph_term()->grad_bound();
  if (rn * c_base >= 1.0)
    throw PreconditionError("first n coordinates invertible", "graph_extract: perturbation too large to invert");
  const double grad_bound = f.bumps().empty() ? c_last : rn * c_last / (1.0 - rn * c_base);
  // Preimages of B(c, s) lie in B(c, s + shift); bound the last coordinate there.
  const Point c = base_center(n);
  const double reach = opt.s + shift;
  double sup_bound = std::abs(f.plane()(c)) + f.plane().slope() * reach + sup_bumps;
  if (f.graph_term()) sup_bound += std::abs((*f.graph_term())(c)) + f.graph_term()->grad_bound() * reach;

  const double tol = opt.tol;
  const int max_iter = opt.max_iter;
  const auto nn = static_cast<std::size_t>(n);
  auto eval = [f, tol, max_iter, nn](std::span<const double> x) {
    const NewtonSolve sol = invert_base_map(f, x, tol, max_iter);
    std::array<double, kMaxDim> val{};
    f.eval(sol.u, view(val, nn + 1));
    return val[nn];
  };
  auto grad = [f, tol, max_iter, nn](std::span<const double> x, std::span<double> out) {
    const NewtonSolve sol = invert_base_map(f, x, tol, max_iter);
    std::vector<double> jac((nn + 1) * nn);
    f.jacobian(sol.u, jac);
    SmallMatrix Jt(static_cast<Eigen::Index>(nn), static_cast<Eigen::Index>(nn));
    SmallVector top(static_cast<Eigen::Index>(nn));
    for (std::size_t i = 0; i < nn; ++i) {
      top(static_cast<Eigen::Index>(i)) = jac[nn * nn + i];
      for (std::size_t j = 0; j < nn; ++j) Jt(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = jac[i * nn + j];
    }
    const SmallVector gvec = Jt.partialPivLu().solve(top);
    for (std::size_t j = 0; j < nn; ++j) out[j] = gvec(static_cast<Eigen::Index>(j));
  };
  ScalarField g(Ball{c, opt.s}, eval, grad, grad_bound);
  GraphPatch patch = make_patch(std::move(g), sup_bound, "extracted from " + f.provenance(), f.declared_points());
  if (opt.enforce_r && patch.c1_bound() > opt.r) {
    throw PreconditionError("||g||_{C^1} <= r", "graph_extract: certified C^1 bound " +
                                                    std::to_string(patch.c1_bound()) + " exceeds r = " +
                                                    std::to_string(opt.r));
  }
  return patch;
}

// ---- graph measure -----------------------------------------------------------------------------

MeasureEstimate graph_measure_in(const ScalarField& g, const PointPredicate& target, const SamplingBudget& budget,
                                 std::uint64_t seed, kernels::Exec exec) {
  const auto n = static_cast<std::size_t>(g.dim());
  const BallSampler sampler(g.domain(), stream_key(seed, {fnv1a("graph_measure")}), budget.samples);
  const Moments m = sample_moments(
      sampler, budget.samples,
      [&](std::span<const double> x) {
        std::array<double, kMaxDim> z{};
        std::copy(x.begin(), x.end(), z.begin());
        z[n] = g(x);
        if (!target(std::span<const double>(z.data(), n + 1))) return 0.0;
        const double gn = g.gradient_norm(x);
        return std::sqrt(1.0 + gn * gn);
      },
      exec);
  return mean_estimate(m, sampler.volume());
}

std::string to_string(Membership m) {
  switch (m) {
    case Membership::member: return "member";
    case Membership::non_member: return "non-member";
    case Membership::indeterminate: return "indeterminate";
  }
  return "indeterminate";
}

MembershipVerdict sn_membership(const ScalarField& g, const PointPredicate& target, double alpha,
                                const SamplingBudget& budget, std::uint64_t seed) {
  if (!(alpha >= 0.0)) throw InvalidArgument("sn_membership: alpha must be non-negative");
  MembershipVerdict v;
  v.measure = graph_measure_in(g, target, budget, seed);
  if (v.measure.lower() > alpha) {
    v.verdict = Membership::member;
    v.margin = v.measure.lower() - alpha;
  } else if (v.measure.upper() < alpha || (v.measure.upper() == alpha && v.measure.half_width == 0.0 && alpha > 0.0)) {
    v.verdict = Membership::non_member;
    v.margin = alpha - v.measure.upper();
  }
  return v;
}

// ---- corpora --------------------------------------------------------------------------------------

namespace {

Point random_point_in_ball(const Point& c, double radius, const CounterRng& rng, std::uint64_t& counter) {
  const auto n = c.size();
  Point p(n);
  while (true) {
    double r2 = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const double y = 2.0 * rng.uniform(counter++) - 1.0;
      p[j] = y;
      r2 += y * y;
    }
    if (r2 < 1.0) break;
  }
  for (std::size_t j = 0; j < n; ++j) p[j] = c[j] + radius * p[j];
  return p;
}

std::vector<Point> bump_declared(const std::vector<Bump>& bumps) {
  std::vector<Point> pts;
  const double rho = std::sqrt(1.0 / std::sqrt(3.0));
  for (const Bump& b : bumps) {
    pts.push_back(b.center);
    for (std::size_t j = 0; j < b.center.size(); ++j) {
      Point p = b.center;
      p[j] += rho * b.width;
      pts.push_back(p);
    }
  }
  return pts;
}

}  // namespace

std::vector<GraphPatch> corpus_generate(const CorpusSpec& spec, int n, double s) {
  if (spec.count < 0) throw InvalidArgument("corpus: count must be non-negative");
  if (!(spec.c1_ceiling > 0.0)) throw InvalidArgument("corpus: c1_ceiling must be positive");
  if (!(spec.amplitude_fraction > 0.0 && spec.amplitude_fraction <= 1.0))
    throw InvalidArgument("corpus: amplitude_fraction must lie in (0, 1]");
  const Point c = base_center(n);
  const Ball domain{c, s};
  const CounterRng rng(stream_key(spec.seed, {fnv1a(spec.kind)}));
  std::uint64_t counter = 0;
  const double slope = bump_slope_max();
  const double ceiling = spec.c1_ceiling;
  std::vector<GraphPatch> out;

  auto name = [&](int i) { return spec.kind + "#" + std::to_string(i) + " seed " + std::to_string(spec.seed); };
  auto check = [&](const GraphPatch& p) {
    if (p.c1_bound() > ceiling * (1.0 + 1e-12))
      throw InvalidArgument("corpus: " + p.provenance + " has C^1 bound " + std::to_string(p.c1_bound()) +
                            " above the ceiling " + std::to_string(ceiling));
  };

  if (spec.kind == "plane") {
    for (int i = 0; i < spec.count; ++i) {
      AffinePlane a;
      a.index = i + 1;
      if (!spec.gradient.empty()) {
        if (static_cast<int>(spec.gradient.size()) != n) throw InvalidArgument("corpus: plane gradient has the wrong dimension");
        a.gradient = spec.gradient;
        a.offset = spec.offset;
      } else {
        const Point dir = random_point_in_ball(Point(static_cast<std::size_t>(n), 0.0), 1.0, rng, counter);
        const double len = norm(dir);
        const double mag = spec.amplitude_fraction * ceiling * rng.uniform(counter++) / (1.0 + s);
        a.gradient.resize(static_cast<std::size_t>(n));
        for (int j = 0; j < n; ++j) a.gradient[static_cast<std::size_t>(j)] = len > 0 ? mag * dir[static_cast<std::size_t>(j)] / len : 0.0;
        a.offset = (2.0 * rng.uniform(counter++) - 1.0) * spec.amplitude_fraction * (ceiling - mag * s);
      }
      GraphPatch p = make_patch(ScalarField::affine(domain, a), std::abs(a.offset) + a.slope() * s, name(i));
      check(p);
      out.push_back(std::move(p));
    }
    return out;
  }

  if (!(spec.width_min > 0.0 && spec.width_max >= spec.width_min))
    throw InvalidArgument("corpus: need 0 < width_min <= width_max");

  auto pick_sign = [&]() { return spec.allow_negative && rng.uniform(counter++) < 0.5 ? -1.0 : 1.0; };
  auto pick_width = [&]() { return spec.width_min + (spec.width_max - spec.width_min) * rng.uniform(counter++); };

  if (spec.kind == "bump" || spec.kind == "multi-bump") {
    const int m = spec.kind == "bump" ? 1 : spec.bumps_per_field;
    if (m < 1) throw InvalidArgument("corpus: bumps_per_field must be >= 1");
    for (int i = 0; i < spec.count; ++i) {
      std::vector<Bump> bumps;
      for (int b = 0; b < m; ++b) {
        Bump bump;
        bump.width = pick_width();
        bump.center = random_point_in_ball(c, spec.center_spread * s, rng, counter);
        const double cap = ceiling * std::min(1.0, bump.width / slope) / m;
        bump.amplitude = pick_sign() * (spec.amplitude > 0.0 ? spec.amplitude : spec.amplitude_fraction * cap);
        bumps.push_back(std::move(bump));
      }
      const double sup = bumps_sup_bound(bumps);
      auto declared = bump_declared(bumps);
      GraphPatch p = make_patch(bump_field(domain, std::move(bumps)), sup, name(i), std::move(declared));
      check(p);
      out.push_back(std::move(p));
    }
    return out;
  }

  if (spec.kind == "mollified-noise") {
    // Random point masses on a lattice, convolved with the bump kernel of width 2 * spacing.
    if (!(spec.spacing > 0.0)) throw InvalidArgument("corpus: spacing must be positive");
    const double h = spec.spacing;
    const double w = 2.0 * h;
    const int reach = static_cast<int>(std::ceil((s + w) / h));
    // Lattice points strictly inside a ball of radius w around any x.
    int overlap = 0;
    {
      std::vector<int> idx(static_cast<std::size_t>(n), -3);
      while (true) {
        double r2 = 0.0;
        for (int v : idx) r2 += static_cast<double>(v) * v;
        if (r2 < 9.0) ++overlap;  // (w + h)^2 / h^2 covers every lattice point within w of a point in a cell
        int j = 0;
        while (j < n && idx[static_cast<std::size_t>(j)] == 3) idx[static_cast<std::size_t>(j++)] = -3;
        if (j == n) break;
        ++idx[static_cast<std::size_t>(j)];
      }
    }
    const double amp_max = spec.amplitude_fraction * ceiling * std::min(1.0, w / slope) / overlap;
    for (int i = 0; i < spec.count; ++i) {
      std::vector<Bump> bumps;
      std::vector<int> idx(static_cast<std::size_t>(n), -reach);
      while (true) {
        Bump b;
        b.center = c;
        for (int j = 0; j < n; ++j) b.center[static_cast<std::size_t>(j)] += h * idx[static_cast<std::size_t>(j)];
        b.width = w;
        const double u = 2.0 * rng.uniform(counter++) - 1.0;
        b.amplitude = amp_max * (spec.allow_negative ? u : std::abs(u));
        if (distance(b.center, c) < s + w) bumps.push_back(std::move(b));
        int j = 0;
        while (j < n && idx[static_cast<std::size_t>(j)] == reach) idx[static_cast<std::size_t>(j++)] = -reach;
        if (j == n) break;
        ++idx[static_cast<std::size_t>(j)];
      }
      const double sup = amp_max * overlap;
      ScalarField f = bump_field(domain, std::move(bumps));
      f = f.with_grad_bound(std::min(f.grad_bound(), amp_max * overlap * slope / w));
      GraphPatch p = make_patch(std::move(f), sup, name(i));
      check(p);
      out.push_back(std::move(p));
    }
    return out;
  }

  throw InvalidArgument("corpus: unknown kind '" + spec.kind + "'");
}

}  // namespace porous
