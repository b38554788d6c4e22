#include "porous/analysis.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include "porous/errors.hpp"
#include "porous/quadrature.hpp"
#include "porous/rng.hpp"

namespace porous {

namespace {

double profile(double rho2) { return rho2 < 1.0 ? std::exp(1.0 / (rho2 - 1.0)) : 0.0; }

std::span<double> view(std::array<double, kMaxDim>& a, int d) { return {a.data(), static_cast<std::size_t>(d)}; }

}  // namespace

// ---- mollifier --------------------------------------------------------------------------

double mollifier_kappa(int n, int m) {
  const GaussLegendre rule = gauss_legendre(m);
  const double radial = integrate([n](double r) { return profile(r * r) * std::pow(r, n - 1); }, 0.0, 1.0, rule);
  return 1.0 / (n * unit_ball_volume(n) * radial);
}

Mollifier::Mollifier(int n, double epsilon) : n_(n), epsilon_(epsilon), kappa_(0.0) {
  if (n < 1 || n > kMaxDim) throw InvalidArgument("Mollifier: unsupported dimension");
  if (!(epsilon > 0.0)) throw InvalidArgument("Mollifier: epsilon must be positive");
  kappa_ = mollifier_kappa(n);
}

double Mollifier::eta(std::span<const double> x) const { return kappa_ * profile(dot(x, x)); }

double Mollifier::eta_eps(std::span<const double> x) const {
  return eta_eps_radial(norm(x));
}

double Mollifier::eta_eps_radial(double rho) const {
  const double u = rho / epsilon_;
  return kappa_ * profile(u * u) / std::pow(epsilon_, n_);
}

double Mollifier::mass(int m) const {
  const GaussLegendre rule = gauss_legendre(m);
  const double radial =
      integrate([this](double r) { return eta_eps_radial(r) * std::pow(r, n_ - 1); }, 0.0, epsilon_, rule);
  return n_ * unit_ball_volume(n_) * radial;
}

Mollifier make_mollifier(int n, double epsilon) { return Mollifier(n, epsilon); }

std::shared_ptr<const ConvolutionStencil> make_stencil(int n, double epsilon, int nodes_per_dim) {
  if (n < 1 || n > kMaxDim) throw InvalidArgument("make_stencil: unsupported dimension");
  if (!(epsilon > 0.0)) throw InvalidArgument("make_stencil: epsilon must be positive");
  const GaussLegendre rule = gauss_legendre(nodes_per_dim);
  auto st = std::make_shared<ConvolutionStencil>();
  st->dim = n;
  st->epsilon = epsilon;
  std::vector<int> idx(static_cast<std::size_t>(n), 0);
  double total = 0.0;
  while (true) {
    double w = 1.0, r2 = 0.0;
    for (int j = 0; j < n; ++j) {
      const double xi = rule.nodes[static_cast<std::size_t>(idx[static_cast<std::size_t>(j)])];
      w *= rule.weights[static_cast<std::size_t>(idx[static_cast<std::size_t>(j)])];
      r2 += xi * xi;
    }
    const double e = w * profile(r2);
    if (e > 0.0) {
      for (int j = 0; j < n; ++j)
        st->offsets.push_back(epsilon * rule.nodes[static_cast<std::size_t>(idx[static_cast<std::size_t>(j)])]);
      st->weights.push_back(e);
      total += e;
    }
    int j = 0;
    while (j < n && idx[static_cast<std::size_t>(j)] == nodes_per_dim - 1) idx[static_cast<std::size_t>(j++)] = 0;
    if (j == n) break;
    ++idx[static_cast<std::size_t>(j)];
  }
  // Normalising by the discrete mass keeps constants exact; the symmetric nodes then
  // keep affine functions exact as well.
  for (double& w : st->weights) w /= total;
  return st;
}

ScalarField mollify(const ScalarField& g, double eps_len, int nodes_per_dim) {
  const Ball& dom = g.domain();
  if (!(eps_len > 0.0)) throw InvalidArgument("mollify: eps_len must be positive");
  if (!(eps_len < dom.radius)) throw InvalidArgument("mollify: eps_len must be smaller than the domain radius");
  auto st = make_stencil(g.dim(), eps_len, nodes_per_dim);
  const int d = g.dim();
  auto eval = [g, st, d](std::span<const double> x) {
    std::array<double, kMaxDim> y{};
    double sum = 0.0;
    for (std::size_t i = 0; i < st->size(); ++i) {
      const auto z = st->offset(i);
      for (int j = 0; j < d; ++j) y[static_cast<std::size_t>(j)] = x[static_cast<std::size_t>(j)] - z[static_cast<std::size_t>(j)];
      sum += st->weights[i] * g(view(y, d));
    }
    return sum;
  };
  auto grad = [g, st, d](std::span<const double> x, std::span<double> out) {
    std::array<double, kMaxDim> y{}, gy{};
    std::fill(out.begin(), out.end(), 0.0);
    for (std::size_t i = 0; i < st->size(); ++i) {
      const auto z = st->offset(i);
      for (int j = 0; j < d; ++j) y[static_cast<std::size_t>(j)] = x[static_cast<std::size_t>(j)] - z[static_cast<std::size_t>(j)];
      g.gradient(view(y, d), view(gy, d));
      for (int j = 0; j < d; ++j) out[static_cast<std::size_t>(j)] += st->weights[i] * gy[static_cast<std::size_t>(j)];
    }
  };
  return ScalarField(Ball{dom.center, dom.radius - eps_len}, eval, grad, g.grad_bound());
}

// ---- cut-off and blend ------------------------------------------------------------------

CutoffField::CutoffField(Ball b, double eps, int nodes_per_dim) : ball_(std::move(b)), eps_(eps) {
  if (!(eps > 0.0 && eps < 0.5)) throw InvalidArgument("make_cutoff: eps must lie in (0, 1/2)");
  if (!(ball_.radius > 0.0)) throw InvalidArgument("make_cutoff: radius must be positive");
  const double t = ball_.radius;
  const double lo = t - 5.0 * eps * t / 3.0;  // ramp is 1 inside
  const double hi = t - 4.0 * eps * t / 3.0;  // ramp is 0 outside
  const double slope = 3.0 / (eps * t);
  const Point c = ball_.center;
  auto ramp = [c, lo, hi, slope](std::span<const double> x) {
    const double d = distance(x, c);
    if (d <= lo) return 1.0;
    if (d >= hi) return 0.0;
    return (hi - d) * slope;
  };
  auto ramp_grad = [c, lo, hi, slope](std::span<const double> x, std::span<double> out) {
    const double d = distance(x, c);
    if (d <= lo || d >= hi) {
      std::fill(out.begin(), out.end(), 0.0);
      return;
    }
    for (std::size_t j = 0; j < out.size(); ++j) out[j] = -slope * (x[j] - c[j]) / d;
  };
  const ScalarField wt(Ball{c, t}, ramp, ramp_grad, slope);
  w_ = mollify(wt, eps * t / 3.0, nodes_per_dim);
}

double CutoffField::operator()(std::span<const double> x) const {
  const double d = distance(x, ball_.center);
  if (d >= outer_radius()) return 0.0;
  if (d <= inner_radius()) return 1.0;
  return std::clamp(w_(x), 0.0, 1.0);
}

void CutoffField::gradient(std::span<const double> x, std::span<double> out) const {
  const double d = distance(x, ball_.center);
  if (d >= outer_radius() || d <= inner_radius()) {
    std::fill(out.begin(), out.end(), 0.0);
    return;
  }
  w_.gradient(x, out);
}

CutoffField make_cutoff(const Ball& b, double eps, int nodes_per_dim) { return CutoffField(b, eps, nodes_per_dim); }

ScalarField blend(const ScalarField& g1, const ScalarField& g2, const CutoffField& w, std::uint64_t probes,
                  std::uint64_t seed, BlendAudit* audit) {
  const double eps = w.epsilon();
  const double t = w.ball().radius;
  const double allowed = eps * eps * t;
  const int d = g2.dim();

  // Precondition on the annulus B(x, t - eps t) \ B(x, t - 2 eps t).
  BlendAudit a;
  a.allowed = allowed;
  const BallSampler sampler(Ball{w.ball().center, w.outer_radius()}, stream_key(seed, {fnv1a("blend")}), probes);
  std::array<double, kMaxDim> buf{};
  for (std::uint64_t i = 0; i < probes; ++i) {
    if (!sampler.attempt(i, view(buf, d))) continue;
    if (distance(view(buf, d), w.ball().center) < w.inner_radius()) continue;
    ++a.probes;
    const double gap = std::abs(g1(view(buf, d)) - g2(view(buf, d)));
    if (gap > a.worst_gap) {
      a.worst_gap = gap;
      a.worst_probe.assign(buf.begin(), buf.begin() + d);
    }
  }
  if (audit) *audit = a;
  if (a.worst_gap > allowed) {
    std::string where;
    for (double v : a.worst_probe) where += (where.empty() ? "" : ", ") + std::to_string(v);
    throw PreconditionError("|g1 - g2| <= eps^2 t on the transition annulus",
                            "blend: |g1 - g2| = " + std::to_string(a.worst_gap) + " > " + std::to_string(allowed) +
                                " at (" + where + ")");
  }

  auto eval = [g1, g2, w](std::span<const double> x) {
    const double wx = w(x);
    if (wx == 0.0) return g2(x);
    if (wx == 1.0) return g1(x);
    return wx * g1(x) + (1.0 - wx) * g2(x);
  };
  auto grad = [g1, g2, w, d](std::span<const double> x, std::span<double> out) {
    const double wx = w(x);
    if (wx == 0.0) return g2.gradient(x, out);
    if (wx == 1.0) return g1.gradient(x, out);
    std::array<double, kMaxDim> a1{}, a2{}, dw{};
    g1.gradient(x, view(a1, d));
    g2.gradient(x, view(a2, d));
    w.gradient(x, view(dw, d));
    const double diff = g1(x) - g2(x);
    for (int j = 0; j < d; ++j) {
      const auto u = static_cast<std::size_t>(j);
      out[u] = wx * a1[u] + (1.0 - wx) * a2[u] + diff * dw[u];
    }
  };
  return ScalarField(g2.domain(), eval, grad, std::max(g1.grad_bound(), g2.grad_bound()) + 3.0 * eps);
}

// ---- inequalities --------------------------------------------------------------------------

double sobolev_exponent(int n) {
  if (n <= 2) throw InvalidArgument("sobolev_exponent: needs n > 2");
  return 2.0 * n / (n - 2.0);
}

SobolevResult sobolev_ratio(const ScalarField& g, const Ball& b, double alpha, const SamplingBudget& budget,
                            std::uint64_t seed) {
  if (b.dim() != g.dim()) throw InvalidArgument("sobolev_ratio: dimension mismatch");
  SobolevResult res;
  res.exponent = sobolev_exponent(b.dim());
  const double p = res.exponent;
  const BallSampler sampler(b, stream_key(seed, {fnv1a("sobolev")}), budget.samples);
  const Moments abs_m = sample_moments(sampler, budget.samples, [&](std::span<const double> x) { return std::abs(g(x)); });
  const double sup = std::max(0.0, abs_m.max);
  const double tol = 1e-9 * sup;
  const Moments zero =
      sample_moments(sampler, budget.samples, [&](std::span<const double> x) { return std::abs(g(x)) <= tol ? 1.0 : 0.0; });
  res.zero_fraction = zero.mean();
  if (res.zero_fraction < alpha) {
    throw PreconditionError("L^n(B ∩ {g = 0}) / L^n(B) >= alpha",
                            "sobolev_ratio: zero fraction " + std::to_string(res.zero_fraction) + " < alpha " +
                                std::to_string(alpha));
  }
  if (sup == 0.0) return res;
  const Moments lp = sample_moments(sampler, budget.samples, [&](std::span<const double> x) { return std::pow(std::abs(g(x)), p); });
  const Moments en = sample_moments(sampler, budget.samples, [&](std::span<const double> x) {
    const double v = g.gradient_norm(x);
    return v * v;
  });
  res.lp_integral = mean_estimate(lp, sampler.volume());
  res.energy = mean_estimate(en, sampler.volume());
  res.lhs = std::pow(res.lp_integral.value, 1.0 / p);
  res.rhs_energy = std::sqrt(res.energy.value);
  res.ratio = res.rhs_energy > 0.0 ? res.lhs / res.rhs_energy : (res.lhs > 0.0 ? std::numeric_limits<double>::infinity() : 0.0);
  return res;
}

namespace {

/// Sampled maximum of g over b, refined by projected gradient ascent from the best probe.
double refined_max(const ScalarField& g, const Ball& b, const BallSampler& sampler, std::uint64_t samples) {
  const int d = g.dim();
  double best = g(b.center);
  Point arg = b.center;
  std::array<double, kMaxDim> buf{};
  for (std::uint64_t i = 0; i < samples; ++i) {
    if (!sampler.attempt(i, view(buf, d))) continue;
    const double v = g(view(buf, d));
    if (v > best) {
      best = v;
      arg.assign(buf.begin(), buf.begin() + d);
    }
  }
  double step = 0.05 * b.radius;
  Point trial(arg.size());
  for (int it = 0; it < 400 && step > 1e-14 * b.radius; ++it) {
    const auto grad = g.gradient(arg);
    const double gn = norm(grad);
    if (gn == 0.0) break;
    for (std::size_t j = 0; j < arg.size(); ++j) trial[j] = arg[j] + step * grad[j] / gn;
    const double dist = distance(trial, b.center);
    if (dist >= b.radius)
      for (std::size_t j = 0; j < arg.size(); ++j) trial[j] = b.center[j] + (trial[j] - b.center[j]) * (b.radius * (1 - 1e-12) / dist);
    const double v = g(trial);
    if (v > best) {
      best = v;
      arg = trial;
    } else {
      step *= 0.5;
    }
  }
  return best;
}

}  // namespace

AreaCheck area_lower_bound_check(const ScalarField& g, const Ball& b, double h, double c_ceiling,
                                 const SamplingBudget& budget, std::uint64_t seed) {
  if (b.dim() != g.dim()) throw InvalidArgument("area_lower_bound_check: dimension mismatch");
  if (!(h > 0.0)) throw InvalidArgument("area_lower_bound_check: h must be positive");
  if (b.radius < h) throw PreconditionError("radius(B) >= h", "area_lower_bound_check: ball radius below h");
  if (g.grad_bound() > 1.0 + 1e-12)
    throw PreconditionError("|grad g| <= 1", "area_lower_bound_check: gradient bound " + std::to_string(g.grad_bound()) + " > 1");
  const BallSampler sampler(b, stream_key(seed, {fnv1a("area")}), budget.samples);
  const Moments low =
      sample_moments(sampler, budget.samples, [&](std::span<const double> x) { return g(x) <= h / 2 ? 1.0 : 0.0; });
  if (low.mean() < 0.5)
    throw PreconditionError("L^n(B ∩ {g <= h/2}) >= L^n(B)/2",
                            "area_lower_bound_check: fraction of {g <= h/2} is " + std::to_string(low.mean()));
  const double top = refined_max(g, b, sampler, std::min<std::uint64_t>(budget.samples, 1u << 14));
  if (top < h * (1.0 - 1e-9))
    throw PreconditionError("g(x) >= h for some x in B", "area_lower_bound_check: max g = " + std::to_string(top) + " < h");

  AreaCheck out;
  const int n = b.dim();
  out.lhs = unit_ball_volume(n) * std::pow(h, n);
  const Moments m = sample_moments(sampler, budget.samples, [&](std::span<const double> x) {
    if (g(x) < h / 2) return 0.0;
    const double v = g.gradient_norm(x);
    return v * v;
  });
  out.rhs_estimate = mean_estimate(m, sampler.volume());
  out.rhs = out.rhs_estimate.value;
  out.empirical_c = out.rhs > 0.0 ? out.lhs / out.rhs : std::numeric_limits<double>::infinity();
  out.passed = out.lhs <= c_ceiling * out.rhs_estimate.lower();
  return out;
}

FlattenCheck flatten_residual(const ScalarField& g, const AffinePlane& a, const Ball& b, double eps, double c_ceiling,
                              const SamplingBudget& budget, std::uint64_t seed) {
  if (b.dim() != g.dim() || a.dim() != g.dim()) throw InvalidArgument("flatten_residual: dimension mismatch");
  if (g.grad_bound() > 1.0 + 1e-12) throw PreconditionError("|grad g| <= 1", "flatten_residual: gradient bound above 1");
  if (a.slope() > 1.0 + 1e-12) throw PreconditionError("|grad a| <= 1", "flatten_residual: plane slope above 1");
  const int d = g.dim();
  const BallSampler sampler(b, stream_key(seed, {fnv1a("flatten")}), budget.samples);
  const Moments gap = sample_moments(sampler, budget.samples, [&](std::span<const double> x) { return std::abs(g(x) - a(x)); });
  if (gap.max > eps * b.radius)
    throw PreconditionError("|g - a| <= eps t on B",
                            "flatten_residual: sampled |g - a| reaches " + std::to_string(gap.max) + " > " +
                                std::to_string(eps * b.radius));

  const auto& ga = a.gradient;
  const Moments res = sample_moments(sampler, budget.samples, [&](std::span<const double> x) {
    std::array<double, kMaxDim> gg{};
    g.gradient(x, view(gg, d));
    double g2 = 0.0, a2 = 0.0, diff2 = 0.0;
    for (int j = 0; j < d; ++j) {
      const auto u = static_cast<std::size_t>(j);
      g2 += gg[u] * gg[u];
      a2 += ga[u] * ga[u];
      diff2 += (gg[u] - ga[u]) * (gg[u] - ga[u]);
    }
    return g2 - a2 - diff2;
  });
  const Moments cross = sample_moments(sampler, budget.samples, [&](std::span<const double> x) {
    std::array<double, kMaxDim> gg{};
    g.gradient(x, view(gg, d));
    double s = 0.0;
    for (int j = 0; j < d; ++j) s += ga[static_cast<std::size_t>(j)] * (gg[static_cast<std::size_t>(j)] - ga[static_cast<std::size_t>(j)]);
    return 2.0 * s;
  });
  FlattenCheck out;
  const MeasureEstimate r = mean_estimate(res, sampler.volume());
  out.residual = r.value;
  out.half_width = r.half_width;
  out.cross_term = mean_estimate(cross, sampler.volume()).value;
  const double vol = sampler.volume();
  out.bound = c_ceiling * eps * vol;
  out.empirical_c = std::abs(out.residual) / (eps * vol);
  out.passed = std::abs(out.residual) <= out.bound;
  return out;
}

SmoothedGradientCheck smoothed_gradient_check(const ScalarField& g, double eps, double c_ceiling,
                                              std::uint64_t probes, std::uint64_t seed, int nodes_per_dim) {
  if (!(eps > 0.0 && eps < 0.5)) throw InvalidArgument("smoothed_gradient_check: eps must lie in (0, 1/2)");
  if (g.grad_bound() > 1.0 + 1e-12)
    throw PreconditionError("|grad g| <= 1", "smoothed_gradient_check: gradient bound above 1");
  const Ball& b = g.domain();
  const double t = b.radius;
  const FieldSup sup_g = sampled_sup(g, false, probes, stream_key(seed, {fnv1a("smoothed-sup")}));
  if (sup_g.value > eps * eps * t)
    throw PreconditionError("|g| <= eps^2 t on B", "smoothed_gradient_check: sampled |g| reaches " +
                                                       std::to_string(sup_g.value) + " > " + std::to_string(eps * eps * t));

  const ScalarField gs = mollify(g, eps * t, nodes_per_dim);
  const Ball inner{b.center, t - eps * t};
  const BallSampler sampler(inner, stream_key(seed, {fnv1a("smoothed-grad")}), probes);
  const Moments m = sample_moments(sampler, probes, [&](std::span<const double> x) { return gs.gradient_norm(x); });
  SmoothedGradientCheck out;
  out.sup = std::max(0.0, m.max);
  out.empirical_c = out.sup / eps;
  if (m.accepted > 0) out.energy = sampler.volume() * m.sum_sq / static_cast<double>(m.accepted);
  out.energy_bound = c_ceiling * c_ceiling * eps * eps * unit_ball_volume(b.dim()) * std::pow(t, b.dim());
  out.passed = out.sup <= c_ceiling * eps;
  return out;
}

}  // namespace porous
