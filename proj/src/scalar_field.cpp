#include "porous/scalar_field.hpp"

#include <array>
#include <cmath>
#include <utility>

#include "porous/errors.hpp"

namespace porous {

ScalarField::ScalarField(Ball domain, EvalFn eval, GradFn grad, double grad_bound)
    : domain_(std::move(domain)), eval_(std::move(eval)), grad_(std::move(grad)), grad_bound_(grad_bound) {
  if (!(domain_.radius > 0.0)) throw InvalidArgument("ScalarField: domain radius must be positive");
  if (domain_.dim() < 1 || domain_.dim() > kMaxDim) throw InvalidArgument("ScalarField: unsupported dimension");
  if (!eval_) throw InvalidArgument("ScalarField: missing evaluator");
  if (!(grad_bound_ >= 0.0)) throw InvalidArgument("ScalarField: gradient bound must be non-negative");
}

void fd_gradient(const ScalarField::EvalFn& f, std::span<const double> x, double h, std::span<double> out) {
  std::array<double, kMaxDim> y{};
  const std::size_t d = x.size();
  std::copy(x.begin(), x.end(), y.begin());
  std::span<const double> ys(y.data(), d);
  for (std::size_t j = 0; j < d; ++j) {
    y[j] = x[j] + h;
    const double fp = f(ys);
    y[j] = x[j] - h;
    const double fm = f(ys);
    y[j] = x[j];
    out[j] = (fp - fm) / (2.0 * h);
  }
}

void ScalarField::gradient(std::span<const double> x, std::span<double> out) const {
  if (grad_) {
    grad_(x, out);
  } else {
    fd_gradient(eval_, x, fd_step(), out);
  }
}

std::vector<double> ScalarField::gradient(std::span<const double> x) const {
  std::vector<double> g(x.size());
  gradient(x, g);
  return g;
}

double ScalarField::gradient_norm(std::span<const double> x) const {
  std::array<double, kMaxDim> g{};
  gradient(x, std::span<double>(g.data(), x.size()));
  return norm(std::span<const double>(g.data(), x.size()));
}

ScalarField ScalarField::with_domain(Ball domain) const {
  ScalarField f = *this;
  f.domain_ = std::move(domain);
  return f;
}

ScalarField ScalarField::with_grad_bound(double bound) const {
  ScalarField f = *this;
  f.grad_bound_ = bound;
  return f;
}

ScalarField ScalarField::constant(Ball domain, double value) {
  return ScalarField(
      std::move(domain), [value](std::span<const double>) { return value; },
      [](std::span<const double>, std::span<double> out) { std::fill(out.begin(), out.end(), 0.0); }, 0.0);
}

ScalarField ScalarField::affine(Ball domain, const AffinePlane& plane) {
  if (plane.dim() != domain.dim()) throw InvalidArgument("ScalarField::affine: dimension mismatch");
  return ScalarField(
      std::move(domain), [plane](std::span<const double> x) { return plane(x); },
      [g = plane.gradient](std::span<const double>, std::span<double> out) {
        std::copy(g.begin(), g.end(), out.begin());
      },
      plane.slope());
}

ScalarField linear_combination(double alpha, const ScalarField& f, double beta, const ScalarField& g) {
  if (f.dim() != g.dim()) throw InvalidArgument("linear_combination: dimension mismatch");
  ScalarField::GradFn grad;
  if (f.analytic_gradient() && g.analytic_gradient()) {
    grad = [alpha, beta, f, g](std::span<const double> x, std::span<double> out) {
      std::array<double, kMaxDim> a{}, b{};
      const std::size_t d = x.size();
      f.gradient(x, std::span<double>(a.data(), d));
      g.gradient(x, std::span<double>(b.data(), d));
      for (std::size_t j = 0; j < d; ++j) out[j] = alpha * a[j] + beta * b[j];
    };
  }
  return ScalarField(
      f.domain(), [alpha, beta, f, g](std::span<const double> x) { return alpha * f(x) + beta * g(x); },
      std::move(grad), std::abs(alpha) * f.grad_bound() + std::abs(beta) * g.grad_bound());
}

FieldSup sampled_sup(const ScalarField& f, bool gradient, std::uint64_t probes, std::uint64_t key,
                     kernels::Exec exec) {
  const BallSampler sampler(f.domain(), key, probes);
  struct Best {
    double v = -1.0;
    std::uint64_t i = 0;
    std::uint64_t n = 0;
  };
  const Best best = kernels::block_reduce(
      probes, exec, Best{},
      [&](std::uint64_t lo, std::uint64_t hi) {
        Best b;
        std::array<double, kMaxDim> buf{};
        std::span<double> x(buf.data(), static_cast<std::size_t>(f.dim()));
        for (std::uint64_t i = lo; i < hi; ++i) {
          if (!sampler.attempt(i, x)) continue;
          ++b.n;
          const double v = gradient ? f.gradient_norm(x) : std::abs(f(x));
          if (v > b.v) {
            b.v = v;
            b.i = i;
          }
        }
        return b;
      },
      [](Best a, const Best& b) {
        a.n += b.n;
        if (b.v > a.v) {
          a.v = b.v;
          a.i = b.i;
        }
        return a;
      });
  FieldSup out;
  out.probes = best.n;
  if (best.n == 0) return out;
  out.value = best.v;
  out.argmax.resize(f.dim());
  sampler.attempt(best.i, out.argmax);
  return out;
}

}  // namespace porous
