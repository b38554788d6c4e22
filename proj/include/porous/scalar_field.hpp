#pragma once

#include <functional>
#include <span>
#include <vector>

#include "porous/geometry.hpp"
#include "porous/sampling.hpp"

namespace porous {

/// A real function on a ball in R^n with gradient access and a certified
/// gradient bound sup|grad g| <= grad_bound.
class ScalarField {
 public:
  using EvalFn = std::function<double(std::span<const double>)>;
  using GradFn = std::function<void(std::span<const double>, std::span<double>)>;

  ScalarField() = default;
  /// An empty `grad` selects centred finite differences with step 1e-5 * domain radius.
  ScalarField(Ball domain, EvalFn eval, GradFn grad, double grad_bound);

  double operator()(std::span<const double> x) const { return eval_(x); }
  void gradient(std::span<const double> x, std::span<double> out) const;
  std::vector<double> gradient(std::span<const double> x) const;
  double gradient_norm(std::span<const double> x) const;

  const Ball& domain() const { return domain_; }
  int dim() const { return domain_.dim(); }
  double grad_bound() const { return grad_bound_; }
  bool analytic_gradient() const { return static_cast<bool>(grad_); }
  double fd_step() const { return 1e-5 * domain_.radius; }

  ScalarField with_domain(Ball domain) const;
  ScalarField with_grad_bound(double bound) const;

  static ScalarField constant(Ball domain, double value);
  static ScalarField affine(Ball domain, const AffinePlane& plane);

 private:
  Ball domain_;
  EvalFn eval_;
  GradFn grad_;
  double grad_bound_ = 0.0;
};

/// alpha * f + beta * g on f's domain.
ScalarField linear_combination(double alpha, const ScalarField& f, double beta, const ScalarField& g);

/// Centred finite-difference gradient of an arbitrary function.
void fd_gradient(const ScalarField::EvalFn& f, std::span<const double> x, double h, std::span<double> out);

struct FieldSup {
  double value = 0.0;
  Point argmax;
  std::uint64_t probes = 0;
};

/// Sampled sup over the domain of |f| (or of |grad f| with `gradient` set).
FieldSup sampled_sup(const ScalarField& f, bool gradient, std::uint64_t probes, std::uint64_t key,
                     kernels::Exec exec = kernels::default_exec());

}  // namespace porous
