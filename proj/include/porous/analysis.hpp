#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "porous/geometry.hpp"
#include "porous/sampling.hpp"
#include "porous/scalar_field.hpp"

namespace porous {

/// eta(x) = kappa exp(1 / (|x|^2 - 1)) on the unit ball, zero outside; eta_eps(x) = eps^-n eta(x / eps).
class Mollifier {
 public:
  Mollifier(int n, double epsilon);

  int dim() const { return n_; }
  double epsilon() const { return epsilon_; }
  double kappa() const { return kappa_; }

  double eta(std::span<const double> x) const;
  double eta_eps(std::span<const double> x) const;
  /// Radial profile eta_eps as a function of |x|.
  double eta_eps_radial(double rho) const;
  /// Integral of eta_eps over R^n by m-point radial Gauss–Legendre.
  double mass(int m = 200) const;

 private:
  int n_;
  double epsilon_;
  double kappa_;
};

Mollifier make_mollifier(int n, double epsilon);

/// Normalising constant kappa = 1 / (n omega_n ∫_0^1 exp(1/(rho^2-1)) rho^(n-1) drho).
double mollifier_kappa(int n, int m = 200);

/// Product Gauss–Legendre stencil for convolution with eta_eps: offsets z_i in B(0, eps)
/// and weights proportional to w_i eta_eps(z_i), normalised to sum 1.
struct ConvolutionStencil {
  int dim = 0;
  double epsilon = 0.0;
  std::vector<double> offsets;  // dim * size()
  std::vector<double> weights;

  std::size_t size() const { return weights.size(); }
  std::span<const double> offset(std::size_t i) const {
    return {offsets.data() + i * static_cast<std::size_t>(dim), static_cast<std::size_t>(dim)};
  }
};

std::shared_ptr<const ConvolutionStencil> make_stencil(int n, double epsilon, int nodes_per_dim = 9);

/// g^eps on the shrunk domain B(center, R - eps). The gradient is the convolution of
/// grad g with the same stencil (the exact derivative of the discrete convolution), so
/// the gradient bound of g carries over.
ScalarField mollify(const ScalarField& g, double eps_len, int nodes_per_dim = 9);

/// Cut-off w for B(x, t): w = 1 on B(x, t - 2 eps t), w = 0 outside B(x, t - eps t),
/// |grad w| <= 3 / (eps t). Built by mollifying a linear radial ramp at scale eps t / 3.
class CutoffField {
 public:
  CutoffField(Ball b, double eps, int nodes_per_dim = 9);

  double operator()(std::span<const double> x) const;
  void gradient(std::span<const double> x, std::span<double> out) const;

  const Ball& ball() const { return ball_; }
  double epsilon() const { return eps_; }
  double inner_radius() const { return ball_.radius * (1.0 - 2.0 * eps_); }
  double outer_radius() const { return ball_.radius * (1.0 - eps_); }
  double gradient_bound() const { return 3.0 / (eps_ * ball_.radius); }
  const ScalarField& field() const { return w_; }

 private:
  Ball ball_;
  double eps_;
  ScalarField w_;
};

CutoffField make_cutoff(const Ball& b, double eps, int nodes_per_dim = 9);

struct BlendAudit {
  std::uint64_t probes = 0;
  double worst_gap = 0.0;
  Point worst_probe;
  double allowed = 0.0;
};

/// v = w g1 + (1 - w) g2 inside B(x, t - eps t), g2 outside, on g2's domain. Audits
/// |g1 - g2| <= eps^2 t on the transition annulus and throws PreconditionError on failure.
ScalarField blend(const ScalarField& g1, const ScalarField& g2, const CutoffField& w, std::uint64_t probes = 4096,
                  std::uint64_t seed = 0, BlendAudit* audit = nullptr);

/// Sobolev conjugate 2n / (n - 2).
double sobolev_exponent(int n);

struct SobolevResult {
  double exponent = 0.0;
  double lhs = 0.0;         // ||g||_{L^p(B)}
  double rhs_energy = 0.0;  // ||grad g||_{L^2(B)}
  double ratio = 0.0;       // lhs / rhs, infinite when the energy vanishes but the norm does not
  double zero_fraction = 0.0;
  MeasureEstimate lp_integral;
  MeasureEstimate energy;
};

/// Throws PreconditionError when the sampled zero fraction ({|g| <= 1e-9 sup|g|}) is below alpha.
SobolevResult sobolev_ratio(const ScalarField& g, const Ball& b, double alpha, const SamplingBudget& budget,
                            std::uint64_t seed = 0);

struct AreaCheck {
  double lhs = 0.0;  // omega_n h^n
  double rhs = 0.0;  // ∫_{B ∩ {g >= h/2}} |grad g|^2
  double empirical_c = 0.0;
  MeasureEstimate rhs_estimate;
  bool passed = false;
};

AreaCheck area_lower_bound_check(const ScalarField& g, const Ball& b, double h, double c_ceiling,
                                 const SamplingBudget& budget, std::uint64_t seed = 0);

struct FlattenCheck {
  double residual = 0.0;    // ∫ |grad g|^2 - |grad a|^2 - |grad (g - a)|^2
  double cross_term = 0.0;  // 2 ∫ <grad a, grad (g - a)>
  double bound = 0.0;       // c_ceiling * eps * L^n(B)
  double empirical_c = 0.0; // |residual| / (eps L^n(B))
  double half_width = 0.0;
  bool passed = false;
};

FlattenCheck flatten_residual(const ScalarField& g, const AffinePlane& a, const Ball& b, double eps, double c_ceiling,
                              const SamplingBudget& budget, std::uint64_t seed = 0);

struct SmoothedGradientCheck {
  double sup = 0.0;          // sampled sup |grad g^{eps t}| over B(x, t - eps t)
  double empirical_c = 0.0;  // sup / eps
  double energy = 0.0;       // ∫_{B(x, t - eps t)} |grad g^{eps t}|^2
  double energy_bound = 0.0; // (c_ceiling eps)^2 L^n(B)
  bool passed = false;
};

SmoothedGradientCheck smoothed_gradient_check(const ScalarField& g, double eps, double c_ceiling,
                                              std::uint64_t probes = 4096, std::uint64_t seed = 0,
                                              int nodes_per_dim = 9);

}  // namespace porous
