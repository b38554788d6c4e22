#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "porous/geometry.hpp"
#include "porous/sampling.hpp"
#include "porous/scalar_field.hpp"

namespace porous {

/// Bump profile phi(rho) = exp(-rho^2 / (1 - rho^2)) for rho < 1, 0 otherwise; phi(0) = 1.
double bump_profile(double rho);
double bump_profile_derivative(double rho);
/// max |phi'|, attained at rho^2 = 1/sqrt(3).
double bump_slope_max();

/// A phi(|x - centre| / width).
struct Bump {
  Point center;
  double width = 1.0;
  double amplitude = 0.0;
};

/// Sum of bumps. With pairwise disjoint supports the bounds are the largest single
/// bump's; otherwise they add up.
double bumps_sup_bound(std::span<const Bump> bumps);
double bumps_grad_bound(std::span<const Bump> bumps);
ScalarField bump_field(const Ball& domain, std::vector<Bump> bumps);

/// Vector-valued bump in R^(n+1) over the parameter space R^n.
struct VectorBump {
  Point center;
  double width = 1.0;
  std::vector<double> amplitude;
};

/// f(u) = (u, a(u)) + sum of vector bumps + (0, ..., 0, h(u)) for an optional scalar term h.
class SurfaceC1 {
 public:
  SurfaceC1(int n, AffinePlane plane, std::vector<VectorBump> bumps = {}, std::optional<ScalarField> graph_term = {},
            std::string provenance = {}, std::vector<Point> extra_points = {});

  int n() const { return n_; }
  void eval(std::span<const double> u, std::span<double> out) const;
  /// Row-major (n+1) x n: out[i * n + j] = d f_i / d u_j.
  void jacobian(std::span<const double> u, std::span<double> out) const;

  /// Points where extrema of the perturbation are known to occur (bump centres and the
  /// maximal-slope radius along each axis), added to probe lattices.
  std::vector<Point> declared_points() const;

  const AffinePlane& plane() const { return plane_; }
  const std::vector<VectorBump>& bumps() const { return bumps_; }
  const std::optional<ScalarField>& graph_term() const { return graph_; }
  const std::string& provenance() const { return provenance_; }

 private:
  int n_;
  AffinePlane plane_;
  std::vector<VectorBump> bumps_;
  std::optional<ScalarField> graph_;
  std::string provenance_;
  std::vector<Point> extra_points_;
};

/// p(u) = (u, 0).
SurfaceC1 reference_surface(int n);
SurfaceC1 embed_plane(const AffinePlane& a);
struct GraphPatch;
SurfaceC1 embed_graph(const GraphPatch& patch);

/// max(sup|f|, max_i sup|d_i f|) on a lattice of [0,1]^n (m points per axis, corners
/// included) plus the declared points.
double c1_norm(const SurfaceC1& f, int lattice_per_dim = 9);
/// ||f - p||_{C^1} on the same probes.
double c1_distance_to_reference(const SurfaceC1& f, int lattice_per_dim = 9);

/// A surface represented as the graph of g over B(c, s).
struct GraphPatch {
  ScalarField g;
  /// Certified sup |g| over the domain.
  double sup_bound = 0.0;
  std::string provenance;
  /// Points where extrema of g or grad g are attained, if known.
  std::vector<Point> declared;

  /// Certified bound on max(sup|g|, sup|grad g|), which dominates the C^1 norm.
  double c1_bound() const { return std::max(sup_bound, g.grad_bound()); }
};

GraphPatch make_patch(ScalarField g, double sup_bound, std::string provenance, std::vector<Point> declared = {});

struct ExtractOptions {
  double s = 0.25;
  double r = 1.0 / 64.0;
  /// Required ||f - p||_{C^1} < delta; the default is 1e-2 r.
  double delta = 1e-2 / 64.0;
  double tol = 1e-13;
  int max_iter = 50;
  int audit_lattice = 9;
  /// Throw PreconditionError when the extracted C^1 bound exceeds r.
  bool enforce_r = true;
};

struct NewtonSolve {
  Point u;
  double residual = 0.0;
  int iterations = 0;
};

/// Solves f~(u) = x for the first n coordinates f~ of f by damped Newton from u = x.
NewtonSolve invert_base_map(const SurfaceC1& f, std::span<const double> x, double tol = 1e-13, int max_iter = 50);

/// g(x) = f_{n+1}(f~^{-1}(x)) on B(c, s), grad g = (Df~)^{-T} grad f_{n+1}.
GraphPatch graph_extract(const SurfaceC1& f, const ExtractOptions& opt = {});

using PointPredicate = std::function<bool(std::span<const double>)>;

/// ∫_{x in B(c,s) : (x, g(x)) in target} sqrt(1 + |grad g(x)|^2) dx.
MeasureEstimate graph_measure_in(const ScalarField& g, const PointPredicate& target, const SamplingBudget& budget,
                                 std::uint64_t seed = 0, kernels::Exec exec = kernels::default_exec());

enum class Membership { member, non_member, indeterminate };
std::string to_string(Membership m);

struct MembershipVerdict {
  Membership verdict = Membership::indeterminate;
  /// lower - alpha for members, alpha - upper for non-members, 0 otherwise.
  double margin = 0.0;
  MeasureEstimate measure;
};

MembershipVerdict sn_membership(const ScalarField& g, const PointPredicate& target, double alpha,
                                const SamplingBudget& budget, std::uint64_t seed = 0);

/// One corpus entry: `count` fields of one kind over B(c, s), deterministic in `seed`.
struct CorpusSpec {
  std::string kind;  // plane | bump | multi-bump | mollified-noise
  std::uint64_t seed = 1;
  int count = 1;
  /// Upper bound on the certified C^1 bound of every generated field.
  double c1_ceiling = 1.0 / 64.0;
  // plane: an explicit gradient gives `count` copies of that plane, otherwise planes are random
  std::vector<double> gradient;
  double offset = 0.0;
  // bumps
  double amplitude = 0.0;  // 0: derived from the ceiling
  double amplitude_fraction = 0.95;
  double width_min = 0.45;
  double width_max = 0.7;
  int bumps_per_field = 3;
  double center_spread = 0.5;  // centres drawn from B(c, spread * s)
  bool allow_negative = true;
  // mollified-noise
  double spacing = 0.1;
};

std::vector<GraphPatch> corpus_generate(const CorpusSpec& spec, int n, double s);

}  // namespace porous
