#pragma once

#include <vector>

#include <Eigen/Dense>

namespace porous {

/// A directional porosity hole for a point x: the ball B(x + step * direction, radius).
struct PorosityWitness {
  std::vector<double> direction;
  double step = 0.0;
  double radius = 0.0;
};

/// Largest singular value.
double operator_norm(const Eigen::MatrixXd& map);

/// Pulls a witness in the image R^(n+1) of a surjective linear map X = R^d -> R^(n+1)
/// back to X. With u = M^+ v (right inverse), the hole B(x + t u, rho|t| / norm) maps into
/// B(Mx + t v, rho|t|); the result is expressed with unit direction u/|u| and step t|u|.
PorosityWitness pullback_porosity_witness(const Eigen::MatrixXd& map, double operator_norm_bound,
                                          const PorosityWitness& image_witness);

}  // namespace porous
