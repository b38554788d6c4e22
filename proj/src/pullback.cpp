#include "porous/pullback.hpp"

#include <cmath>

#include "porous/errors.hpp"

namespace porous {

double operator_norm(const Eigen::MatrixXd& map) {
  if (map.size() == 0) return 0.0;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(map);
  return svd.singularValues()(0);
}

PorosityWitness pullback_porosity_witness(const Eigen::MatrixXd& map, double operator_norm_bound,
                                          const PorosityWitness& image_witness) {
  const auto rows = map.rows();
  const auto cols = map.cols();
  if (rows == 0 || cols < rows) throw InvalidArgument("pullback: map must go from R^d onto R^(n+1) with d >= n+1");
  if (static_cast<Eigen::Index>(image_witness.direction.size()) != rows)
    throw InvalidArgument("pullback: witness direction has the wrong dimension");

  Eigen::VectorXd v = Eigen::Map<const Eigen::VectorXd>(image_witness.direction.data(), rows);
  if (std::abs(v.norm() - 1.0) > 1e-9) throw InvalidArgument("pullback: witness direction must have unit norm");

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(map);
  const auto& sv = svd.singularValues();
  const double smax = sv(0);
  if (!(sv(rows - 1) > 1e-12 * std::max(1.0, smax))) throw InvalidArgument("pullback: map is singular");
  if (operator_norm_bound < smax * (1.0 - 1e-12))
    throw InvalidArgument("pullback: operator norm bound is below the true norm");

  // Right inverse M^T (M M^T)^{-1}.
  const Eigen::MatrixXd gram = map * map.transpose();
  const Eigen::VectorXd u = map.transpose() * gram.ldlt().solve(v);
  const double un = u.norm();

  PorosityWitness out;
  out.direction.resize(static_cast<std::size_t>(cols));
  for (Eigen::Index j = 0; j < cols; ++j) out.direction[static_cast<std::size_t>(j)] = u(j) / un;
  out.step = image_witness.step * un;
  out.radius = image_witness.radius / operator_norm_bound;
  return out;
}

}  // namespace porous
