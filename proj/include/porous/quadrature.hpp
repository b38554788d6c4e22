#pragma once

#include <vector>

namespace porous {

/// Gauss–Legendre rule on [-1, 1].
struct GaussLegendre {
  std::vector<double> nodes;
  std::vector<double> weights;
};

GaussLegendre gauss_legendre(int m);

/// Integral of f over [a, b] with an m-point Gauss–Legendre rule.
template <class F>
double integrate(F&& f, double a, double b, const GaussLegendre& rule) {
  const double half = 0.5 * (b - a), mid = 0.5 * (a + b);
  double sum = 0.0;
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) sum += rule.weights[i] * f(mid + half * rule.nodes[i]);
  return half * sum;
}

}  // namespace porous
