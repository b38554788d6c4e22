#pragma once
// Independent reference computations used by the unit tests and the acceptance run.

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "porous/construction.hpp"
#include "porous/geometry.hpp"
#include "porous/rng.hpp"
#include "porous/scalar_field.hpp"
#include "porous/verification.hpp"

namespace porous::oracle {

struct GridMeasure {
  double value = 0.0;
  /// Rigorous bound on |value - true measure|: the cells that can straddle a sphere lie in
  /// shells of half-width sqrt(3) h / 2 around every sphere involved.
  double error = 0.0;
};

/// L^3(region ∩ ∪balls) by counting cell centres of a res^3 grid over the region's cube.
inline GridMeasure grid_union_measure_3d(std::span<const Ball> balls, const Ball& region, int res = 256) {
  const double lo[3] = {region.center[0] - region.radius, region.center[1] - region.radius,
                        region.center[2] - region.radius};
  const double h = 2.0 * region.radius / res;
  const auto N = static_cast<std::size_t>(res);
  std::vector<std::uint8_t> mark(N * N * N, 0);
  auto centre = [&](int axis, std::int64_t i) { return lo[axis] + (static_cast<double>(i) + 0.5) * h; };
  for (const Ball& b : balls) {
    std::int64_t a[3], z[3];
    for (int d = 0; d < 3; ++d) {
      a[d] = std::max<std::int64_t>(0, static_cast<std::int64_t>(std::floor((b.center[d] - b.radius - lo[d]) / h)) - 1);
      z[d] = std::min<std::int64_t>(res - 1, static_cast<std::int64_t>(std::ceil((b.center[d] + b.radius - lo[d]) / h)) + 1);
    }
    const double r2 = b.radius * b.radius;
    for (std::int64_t i = a[0]; i <= z[0]; ++i) {
      const double dx = centre(0, i) - b.center[0];
      for (std::int64_t j = a[1]; j <= z[1]; ++j) {
        const double dy = centre(1, j) - b.center[1];
        for (std::int64_t k = a[2]; k <= z[2]; ++k) {
          const double dz = centre(2, k) - b.center[2];
          if (dx * dx + dy * dy + dz * dz < r2) mark[(static_cast<std::size_t>(i) * N + static_cast<std::size_t>(j)) * N + static_cast<std::size_t>(k)] = 1;
        }
      }
    }
  }
  const double R2 = region.radius * region.radius;
  std::uint64_t count = 0;
  for (int i = 0; i < res; ++i) {
    const double dx = centre(0, i) - region.center[0];
    for (int j = 0; j < res; ++j) {
      const double dy = centre(1, j) - region.center[1];
      for (int k = 0; k < res; ++k) {
        const double dz = centre(2, k) - region.center[2];
        if (dx * dx + dy * dy + dz * dz >= R2) continue;
        count += mark[(static_cast<std::size_t>(i) * N + static_cast<std::size_t>(j)) * N + static_cast<std::size_t>(k)];
      }
    }
  }
  GridMeasure g;
  g.value = static_cast<double>(count) * h * h * h;
  const double delta = std::sqrt(3.0) * h / 2.0;
  auto shell = [&](double r) {
    const double inner = std::max(0.0, r - delta);
    return 4.0 / 3.0 * M_PI * (std::pow(r + delta, 3) - std::pow(inner, 3));
  };
  g.error = shell(region.radius);
  for (const Ball& b : balls) g.error += shell(b.radius);
  return g;
}

/// Distance from z in R^(n+1) to the graph of an affine function over all of R^n.
inline double plane_graph_distance(const AffinePlane& a, std::span<const double> z) {
  const auto n = static_cast<std::size_t>(a.dim());
  const double gap = a(z.first(n)) - z[n];
  return std::abs(gap) / std::sqrt(1.0 + a.slope() * a.slope());
}

/// Σ|B| over every record whose hole meets G(g) at scale K, by scanning all records.
inline double exhaustive_hit_mass(const ScalarField& g, const HoleFamily& family, double K) {
  double mass = 0.0;
  for (const HoleRecord& rec : family.records)
    if (hit_test(g, rec.hole(), K)) mass += cross_section_area(rec.t, family.header.n);
  return mass;
}

/// Uniform point of B(c, rho) by rejection from the cube, draw index advanced in place.
inline Point uniform_in_ball(const CounterRng& rng, std::uint64_t& ctr, std::span<const double> c, double rho) {
  Point x(c.size());
  for (;;) {
    double q = 0.0;
    for (std::size_t d = 0; d < c.size(); ++d) {
      const double u = 2.0 * rng.uniform(ctr++) - 1.0;
      x[d] = u;
      q += u * u;
    }
    if (q < 1.0) break;
  }
  for (std::size_t d = 0; d < c.size(); ++d) x[d] = c[d] + rho * x[d];
  return x;
}

}  // namespace porous::oracle
