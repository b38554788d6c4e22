#include "porous/geometry.hpp"

#include <cmath>
#include <numbers>

#include "porous/errors.hpp"

namespace porous {

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm(std::span<const double> v) { return std::sqrt(dot(v, v)); }

double distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return std::sqrt(s);
}

double unit_ball_volume(int n) {
  if (n < 0) throw InvalidArgument("unit_ball_volume: negative dimension");
  const double half = 0.5 * n;
  return std::exp(half * std::log(std::numbers::pi) - std::lgamma(half + 1.0));
}

Ball enlarge(const Ball& b, double factor) {
  if (!(factor >= 1.0)) throw InvalidArgument("enlarge: factor must be >= 1");
  return Ball{b.center, b.radius * factor};
}

double cross_section_area(double radius, int n) {
  if (!(radius > 0.0)) throw InvalidArgument("cross_section_area: radius must be positive");
  if (n < 1) throw InvalidArgument("cross_section_area: n must be positive");
  return unit_ball_volume(n) * std::pow(radius, n);
}

double cross_section_area(const Ball& b, int n) { return cross_section_area(b.radius, n); }

bool contains_open(const Ball& b, std::span<const double> x) {
  return distance(b.center, x) < b.radius;
}

bool contains(const Ball& outer, const Ball& inner) {
  return distance(outer.center, inner.center) + inner.radius <= outer.radius;
}

bool disjoint(const Ball& a, const Ball& b) {
  return distance(a.center, b.center) >= a.radius + b.radius;
}

Point base_center(int n) { return Point(static_cast<std::size_t>(n), 0.5); }

double AffinePlane::operator()(std::span<const double> x) const {
  double v = offset;
  for (std::size_t i = 0; i < gradient.size(); ++i) v += gradient[i] * (x[i] - 0.5);
  return v;
}

std::string to_string(MeasureMethod m) {
  switch (m) {
    case MeasureMethod::exact: return "exact";
    case MeasureMethod::grid: return "grid";
    case MeasureMethod::monte_carlo: return "monte_carlo";
  }
  return "unknown";
}

}  // namespace porous
