#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace porous {

/// Largest ambient dimension supported by the fixed-size scratch buffers (n + 1 <= kMaxDim).
inline constexpr int kMaxDim = 8;

using Point = std::vector<double>;

struct Ball {
  Point center;
  double radius = 0.0;

  int dim() const { return static_cast<int>(center.size()); }
};

double dot(std::span<const double> a, std::span<const double> b);
double norm(std::span<const double> v);
double distance(std::span<const double> a, std::span<const double> b);

/// Volume of the unit ball in R^n, pi^(n/2) / Gamma(n/2 + 1).
double unit_ball_volume(int n);

/// Same centre, radius scaled by `factor` (>= 1).
Ball enlarge(const Ball& b, double factor);

/// omega_n t^n: the n-dimensional cross-section of a ball of radius t in R^(n+1).
double cross_section_area(const Ball& b, int n);
double cross_section_area(double radius, int n);

bool contains_open(const Ball& b, std::span<const double> x);
/// Closed containment of `inner` in `outer` by centre/radius arithmetic.
bool contains(const Ball& outer, const Ball& inner);
bool disjoint(const Ball& a, const Ball& b);

/// The base-space centre c = (1/2, ..., 1/2).
Point base_center(int n);

/// a(x) = offset + <gradient, x - c>, c = (1/2, ..., 1/2).
struct AffinePlane {
  std::vector<double> gradient;
  double offset = 0.0;
  int index = 1;

  int dim() const { return static_cast<int>(gradient.size()); }
  double operator()(std::span<const double> x) const;
  double slope() const { return norm(gradient); }
};

enum class MeasureMethod { exact, grid, monte_carlo };

std::string to_string(MeasureMethod m);

struct MeasureEstimate {
  double value = 0.0;
  double half_width = 0.0;
  MeasureMethod method = MeasureMethod::exact;
  std::uint64_t sample_count = 0;

  double lower() const { return value > half_width ? value - half_width : 0.0; }
  double upper() const { return value + half_width; }

  static MeasureEstimate exact(double v) { return {v, 0.0, MeasureMethod::exact, 0}; }
};

}  // namespace porous
