#pragma once

#include <cstdint>
#include <vector>

#include "porous/geometry.hpp"

namespace porous {

/// Diagonal enumeration 1; 1,2; 1,2,3; ... (every natural number recurs infinitely often).
std::uint64_t m_sequence(std::uint64_t k);

/// Countable catalogue of affine planes a_l with |grad a_l| <= r and |offset| <= r.
/// a_1 is the zero plane. Plane l >= 2 comes from shell j = 1, 2, ...: gradient
/// r v / j and offset r o / j for integer v, o with |v| <= j, |o| <= j and
/// gcd(v, o, j) = 1, ordered by (j, o, v lexicographic). The union over all
/// shells is dense in the admissible planes.
class PlaneCatalog {
 public:
  PlaneCatalog(int n, double r);

  AffinePlane plane(std::uint64_t index) const;
  int dim() const { return n_; }
  double slope_bound() const { return r_; }

 private:
  void extend_to(std::uint64_t index) const;

  int n_;
  double r_;
  mutable int shell_ = 0;
  mutable std::vector<AffinePlane> planes_;
};

}  // namespace porous
