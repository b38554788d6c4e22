#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "porous/geometry.hpp"

namespace porous {

/// Balls are indexed as B(c, radius * scale + pad).
struct BallInflation {
  double scale = 1.0;
  double pad = 0.0;
};

/// Point-membership index over a fixed list of balls. Balls are grouped into
/// strata by log2 of their radius; each stratum is a regular grid whose cell
/// size is the median radius of the stratum, and every ball is registered in
/// each cell its bounding box overlaps.
/// Queries report membership in the inflated balls.
class BallIndex {
 public:
  using Inflation = BallInflation;

  BallIndex() = default;
  explicit BallIndex(std::vector<Ball> balls, Inflation inflation = {});

  /// Identifiers (positions in the input list) of balls whose open interior
  /// contains x, ascending.
  std::vector<std::uint32_t> query(std::span<const double> x) const;

  /// Calls fn(id) for every ball whose open interior contains x (unordered, no duplicates).
  template <class Fn>
  void for_each_containing(std::span<const double> x, Fn&& fn) const;

  bool any_contains(std::span<const double> x) const;

  /// Calls fn(i, j) once for every pair i < j of balls with overlapping bounding boxes
  /// (a superset of the intersecting pairs).
  template <class Fn>
  void for_each_candidate_pair(Fn&& fn) const;

  std::size_t size() const { return balls_.size(); }
  bool empty() const { return balls_.empty(); }
  /// The indexed (possibly inflated) ball.
  const Ball& ball(std::uint32_t id) const { return balls_[id]; }
  const std::vector<Ball>& balls() const { return balls_; }
  std::size_t stratum_count() const { return grids_.size(); }

 private:
  struct Grid {
    double cell = 1.0;
    double max_radius = 0.0;
    std::vector<std::uint64_t> keys;     // sorted unique cell keys
    std::vector<std::uint32_t> offsets;  // keys.size() + 1
    std::vector<std::uint32_t> ids;

    std::span<const std::uint32_t> bucket(std::uint64_t key) const;
  };

  static std::uint64_t cell_key(std::span<const std::int64_t> cell);
  std::uint64_t point_key(const Grid& g, std::span<const double> x) const;
  template <class Fn>
  void for_each_cell_in_box(const Grid& g, const Ball& b, Fn&& fn) const;

  std::vector<Ball> balls_;
  std::vector<Grid> grids_;
  int dim_ = 0;
};

/// Reference implementation: exhaustive scan with the same open-containment predicate.
std::vector<std::uint32_t> linear_scan_query(std::span<const Ball> balls, std::span<const double> x);

// ---- template definitions -------------------------------------------------

template <class Fn>
void BallIndex::for_each_containing(std::span<const double> x, Fn&& fn) const {
  for (const Grid& g : grids_) {
    for (std::uint32_t id : g.bucket(point_key(g, x))) {
      if (contains_open(balls_[id], x)) fn(id);
    }
  }
}

template <class Fn>
void BallIndex::for_each_cell_in_box(const Grid& g, const Ball& b, Fn&& fn) const {
  std::int64_t lo[kMaxDim], hi[kMaxDim], cur[kMaxDim];
  for (int j = 0; j < dim_; ++j) {
    lo[j] = static_cast<std::int64_t>(std::floor((b.center[j] - b.radius) / g.cell));
    hi[j] = static_cast<std::int64_t>(std::floor((b.center[j] + b.radius) / g.cell));
    cur[j] = lo[j];
  }
  while (true) {
    fn(cell_key(std::span<const std::int64_t>(cur, static_cast<std::size_t>(dim_))));
    int j = 0;
    while (j < dim_ && cur[j] == hi[j]) {
      cur[j] = lo[j];
      ++j;
    }
    if (j == dim_) break;
    ++cur[j];
  }
}

template <class Fn>
void BallIndex::for_each_candidate_pair(Fn&& fn) const {
  std::vector<std::uint32_t> found;
  auto box_overlap = [&](const Ball& a, const Ball& b) {
    for (int j = 0; j < dim_; ++j)
      if (std::abs(a.center[j] - b.center[j]) > a.radius + b.radius) return false;
    return true;
  };
  // Each pair is reported from its smaller ball (ties: lower id). Strata holding
  // only smaller balls are skipped, so every scanned box spans a few cells.
  for (std::uint32_t i = 0; i < balls_.size(); ++i) {
    const Ball& bi = balls_[i];
    found.clear();
    for (const Grid& g : grids_) {
      if (g.max_radius < bi.radius) continue;
      for_each_cell_in_box(g, bi, [&](std::uint64_t key) {
        for (std::uint32_t j : g.bucket(key)) {
          const Ball& bj = balls_[j];
          if (bj.radius < bi.radius || (bj.radius == bi.radius && j <= i)) continue;
          if (box_overlap(bi, bj)) found.push_back(j);
        }
      });
    }
    std::sort(found.begin(), found.end());
    found.erase(std::unique(found.begin(), found.end()), found.end());
    for (std::uint32_t j : found) fn(std::min(i, j), std::max(i, j));
  }
}

}  // namespace porous
