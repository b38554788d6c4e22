#include "porous/ball_index.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "porous/errors.hpp"
#include "porous/rng.hpp"

namespace porous {

std::uint64_t BallIndex::cell_key(std::span<const std::int64_t> cell) {
  std::uint64_t h = 0x6a09e667f3bcc909ULL;
  for (std::int64_t c : cell) h = splitmix64(h ^ static_cast<std::uint64_t>(c));
  return h;
}

std::uint64_t BallIndex::point_key(const Grid& g, std::span<const double> x) const {
  std::int64_t cell[kMaxDim];
  for (int j = 0; j < dim_; ++j) cell[j] = static_cast<std::int64_t>(std::floor(x[j] / g.cell));
  return cell_key(std::span<const std::int64_t>(cell, static_cast<std::size_t>(dim_)));
}

std::span<const std::uint32_t> BallIndex::Grid::bucket(std::uint64_t key) const {
  auto it = std::lower_bound(keys.begin(), keys.end(), key);
  if (it == keys.end() || *it != key) return {};
  const auto k = static_cast<std::size_t>(it - keys.begin());
  return {ids.data() + offsets[k], ids.data() + offsets[k + 1]};
}

BallIndex::BallIndex(std::vector<Ball> balls, Inflation inflation) : balls_(std::move(balls)) {
  if (balls_.empty()) return;
  dim_ = balls_.front().dim();
  if (dim_ < 1 || dim_ > kMaxDim) throw InvalidArgument("BallIndex: unsupported dimension");
  for (Ball& b : balls_) {
    if (b.dim() != dim_) throw InvalidArgument("BallIndex: mixed dimensions");
    if (!(b.radius > 0.0)) throw InvalidArgument("BallIndex: radius must be positive");
    b.radius = b.radius * inflation.scale + inflation.pad;
  }

  std::map<int, std::vector<std::uint32_t>> strata;
  for (std::uint32_t i = 0; i < balls_.size(); ++i) strata[std::ilogb(balls_[i].radius)].push_back(i);

  grids_.reserve(strata.size());
  std::vector<std::pair<std::uint64_t, std::uint32_t>> entries;
  for (auto& [bucket, members] : strata) {
    std::vector<double> radii;
    radii.reserve(members.size());
    for (auto id : members) radii.push_back(balls_[id].radius);
    std::nth_element(radii.begin(), radii.begin() + radii.size() / 2, radii.end());
    Grid g;
    g.cell = radii[radii.size() / 2];
    g.max_radius = *std::max_element(radii.begin(), radii.end());

    entries.clear();
    for (auto id : members)
      for_each_cell_in_box(g, balls_[id], [&](std::uint64_t key) { entries.emplace_back(key, id); });
    std::sort(entries.begin(), entries.end());
    entries.erase(std::unique(entries.begin(), entries.end()), entries.end());

    g.ids.reserve(entries.size());
    for (std::size_t e = 0; e < entries.size(); ++e) {
      if (e == 0 || entries[e].first != entries[e - 1].first) {
        g.keys.push_back(entries[e].first);
        g.offsets.push_back(static_cast<std::uint32_t>(g.ids.size()));
      }
      g.ids.push_back(entries[e].second);
    }
    g.offsets.push_back(static_cast<std::uint32_t>(g.ids.size()));
    grids_.push_back(std::move(g));
  }
}

std::vector<std::uint32_t> BallIndex::query(std::span<const double> x) const {
  std::vector<std::uint32_t> out;
  for_each_containing(x, [&](std::uint32_t id) { out.push_back(id); });
  std::sort(out.begin(), out.end());
  return out;
}

bool BallIndex::any_contains(std::span<const double> x) const {
  for (const Grid& g : grids_)
    for (std::uint32_t id : g.bucket(point_key(g, x)))
      if (contains_open(balls_[id], x)) return true;
  return false;
}

std::vector<std::uint32_t> linear_scan_query(std::span<const Ball> balls, std::span<const double> x) {
  std::vector<std::uint32_t> out;
  for (std::uint32_t i = 0; i < balls.size(); ++i)
    if (contains_open(balls[i], x)) out.push_back(i);
  return out;
}

}  // namespace porous
