#include "porous/planes.hpp"

#include <cmath>
#include <numeric>

#include "porous/errors.hpp"

namespace porous {

std::uint64_t m_sequence(std::uint64_t k) {
  if (k == 0) throw InvalidArgument("m_sequence: k must be >= 1");
  // Row j of the triangle holds 1..j and starts at index j(j-1)/2 + 1.
  std::uint64_t j = static_cast<std::uint64_t>((std::sqrt(8.0 * static_cast<double>(k)) - 1.0) / 2.0);
  while (j * (j + 1) / 2 >= k) --j;
  while ((j + 1) * (j + 2) / 2 < k) ++j;
  return k - j * (j + 1) / 2;
}

PlaneCatalog::PlaneCatalog(int n, double r) : n_(n), r_(r) {
  if (n < 1 || n >= kMaxDim) throw InvalidArgument("PlaneCatalog: unsupported dimension");
  if (!(r > 0.0)) throw InvalidArgument("PlaneCatalog: slope bound must be positive");
  planes_.push_back(AffinePlane{std::vector<double>(static_cast<std::size_t>(n), 0.0), 0.0, 1});
}

void PlaneCatalog::extend_to(std::uint64_t index) const {
  while (planes_.size() < index) {
    const int j = ++shell_;
    std::vector<int> v(static_cast<std::size_t>(n_));
    for (int o = -j; o <= j; ++o) {
      std::fill(v.begin(), v.end(), -j);
      while (true) {
        long sq = 0;
        int g = std::gcd(j, std::abs(o));
        bool zero = o == 0;
        for (int c : v) {
          sq += static_cast<long>(c) * c;
          g = std::gcd(g, std::abs(c));
          zero = zero && c == 0;
        }
        if (!zero && sq <= static_cast<long>(j) * j && g == 1) {
          AffinePlane p;
          p.gradient.resize(static_cast<std::size_t>(n_));
          for (int d = 0; d < n_; ++d) p.gradient[static_cast<std::size_t>(d)] = r_ * v[static_cast<std::size_t>(d)] / j;
          p.offset = r_ * o / j;
          p.index = static_cast<int>(planes_.size() + 1);
          planes_.push_back(std::move(p));
        }
        int d = n_ - 1;
        while (d >= 0 && v[static_cast<std::size_t>(d)] == j) v[static_cast<std::size_t>(d--)] = -j;
        if (d < 0) break;
        ++v[static_cast<std::size_t>(d)];
      }
    }
  }
}

AffinePlane PlaneCatalog::plane(std::uint64_t index) const {
  if (index == 0) throw InvalidArgument("PlaneCatalog: plane indices start at 1");
  extend_to(index);
  return planes_[index - 1];
}

}  // namespace porous
