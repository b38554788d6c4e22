#pragma once

// Data-parallel primitives. Every sweep is cut into fixed blocks of kBlock
// indices and per-block partials are merged in block order, so results are
// bitwise identical for any worker count and for Exec::serial.

#include <algorithm>
#include <cstdint>
#include <exception>
#include <mutex>
#include <vector>

#include <omp.h>

namespace porous::kernels {

enum class Exec { serial, parallel };

inline constexpr std::uint64_t kBlock = 4096;

/// 0 restores the OpenMP default.
void set_workers(int n);
int workers();

/// Default execution policy for library sweeps.
Exec default_exec();
void set_default_exec(Exec e);

namespace detail {
class ExceptionSlot {
 public:
  template <class Fn>
  void run(Fn&& fn) noexcept {
    try {
      fn();
    } catch (...) {
      std::lock_guard<std::mutex> lock(mu_);
      if (!ptr_) ptr_ = std::current_exception();
    }
  }
  void rethrow() const {
    if (ptr_) std::rethrow_exception(ptr_);
  }

 private:
  std::mutex mu_;
  std::exception_ptr ptr_;
};
}  // namespace detail

/// Calls fn(begin, end) for each block of [0, n).
template <class BlockFn>
void for_blocks(std::uint64_t n, Exec exec, BlockFn&& fn) {
  const auto nb = static_cast<std::int64_t>((n + kBlock - 1) / kBlock);
  if (exec == Exec::serial || nb <= 1) {
    for (std::int64_t b = 0; b < nb; ++b) {
      const auto lo = static_cast<std::uint64_t>(b) * kBlock;
      fn(lo, std::min(n, lo + kBlock));
    }
    return;
  }
  detail::ExceptionSlot slot;
#pragma omp parallel for schedule(dynamic, 1)
  for (std::int64_t b = 0; b < nb; ++b) {
    slot.run([&] {
      const auto lo = static_cast<std::uint64_t>(b) * kBlock;
      fn(lo, std::min(n, lo + kBlock));
    });
  }
  slot.rethrow();
}

template <class Fn>
void parallel_for(std::uint64_t n, Exec exec, Fn&& fn) {
  for_blocks(n, exec, [&](std::uint64_t lo, std::uint64_t hi) {
    for (std::uint64_t i = lo; i < hi; ++i) fn(i);
  });
}

/// Reduces block(begin, end) -> T over fixed blocks; merge order is block order.
template <class T, class BlockFn, class Merge>
T block_reduce(std::uint64_t n, Exec exec, T init, BlockFn&& block, Merge&& merge) {
  const std::uint64_t nb = (n + kBlock - 1) / kBlock;
  std::vector<T> partial(nb, init);
  for_blocks(n, exec, [&](std::uint64_t lo, std::uint64_t hi) { partial[lo / kBlock] = block(lo, hi); });
  T acc = init;
  for (const T& p : partial) acc = merge(acc, p);
  return acc;
}

}  // namespace porous::kernels
