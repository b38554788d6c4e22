#pragma once

#include <cstdint>
#include <initializer_list>
#include <string_view>

namespace porous {

/// SplitMix64 finaliser; the mixing step of the counter-based generator below.
constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

/// Derives an independent substream key from a seed and a list of labels
/// (stage, level, purpose tag, ...).
constexpr std::uint64_t stream_key(std::uint64_t seed, std::initializer_list<std::uint64_t> labels) {
  std::uint64_t k = splitmix64(seed);
  for (std::uint64_t l : labels) k = splitmix64(k ^ splitmix64(l + 0x632be59bd9b4e019ULL));
  return k;
}

/// Counter-based uniform generator: draw `i` depends only on (key, i), so any
/// partition of a sampling sweep across workers sees the same numbers.
class CounterRng {
 public:
  constexpr explicit CounterRng(std::uint64_t key) : key_(key) {}

  constexpr std::uint64_t bits(std::uint64_t i) const { return splitmix64(key_ ^ splitmix64(i)); }

  /// Uniform in [0, 1) with 53 random bits.
  constexpr double uniform(std::uint64_t i) const {
    return static_cast<double>(bits(i) >> 11) * 0x1.0p-53;
  }

  constexpr std::uint64_t key() const { return key_; }

 private:
  std::uint64_t key_;
};

}  // namespace porous
