#pragma once

#include "porous/construction.hpp"

namespace porous::fixture {

/// Two-stage family in R^3 that builds in about a second.
inline BuildConfig small_config() {
  BuildConfig c;
  c.n = 3;
  c.epsilons = {0.45, 0.45};
  c.stop_fractions = {0.97, 0.96};
  c.seed = 7;
  return c;
}

inline const HoleFamily& small_family() {
  static const HoleFamily f = build_family(small_config()).family;
  return f;
}

}  // namespace porous::fixture
