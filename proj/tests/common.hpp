#pragma once

#include <doctest.h>

#include "hlab/profiles.hpp"

namespace hlab::testing {

inline const MomentumDistribution& gaussian2() {
  static const MomentumDistribution f = MomentumDistribution::gaussian(2, 0.5);
  return f;
}

inline const PairKernel& gaussian2_kernel() {
  static const PairKernel h = build_kernel_h(gaussian2());
  return h;
}

inline const MomentumDistribution& unit_gaussian2() {
  static const MomentumDistribution f = MomentumDistribution::gaussian(2, 1.0);
  return f;
}

inline const PairKernel& unit_gaussian2_kernel() {
  static const PairKernel h = build_kernel_h(unit_gaussian2());
  return h;
}

}  // namespace hlab::testing
