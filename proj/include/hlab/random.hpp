#pragma once

#include <array>
#include <cstdint>

#include "hlab/core.hpp"

namespace hlab {

using PhiloxCounter = std::array<std::uint32_t, 4>;
using PhiloxKey = std::array<std::uint32_t, 2>;

// Philox4x32 with 10 rounds.
PhiloxCounter philox4x32(PhiloxCounter ctr, PhiloxKey key);

// Complex standard Gaussian coefficients g[realization][mode] with E|g|^2 = 1.
// Counter layout: (mode lo, mode hi, realization lo, realization hi), key = seed.
class WienerSample {
 public:
  static constexpr int kContractVersion = 1;

  WienerSample() = default;
  WienerSample(std::uint64_t seed, Index n_realizations) : seed_(seed), n_(n_realizations) {}

  std::uint64_t seed() const { return seed_; }
  Index size() const { return n_; }

  cplx coefficient(std::uint64_t realization, std::uint64_t mode) const;

  // Mode identifier of the signed lattice wavenumber (k0, k1, k2); unused axes are 0.
  static std::uint64_t mode_id(int k0, int k1, int k2);

 private:
  std::uint64_t seed_ = 0;
  Index n_ = 0;
};

}  // namespace hlab
