#include "hlab/random.hpp"

#include <cmath>

namespace hlab {

namespace {

constexpr std::uint32_t kM0 = 0xD2511F53u;
constexpr std::uint32_t kM1 = 0xCD9E8D57u;
constexpr std::uint32_t kW0 = 0x9E3779B9u;
constexpr std::uint32_t kW1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
  const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
  hi = static_cast<std::uint32_t>(p >> 32);
  lo = static_cast<std::uint32_t>(p);
}

inline double unit_open(std::uint32_t hi, std::uint32_t lo) {
  const std::uint64_t bits = ((static_cast<std::uint64_t>(hi) << 32) | lo) >> 11;
  return (static_cast<double>(bits) + 1.0) * 0x1.0p-53;
}

}  // namespace

PhiloxCounter philox4x32(PhiloxCounter ctr, PhiloxKey key) {
  for (int round = 0; round < 10; ++round) {
    if (round > 0) {
      key[0] += kW0;
      key[1] += kW1;
    }
    std::uint32_t hi0, lo0, hi1, lo1;
    mulhilo(kM0, ctr[0], hi0, lo0);
    mulhilo(kM1, ctr[2], hi1, lo1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
  }
  return ctr;
}

cplx WienerSample::coefficient(std::uint64_t realization, std::uint64_t mode) const {
  const PhiloxCounter ctr = {static_cast<std::uint32_t>(mode), static_cast<std::uint32_t>(mode >> 32),
                             static_cast<std::uint32_t>(realization),
                             static_cast<std::uint32_t>(realization >> 32)};
  const PhiloxKey key = {static_cast<std::uint32_t>(seed_), static_cast<std::uint32_t>(seed_ >> 32)};
  const PhiloxCounter x = philox4x32(ctr, key);
  const double u1 = unit_open(x[0], x[1]);
  const double u2 = unit_open(x[2], x[3]);
  const double radius = std::sqrt(-std::log(u1));
  const double phase = kTwoPi * u2;
  return {radius * std::cos(phase), radius * std::sin(phase)};
}

std::uint64_t WienerSample::mode_id(int k0, int k1, int k2) {
  constexpr std::int64_t offset = 1 << 20;
  const auto c = [](int k) { return static_cast<std::uint64_t>(k + offset) & 0x1FFFFFu; };
  return (c(k0) << 42) | (c(k1) << 21) | c(k2);
}

}  // namespace hlab
