#pragma once

#include <algorithm>
#include <atomic>
#include <thread>
#include <vector>

#include "hlab/core.hpp"

namespace hlab {

// Realizations are grouped in fixed-size blocks; partial sums are formed per
// block and combined pairwise in block order, so results do not depend on the
// number of workers.
constexpr Index kBlockSize = 64;

void set_workers(int n);
int workers();

template <class F>
void parallel_for(Index count, F&& body) {
  const int nw = std::min<Index>(workers(), count);
  if (nw <= 1) {
    for (Index i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<Index> next{0};
  std::vector<std::thread> pool;
  pool.reserve(nw);
  for (int w = 0; w < nw; ++w) {
    pool.emplace_back([&] {
      for (Index i = next++; i < count; i = next++) body(i);
    });
  }
  for (auto& t : pool) t.join();
}

template <class Acc>
void pairwise_combine(std::vector<Acc>& parts) {
  for (std::size_t stride = 1; stride < parts.size(); stride *= 2)
    for (std::size_t i = 0; i + stride < parts.size(); i += 2 * stride) parts[i] += parts[i + stride];
}

// Mean over realizations of a per-realization contribution of fixed length.
// body(r, acc) adds the contribution of realization r into acc.
template <class Scalar, class F>
Eigen::Array<Scalar, Eigen::Dynamic, 1> ensemble_mean(Index n_real, Index length, F&& body) {
  using Vec = Eigen::Array<Scalar, Eigen::Dynamic, 1>;
  if (n_real == 0) return Vec::Zero(length);
  const Index nblocks = (n_real + kBlockSize - 1) / kBlockSize;
  std::vector<Vec> parts(nblocks, Vec::Zero(length));
  parallel_for(nblocks, [&](Index b) {
    const Index r1 = std::min(n_real, (b + 1) * kBlockSize);
    for (Index r = b * kBlockSize; r < r1; ++r) body(r, parts[b]);
  });
  pairwise_combine(parts);
  return parts[0] / static_cast<double>(n_real);
}

}  // namespace hlab
