#pragma once

#include <array>
#include <memory>
#include <vector>

#include <Eigen/Core>

#include "hlab/core.hpp"

namespace hlab {

// Periodic box [0, L)^dim with n points per axis. Point and mode indices are
// row-major with the last axis fastest; mode index i on each axis maps to the
// signed wavenumber i for i < n/2 and i - n otherwise.
class Grid {
 public:
  Grid() = default;
  Grid(int dim, int n, double length);

  int dim() const { return dim_; }
  int n() const { return n_; }
  double length() const { return length_; }
  Index size() const { return size_; }

  double dx() const { return length_ / n_; }
  double cell_volume() const;
  double dxi() const { return kTwoPi / length_; }
  double dxi_volume() const;
  double xi_edge() const { return kPi * n_ / length_; }
  bool outside_paper_scope() const { return dim_ == 1; }

  const ArrayXr& k2() const { return data_->xi2; }
  const std::array<int, 3>& wavenumber(Index i) const { return data_->k[i]; }
  Eigen::Vector3d xi(Index i) const;
  Eigen::Vector3d x(Index i) const;
  std::uint64_t mode_id(Index i) const;
  Index index_of_wavenumber(const std::array<int, 3>& k) const;
  std::array<int, 3> point_coords(Index i) const;

  // Unnormalized in-place transforms: forward uses e^{-i xi.x}, inverse e^{+i xi.x}.
  void forward(cplx* data) const;
  void inverse(cplx* data) const;

  bool same_as(const Grid& other) const;

 private:
  struct Data {
    std::vector<std::array<int, 3>> k;
    ArrayXr xi2;
    void* plan_forward = nullptr;
    void* plan_inverse = nullptr;
  };
  int dim_ = 0;
  int n_ = 0;
  double length_ = 0.0;
  Index size_ = 0;
  std::shared_ptr<const Data> data_;
};

void require_same_grid(const Grid& a, const Grid& b, const char* what);

// In-place u <- F^{-1}[mult * F u] for one grid-sized array.
void apply_multiplier(const Grid& grid, cplx* data, const ArrayXc& mult);
void apply_multiplier(const Grid& grid, cplx* data, const ArrayXr& mult);

// Real convolution with a radial multiplier given per mode.
ArrayXr convolve_real(const Grid& grid, const ArrayXr& u, const ArrayXr& mult);

}  // namespace hlab
