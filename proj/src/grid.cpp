#include "hlab/grid.hpp"

#include <cmath>
#include <map>
#include <mutex>

#include <fftw3.h>

#include "hlab/random.hpp"

namespace hlab {

namespace {

struct Plans {
  fftw_plan forward;
  fftw_plan inverse;
};

std::mutex g_plan_mutex;

Plans get_plans(int dim, int n) {
  static std::map<std::pair<int, int>, Plans> cache;
  std::lock_guard<std::mutex> lock(g_plan_mutex);
  auto it = cache.find({dim, n});
  if (it != cache.end()) return it->second;
  int dims[3] = {n, n, n};
  Index total = 1;
  for (int a = 0; a < dim; ++a) total *= n;
  fftw_complex* scratch = fftw_alloc_complex(total);
  const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
  Plans p{fftw_plan_dft(dim, dims, scratch, scratch, FFTW_FORWARD, flags),
          fftw_plan_dft(dim, dims, scratch, scratch, FFTW_BACKWARD, flags)};
  fftw_free(scratch);
  cache.emplace(std::make_pair(dim, n), p);
  return p;
}

}  // namespace

Grid::Grid(int dim, int n, double length) : dim_(dim), n_(n), length_(length) {
  if (dim < 1 || dim > 3) raise(ErrorKind::Config, "InvalidGrid", "dimension must be 1, 2 or 3");
  if (n < 2 || (n & (n - 1)) != 0) raise(ErrorKind::Config, "InvalidGrid", "n must be a power of two");
  if (!(length > 0.0)) raise(ErrorKind::Config, "InvalidGrid", "box length must be positive");
  size_ = 1;
  for (int a = 0; a < dim; ++a) size_ *= n;
  auto data = std::make_shared<Data>();
  data->k.resize(size_);
  data->xi2.resize(size_);
  const double dk = kTwoPi / length;
  for (Index i = 0; i < size_; ++i) {
    std::array<int, 3> k{0, 0, 0};
    Index rem = i;
    for (int a = dim - 1; a >= 0; --a) {
      const int ia = static_cast<int>(rem % n);
      rem /= n;
      k[a] = ia < n / 2 ? ia : ia - n;
    }
    data->k[i] = k;
    data->xi2[i] = dk * dk * (sqr(k[0]) + sqr(k[1]) + sqr(k[2]));
  }
  const Plans p = get_plans(dim, n);
  data->plan_forward = p.forward;
  data->plan_inverse = p.inverse;
  data_ = data;
}

double Grid::cell_volume() const { return std::pow(dx(), dim_); }
double Grid::dxi_volume() const { return std::pow(dxi(), dim_); }

Eigen::Vector3d Grid::xi(Index i) const {
  const auto& k = data_->k[i];
  return dxi() * Eigen::Vector3d(k[0], k[1], k[2]);
}

std::array<int, 3> Grid::point_coords(Index i) const {
  std::array<int, 3> c{0, 0, 0};
  Index rem = i;
  for (int a = dim_ - 1; a >= 0; --a) {
    c[a] = static_cast<int>(rem % n_);
    rem /= n_;
  }
  return c;
}

Eigen::Vector3d Grid::x(Index i) const {
  const auto c = point_coords(i);
  return dx() * Eigen::Vector3d(c[0], c[1], c[2]);
}

std::uint64_t Grid::mode_id(Index i) const {
  const auto& k = data_->k[i];
  return WienerSample::mode_id(k[0], k[1], k[2]);
}

Index Grid::index_of_wavenumber(const std::array<int, 3>& k) const {
  Index idx = 0;
  for (int a = 0; a < dim_; ++a) {
    const int ia = ((k[a] % n_) + n_) % n_;
    idx = idx * n_ + ia;
  }
  return idx;
}

void Grid::forward(cplx* data) const {
  auto* p = reinterpret_cast<fftw_complex*>(data);
  fftw_execute_dft(static_cast<fftw_plan>(data_->plan_forward), p, p);
}

void Grid::inverse(cplx* data) const {
  auto* p = reinterpret_cast<fftw_complex*>(data);
  fftw_execute_dft(static_cast<fftw_plan>(data_->plan_inverse), p, p);
}

bool Grid::same_as(const Grid& other) const {
  return dim_ == other.dim_ && n_ == other.n_ && length_ == other.length_;
}

void require_same_grid(const Grid& a, const Grid& b, const char* what) {
  if (!a.same_as(b)) raise(ErrorKind::Validation, "GridMismatch", what);
}

void apply_multiplier(const Grid& grid, cplx* data, const ArrayXc& mult) {
  grid.forward(data);
  const double scale = 1.0 / static_cast<double>(grid.size());
  for (Index i = 0; i < grid.size(); ++i) data[i] *= mult[i] * scale;
  grid.inverse(data);
}

void apply_multiplier(const Grid& grid, cplx* data, const ArrayXr& mult) {
  grid.forward(data);
  const double scale = 1.0 / static_cast<double>(grid.size());
  for (Index i = 0; i < grid.size(); ++i) data[i] *= mult[i] * scale;
  grid.inverse(data);
}

ArrayXr convolve_real(const Grid& grid, const ArrayXr& u, const ArrayXr& mult) {
  ArrayXc tmp = u.cast<cplx>();
  apply_multiplier(grid, tmp.data(), mult);
  return tmp.real();
}

}  // namespace hlab
