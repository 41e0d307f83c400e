#include "hlab/quadrature.hpp"

#include <limits>

namespace hlab {

void gauss_legendre(int order, std::vector<double>& nodes, std::vector<double>& weights) {
  nodes.assign(order, 0.0);
  weights.assign(order, 0.0);
  for (int i = 0; i < (order + 1) / 2; ++i) {
    double z = std::cos(kPi * (i + 0.75) / (order + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = 0.0;
      for (int j = 1; j <= order; ++j) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * j - 1.0) * z * p1 - (j - 1.0) * p2) / j;
      }
      dp = order * (z * p0 - p1) / (z * z - 1.0);
      const double dz = p0 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    nodes[i] = -z;
    nodes[order - 1 - i] = z;
    weights[i] = weights[order - 1 - i] = 2.0 / ((1.0 - z * z) * dp * dp);
  }
}

void composite_gauss_legendre(double a, double b, int panels, int order, std::vector<double>& x,
                              std::vector<double>& w) {
  std::vector<double> gx, gw;
  gauss_legendre(order, gx, gw);
  x.clear();
  w.clear();
  const double h = (b - a) / panels;
  for (int p = 0; p < panels; ++p) {
    const double c = a + (p + 0.5) * h;
    for (int j = 0; j < order; ++j) {
      x.push_back(c + 0.5 * h * gx[j]);
      w.push_back(0.5 * h * gw[j]);
    }
  }
}

std::vector<double> log_linear_grid(double r_min, double r_max, int n_log, int n_lin) {
  std::vector<double> r;
  r.reserve(1 + n_log + n_lin);
  r.push_back(0.0);
  const double lmin = std::log(r_min);
  for (int i = 0; i < n_log; ++i) r.push_back(std::exp(lmin + (0.0 - lmin) * i / (n_log - 1)));
  const double h = (r_max - 1.0) / n_lin;
  for (int i = 1; i <= n_lin; ++i) r.push_back(1.0 + h * i);
  r.back() = r_max;
  return r;
}

std::array<cplx, 4> cubic_moments(double k, double H) {
  std::array<cplx, 4> mu{};
  const cplx z(0.0, -k);
  if (std::abs(k) * H < 1.0) {
    const cplx w = z * H;
    cplx term = 1.0;
    cplx acc[4] = {0.0, 0.0, 0.0, 0.0};
    for (int n = 0; n < 40; ++n) {
      if (n > 0) term *= w / static_cast<double>(n);
      for (int j = 0; j < 4; ++j) acc[j] += term / static_cast<double>(n + j + 1);
      if (std::abs(term) < 1e-18) break;
    }
    double hp = H;
    for (int j = 0; j < 4; ++j) {
      mu[j] = hp * acc[j];
      hp *= H;
    }
    return mu;
  }
  const cplx E = std::exp(z * H);
  mu[0] = (E - 1.0) / z;
  double hj = 1.0;
  for (int j = 1; j < 4; ++j) {
    hj *= H;
    mu[j] = (hj * E - static_cast<double>(j) * mu[j - 1]) / z;
  }
  return mu;
}

PiecewiseCubic PiecewiseCubic::spline(const std::vector<double>& x, const std::vector<double>& y,
                                      double left_slope) {
  PiecewiseCubic p;
  const Index n = static_cast<Index>(x.size());
  p.x_ = x;
  p.left_slope_ = left_slope;
  std::vector<double> H(n - 1), M(n, 0.0);
  for (Index i = 0; i + 1 < n; ++i) H[i] = x[i + 1] - x[i];
  if (n > 2) {
    // Tridiagonal system for the second derivatives; M_{n-1} = 0.
    std::vector<double> lo(n, 0.0), di(n, 0.0), up(n, 0.0), rhs(n, 0.0);
    if (std::isfinite(left_slope)) {
      di[0] = 2.0 * H[0];
      up[0] = H[0];
      rhs[0] = 6.0 * ((y[1] - y[0]) / H[0] - left_slope);
    } else {
      di[0] = 1.0;
    }
    for (Index i = 1; i + 1 < n; ++i) {
      lo[i] = H[i - 1];
      di[i] = 2.0 * (H[i - 1] + H[i]);
      up[i] = H[i];
      rhs[i] = 6.0 * ((y[i + 1] - y[i]) / H[i] - (y[i] - y[i - 1]) / H[i - 1]);
    }
    di[n - 1] = 1.0;
    for (Index i = 1; i < n; ++i) {
      const double m = lo[i] / di[i - 1];
      di[i] -= m * up[i - 1];
      rhs[i] -= m * rhs[i - 1];
    }
    M[n - 1] = rhs[n - 1] / di[n - 1];
    for (Index i = n - 2; i >= 0; --i) M[i] = (rhs[i] - up[i] * M[i + 1]) / di[i];
  }
  p.a_.resize(n);
  p.b_.resize(n - 1);
  p.c_.resize(n - 1);
  p.d_.resize(n - 1);
  for (Index i = 0; i < n; ++i) p.a_[i] = y[i];
  for (Index i = 0; i + 1 < n; ++i) {
    p.b_[i] = (y[i + 1] - y[i]) / H[i] - H[i] * (2.0 * M[i] + M[i + 1]) / 6.0;
    p.c_[i] = 0.5 * M[i];
    p.d_[i] = (M[i + 1] - M[i]) / (6.0 * H[i]);
  }
  p.build_sections();
  return p;
}

void PiecewiseCubic::build_sections() {
  sections_.clear();
  const Index np = static_cast<Index>(x_.size()) - 1;
  Index i = 0;
  while (i < np) {
    const double h = x_[i + 1] - x_[i];
    Index j = i + 1;
    while (j < np && std::abs((x_[j + 1] - x_[j]) - h) <= 1e-12 * h) ++j;
    sections_.push_back({i, j, h});
    i = j;
  }
}

Index PiecewiseCubic::locate(double t) const {
  auto it = std::upper_bound(x_.begin(), x_.end(), t);
  Index i = static_cast<Index>(it - x_.begin()) - 1;
  return std::clamp<Index>(i, 0, static_cast<Index>(x_.size()) - 2);
}

double PiecewiseCubic::operator()(double t) const {
  if (t < x_.front() || t > x_.back()) return 0.0;
  const Index i = locate(t);
  const double u = t - x_[i];
  return a_[i] + u * (b_[i] + u * (c_[i] + u * d_[i]));
}

double PiecewiseCubic::derivative(double t) const {
  if (t < x_.front() || t > x_.back()) return 0.0;
  const Index i = locate(t);
  const double u = t - x_[i];
  return b_[i] + u * (2.0 * c_[i] + 3.0 * u * d_[i]);
}

double PiecewiseCubic::integral() const {
  double s = 0.0;
  for (std::size_t i = 0; i + 1 < x_.size(); ++i) {
    const double h = x_[i + 1] - x_[i];
    s += h * (a_[i] + h * (b_[i] / 2.0 + h * (c_[i] / 3.0 + h * d_[i] / 4.0)));
  }
  return s;
}

cplx PiecewiseCubic::fourier(double k) const {
  cplx total = 0.0;
  for (const auto& sec : sections_) {
    const auto mu = cubic_moments(k, sec.width);
    const cplx step = std::polar(1.0, -k * sec.width);
    cplx phase = 0.0;
    cplx acc = 0.0;
    for (Index i = sec.begin; i < sec.end; ++i) {
      if ((i - sec.begin) % 64 == 0) phase = std::polar(1.0, -k * x_[i]);
      acc += phase * (a_[i] * mu[0] + b_[i] * mu[1] + c_[i] * mu[2] + d_[i] * mu[3]);
      phase *= step;
    }
    total += acc;
  }
  return total;
}

PiecewiseCubic PiecewiseCubic::coarsened() const {
  std::vector<double> x, y;
  for (std::size_t i = 0; i < x_.size(); i += 2) {
    x.push_back(x_[i]);
    y.push_back(a_[i]);
  }
  if (x.back() != x_.back()) {
    x.push_back(x_.back());
    y.push_back(a_.back());
  }
  return spline(x, y, left_slope_);
}

}  // namespace hlab
