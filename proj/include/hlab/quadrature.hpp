#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <queue>
#include <vector>

#include "hlab/core.hpp"

namespace hlab {

template <class T>
struct QuadResult {
  T value{};
  double error = 0.0;
  bool converged = true;
  int evaluations = 0;
};

namespace detail {
constexpr std::array<double, 8> kXgk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.0};
constexpr std::array<double, 8> kWgk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr std::array<double, 4> kWg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

inline double magnitude(double x) { return std::abs(x); }
inline double magnitude(const cplx& x) { return std::abs(x); }

template <class T, class F>
void gk15(F& f, double a, double b, T& kron, double& err) {
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  const T fc = f(c);
  T k = fc * kWgk[7];
  T g = fc * kWg[3];
  for (int j = 0; j < 7; ++j) {
    const T f1 = f(c - h * kXgk[j]);
    const T f2 = f(c + h * kXgk[j]);
    k += (f1 + f2) * kWgk[j];
    if (j % 2 == 1) g += (f1 + f2) * kWg[j / 2];
  }
  kron = k * h;
  err = magnitude(T((k - g) * h));
}
}  // namespace detail

// Adaptive Gauss-Kronrod (7/15) on [a, b].
template <class T, class F>
QuadResult<T> integrate(F&& f, double a, double b, double abs_tol, double rel_tol = 1e-12,
                        int max_intervals = 4000) {
  struct Piece {
    double a, b;
    T value;
    double err;
    bool operator<(const Piece& o) const { return err < o.err; }
  };
  QuadResult<T> out;
  if (a == b) return out;
  std::priority_queue<Piece> heap;
  Piece first{a, b, T{}, 0.0};
  detail::gk15<T>(f, a, b, first.value, first.err);
  out.evaluations = 15;
  T total = first.value;
  double total_err = first.err;
  heap.push(first);
  while (total_err > std::max(abs_tol, rel_tol * detail::magnitude(total))) {
    if (static_cast<int>(heap.size()) >= max_intervals) {
      out.converged = false;
      break;
    }
    Piece worst = heap.top();
    heap.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    Piece left{worst.a, mid, T{}, 0.0}, right{mid, worst.b, T{}, 0.0};
    detail::gk15<T>(f, left.a, left.b, left.value, left.err);
    detail::gk15<T>(f, right.a, right.b, right.value, right.err);
    out.evaluations += 30;
    total += left.value + right.value - worst.value;
    total_err += left.err + right.err - worst.err;
    heap.push(left);
    heap.push(right);
  }
  // Re-sum to avoid drift from incremental updates.
  total = T{};
  total_err = 0.0;
  std::vector<Piece> pieces;
  while (!heap.empty()) {
    pieces.push_back(heap.top());
    heap.pop();
  }
  std::sort(pieces.begin(), pieces.end(), [](const Piece& x, const Piece& y) { return x.a < y.a; });
  for (const auto& p : pieces) {
    total += p.value;
    total_err += p.err;
  }
  out.value = total;
  out.error = total_err;
  return out;
}

// Composite Gauss-Legendre nodes/weights on [a, b] with `panels` panels of `order` points.
void gauss_legendre(int order, std::vector<double>& nodes, std::vector<double>& weights);
void composite_gauss_legendre(double a, double b, int panels, int order, std::vector<double>& x,
                              std::vector<double>& w);

// Nodes {0} U log-spaced [r_min, 1] U linear (1, r_max].
std::vector<double> log_linear_grid(double r_min, double r_max, int n_log, int n_lin);

// Piecewise cubic in local power form on each panel [x_i, x_{i+1}].
class PiecewiseCubic {
 public:
  PiecewiseCubic() = default;
  // Cubic spline through (x, y); first derivative at the left end is clamped to
  // `left_slope` when finite, otherwise natural; the right end is natural.
  static PiecewiseCubic spline(const std::vector<double>& x, const std::vector<double>& y,
                               double left_slope = 0.0);

  double operator()(double t) const;
  double derivative(double t) const;
  double front() const { return x_.front(); }
  double back() const { return x_.back(); }
  const std::vector<double>& nodes() const { return x_; }
  const std::vector<double>& values() const { return a_; }

  // Integral of p(x) e^{-ikx} over [x_0, x_N], exact for the piecewise cubic.
  cplx fourier(double k) const;
  double integral() const;
  // Spline through every other node (error estimate reference).
  PiecewiseCubic coarsened() const;

 private:
  Index locate(double t) const;
  std::vector<double> x_, a_, b_, c_, d_;
  double left_slope_ = 0.0;
  // Runs of equal panel width for phase recurrences.
  struct Section {
    Index begin, end;
    double width;
  };
  std::vector<Section> sections_;
  void build_sections();
};

// Moments int_0^H u^j e^{-iku} du for j = 0..3.
std::array<cplx, 4> cubic_moments(double k, double H);

}  // namespace hlab
