#include "hlab/linear_response.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include <Eigen/LU>

#include "hlab/parallel.hpp"

namespace hlab {

namespace {

cplx mf_from_spline(const PiecewiseCubic& s, double omega, double xi) {
  const double kappa = omega / (2.0 * xi);
  const double a = 0.5 * xi;
  return cplx(0.0, 0.5 / xi) * (s.fourier(kappa - a) - s.fourier(kappa + a));
}

double trapezoid_uniform(const std::vector<double>& v, double dt) {
  if (v.size() < 2) return 0.0;
  double s = 0.5 * (v.front() + v.back());
  for (std::size_t j = 1; j + 1 < v.size(); ++j) s += v[j];
  return s * dt;
}

void check_times(const std::vector<double>& a, const std::vector<double>& b, const char* what) {
  if (a.size() != b.size()) raise(ErrorKind::Validation, "GridMismatch", what);
  for (std::size_t j = 0; j < a.size(); ++j)
    if (std::abs(a[j] - b[j]) > 1e-12 * (1.0 + std::abs(a[j]))) raise(ErrorKind::Validation, "GridMismatch", what);
}

void spatial_forward(const Grid& g, const RowArrayXXr& V, RowArrayXXc& out) {
  out = V.cast<cplx>();
  parallel_for(out.rows(), [&](Index j) { g.forward(out.row(j).data()); });
}

SpaceTimePotential spatial_inverse(const Grid& g, const std::vector<double>& times, RowArrayXXc& hat,
                                   double* imag_residue) {
  parallel_for(hat.rows(), [&](Index j) { g.inverse(hat.row(j).data()); });
  hat /= static_cast<double>(g.size());
  SpaceTimePotential out;
  out.grid = g;
  out.times = times;
  out.values = hat.real();
  if (imag_residue) {
    const double amp = out.values.abs().maxCoeff();
    const double im = hat.imag().abs().maxCoeff();
    *imag_residue = amp > 0.0 ? im / amp : im;
  }
  return out;
}

}  // namespace

cplx mf_value(const PairKernel& h, double omega, double xi) {
  if (xi == 0.0 || h.is_zero()) return 0.0;
  return mf_from_spline(h.fourier_spline(), omega, std::abs(xi));
}

cplx mf_value(const PairKernel& h, double omega, double xi, double& error) {
  error = 0.0;
  if (xi == 0.0 || h.is_zero()) return 0.0;
  const cplx v = mf_from_spline(h.fourier_spline(), omega, std::abs(xi));
  error = std::abs(v - mf_from_spline(h.fourier_spline().coarsened(), omega, std::abs(xi)));
  return v;
}

ResponseSymbol compute_mf(const PairKernel& h, const std::vector<double>& omega, const std::vector<double>& xi,
                          bool with_errors) {
  ResponseSymbol s;
  s.omega = omega;
  s.xi = xi;
  const Index no = static_cast<Index>(omega.size()), nx = static_cast<Index>(xi.size());
  s.values = RowArrayXXc::Zero(no, nx);
  s.errors = RowArrayXXr::Zero(no, nx);
  if (h.is_zero()) return s;
  PiecewiseCubic coarse;
  if (with_errors) coarse = h.fourier_spline().coarsened();
  parallel_for(no * nx, [&](Index idx) {
    const Index i = idx / nx, j = idx % nx;
    if (xi[j] == 0.0) return;
    const double x = std::abs(xi[j]);
    s.values(i, j) = mf_from_spline(h.fourier_spline(), omega[i], x);
    if (with_errors) s.errors(i, j) = std::abs(s.values(i, j) - mf_from_spline(coarse, omega[i], x));
  });
  if (!s.values.allFinite()) raise(ErrorKind::Numerical, "QuadratureFailure", "response symbol is not finite");
  return s;
}

EpsilonReport epsilon_h(const PairKernel& h, int levels, int angles, double stab_tol) {
  EpsilonReport rep;
  rep.level_max.assign(levels + 1, 0.0);
  if (h.is_zero()) return rep;
  const double radii[3] = {1.0, 0.8, 0.6};
  std::vector<double> shell(levels + 1, -std::numeric_limits<double>::infinity());
  const Index per_level = 3 * angles;
  std::vector<double> vals((levels + 1) * per_level);
  parallel_for(static_cast<Index>(vals.size()), [&](Index idx) {
    const Index j = idx / per_level, rest = idx % per_level;
    const double rho = std::ldexp(radii[rest / angles], -static_cast<int>(j));
    const double theta = kPi * (static_cast<double>(rest % angles) + 0.5) / angles;
    vals[idx] = mf_from_spline(h.fourier_spline(), rho * std::cos(theta), rho * std::sin(theta)).real();
  });
  const double dtheta = kPi / angles;
  parallel_for(levels + 1, [&](Index j) {
    Index best = 0;
    for (Index k = 0; k < per_level; ++k)
      if (vals[j * per_level + k] > vals[j * per_level + best]) best = k;
    const double rho = std::ldexp(radii[best / angles], -static_cast<int>(j));
    auto value = [&](double theta) {
      return mf_from_spline(h.fourier_spline(), rho * std::cos(theta), rho * std::sin(theta)).real();
    };
    const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
    const double center = dtheta * (static_cast<double>(best % angles) + 0.5);
    double a = std::max(0.0, center - dtheta), b = std::min(kPi, center + dtheta);
    double c = b - phi * (b - a), d = a + phi * (b - a), fc = value(c), fd = value(d);
    for (int it = 0; it < 40; ++it) {
      if (fc > fd) {
        b = d, d = c, fd = fc;
        c = b - phi * (b - a), fc = value(c);
      } else {
        a = c, c = d, fc = fd;
        d = a + phi * (b - a), fd = value(d);
      }
    }
    shell[j] = std::max({vals[j * per_level + best], fc, fd});
  });
  double running = -std::numeric_limits<double>::infinity();
  for (int j = levels; j >= 0; --j) {
    running = std::max(running, shell[j]);
    rep.level_max[j] = running;
  }
  rep.value = rep.level_max[levels];
  rep.trend = levels > 0 ? rep.level_max[levels - 1] - rep.level_max[levels] : 0.0;
  rep.stabilized = std::abs(rep.trend) < stab_tol;
  return rep;
}

MarginReport symbol_margin(const ResponseSymbol& symbol, const std::vector<double>& w_hat, double c_min) {
  MarginReport rep;
  rep.c_min = c_min;
  rep.margin = std::numeric_limits<double>::infinity();
  for (Index i = 0; i < symbol.values.rows(); ++i)
    for (Index j = 0; j < symbol.values.cols(); ++j) {
      const double v = std::abs(1.0 - w_hat[j] * symbol.values(i, j));
      if (v < rep.margin) {
        rep.margin = v;
        rep.omega_at = symbol.omega[i];
        rep.xi_at = symbol.xi[j];
      }
    }
  rep.passed = rep.margin >= c_min;
  return rep;
}

RadialModes radial_modes(const Grid& grid) {
  std::map<long, Index> slot;
  for (Index i = 0; i < grid.size(); ++i) {
    const auto& k = grid.wavenumber(i);
    slot.emplace(static_cast<long>(k[0]) * k[0] + static_cast<long>(k[1]) * k[1] + static_cast<long>(k[2]) * k[2], 0);
  }
  RadialModes out;
  for (auto& [k2, idx] : slot) {
    idx = static_cast<Index>(out.xi.size());
    out.xi.push_back(grid.dxi() * std::sqrt(static_cast<double>(k2)));
  }
  out.index.resize(grid.size());
  for (Index i = 0; i < grid.size(); ++i) {
    const auto& k = grid.wavenumber(i);
    out.index[i] = slot[static_cast<long>(k[0]) * k[0] + static_cast<long>(k[1]) * k[1] + static_cast<long>(k[2]) * k[2]];
  }
  return out;
}

ArrayXr w_hat_on_grid(const PairPotential& w, const Grid& grid) {
  const RadialModes rad = radial_modes(grid);
  std::vector<double> wr(rad.xi.size());
  for (std::size_t j = 0; j < wr.size(); ++j) wr[j] = eval_w_hat(w, rad.xi[j]);
  ArrayXr out(grid.size());
  for (Index i = 0; i < grid.size(); ++i) out[i] = wr[rad.index[i]];
  return out;
}

SpectralL2::SpectralL2(const Grid& grid, const std::vector<double>& times, const PairKernel& h,
                       const PairPotential& w, Index min_padding_factor)
    : grid_(grid), times_(times) {
  const double dt = uniform_step(times);
  const Index m1 = static_cast<Index>(times.size());
  radial_ = radial_modes(grid);
  Index need = min_padding_factor * m1;
  if (radial_.xi.size() > 1 && !h.is_zero() && dt > 0.0)
    need = std::max<Index>(need, m1 + static_cast<Index>(std::ceil(h.r_eff() / (2.0 * radial_.xi[1] * dt))));
  padded_ = 2;
  while (padded_ < need) padded_ *= 2;
  time_grid_ = Grid(1, static_cast<int>(padded_), static_cast<double>(padded_) * (dt > 0.0 ? dt : 1.0));
  std::vector<double> omega(padded_);
  for (Index q = 0; q < padded_; ++q) omega[q] = time_grid_.xi(q)[0];
  std::vector<double> half(omega.begin(), omega.begin() + padded_ / 2 + 1);
  half.back() = -omega[padded_ / 2];
  ResponseSymbol hs = compute_mf(h, half, radial_.xi, false);
  symbol_.omega = omega;
  symbol_.xi = radial_.xi;
  symbol_.values.resize(padded_, static_cast<Index>(radial_.xi.size()));
  symbol_.errors = RowArrayXXr::Zero(padded_, static_cast<Index>(radial_.xi.size()));
  for (Index q = 0; q < padded_; ++q) {
    if (q < padded_ / 2) symbol_.values.row(q) = hs.values.row(q);
    else if (q == padded_ / 2) symbol_.values.row(q) = hs.values.row(q).real().cast<cplx>();
    else symbol_.values.row(q) = hs.values.row(padded_ - q).conjugate();
  }
  const Index nr = static_cast<Index>(radial_.xi.size());
  w_hat_.resize(nr);
  for (Index j = 0; j < nr; ++j) w_hat_[j] = eval_w_hat(w, radial_.xi[j]);
  lags_ = RowArrayXXr::Zero(nr, padded_);
  parallel_for(nr, [&](Index r) {
    if (w_hat_[r] == 0.0 || radial_.xi[r] == 0.0) return;
    ArrayXc seq = symbol_.values.col(r);
    time_grid_.inverse(seq.data());
    lags_.row(r) = (w_hat_[r] / static_cast<double>(padded_)) * seq.real().transpose();
  });
}

Eigen::MatrixXd SpectralL2::window_matrix(Index r) const {
  const Index m1 = static_cast<Index>(times_.size());
  Eigen::MatrixXd A(m1, m1);
  for (Index j = 0; j < m1; ++j)
    for (Index l = 0; l < m1; ++l) A(j, l) = lags_(r, ((j - l) % padded_ + padded_) % padded_);
  return A;
}

MarginReport SpectralL2::margin(double c_min) const {
  return symbol_margin(symbol_, std::vector<double>(w_hat_.data(), w_hat_.data() + w_hat_.size()), c_min);
}

SpaceTimePotential SpectralL2::transform(const SpaceTimePotential& V, bool inverse) const {
  require_same_grid(V.grid, grid_, "response operator: grids differ");
  check_times(V.times, times_, "response operator: time nodes differ");
  RowArrayXXc hat;
  spatial_forward(grid_, V.values, hat);
  const Index npts = grid_.size();
  const Index nr = static_cast<Index>(radial_.xi.size());
  std::vector<std::vector<Index>> members(nr);
  for (Index k = 0; k < npts; ++k) members[radial_.index[k]].push_back(k);
  parallel_for(nr, [&](Index r) {
    if (w_hat_[r] == 0.0 || radial_.xi[r] == 0.0) {
      if (!inverse)
        for (Index k : members[r]) hat.col(k).setZero();
      return;
    }
    const Eigen::MatrixXd A = window_matrix(r);
    Eigen::MatrixXcd X(hat.rows(), static_cast<Index>(members[r].size()));
    for (std::size_t c = 0; c < members[r].size(); ++c) X.col(c) = hat.col(members[r][c]).matrix();
    Eigen::MatrixXcd Y;
    if (inverse) {
      const Eigen::MatrixXd B = Eigen::MatrixXd::Identity(A.rows(), A.cols()) - A;
      Y = B.cast<cplx>().partialPivLu().solve(X);
    } else {
      Y = A.cast<cplx>() * X;
    }
    for (std::size_t c = 0; c < members[r].size(); ++c) hat.col(members[r][c]) = Y.col(c).array();
  });
  SpaceTimePotential out = spatial_inverse(grid_, times_, hat, &imag_residue_);
  if (!out.values.allFinite()) raise(ErrorKind::Numerical, "NaNDetected", "response operator produced non-finite values");
  return out;
}

SpaceTimePotential SpectralL2::apply(const SpaceTimePotential& V) const { return transform(V, false); }

SpaceTimePotential SpectralL2::invert(const SpaceTimePotential& V, MarginReport& report, double c_min) const {
  report = margin(c_min);
  if (!report.passed)
    raise(ErrorKind::Numerical, "ResonantSymbol",
          "min |1 - w m_f| = " + std::to_string(report.margin) + " below " + std::to_string(c_min));
  return transform(V, true);
}

SpaceTimePotential apply_L2(const SpaceTimePotential& V, const PairPotential& w, const PairKernel& h) {
  return SpectralL2(V.grid, V.times, h, w).apply(V);
}

SpaceTimePotential invert_id_minus_L2(const SpaceTimePotential& V, const PairPotential& w, const PairKernel& h,
                                      MarginReport& report, double c_min) {
  return SpectralL2(V.grid, V.times, h, w).invert(V, report, c_min);
}

CausalL2::CausalL2(const Grid& grid, const std::vector<double>& times, const PairKernel& h, const ArrayXr& w_hat)
    : grid_(grid), times_(times), dt_(uniform_step(times)) {
  const Index m1 = static_cast<Index>(times.size()), npts = grid.size();
  kernel_ = RowArrayXXr::Zero(m1, npts);
  if (h.is_zero()) return;
  parallel_for(npts, [&](Index k) {
    if (w_hat[k] == 0.0 || grid.k2()[k] == 0.0) return;
    const Eigen::Vector3d xi = grid.xi(k);
    for (Index j = 1; j < m1; ++j) {
      const double s = dt_ * static_cast<double>(j);
      kernel_(j, k) = -2.0 * std::sin(grid.k2()[k] * s) * h.periodized(2.0 * s * xi, grid.length()) * w_hat[k];
    }
  });
}

SpaceTimePotential CausalL2::apply(const SpaceTimePotential& V) const {
  require_same_grid(V.grid, grid_, "causal response: grids differ");
  check_times(V.times, times_, "causal response: time nodes differ");
  RowArrayXXc hat;
  spatial_forward(grid_, V.values, hat);
  const Index m1 = hat.rows();
  RowArrayXXc out = RowArrayXXc::Zero(m1, grid_.size());
  parallel_for(grid_.size(), [&](Index k) {
    if (kernel_.col(k).isZero(0.0)) return;
    for (Index j = 1; j < m1; ++j) {
      cplx s = 0.5 * kernel_(j, k) * hat(0, k);
      for (Index l = 1; l < j; ++l) s += kernel_(j - l, k) * hat(l, k);
      out(j, k) = s * dt_;
    }
  });
  return spatial_inverse(grid_, times_, out, nullptr);
}

SpaceTimePotential CausalL2::invert(const SpaceTimePotential& V) const {
  require_same_grid(V.grid, grid_, "causal response: grids differ");
  check_times(V.times, times_, "causal response: time nodes differ");
  RowArrayXXc hat;
  spatial_forward(grid_, V.values, hat);
  const Index m1 = hat.rows();
  parallel_for(grid_.size(), [&](Index k) {
    if (kernel_.col(k).isZero(0.0)) return;
    for (Index j = 1; j < m1; ++j) {
      cplx s = 0.5 * kernel_(j, k) * hat(0, k);
      for (Index l = 1; l < j; ++l) s += kernel_(j - l, k) * hat(l, k);
      hat(j, k) += s * dt_;
    }
  });
  return spatial_inverse(grid_, times_, hat, nullptr);
}

SpaceTimePotential causal_L2_separable(const Grid& grid, const std::vector<double>& times,
                                       const std::function<double(double)>& b, const ArrayXr& a,
                                       const PairKernel& h, const PairPotential& w, double tol) {
  const RadialModes rad = radial_modes(grid);
  const Index m1 = static_cast<Index>(times.size()), nr = static_cast<Index>(rad.xi.size());
  RowArrayXXr table = RowArrayXXr::Zero(m1, nr);
  std::vector<double> wr(nr);
  for (Index r = 0; r < nr; ++r) wr[r] = eval_w_hat(w, rad.xi[r]);
  parallel_for(m1 * nr, [&](Index idx) {
    const Index j = idx / nr, r = idx % nr;
    const double xi = rad.xi[r];
    if (xi == 0.0 || wr[r] == 0.0 || times[j] <= times[0]) return;
    const double t = times[j];
    auto g = [&](double tau) {
      const double s = t - tau;
      return -2.0 * std::sin(xi * xi * s) * h(2.0 * xi * s) * b(tau);
    };
    const auto q = integrate<double>(g, times[0], t, tol, 1e-13, 20000);
    if (!q.converged) raise(ErrorKind::Numerical, "QuadratureFailure", "causal kernel quadrature did not converge");
    table(j, r) = wr[r] * q.value;
  });
  ArrayXc ahat = a.cast<cplx>();
  grid.forward(ahat.data());
  RowArrayXXc hat(m1, grid.size());
  for (Index j = 0; j < m1; ++j)
    for (Index k = 0; k < grid.size(); ++k) hat(j, k) = table(j, rad.index[k]) * ahat[k];
  return spatial_inverse(grid, times, hat, nullptr);
}

SpaceTimePotential ensemble_linear_response(const SpaceTimePotential& V, const Background& bg, RowArrayXXr* stddev) {
  require_same_grid(V.grid, bg.grid(), "ensemble response: grids differ");
  const Index m1 = static_cast<Index>(V.times.size()), npts = bg.grid().size();
  const Index len = m1 * npts;
  const double dt = uniform_step(V.times);
  const bool second = stddev != nullptr;
  const ArrayXr mean = ensemble_mean<double>(bg.realizations(), second ? 2 * len : len, [&](Index r, ArrayXr& acc) {
    RowArrayXXc Y, W;
    bg.history(r, V.times, Y);
    DuhamelStepper(bg.grid(), dt, bg.mass()).apply(V.values, Y, W);
    const ArrayXr e = 2.0 * Eigen::Map<const ArrayXc>((Y.conjugate() * W).eval().data(), len).real();
    acc.head(len) += e;
    if (second) acc.tail(len) += e.square();
  });
  SpaceTimePotential out;
  out.grid = V.grid;
  out.times = V.times;
  out.values = Eigen::Map<const RowArrayXXr>(mean.data(), m1, npts);
  if (second) {
    const ArrayXr var = (mean.tail(len) - mean.head(len).square()).max(0.0);
    *stddev = Eigen::Map<const RowArrayXXr>(var.sqrt().eval().data(), m1, npts);
  }
  return out;
}

LinearCancellationReport linear_cancellation_diag(const std::vector<double>& times, const std::vector<double>& V,
                                                  const Background& bg) {
  if (V.size() != times.size()) raise(ErrorKind::Validation, "GridMismatch", "potential profile length differs from time nodes");
  const Grid& g = bg.grid();
  const Index m1 = static_cast<Index>(times.size()), npts = g.size();
  const double dt = uniform_step(times);
  RowArrayXXr Vf(m1, npts);
  for (Index j = 0; j < m1; ++j) Vf.row(j).setConstant(V[j]);
  const ArrayXr mean = ensemble_mean<double>(bg.realizations(), m1 * npts + npts, [&](Index r, ArrayXr& acc) {
    RowArrayXXc Y, W;
    bg.history(r, times, Y);
    DuhamelStepper(g, dt, bg.mass()).apply(Vf, Y, W);
    acc.head(m1 * npts) += 2.0 * Eigen::Map<const ArrayXc>((Y.conjugate() * W).eval().data(), m1 * npts).real();
    acc.tail(npts) += W.row(m1 - 1).transpose().abs2();
  });
  LinearCancellationReport rep;
  rep.re_cross_max = mean.head(m1 * npts).abs().maxCoeff();
  rep.w_norm = std::sqrt(mean.tail(npts).mean());
  rep.integral_V = trapezoid_uniform(V, dt);
  std::vector<double> absV(V.size());
  for (std::size_t j = 0; j < V.size(); ++j) absV[j] = std::abs(V[j]);
  rep.y_norm = std::sqrt(bg.variance());
  rep.scale = bg.variance() * trapezoid_uniform(absV, dt);
  return rep;
}

}  // namespace hlab
