#include "hlab/diagnostics.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>

#include "hlab/parallel.hpp"

namespace hlab {

void NormSpec::validate() const {
  if (!(p >= 1.0) || !(q >= 1.0))
    raise(ErrorKind::Config, "InvalidConfig", "norm exponents must lie in [1, inf]");
}

OmegaOrder parse_omega_order(const std::string& name) {
  if (name == "inside") return OmegaOrder::Inside;
  if (name == "outside") return OmegaOrder::Outside;
  raise(ErrorKind::Config, "InvalidConfig", "unknown omega ordering '" + name + "'");
}

NormDomain parse_norm_domain(const std::string& name) {
  if (name == "field") return NormDomain::Field;
  if (name == "potential") return NormDomain::Potential;
  raise(ErrorKind::Config, "InvalidConfig", "unknown norm domain '" + name + "'");
}

namespace {

double lq_space(const ArrayXr& g, double q, double cell) {
  if (std::isinf(q)) return g.maxCoeff();
  return std::pow(g.pow(q).sum() * cell, 1.0 / q);
}

std::vector<double> trapezoid_weights(const std::vector<double>& times) {
  const std::size_t m = times.size();
  std::vector<double> w(m, 0.0);
  for (std::size_t j = 0; j + 1 < m; ++j) {
    const double h = 0.5 * (times[j + 1] - times[j]);
    w[j] += h;
    w[j + 1] += h;
  }
  return w;
}

double lp_time(const std::vector<double>& a, const std::vector<double>& times, double p) {
  if (a.size() == 1) return a[0];
  if (std::isinf(p)) return *std::max_element(a.begin(), a.end());
  const auto w = trapezoid_weights(times);
  double acc = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) acc += w[j] * std::pow(a[j], p);
  return std::pow(acc, 1.0 / p);
}

ArrayXr bessel_multiplier(const Grid& g, double s) {
  ArrayXr m(g.size());
  for (Index k = 0; k < g.size(); ++k) m[k] = std::pow(1.0 + g.k2()[k], 0.5 * s);
  return m;
}

// Rows of a complex block after the <D>^s weight.
RowArrayXXc weighted(const Grid& g, const RowArrayXXc& rows, double s) {
  RowArrayXXc out = rows;
  if (s == 0.0) return out;
  const ArrayXr m = bessel_multiplier(g, s);
  for (Index j = 0; j < out.rows(); ++j) apply_multiplier(g, out.row(j).data(), m);
  return out;
}

}  // namespace

double spacetime_norm(const FieldHistory& u, const NormSpec& spec) {
  spec.validate();
  const Index R = u.size();
  if (R == 0) return 0.0;
  const Grid& g = u.grid;
  const Index m1 = static_cast<Index>(u.times.size()), npts = g.size();
  const double cell = g.cell_volume();
  if (spec.omega == OmegaOrder::Inside) {
    RowArrayXXr m2 = RowArrayXXr::Zero(m1, npts);
    for (Index r = 0; r < R; ++r) m2 += weighted(g, u.realizations[r], spec.s).abs2();
    m2 /= static_cast<double>(R);
    std::vector<double> a(m1);
    for (Index j = 0; j < m1; ++j) a[j] = lq_space(m2.row(j).transpose().sqrt(), spec.q, cell);
    return lp_time(a, u.times, spec.p);
  }
  double acc = 0.0;
  for (Index r = 0; r < R; ++r) {
    const RowArrayXXr mag = weighted(g, u.realizations[r], spec.s).abs();
    std::vector<double> a(m1);
    for (Index j = 0; j < m1; ++j) a[j] = lq_space(mag.row(j).transpose(), spec.q, cell);
    acc += sqr(lp_time(a, u.times, spec.p));
  }
  return std::sqrt(acc / static_cast<double>(R));
}

double spacetime_norm(const EnsembleField& u, const NormSpec& spec) {
  FieldHistory h;
  h.grid = u.grid;
  h.times = {u.t};
  h.realizations.resize(u.realizations());
  for (Index r = 0; r < u.realizations(); ++r) h.realizations[r] = u.values.row(r);
  return spacetime_norm(h, spec);
}

double spacetime_norm(const SpaceTimePotential& V, const NormSpec& spec) {
  spec.validate();
  const RowArrayXXr mag = weighted(V.grid, V.values.cast<cplx>(), spec.s).abs();
  std::vector<double> a(mag.rows());
  for (Index j = 0; j < mag.rows(); ++j) a[j] = lq_space(mag.row(j).transpose(), spec.q, V.grid.cell_volume());
  return lp_time(a, V.times, spec.p);
}

bool strichartz_admissible(int dim, double p, double q, double s) {
  if (!(p >= 2.0) || !(q >= 2.0) || std::isinf(q) || s < 0.0) return false;
  const double lhs = (std::isinf(p) ? 0.0 : 2.0 / p) + dim / q;
  return std::abs(lhs - (0.5 * dim - s)) <= 1e-12;
}

StrichartzReport strichartz_ratio(const FieldFactory& z0, const std::vector<Grid>& ladder, const StrichartzSpec& spec) {
  StrichartzReport rep;
  for (const Grid& g : ladder) {
    if (!strichartz_admissible(g.dim(), spec.p, spec.q, spec.s))
      raise(ErrorKind::Validation, "InadmissibleExponents", "(p, q, s) violate the Strichartz scaling relation");
    const EnsembleField z = z0(g);
    const auto times = uniform_times(spec.T, spec.steps);
    FieldHistory hist;
    hist.grid = g;
    hist.times = times;
    hist.realizations.resize(z.realizations());
    parallel_for(z.realizations(), [&](Index r) {
      ArrayXc zh = z.values.row(r).transpose();
      g.forward(zh.data());
      RowArrayXXc& out = hist.realizations[r];
      out.resize(static_cast<Index>(times.size()), g.size());
      for (std::size_t j = 0; j < times.size(); ++j) {
        for (Index k = 0; k < g.size(); ++k)
          out(j, k) = zh[k] * std::polar(1.0 / static_cast<double>(g.size()), -times[j] * g.k2()[k]);
        g.inverse(out.row(j).data());
      }
    });
    NormSpec num{spec.p, spec.q, 0.0, OmegaOrder::Inside, NormDomain::Field};
    NormSpec den{2.0, 2.0, spec.s, OmegaOrder::Inside, NormDomain::Field};
    const double a = spacetime_norm(hist, num), b = spacetime_norm(z, den);
    rep.n.push_back(g.n());
    rep.numerator.push_back(a);
    rep.denominator.push_back(b);
    if (b == 0.0) rep.degenerate = true;
    rep.ratio.push_back(b > 0.0 ? a / b : 0.0);
  }
  if (!rep.ratio.empty() && !rep.degenerate) {
    const auto [lo, hi] = std::minmax_element(rep.ratio.begin(), rep.ratio.end());
    rep.spread = *hi > 0.0 ? (*hi - *lo) / *hi : 0.0;
  }
  return rep;
}

Eigen::VectorXd DensityOperator::bessel_weights(double s) const {
  Eigen::VectorXd w(size());
  for (Index a = 0; a < size(); ++a) w[a] = std::pow(1.0 + grid.k2()[modes[a]], 0.5 * s);
  return w;
}

double DensityOperator::hermitian_error() const {
  const double scale = std::max(gamma.cwiseAbs().maxCoeff(), 1e-300);
  return (gamma - gamma.adjoint()).cwiseAbs().maxCoeff() / scale;
}

double DensityOperator::min_eigenvalue() const {
  const Eigen::MatrixXcd herm = 0.5 * (gamma + gamma.adjoint());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(herm, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

double default_xi_cut(const Grid& grid) { return 0.5 * grid.xi_edge(); }

std::vector<Index> truncated_basis(const Grid& grid, double xi_cut) {
  if (!(xi_cut > 0.0) || xi_cut >= grid.xi_edge())
    raise(ErrorKind::Validation, "CutoffTooLarge",
          "cutoff " + std::to_string(xi_cut) + " must lie in (0, " + std::to_string(grid.xi_edge()) + ")");
  std::vector<Index> modes;
  for (Index k = 0; k < grid.size(); ++k)
    if (grid.k2()[k] <= xi_cut * xi_cut) modes.push_back(k);
  return modes;
}

Eigen::MatrixXcd basis_coefficients(const EnsembleField& u, const std::vector<Index>& modes) {
  const Grid& g = u.grid;
  const Index N = u.realizations(), B = static_cast<Index>(modes.size());
  const double scale = std::pow(g.length(), 0.5 * g.dim()) / static_cast<double>(g.size());
  Eigen::MatrixXcd C(B, N);
  parallel_for(N, [&](Index r) {
    ArrayXc row = u.values.row(r).transpose();
    g.forward(row.data());
    for (Index a = 0; a < B; ++a) C(a, r) = scale * row[modes[a]];
  });
  return C;
}

DensityOperator build_density_operator(const EnsembleField& u, double xi_cut) {
  DensityOperator op;
  op.grid = u.grid;
  op.xi_cut = xi_cut;
  op.modes = truncated_basis(u.grid, xi_cut);
  op.normalization = std::pow(kTwoPi, u.grid.dim());
  const Eigen::MatrixXcd C = basis_coefficients(u, op.modes);
  op.gamma = C * C.adjoint() / static_cast<double>(std::max<Index>(u.realizations(), 1));
  return op;
}

double schatten_norm(const Eigen::MatrixXcd& A, double p) {
  if (!(p >= 1.0)) raise(ErrorKind::Config, "InvalidConfig", "Schatten exponent must lie in [1, inf]");
  if (A.size() == 0) return 0.0;
  if (!A.allFinite()) raise(ErrorKind::Numerical, "SVDFailure", "operator has non-finite entries");
  Eigen::VectorXd sv;
  const double scale = A.cwiseAbs().maxCoeff();
  if (scale == 0.0) return 0.0;
  if ((A - A.adjoint()).cwiseAbs().maxCoeff() <= 1e-12 * scale) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(A, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) raise(ErrorKind::Numerical, "SVDFailure", "eigensolver did not converge");
    sv = es.eigenvalues().cwiseAbs();
  } else {
    Eigen::BDCSVD<Eigen::MatrixXcd> svd(A);
    if (svd.info() != Eigen::Success) raise(ErrorKind::Numerical, "SVDFailure", "SVD did not converge");
    sv = svd.singularValues();
  }
  const double top = sv.maxCoeff();
  if (std::isinf(p) || top == 0.0) return top;
  return top * std::pow((sv / top).array().pow(p).sum(), 1.0 / p);
}

double schatten_norm(const Eigen::MatrixXcd& gamma, const Eigen::VectorXd& weights, double p) {
  return schatten_norm(weights.asDiagonal() * gamma * weights.asDiagonal(), p);
}

double schatten_norm(const DensityOperator& op, double p, double s) {
  return schatten_norm(op.gamma, op.bessel_weights(s), p);
}

namespace {

// int_0^h e^{i d u} du and int_0^h u e^{i d u} du.
void phase_moments(double d, double h, cplx& i0, cplx& i1) {
  const double th = d * h;
  const cplx I(0.0, 1.0);
  if (std::abs(th) < 1e-3) {
    i0 = h * (1.0 + I * th / 2.0 - th * th / 6.0 - I * th * th * th / 24.0);
    i1 = h * h * (0.5 + I * th / 3.0 - th * th / 8.0 - I * th * th * th / 30.0);
    return;
  }
  const cplx e = std::polar(1.0, th);
  i0 = (e - 1.0) / (I * d);
  i1 = h * e / (I * d) - (e - 1.0) / ((I * d) * (I * d));
}

}  // namespace

Eigen::MatrixXcd wave_operator_matrix(const SpaceTimePotential& V, const std::vector<Index>& modes) {
  const Grid& g = V.grid;
  const Index m1 = static_cast<Index>(V.times.size()), npts = g.size(), B = static_cast<Index>(modes.size());
  RowArrayXXc vh(m1, npts);
  for (Index j = 0; j < m1; ++j) {
    vh.row(j) = V.values.row(j).cast<cplx>();
    g.forward(vh.row(j).data());
  }
  vh /= static_cast<double>(npts);
  const double h = m1 > 1 ? uniform_step(V.times) : 0.0, t0 = V.times.front();
  Eigen::MatrixXcd W = Eigen::MatrixXcd::Zero(B, B);
  if (m1 < 2) return W;
  parallel_for(B, [&](Index a) {
    const auto& ka = g.wavenumber(modes[a]);
    for (Index b = 0; b < B; ++b) {
      const auto& kb = g.wavenumber(modes[b]);
      const Index diff = g.index_of_wavenumber({ka[0] - kb[0], ka[1] - kb[1], ka[2] - kb[2]});
      const double d = g.k2()[modes[a]] - g.k2()[modes[b]];
      cplx i0, i1;
      phase_moments(d, h, i0, i1);
      const cplx left = i0 - i1 / h, right = i1 / h, step = std::polar(1.0, d * h);
      cplx phase = std::polar(1.0, d * t0), acc = 0.0;
      for (Index j = 0; j + 1 < m1; ++j) {
        acc += phase * (left * vh(j, diff) + right * vh(j + 1, diff));
        phase *= step;
      }
      W(a, b) = cplx(0.0, -1.0) * acc;
    }
  });
  return W;
}

CorollaryReport corollary_check(const std::vector<EnsembleField>& X_t, const EnsembleField& Y0,
                                const SpaceTimePotential& V, const EnsembleField& Z_plus,
                                const CorollaryOptions& opts) {
  const Grid& g = Y0.grid;
  require_same_grid(V.grid, g, "corollary: potential grid differs");
  require_same_grid(Z_plus.grid, g, "corollary: profile grid differs");
  CorollaryReport rep;
  rep.xi_cut = opts.xi_cut > 0.0 ? opts.xi_cut : default_xi_cut(g);
  const auto modes = truncated_basis(g, rep.xi_cut);
  const Index B = static_cast<Index>(modes.size());
  rep.basis_size = B;
  rep.normalization = std::pow(kTwoPi, g.dim());
  Eigen::VectorXd wts(B);
  for (Index a = 0; a < B; ++a) wts[a] = std::pow(1.0 + g.k2()[modes[a]], 0.5 * opts.s);
  const double invN = 1.0 / static_cast<double>(std::max<Index>(Y0.realizations(), 1));
  const Eigen::MatrixXcd Y = basis_coefficients(Y0, modes);
  const Eigen::MatrixXcd P = wave_operator_matrix(V, modes) * Y + basis_coefficients(Z_plus, modes);
  Eigen::MatrixXcd gamma_f;
  if (opts.f) {
    gamma_f = Eigen::MatrixXcd::Zero(B, B);
    for (Index a = 0; a < B; ++a) gamma_f(a, a) = opts.f->f2(std::sqrt(g.k2()[modes[a]])) * rep.normalization;
  } else {
    gamma_f = Y * Y.adjoint() * invN;
  }
  Eigen::MatrixXcd cross = P * Y.adjoint() * invN;
  const Eigen::MatrixXcd gamma_plus = cross + cross.adjoint() + P * P.adjoint() * invN;
  rep.gamma_plus_norm = schatten_norm(gamma_plus, wts, opts.p);
  rep.gamma_f_norm = schatten_norm(gamma_f, wts, opts.p);
  for (const EnsembleField& X : X_t) {
    require_same_grid(X.grid, g, "corollary: snapshot grid differs");
    Eigen::MatrixXcd C = basis_coefficients(X, modes);
    for (Index a = 0; a < B; ++a) C.row(a) *= std::polar(1.0, X.t * g.k2()[modes[a]]);
    const Eigen::MatrixXcd R = C * C.adjoint() * invN - gamma_f - gamma_plus;
    rep.times.push_back(X.t);
    rep.residual.push_back(schatten_norm(R, wts, opts.p));
  }
  const std::size_t n = rep.residual.size();
  rep.decreasing_tail = n >= 3 && rep.residual[n - 1] < rep.residual[n - 2] && rep.residual[n - 2] < rep.residual[n - 3];
  return rep;
}

std::vector<EnsembleField> reconstruct_fields(const FixedPointState& state, const Background& bg,
                                              const PairPotential& w, const std::vector<Index>& nodes) {
  const Grid& g = bg.grid();
  const Index N = bg.realizations();
  const SpaceTimePotential Vp = convolve_potential(state.V, w_hat_on_grid(w, g));
  std::vector<EnsembleField> out(nodes.size());
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    out[i].grid = g;
    out[i].t = state.times[nodes[i]];
    out[i].values.resize(N, g.size());
  }
  const double dt = uniform_step(state.times);
  parallel_for(N, [&](Index r) {
    RowArrayXXc Y, A;
    bg.history(r, state.times, Y);
    DuhamelStepper(g, dt, bg.mass()).apply(Vp.values, Y, A);
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      const Index j = nodes[i];
      out[i].values.row(r) = Y.row(j) + A.row(j) + state.Z[r].row(j);
    }
  });
  return out;
}

}  // namespace hlab
