#include "hlab/quadratic.hpp"

#include <cmath>

#include "hlab/parallel.hpp"

namespace hlab {

namespace detail {

void check_compatible(const SpaceTimePotential& a, const SpaceTimePotential& b, const char* what) {
  require_same_grid(a.grid, b.grid, what);
  if (a.times.size() != b.times.size()) raise(ErrorKind::Validation, "GridMismatch", what);
  for (std::size_t j = 0; j < a.times.size(); ++j)
    if (std::abs(a.times[j] - b.times[j]) > 1e-12 * (1.0 + std::abs(a.times[j])))
      raise(ErrorKind::Validation, "GridMismatch", what);
}

SpaceTimePotential stream_mean(const Background& bg, const std::vector<double>& times, const StreamBody& body,
                               RowArrayXXr* stddev) {
  const Index m1 = static_cast<Index>(times.size()), npts = bg.grid().size();
  const Index len = m1 * npts;
  const bool second = stddev != nullptr;
  const ArrayXr mean = ensemble_mean<double>(bg.realizations(), second ? 2 * len : len, [&](Index r, ArrayXr& acc) {
    RowArrayXXc Y;
    bg.history(r, times, Y);
    if (!second) {
      Eigen::Map<RowArrayXXr> view(acc.data(), m1, npts);
      body(r, Y, view);
      return;
    }
    ArrayXr one = ArrayXr::Zero(len);
    Eigen::Map<RowArrayXXr> view(one.data(), m1, npts);
    body(r, Y, view);
    acc.head(len) += one;
    acc.tail(len) += one.square();
  });
  SpaceTimePotential out;
  out.grid = bg.grid();
  out.times = times;
  out.values = Eigen::Map<const RowArrayXXr>(mean.data(), m1, npts);
  if (second) {
    const ArrayXr var = (mean.tail(len) - mean.head(len).square()).max(0.0);
    *stddev = Eigen::Map<const RowArrayXXr>(var.sqrt().eval().data(), m1, npts);
  }
  return out;
}

}  // namespace detail

namespace {

RowArrayXXr re_cross(const RowArrayXXc& a, const RowArrayXXc& b) { return 2.0 * (a.conjugate() * b).real(); }

void check_background(const SpaceTimePotential& V, const Background& bg) {
  require_same_grid(V.grid, bg.grid(), "potential and equilibrium grids differ");
}

}  // namespace

HistorySource history_source(const FieldHistory& Z) {
  return [&Z](Index r, RowArrayXXc& out) { out = Z.realizations[r]; };
}

SpaceTimePotential Q1_ensemble(const HistorySource& Z, const SpaceTimePotential& V, const Background& bg) {
  check_background(V, bg);
  const double dt = uniform_step(V.times);
  return detail::stream_mean(bg, V.times, [&](Index r, const RowArrayXXc& Y, Eigen::Map<RowArrayXXr>& acc) {
    DuhamelStepper st(bg.grid(), dt, bg.mass());
    RowArrayXXc z, A, B;
    Z(r, z);
    if (z.rows() != Y.rows() || z.cols() != Y.cols())
      raise(ErrorKind::Validation, "GridMismatch", "Q1: perturbation history shape differs");
    st.apply(V.values, Y, A);
    st.apply(V.values, z, B);
    acc += re_cross(A, z) + re_cross(Y, B);
  });
}

SpaceTimePotential Q1_ensemble(const FieldHistory& Z, const SpaceTimePotential& V, const Background& bg) {
  require_same_grid(Z.grid, V.grid, "Q1: grids differ");
  if (Z.size() != bg.realizations()) raise(ErrorKind::Validation, "GridMismatch", "Q1: ensemble sizes differ");
  return Q1_ensemble(history_source(Z), V, bg);
}

SpaceTimePotential Q2_ensemble(const SpaceTimePotential& U, const SpaceTimePotential& V, const Background& bg,
                               RowArrayXXr* stddev) {
  detail::check_compatible(U, V, "Q2: potentials are on different grids");
  check_background(V, bg);
  const double dt = uniform_step(V.times);
  return detail::stream_mean(bg, V.times, [&](Index, const RowArrayXXc& Y, Eigen::Map<RowArrayXXr>& acc) {
    DuhamelStepper st(bg.grid(), dt, bg.mass());
    RowArrayXXc A, B, C, D;
    st.apply(V.values, Y, A);
    st.apply(U.values, Y, B);
    st.apply(V.values, B, C);
    st.apply(U.values, A, D);
    acc += re_cross(A, B) + re_cross(Y, C + D);
  }, stddev);
}

namespace {

enum class Q2Form { SineProduct, J1, J2VU, J2UV };

struct Spectra {
  RowArrayXXc u, v;  // [time][mode], coefficients normalized by npts
  std::vector<Index> active;
};

Spectra spectra(const SpaceTimePotential& U, const SpaceTimePotential& V, double tol) {
  Spectra s;
  const Grid& g = U.grid;
  s.u = U.values.cast<cplx>();
  s.v = V.values.cast<cplx>();
  for (Index j = 0; j < s.u.rows(); ++j) {
    g.forward(s.u.row(j).data());
    g.forward(s.v.row(j).data());
  }
  s.u /= static_cast<double>(g.size());
  s.v /= static_cast<double>(g.size());
  const double peak = std::max(s.u.abs().maxCoeff(), s.v.abs().maxCoeff());
  for (Index k = 0; k < g.size(); ++k)
    if (peak > 0.0 && std::max(s.u.col(k).abs().maxCoeff(), s.v.col(k).abs().maxCoeff()) > tol * peak)
      s.active.push_back(k);
  return s;
}

// Nested trapezoid: int_0^{t_j} dtau1 int_0^{tau1} dtau2 K(t_j - tau1, tau1 - tau2) F(tau1, tau2).
std::vector<SpaceTimePotential> q2_lattice(const SpaceTimePotential& U, const SpaceTimePotential& V,
                                           const PairKernel& h, const Q2Options& opts,
                                           const std::vector<Q2Form>& forms) {
  detail::check_compatible(U, V, "Q2: potentials are on different grids");
  const Grid& g = U.grid;
  const Index m1 = static_cast<Index>(U.times.size()), npts = g.size();
  const double dt = uniform_step(U.times);
  const Spectra sp = spectra(U, V, opts.active_tol);
  std::vector<char> is_active(npts, 0);
  for (Index k : sp.active) is_active[k] = 1;
  const int n = g.n();
  auto difference = [&](Index a, Index b) -> Index {
    std::array<int, 3> k{0, 0, 0};
    for (int ax = 0; ax < g.dim(); ++ax) {
      k[ax] = g.wavenumber(a)[ax] - g.wavenumber(b)[ax];
      if (k[ax] < -n / 2 || k[ax] >= n / 2) return -1;
    }
    return g.index_of_wavenumber(k);
  };
  std::vector<std::vector<std::pair<Index, Index>>> pairs(npts);
  double pair_count = 0.0;
  for (Index e = 0; e < npts; ++e)
    for (Index e2 : sp.active) {
      const Index d = difference(e, e2);
      if (d >= 0 && is_active[d]) pairs[e].push_back({e2, d});
    }
  for (const auto& p : pairs) pair_count += static_cast<double>(p.size());
  const double m = static_cast<double>(m1);
  const double flops = pair_count * static_cast<double>(forms.size()) * (m * m * 20.0 + m * m * m / 3.0);
  if (flops > opts.flop_budget)
    raise(ErrorKind::Validation, "ComplexityGuard",
          "lattice evaluation needs about " + std::to_string(flops) + " operations, above the budget");
  const std::size_t nf = forms.size();
  std::vector<RowArrayXXc> hat(nf, RowArrayXXc::Zero(m1, npts));
  const double L = g.length();
  parallel_for(npts, [&](Index e) {
    if (pairs[e].empty()) return;
    const Eigen::Vector3d eta = g.xi(e);
    const double eta_sq = eta.squaredNorm();
    RowArrayXXr hk(m1, m1);
    std::vector<RowArrayXXr> K(nf, RowArrayXXr(m1, m1));
    for (const auto& [e2, d] : pairs[e]) {
      const Eigen::Vector3d eta2 = g.xi(e2);
      const double dot = eta.dot(eta2), eta2_sq = eta2.squaredNorm();
      for (Index a = 0; a < m1; ++a)
        for (Index b = 0; b < m1; ++b) {
          const double t = dt * static_cast<double>(a), s = dt * static_cast<double>(b);
          hk(a, b) = h.periodized(2.0 * t * eta + 2.0 * s * eta2, L);
          for (std::size_t f = 0; f < nf; ++f) {
            double k = 0.0;
            switch (forms[f]) {
              case Q2Form::SineProduct:
                k = 4.0 * std::sin(t * (eta_sq - dot)) * std::sin(t * dot + s * eta2_sq);
                break;
              case Q2Form::J1:
                k = 2.0 * std::cos(t * (eta_sq - 2.0 * dot) - s * eta2_sq);
                break;
              case Q2Form::J2VU:
              case Q2Form::J2UV:
                k = -2.0 * std::cos(t * eta_sq + s * eta2_sq);
                break;
            }
            K[f](a, b) = k * hk(a, b);
          }
        }
      for (std::size_t f = 0; f < nf; ++f) {
        // F(l, i): source at tau1 = t_l (mode eta - eta2) and tau2 = t_i (mode eta2).
        auto F = [&](Index l, Index i) -> cplx {
          switch (forms[f]) {
            case Q2Form::SineProduct:
            case Q2Form::J1:
              return sp.v(l, d) * sp.u(i, e2) + sp.u(l, d) * sp.v(i, e2);
            case Q2Form::J2VU:
              return sp.v(l, d) * sp.u(i, e2);
            case Q2Form::J2UV:
              return sp.u(l, d) * sp.v(i, e2);
          }
          return 0.0;
        };
        for (Index j = 1; j < m1; ++j) {
          cplx outer = 0.0;
          for (Index l = 0; l <= j; ++l) {
            const double wl = (l == 0 || l == j) ? 0.5 : 1.0;
            cplx inner = 0.0;
            for (Index i = 0; i <= l; ++i) {
              const double wi = (i == 0 || i == l) ? 0.5 : 1.0;
              if (l == 0) break;
              inner += wi * K[f](j - l, l - i) * F(l, i);
            }
            outer += wl * inner;
          }
          hat[f](j, e) += outer * dt * dt;
        }
      }
    }
  });
  std::vector<SpaceTimePotential> out(nf);
  for (std::size_t f = 0; f < nf; ++f) {
    for (Index j = 0; j < m1; ++j) g.inverse(hat[f].row(j).data());
    out[f].grid = g;
    out[f].times = U.times;
    out[f].values = hat[f].real();
  }
  return out;
}

}  // namespace

SpaceTimePotential Q2_fourier(const SpaceTimePotential& U, const SpaceTimePotential& V, const PairKernel& h,
                              const Q2Options& opts) {
  return q2_lattice(U, V, h, opts, {Q2Form::SineProduct}).front();
}

SpaceTimePotential Q2LemmaTerms::sum() const {
  SpaceTimePotential s = J1;
  s.values += J2_VU.values + J2_UV.values;
  return s;
}

Q2LemmaTerms Q2_lemma_terms(const SpaceTimePotential& U, const SpaceTimePotential& V, const PairKernel& h,
                            const Q2Options& opts) {
  auto r = q2_lattice(U, V, h, opts, {Q2Form::J1, Q2Form::J2VU, Q2Form::J2UV});
  return {r[0], r[1], r[2]};
}

double kernel_K(const PairKernel& h, const Eigen::Vector3d& eta, const Eigen::Vector3d& eta2, double t, double s) {
  const double dot = eta.dot(eta2);
  return h((2.0 * t * eta + 2.0 * s * eta2).norm()) * std::sin(t * (eta.squaredNorm() - dot)) *
         std::sin(t * dot + s * eta2.squaredNorm());
}

QKernelSample kernel_K_norms(const Eigen::Vector3d& eta, const Eigen::Vector3d& eta2, const PairKernel& h, int p,
                             int table_size) {
  if (p != 1 && p != 2) raise(ErrorKind::Config, "InvalidExponent", "kernel norm exponent must be 1 or 2");
  QKernelSample out;
  out.eta = eta;
  out.eta2 = eta2;
  out.p = p;
  const double a2 = eta.squaredNorm(), b2 = eta2.squaredNorm(), dot = eta.dot(eta2);
  const double det = a2 * b2 - dot * dot;
  if (a2 == 0.0 || b2 == 0.0 || det < 1e-10 * a2 * b2)
    raise(ErrorKind::Validation, "CollinearPair", "wavevectors are collinear; the kernel bound degenerates");
  out.determinant = det;
  out.bound = (p == 1 ? h.C1() : h.C2()) / std::sqrt(det);
  if (h.is_zero()) return out;
  const double R = h.r_eff();
  const double t_max = std::sqrt(b2) * R / (2.0 * std::sqrt(det));
  const double w1 = std::abs(a2 - dot), w2 = std::abs(dot);
  double scale_t = 1.0 / (2.0 * std::sqrt(a2));
  if (w1 > 0.0) scale_t = std::min(scale_t, 1.0 / w1);
  if (w2 > 0.0) scale_t = std::min(scale_t, 1.0 / w2);
  const double scale_s = std::min(1.0 / b2, 1.0 / (2.0 * std::sqrt(b2)));
  std::vector<double> tx, tw;
  composite_gauss_legendre(-t_max, t_max, static_cast<int>(std::ceil(2.0 * t_max / (0.5 * scale_t))) + 1, 8, tx, tw);
  std::vector<double> l1(tx.size()), l2(tx.size());
  parallel_for(static_cast<Index>(tx.size()), [&](Index it) {
    const double t = tx[it];
    // |2 t eta + 2 s eta2| <= R for s in [s_lo, s_hi].
    const double bq = 8.0 * t * dot, aq = 4.0 * b2, cq = 4.0 * t * t * a2 - R * R;
    const double disc = bq * bq - 4.0 * aq * cq;
    l1[it] = l2[it] = 0.0;
    if (disc <= 0.0) return;
    const double sq = std::sqrt(disc);
    const double s_lo = (-bq - sq) / (2.0 * aq), s_hi = (-bq + sq) / (2.0 * aq);
    std::vector<double> sx, sw;
    composite_gauss_legendre(s_lo, s_hi, static_cast<int>(std::ceil((s_hi - s_lo) / (0.5 * scale_s))) + 1, 8, sx,
                             sw);
    double i1 = 0.0, i2 = 0.0;
    for (std::size_t is = 0; is < sx.size(); ++is) {
      const double k = kernel_K(h, eta, eta2, t, sx[is]);
      i1 += sw[is] * std::abs(k);
      i2 += sw[is] * k * k;
    }
    l1[it] = i1;
    l2[it] = i2;
  });
  for (std::size_t it = 0; it < tx.size(); ++it) {
    out.norm2_L2L1 += tw[it] * l1[it] * l1[it];
    out.norm2_L2L2 += tw[it] * l2[it];
  }
  if (table_size > 1) {
    const double s_max = R / (2.0 * std::sqrt(b2)) + std::abs(dot) * t_max / b2;
    out.t_table.resize(table_size);
    out.s_table.resize(table_size);
    out.table.resize(table_size, table_size);
    for (int i = 0; i < table_size; ++i) {
      out.t_table[i] = -t_max + 2.0 * t_max * i / (table_size - 1);
      out.s_table[i] = -s_max + 2.0 * s_max * i / (table_size - 1);
    }
    for (int i = 0; i < table_size; ++i)
      for (int j = 0; j < table_size; ++j) out.table(i, j) = kernel_K(h, eta, eta2, out.t_table[i], out.s_table[j]);
  }
  return out;
}

SpaceTimePotential cubic_C1(const SpaceTimePotential& V, const SpaceTimePotential& U, const SpaceTimePotential& W,
                            const Background& bg) {
  detail::check_compatible(V, U, "C1: potentials are on different grids");
  detail::check_compatible(V, W, "C1: potentials are on different grids");
  check_background(V, bg);
  const double dt = uniform_step(V.times);
  return detail::stream_mean(bg, V.times, [&](Index, const RowArrayXXc& Y, Eigen::Map<RowArrayXXr>& acc) {
    DuhamelStepper st(bg.grid(), dt, bg.mass());
    RowArrayXXc A, B, C, D;
    st.apply(V.values, Y, A);
    st.apply(W.values, Y, B);
    st.apply(U.values, B, C);
    st.apply(V.values, C, D);
    acc += re_cross(A, C) + re_cross(Y, D);
  });
}

SpaceTimePotential cubic_C2(const SpaceTimePotential& V, const SpaceTimePotential& U, const HistorySource& Z,
                            const Background& bg) {
  detail::check_compatible(V, U, "C2: potentials are on different grids");
  check_background(V, bg);
  const double dt = uniform_step(V.times);
  return detail::stream_mean(bg, V.times, [&](Index r, const RowArrayXXc& Y, Eigen::Map<RowArrayXXr>& acc) {
    DuhamelStepper st(bg.grid(), dt, bg.mass());
    RowArrayXXc z, A, B, C;
    Z(r, z);
    if (z.rows() != Y.rows() || z.cols() != Y.cols())
      raise(ErrorKind::Validation, "GridMismatch", "C2: perturbation history shape differs");
    st.apply(V.values, Y, A);
    st.apply(U.values, z, B);
    st.apply(V.values, B, C);
    acc += re_cross(A, B) + re_cross(Y, C);
  });
}

}  // namespace hlab
