#include "hlab/solver.hpp"

#include <cmath>

#include "hlab/parallel.hpp"

namespace hlab {

double equilibrium_mass(const PairPotential& w, const MomentumDistribution& f, const Grid& grid) {
  return eval_w_hat(w, 0.0) * lattice_variance(f, grid);
}

double effective_momentum(const MomentumDistribution& f, double rel) {
  const double top = f.f2(0.0);
  const int samples = 4096;
  double r_eff = 0.0;
  for (int i = 0; i <= samples; ++i) {
    const double r = f.r_max() * i / samples;
    if (f.f2(r) >= rel * top) r_eff = r;
  }
  return r_eff;
}

BoxGuardReport box_guard(double L, double support, double xi_max, double T) {
  BoxGuardReport rep;
  rep.travel = 2.0 * xi_max * T;
  rep.required = 4.0 * support + rep.travel;
  rep.wraps = static_cast<int>(std::floor(rep.travel / L));
  rep.ok = support <= 0.0 || L >= rep.required;
  return rep;
}

StepMode parse_step_mode(const std::string& name) {
  if (name == "frozen") return StepMode::Frozen;
  if (name == "midpoint") return StepMode::Midpoint;
  raise(ErrorKind::Config, "InvalidConfig", "unknown step mode '" + name + "'");
}

std::string to_string(StepMode mode) { return mode == StepMode::Frozen ? "frozen" : "midpoint"; }

SpaceTimePotential convolve_potential(const SpaceTimePotential& V, const ArrayXr& w_hat) {
  SpaceTimePotential out = V;
  parallel_for(V.values.rows(), [&](Index j) {
    ArrayXc row = V.values.row(j).transpose().cast<cplx>();
    apply_multiplier(V.grid, row.data(), w_hat);
    out.values.row(j) = row.real().transpose();
  });
  return out;
}

namespace {

double max_weight_momentum(const Background& bg) {
  const ArrayXr& wgt = bg.weights();
  const double top = wgt.square().maxCoeff();
  double xi = 0.0;
  for (Index k = 0; k < wgt.size(); ++k)
    if (wgt[k] * wgt[k] > 1e-8 * top) xi = std::max(xi, std::sqrt(bg.grid().k2()[k]));
  return xi;
}

ArrayXr density_difference(const RowArrayXXc& X, const RowArrayXXc& Y) {
  return ensemble_mean<double>(X.rows(), X.cols(), [&](Index r, ArrayXr& acc) {
    acc += (X.row(r).abs2() - Y.row(r).abs2()).transpose();
  });
}

}  // namespace

Trajectory evolve_hartree(const EnsembleField& X0, const Background& bg, const PairPotential& w,
                          const EvolutionConfig& cfg) {
  const Grid& g = bg.grid();
  require_same_grid(X0.grid, g, "evolve: perturbed and equilibrium grids differ");
  if (X0.realizations() != bg.realizations())
    raise(ErrorKind::Validation, "GridMismatch", "evolve: ensemble sizes differ");
  const Index N = bg.realizations(), npts = g.size();
  const double dt = cfg.dt, m = bg.mass();
  Trajectory tr;
  tr.times = uniform_times(dt * static_cast<double>(cfg.steps), cfg.steps);
  tr.box = box_guard(g.length(), cfg.support, max_weight_momentum(bg), tr.times.back());
  if (cfg.enforce_box_guard && !tr.box.ok)
    raise(ErrorKind::Validation, "BoxGuardViolated",
          "box length " + std::to_string(g.length()) + " below required " + std::to_string(tr.box.required));
  const ArrayXr w_hat = w_hat_on_grid(w, g);
  ArrayXc half(npts);
  for (Index k = 0; k < npts; ++k) half[k] = std::polar(1.0 / static_cast<double>(npts), -0.5 * dt * g.k2()[k]);
  RowArrayXXc X = X0.values;
  RowArrayXXc Y = sample_equilibrium(bg, 0.0).values;
  tr.V = SpaceTimePotential::zeros(g, tr.times);
  tr.V.values.row(0) = density_difference(X, Y).transpose();
  auto keep = [&](Index node) {
    for (Index s : cfg.snapshots)
      if (s == node) {
        EnsembleField snap;
        snap.grid = g;
        snap.values = X;
        snap.t = tr.times[node];
        snap.provenance = X0.provenance;
        tr.snapshot_index.push_back(node);
        tr.snapshots.push_back(std::move(snap));
        return;
      }
  };
  keep(0);
  tr.deviation_max = (X - Y).abs().maxCoeff();
  auto kinetic = [&](RowArrayXXc& F, Index r) {
    cplx* d = F.row(r).data();
    g.forward(d);
    Eigen::Map<ArrayXc> v(d, npts);
    v *= half;
    g.inverse(d);
  };
  std::vector<double> mass0(N), drift(N, 0.0);
  const ArrayXr phi_y = ArrayXr::Constant(npts, m);
  for (Index n = 0; n < cfg.steps; ++n) {
    ArrayXr rho;
    if (cfg.mode == StepMode::Frozen) rho = density_difference(X, Y);
    parallel_for(N, [&](Index r) {
      mass0[r] = X.row(r).abs2().sum();
      kinetic(X, r);
      kinetic(Y, r);
    });
    if (cfg.mode == StepMode::Midpoint) rho = density_difference(X, Y);
    ArrayXc conv = rho.cast<cplx>();
    apply_multiplier(g, conv.data(), w_hat);
    const ArrayXr phi = conv.real() + m;
    ArrayXc phase_x(npts), phase_y(npts);
    for (Index k = 0; k < npts; ++k) {
      phase_x[k] = std::polar(1.0, -dt * phi[k]);
      phase_y[k] = std::polar(1.0, -dt * phi_y[k]);
    }
    parallel_for(N, [&](Index r) {
      X.row(r) *= phase_x.transpose();
      Y.row(r) *= phase_y.transpose();
      kinetic(X, r);
      kinetic(Y, r);
      const double m1 = X.row(r).abs2().sum();
      drift[r] = std::max(drift[r], mass0[r] > 0.0 ? std::abs(m1 - mass0[r]) / mass0[r] : 0.0);
    });
    if (!X.allFinite()) raise(ErrorKind::Numerical, "NaNDetected", "non-finite values during evolution");
    tr.V.values.row(n + 1) = density_difference(X, Y).transpose();
    tr.deviation_max = std::max(tr.deviation_max, (X - Y).abs().maxCoeff());
    keep(n + 1);
  }
  for (double d : drift) tr.mass_drift_max = std::max(tr.mass_drift_max, d);
  tr.X.grid = g;
  tr.X.values = std::move(X);
  tr.X.t = tr.times.back();
  tr.X.provenance = X0.provenance;
  tr.Y.grid = g;
  tr.Y.values = std::move(Y);
  tr.Y.t = tr.times.back();
  return tr;
}

double norm_L2w_Hs(const EnsembleField& u, double s) {
  const Grid& g = u.grid;
  const Index npts = g.size();
  ArrayXr weight(npts);
  for (Index k = 0; k < npts; ++k) weight[k] = std::pow(1.0 + g.k2()[k], s);
  const ArrayXr total = ensemble_mean<double>(u.realizations(), 1, [&](Index r, ArrayXr& acc) {
    ArrayXc row = u.values.row(r).transpose();
    g.forward(row.data());
    acc[0] += (weight * row.abs2()).sum();
  });
  return std::sqrt(total[0] * g.cell_volume() / static_cast<double>(npts));
}

double norm_Lq_L2w(const EnsembleField& u, double q) {
  const ArrayXr m2 = mean_abs2(u);
  return std::pow(m2.pow(0.5 * q).sum() * u.grid.cell_volume(), 1.0 / q);
}

double theta_V(const SpaceTimePotential& V) {
  const double w = V.grid.cell_volume() * (V.times.size() > 1 ? V.dt() : 1.0);
  const double l2 = std::sqrt(V.values.square().sum() * w);
  const double l52 = std::pow(V.values.abs().pow(2.5).sum() * w, 0.4);
  return std::max(l2, l52);
}

namespace {

void free_history(const Grid& g, const ArrayXc& zhat, const std::vector<double>& times, double m, RowArrayXXc& out) {
  const Index npts = g.size();
  out.resize(static_cast<Index>(times.size()), npts);
  for (std::size_t j = 0; j < times.size(); ++j) {
    cplx* d = out.row(j).data();
    for (Index k = 0; k < npts; ++k)
      d[k] = zhat[k] * std::polar(1.0 / static_cast<double>(npts), -times[j] * (m + g.k2()[k]));
    g.inverse(d);
  }
}

RowArrayXXr re_cross(const RowArrayXXc& a, const RowArrayXXc& b) { return 2.0 * (a.conjugate() * b).real(); }

FixedPointState run_picard(const EnsembleField& Z0, const Background& bg, const PairKernel& h, const PairPotential& w,
                           const FixedPointConfig& cfg, FixedPointSystem system) {
  const Grid& g = bg.grid();
  require_same_grid(Z0.grid, g, "fixed point: perturbation and equilibrium grids differ");
  if (Z0.realizations() != bg.realizations())
    raise(ErrorKind::Validation, "GridMismatch", "fixed point: ensemble sizes differ");
  const Index N = bg.realizations(), npts = g.size();
  FixedPointState st;
  st.times = uniform_times(cfg.T, cfg.steps);
  st.Z0 = Z0;
  const Index m1 = static_cast<Index>(st.times.size());
  const double dt = uniform_step(st.times), m = bg.mass();
  const ArrayXr w_hat = w_hat_on_grid(w, g);
  const CausalL2 L2(g, st.times, h, w_hat);
  st.V = SpaceTimePotential::zeros(g, st.times);
  st.Z.assign(N, RowArrayXXc::Zero(m1, npts));
  const Index len = m1 * npts;
  double prev = 0.0;
  int rising = 0;
  for (int it = 1; it <= cfg.max_iter; ++it) {
    const SpaceTimePotential Vp = convolve_potential(st.V, w_hat);
    const ArrayXr mean = ensemble_mean<double>(N, len + 2 * m1, [&](Index r, ArrayXr& acc) {
      DuhamelStepper stp(g, dt, m);
      RowArrayXXc Y, SZ, Znew;
      bg.history(r, st.times, Y);
      ArrayXc zhat = Z0.values.row(r).transpose();
      g.forward(zhat.data());
      free_history(g, zhat, st.times, m, SZ);
      const RowArrayXXc& Zk = st.Z[r];
      Eigen::Map<RowArrayXXr> rhs(acc.data(), m1, npts);
      rhs += re_cross(Y, SZ);
      if (system == FixedPointSystem::Linear) {
        Znew = SZ;
      } else {
        RowArrayXXc A, B, C;
        stp.apply(Vp.values, Y, A);
        stp.apply(Vp.values, A, B);
        stp.apply(Vp.values, Zk, C);
        Znew = SZ + B + C;
        rhs += Zk.abs2() + A.abs2() + re_cross(Y, B);
        if (system == FixedPointSystem::Second) {
          rhs += re_cross(A, Zk) + re_cross(Y, C);
        } else {
          RowArrayXXc D, E, F;
          stp.apply(Vp.values, SZ, D);
          stp.apply(Vp.values, B, E);
          stp.apply(Vp.values, C, F);
          rhs += re_cross(A, SZ) + re_cross(Y, D) + re_cross(A, B) + re_cross(Y, E) + re_cross(A, C) + re_cross(Y, F);
        }
      }
      for (Index j = 0; j < m1; ++j) {
        acc[len + j] += (Znew.row(j) - Zk.row(j)).abs2().sum();
        acc[len + m1 + j] += Znew.row(j).abs2().sum();
      }
      st.Z[r] = std::move(Znew);
    });
    SpaceTimePotential rhs;
    rhs.grid = g;
    rhs.times = st.times;
    rhs.values = Eigen::Map<const RowArrayXXr>(mean.data(), m1, npts);
    if (!rhs.values.allFinite()) raise(ErrorKind::Numerical, "NaNDetected", "non-finite values in fixed point iterate");
    SpaceTimePotential Vnew = L2.invert(rhs);
    const double dz = std::sqrt(mean.segment(len, m1).maxCoeff());
    const double zz = std::sqrt(mean.segment(len + m1, m1).maxCoeff());
    SpaceTimePotential dV = Vnew;
    dV.values -= st.V.values;
    const double dv = theta_V(dV), vv = theta_V(Vnew);
    const double rz = zz > 0.0 ? dz / zz : dz, rv = vv > 0.0 ? dv / vv : dv;
    st.V = std::move(Vnew);
    st.iterations = it;
    st.residual_Z.push_back(rz);
    st.residual_V.push_back(rv);
    const double res = std::max(rz, rv);
    if (it > 1 && prev > 0.0) {
      st.contraction.push_back(res / prev);
      rising = res / prev >= 1.0 ? rising + 1 : 0;
    }
    prev = res;
    if (res <= cfg.tol) {
      st.converged = true;
      break;
    }
    if (rising >= 3)
      raise(ErrorKind::Numerical, "NoContraction", "fixed point residuals did not contract for 3 iterations");
  }
  if (!st.contraction.empty()) {
    double logsum = 0.0;
    for (double c : st.contraction) logsum += std::log(std::max(c, 1e-300));
    st.contraction_factor = std::exp(logsum / static_cast<double>(st.contraction.size()));
  }
  return st;
}

}  // namespace

FixedPointState picard_fixed_point(const EnsembleField& Z0, const Background& bg, const PairKernel& h,
                                   const PairPotential& w, const FixedPointConfig& cfg) {
  const FixedPointSystem sys = cfg.system == FixedPointSystem::Cubic ? FixedPointSystem::Second : cfg.system;
  return run_picard(Z0, bg, h, w, cfg, sys);
}

FixedPointState picard_dim2_cubic(const EnsembleField& Z0, const Background& bg, const PairKernel& h,
                                  const PairPotential& w, const FixedPointConfig& cfg) {
  if (bg.grid().dim() != 2) raise(ErrorKind::Validation, "InvalidDimension", "the third-order system is for dimension 2");
  if (cfg.system == FixedPointSystem::Linear) return run_picard(Z0, bg, h, w, cfg, FixedPointSystem::Linear);
  return run_picard(Z0, bg, h, w, cfg, cfg.cubic ? FixedPointSystem::Cubic : FixedPointSystem::Second);
}

namespace {

// Back-propagates a time-t field: S(-t) u.
void back_propagate(const Grid& g, double t, double m, cplx* d) {
  const Index npts = g.size();
  g.forward(d);
  for (Index k = 0; k < npts; ++k) d[k] *= std::polar(1.0 / static_cast<double>(npts), t * (m + g.k2()[k]));
  g.inverse(d);
}

bool decreasing(const std::vector<double>& v) {
  for (std::size_t i = 1; i < v.size(); ++i)
    if (!(v[i] < v[i - 1])) return false;
  return v.size() >= 2;
}

}  // namespace

ScatteringReport extract_scattering(const FixedPointState& state, const Background& bg, const PairPotential& w,
                                    const std::vector<Index>& sample_nodes) {
  const Grid& g = bg.grid();
  const Index N = bg.realizations(), npts = g.size();
  const Index ns = static_cast<Index>(sample_nodes.size());
  ScatteringReport rep;
  for (Index s : sample_nodes) rep.times.push_back(state.times[s]);
  if (ns == 0) return rep;
  const double m = bg.mass(), dt = uniform_step(state.times);
  const SpaceTimePotential Vp = convolve_potential(state.V, w_hat_on_grid(w, g));
  std::vector<RowArrayXXc> zb(N), wb(N);
  parallel_for(N, [&](Index r) {
    RowArrayXXc Y, W;
    bg.history(r, state.times, Y);
    DuhamelStepper(g, dt, m).apply(Vp.values, Y, W);
    zb[r].resize(ns, npts);
    wb[r].resize(ns, npts);
    for (Index i = 0; i < ns; ++i) {
      const Index j = sample_nodes[i];
      zb[r].row(i) = state.Z[r].row(j);
      wb[r].row(i) = W.row(j);
      back_propagate(g, state.times[j], m, zb[r].row(i).data());
      back_propagate(g, state.times[j], m, wb[r].row(i).data());
    }
  });
  auto slice = [&](const std::vector<RowArrayXXc>& src, Index i) {
    EnsembleField e;
    e.grid = g;
    e.values.resize(N, npts);
    for (Index r = 0; r < N; ++r) e.values.row(r) = src[r].row(i);
    return e;
  };
  for (Index i = 0; i < ns; ++i) {
    const EnsembleField zi = slice(zb, i);
    rep.z_profile_norm.push_back(norm_L2w_Hs(zi, 0.5));
    if (i + 1 < ns) {
      EnsembleField dz = zi, dw = slice(wb, i);
      dz.values -= slice(zb, i + 1).values;
      dw.values -= slice(wb, i + 1).values;
      rep.z_cauchy.push_back(norm_L2w_Hs(dz, 0.5));
      rep.w_cauchy.push_back(norm_Lq_L2w(dw, 3.0));
    }
  }
  rep.Z_plus = slice(zb, ns - 1);
  rep.Ztilde_plus = slice(wb, ns - 1);
  rep.z_decreasing = decreasing(rep.z_cauchy);
  rep.w_decreasing = decreasing(rep.w_cauchy);
  return rep;
}

ScatteringReport extract_scattering(const Trajectory& traj, const Background& bg) {
  const Grid& g = bg.grid();
  const Index N = bg.realizations(), npts = g.size();
  const Index ns = static_cast<Index>(traj.snapshots.size());
  ScatteringReport rep;
  std::vector<EnsembleField> prof(ns);
  for (Index i = 0; i < ns; ++i) {
    const double t = traj.snapshots[i].t;
    rep.times.push_back(t);
    prof[i] = traj.snapshots[i];
    parallel_for(N, [&](Index r) {
      ArrayXc y(npts);
      bg.realization(r, t, y.data());
      prof[i].values.row(r) -= y.transpose();
      back_propagate(g, t, bg.mass(), prof[i].values.row(r).data());
    });
    rep.z_profile_norm.push_back(norm_L2w_Hs(prof[i], 0.5));
    if (i > 0) {
      EnsembleField d = prof[i - 1];
      d.values -= prof[i].values;
      rep.z_cauchy.push_back(norm_L2w_Hs(d, 0.5));
    }
  }
  if (ns > 0) rep.Z_plus = prof[ns - 1];
  rep.z_decreasing = decreasing(rep.z_cauchy);
  return rep;
}

}  // namespace hlab
