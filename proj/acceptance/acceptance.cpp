#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "hlab/diagnostics.hpp"
#include "hlab/linear_response.hpp"
#include "hlab/quadratic.hpp"
#include "hlab/quadrature.hpp"
#include "hlab/solver.hpp"

using namespace hlab;

namespace {

using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = false;
  std::string detail;
};

const MomentumDistribution& unit_gaussian() {
  static const MomentumDistribution f = MomentumDistribution::gaussian(2, 1.0);
  return f;
}

const PairKernel& unit_gaussian_kernel() {
  static const PairKernel h = build_kernel_h(unit_gaussian());
  return h;
}

const MomentumDistribution& narrow_gaussian() {
  static const MomentumDistribution f = MomentumDistribution::gaussian(2, 0.5);
  return f;
}

const PairKernel& narrow_gaussian_kernel() {
  static const PairKernel h = build_kernel_h(narrow_gaussian());
  return h;
}

std::string fmt(const char* pattern, double a, double b = 0.0, double c = 0.0, double d = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, pattern, a, b, c, d);
  return buf;
}

double least_squares_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx, sy += ly, sxx += lx * lx, sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

double l2_norm(const SpaceTimePotential& V) { return spacetime_norm(V, NormSpec{}); }

SpaceTimePotential restrict_nodes(const SpaceTimePotential& V, Index stride) {
  SpaceTimePotential out;
  out.grid = V.grid;
  const Index rows = (V.values.rows() - 1) / stride + 1;
  out.values.resize(rows, V.values.cols());
  for (Index j = 0; j < rows; ++j) {
    out.times.push_back(V.times[j * stride]);
    out.values.row(j) = V.values.row(j * stride);
  }
  return out;
}

Outcome criterion1() {
  const Grid g(2, 64, 20.0);
  const Index N = 1024;
  const Background bg(g, unit_gaussian(), WienerSample(101, N), 0.0);
  const EnsembleField Y = sample_equilibrium(bg, 0.0);
  const double scale = lattice_variance(unit_gaussian(), g);
  const double m2 = mean_abs2(Y).mean(), m4 = mean_abs4(Y).mean();
  const double tol = 5.0 / std::sqrt(double(N));
  const double e2 = std::abs(m2 - scale), ek = std::abs(m4 / (m2 * m2) - 2.0);
  return {e2 <= tol * scale && ek <= tol,
          fmt("|E|Y|^2 - sum f^2 dxi| = %.3e (tol %.3e), |kurtosis - 2| = %.3e (tol %.3e)", e2, tol * scale, ek, tol)};
}

Outcome criterion2() {
  const Grid g(2, 64, 20.0);
  const Index N = 1024;
  const PairKernel& h = unit_gaussian_kernel();
  const Background bg(g, unit_gaussian(), WienerSample(102, N), 0.0);
  const EnsembleField Y = sample_equilibrium(bg, 0.0);
  std::vector<std::array<int, 3>> offsets;
  for (int k = 0; k < 8; ++k) offsets.push_back({k, 0, 0});
  for (int k = 1; k <= 8; ++k) offsets.push_back({k, k, 0});
  const Index x0 = g.size() / 2 + g.n() / 2;
  const auto cov = covariance_offsets(Y, x0, offsets);
  double worst = 0.0;
  for (std::size_t i = 0; i < offsets.size(); ++i) {
    const double r = g.dx() * std::hypot(offsets[i][0], offsets[i][1]);
    worst = std::max(worst, std::abs(cov[i] - cplx(h(r), 0.0)));
  }
  const double tol = 5.0 / std::sqrt(double(N)) * h.h0();
  return {worst <= tol, fmt("max offset error %.3e over 16 offsets (tol %.3e)", worst, tol)};
}

Outcome criterion3() {
  const Grid g(2, 32, 10.0);
  std::mt19937_64 rng(103);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  const double m = 0.37;
  double worst = 0.0;
  for (int trial = 0; trial < 8; ++trial) {
    EnsembleField U;
    U.grid = g;
    U.values.resize(2, g.size());
    for (Index r = 0; r < 2; ++r) {
      for (Index i = 0; i < g.size(); ++i) {
        const auto& k = g.wavenumber(i);
        const bool inside = std::abs(k[0]) <= g.n() / 2 - 5 && std::abs(k[1]) <= g.n() / 2 - 5;
        U.values(r, i) = inside ? cplx(uni(rng), uni(rng)) : cplx(0.0);
      }
      g.inverse(U.values.row(r).data());
    }
    const Eigen::Vector3d xi(g.dxi() * std::round(4.0 * uni(rng)), g.dxi() * std::round(4.0 * uni(rng)), 0.0);
    const double tau = uni(rng), t = 2.0 * uni(rng);
    EnsembleField in = U;
    for (Index i = 0; i < g.size(); ++i) in.values.col(i) *= std::polar(1.0, -tau * (m + xi.squaredNorm()) + xi.dot(g.x(i)));
    const EnsembleField lhs = free_propagate(in, t - tau, m);
    EnsembleField rhs = transported_propagate(U, t - tau, xi);
    for (Index i = 0; i < g.size(); ++i) rhs.values.col(i) *= std::polar(1.0, -t * (m + xi.squaredNorm()) + xi.dot(g.x(i)));
    worst = std::max(worst, (lhs.values - rhs.values).abs().maxCoeff() / lhs.values.abs().maxCoeff());
  }
  return {worst <= 1e-11, fmt("max relative mismatch %.3e over 8 tuples (tol 1e-11)", worst)};
}

Outcome criterion4() {
  const Grid g(2, 32, 12.0);
  const auto times = uniform_times(1.5, 64);
  const std::function<double(double)> b = [](double t) { return std::exp(-0.5 * sqr((t - 0.75) / 0.1)); };
  ArrayXr a(g.size());
  for (Index i = 0; i < g.size(); ++i) {
    const auto x = g.x(i);
    a[i] = std::exp(-(sqr(x[0] - 6.0) + sqr(x[1] - 6.0)) / 4.0);
  }
  SpaceTimePotential V = SpaceTimePotential::zeros(g, times);
  for (std::size_t j = 0; j < times.size(); ++j) V.values.row(j) = b(times[j]) * a.transpose();
  const PairKernel& h = unit_gaussian_kernel();
  const PairPotential w = PairPotential::delta(2, 1.0);
  const SpaceTimePotential mult = SpectralL2(g, times, h, w).apply(V);
  const SpaceTimePotential causal = causal_L2_separable(g, times, b, a, h, w, 1e-13);
  const double scale = causal.values.abs().maxCoeff();
  const double rel = (mult.values - causal.values).abs().maxCoeff() / scale;
  const Index N = 4096;
  const Background bg(g, unit_gaussian(), WienerSample(104, N), 0.0);
  RowArrayXXr sd;
  const SpaceTimePotential mc = ensemble_linear_response(V, bg, &sd);
  const double mc_err = (mc.values - mult.values).abs().maxCoeff();
  const double mc_tol = 5.0 * sd.maxCoeff() / std::sqrt(double(N));
  return {rel <= 1e-6 && mc_err <= mc_tol,
          fmt("multiplier vs causal rel %.3e (tol 1e-6); Monte-Carlo max dev %.3e (tol %.3e)", rel, mc_err, mc_tol)};
}

Outcome criterion5() {
  const Grid g(2, 16, 12.0);
  const auto times = uniform_times(1.0, 16);
  const PairKernel& h = unit_gaussian_kernel();
  const Index N = 1024;
  const Background bg(g, unit_gaussian(), WienerSample(105, N), 0.0);
  const double tol = 5.0 / std::sqrt(double(N));

  bool lin_ok = true;
  std::vector<double> growth;
  double worst_cross = 0.0;
  for (double amp : {0.5, 1.0, 2.0}) {
    std::vector<double> v(times.size());
    for (std::size_t j = 0; j < v.size(); ++j) v[j] = amp * (1.0 + times[j]);
    const LinearCancellationReport rep = linear_cancellation_diag(times, v, bg);
    lin_ok = lin_ok && rep.re_cross_max <= tol * rep.scale;
    worst_cross = std::max(worst_cross, rep.re_cross_max / rep.scale);
    growth.push_back(rep.w_norm / rep.integral_V);
  }
  const double spread = (*std::max_element(growth.begin(), growth.end()) - *std::min_element(growth.begin(), growth.end())) /
                        growth.front();
  lin_ok = lin_ok && spread <= 1e-9;

  SpaceTimePotential U = SpaceTimePotential::zeros(g, times), V = U, Uc = U, Vc = U;
  const double k = g.dxi();
  for (std::size_t j = 0; j < times.size(); ++j) {
    const double t = times[j];
    for (Index i = 0; i < g.size(); ++i) {
      const auto x = g.x(i);
      U.values(j, i) = std::sin(3.0 * t) * std::cos(k * x[0]) + 0.5 * t * std::sin(k * x[1]);
      V.values(j, i) = t * t * std::cos(k * (x[0] + x[1])) + 0.3;
    }
    Uc.values.row(j).setConstant(std::sin(3.0 * t));
    Vc.values.row(j).setConstant(1.0 + t);
  }
  const double ref = Q2_fourier(U, V, h).values.abs().maxCoeff();
  const double q2f = Q2_fourier(Uc, Vc, h).values.abs().maxCoeff() / ref;
  const SpaceTimePotential qe = Q2_ensemble(Uc, Vc, bg);
  double iu = 0.0, iv = 0.0;
  const double dt = times[1] - times[0];
  for (std::size_t j = 0; j + 1 < times.size(); ++j) {
    iu += 0.5 * dt * (std::abs(Uc.values(j, 0)) + std::abs(Uc.values(j + 1, 0)));
    iv += 0.5 * dt * (std::abs(Vc.values(j, 0)) + std::abs(Vc.values(j + 1, 0)));
  }
  const double q2e = qe.values.abs().maxCoeff() / (bg.variance() * iu * iv);
  const bool ok = lin_ok && q2f <= 1e-8 && q2e <= tol;
  std::string d = fmt("linear cross/scale %.3e (tol %.3e), W growth spread %.1e; ", worst_cross, tol, spread);
  d += fmt("Q2 lattice rel %.3e (tol 1e-8); Q2 ensemble/scale %.3e (tol %.3e)", q2f, q2e, tol);
  return {ok, d};
}

Outcome criterion6() {
  const PairKernel& h = unit_gaussian_kernel();
  const std::vector<double> lambdas = {1.0, 2.0, 4.0, 8.0};
  bool ok = true;
  std::string d;
  for (int p = 1; p <= 2; ++p) {
    std::vector<double> n2;
    double worst = 0.0;
    for (double lam : lambdas) {
      const QKernelSample s = kernel_K_norms(Eigen::Vector3d(3.0 * lam, 0.0, 0.0), Eigen::Vector3d(0.0, 1.0, 0.0), h, p);
      n2.push_back(s.norm2());
      worst = std::max(worst, s.ratio());
    }
    const double slope = least_squares_slope(lambdas, n2);
    ok = ok && std::abs(slope + 1.0) <= 0.1 && worst <= 10.0;
    d += fmt("p=%.0f slope %.4f, max norm/bound %.3f; ", p, slope, worst);
  }
  return {ok, d + "slope tol 10%, bound factor 10"};
}

struct CrossRun {
  SpaceTimePotential D;
  FixedPointState picard;
  Trajectory ensemble;
};

struct CrossSetup {
  double L = 50.0, T = 2.0, eps = 1e-2, width2 = 8.0;
  Grid g{2, 64, 50.0};
  PairPotential w = PairPotential::delta(2, 0.5);
  double mass = equilibrium_mass(w, narrow_gaussian(), g);

  CrossRun run(std::uint64_t seed, Index N, Index M, bool zero = false) const {
    const Background bg(g, narrow_gaussian(), WienerSample(seed, N), mass);
    ArrayXc a(g.size());
    ArrayXr b(g.size());
    const Eigen::Vector3d c(0.5 * L, 0.5 * L, 0.0);
    for (Index i = 0; i < g.size(); ++i) {
      a[i] = zero ? 0.0 : eps * std::exp(-(g.x(i) - c).squaredNorm() / width2);
      b[i] = narrow_gaussian().f(std::sqrt(g.k2()[i]));
    }
    const EnsembleField Z0 = sample_structured_perturbation(StructuredProfile::modulated(a, b), bg);
    EnsembleField X0 = sample_equilibrium(bg, 0.0);
    X0.values += Z0.values;
    EvolutionConfig ec;
    ec.dt = T / M;
    ec.steps = M;
    ec.support = 2.0 * std::sqrt(width2);
    FixedPointConfig pc;
    pc.T = T;
    pc.steps = M;
    pc.tol = 1e-12;
    pc.max_iter = 30;
    CrossRun out;
    out.ensemble = evolve_hartree(X0, bg, w, ec);
    out.picard = picard_fixed_point(Z0, bg, narrow_gaussian_kernel(), w, pc);
    out.D = out.ensemble.V;
    out.D.values -= out.picard.V.values;
    return out;
  }
};

Outcome criterion8(CrossRun& main_run, CrossRun& zero_run) {
  const CrossSetup s;
  const BoxGuardReport box = box_guard(s.L, 2.0 * std::sqrt(s.width2), effective_momentum(narrow_gaussian()), s.T);

  const Index N_dt = 64;
  const std::vector<Index> Ms = {8, 16, 32, 64};
  std::vector<SpaceTimePotential> Dm;
  for (Index M : Ms) Dm.push_back(restrict_nodes(s.run(201, N_dt, M).D, M / Ms.front()));
  std::vector<double> dts, rich;
  for (std::size_t i = 0; i + 1 < Ms.size(); ++i) {
    SpaceTimePotential diff = Dm[i];
    diff.values -= Dm[i + 1].values;
    dts.push_back(s.T / Ms[i]);
    rich.push_back(l2_norm(diff));
  }
  const double dt_slope = least_squares_slope(dts, rich);
  double b = 0.0;
  for (std::size_t i = 0; i < dts.size(); ++i) b = std::max(b, rich[i] / (0.75 * dts[i] * dts[i]));

  const Index pool = 512, M_n = 16;
  const std::vector<Index> Ns = {32, 64, 128};
  std::vector<double> spread;
  for (Index N : Ns) {
    const Index B = pool / N;
    std::vector<SpaceTimePotential> Db;
    for (Index k = 0; k < B; ++k) Db.push_back(s.run(300 + 1000 * N + k, N, M_n).D);
    RowArrayXXr mean = RowArrayXXr::Zero(Db[0].values.rows(), Db[0].values.cols());
    for (const auto& d : Db) mean += d.values;
    mean /= double(B);
    double ss = 0.0;
    for (auto d : Db) {
      d.values -= mean;
      ss += sqr(l2_norm(d));
    }
    spread.push_back(std::sqrt(ss / double(B - 1)));
  }
  const double n_slope = least_squares_slope(std::vector<double>(Ns.begin(), Ns.end()), spread);
  double a = 0.0;
  for (std::size_t i = 0; i < Ns.size(); ++i) a = std::max(a, spread[i] * std::sqrt(double(Ns[i])));

  const Index N_main = 128, M_main = 16;
  main_run = s.run(401, N_main, M_main);
  zero_run = s.run(402, 64, M_main, true);
  const double dt_main = s.T / M_main;
  const double C = a + b;
  const double lhs = l2_norm(main_run.D);
  const double rhs = C * (1.0 / std::sqrt(double(N_main)) + dt_main * dt_main);
  const bool ok = box.ok && lhs <= rhs && std::abs(dt_slope - 2.0) <= 0.5 && std::abs(n_slope + 0.5) <= 0.125;
  std::string d = fmt("||V_pic - V_ens|| = %.3e <= C(N^-1/2 + dt^2) = %.3e with C = %.3e; ", lhs, rhs, C);
  d += fmt("dt slope %.3f (target 2), N slope %.3f (target -0.5), box required %.1f", dt_slope, n_slope, box.required);
  return {ok, d};
}

Outcome criterion9(const CrossRun& main_run, const CrossRun& zero_run) {
  const FixedPointState& st = main_run.picard;
  int geometric = 0, best = 0;
  for (double r : st.contraction) {
    geometric = r < 1.0 ? geometric + 1 : 0;
    best = std::max(best, geometric);
  }
  const FixedPointState& z = zero_run.picard;
  const bool zero_ok = z.converged && z.iterations == 1 && z.V.values.abs().maxCoeff() == 0.0;
  const bool ok = st.converged && best >= 4 && st.contraction_factor < 1.0 && zero_ok;
  return {ok, fmt("%.0f consecutive contracting iterations, factor %.3e, zero data iterations %.0f, zero V max %.1e", best,
                  st.contraction_factor, z.iterations, z.V.values.abs().maxCoeff())};
}

Outcome criterion7() {
  const Grid g(2, 64, 50.0);
  const PairPotential w = PairPotential::delta(2, 0.5);
  const Background bg(g, narrow_gaussian(), WienerSample(107, 64), equilibrium_mass(w, narrow_gaussian(), g));
  EvolutionConfig ec;
  ec.dt = 0.01;
  ec.steps = 200;
  const Trajectory tr = evolve_hartree(sample_equilibrium(bg, 0.0), bg, w, ec);
  const bool ok = tr.deviation_max == 0.0 && tr.V.values.abs().maxCoeff() == 0.0 && tr.mass_drift_max <= 1e-10;
  return {ok, fmt("max |X - Y| = %.1e, max |V| = %.1e, mass drift per step %.3e (tol 1e-10)", tr.deviation_max,
                  tr.V.values.abs().maxCoeff(), tr.mass_drift_max)};
}

Outcome criterion10() {
  const auto fermi = MomentumDistribution::fermi(3, 1.0, 0.0);
  const PairKernel h = build_kernel_h(fermi);
  const HypothesisReport fr = check_hypotheses(fermi, h, PairPotential::delta(3, 0.1), epsilon_h(h).value);
  const bool fermi_ok = fr.f_conditions_pass();

  const auto step = MomentumDistribution::tabulated(3, {0.0, 1.0, 1.0 + 1e-9, 4.0}, {1.0, 1.0, 0.0, 0.0});
  KernelOptions loose;
  loose.tolerance = std::numeric_limits<double>::infinity();
  loose.compute_cp = false;
  const PairKernel hs = build_kernel_h(step, loose);
  const HypothesisReport sr = check_hypotheses(step, hs, PairPotential::delta(3, 0.0), 0.0);
  const bool step_ok = !sr.f_conditions_pass() && !sr.passed;

  const double R = h.r_cut(), top = fermi.r_max();
  const int n = 8000;
  std::vector<double> r(n + 1), v(n + 1);
  for (int i = 0; i <= n; ++i) {
    r[i] = R * i / n;
    const double rr = r[i];
    const auto q = integrate<double>(
        [&](double x) { return rr > 0.0 ? x * std::sin(x * rr) / rr * fermi.f2(x) : x * x * fermi.f2(x); }, 0.0, top,
        1e-14, 1e-12);
    v[i] = rr * std::abs(4.0 * kPi * q.value);
  }
  double brute = 0.0;
  for (int i = 0; i < n; ++i) brute += 0.5 * (r[i + 1] - r[i]) * (v[i] + v[i + 1]);
  const double c_star = 2.0 / brute;
  bool threshold_ok = true;
  double margin_err = 0.0;
  for (double factor : {0.99, 0.999, 1.001, 1.01}) {
    const double c = factor * c_star;
    const HypothesisReport rep = check_hypotheses(fermi, h, PairPotential::delta(3, -c), 0.0);
    const HypothesisEntry* e = rep.find("interaction_negative_part");
    threshold_ok = threshold_ok && e->passed == (factor < 1.0);
    margin_err = std::max(margin_err, std::abs(e->margin - (2.0 - c * brute)));
  }
  const bool ok = fermi_ok && step_ok && threshold_ok;
  std::string d = std::string("Fermi f-conditions ") + (fermi_ok ? "pass" : "FAIL") + ", step profile " +
                  (step_ok ? "fails" : "PASSES") + ", threshold " + (threshold_ok ? "matches" : "MISMATCH");
  d += fmt(", int r|h| tabulated %.6f vs dense grid %.6f, max margin mismatch %.1e", h.I1(), brute, margin_err);
  return {ok, d};
}

Outcome criterion11() {
  const double L = 12.0, T = 1.0, eps = 0.1;
  const Index M = 64, N = 256;
  const Grid g(2, 64, L);
  const PairPotential w = PairPotential::delta(2, 0.5);
  const Background bg(g, narrow_gaussian(), WienerSample(111, N), equilibrium_mass(w, narrow_gaussian(), g));
  ArrayXc a(g.size());
  ArrayXr b(g.size());
  const Eigen::Vector3d c(0.5 * L, 0.5 * L, 0.0);
  for (Index i = 0; i < g.size(); ++i) {
    a[i] = eps * std::exp(-(g.x(i) - c).squaredNorm() / 2.0);
    b[i] = narrow_gaussian().f(std::sqrt(g.k2()[i]));
  }
  const EnsembleField Z0 = sample_structured_perturbation(StructuredProfile::modulated(a, b), bg);
  FixedPointConfig pc;
  pc.T = T;
  pc.steps = M;
  pc.tol = 1e-12;
  pc.system = FixedPointSystem::Linear;
  const FixedPointState st = picard_fixed_point(Z0, bg, narrow_gaussian_kernel(), w, pc);
  std::vector<Index> nodes;
  for (Index k = 1; k <= 8; ++k) nodes.push_back(k * M / 8);
  const std::vector<EnsembleField> X = reconstruct_fields(st, bg, w, nodes);
  const SpaceTimePotential Vw = convolve_potential(st.V, w_hat_on_grid(w, g));
  const EnsembleField Y0 = sample_equilibrium(bg, 0.0);
  CorollaryOptions fine, coarse;
  fine.xi_cut = 16.0 * g.dxi();
  coarse.xi_cut = 8.0 * g.dxi();
  const CorollaryReport rf = corollary_check(X, Y0, Vw, Z0, fine);
  const CorollaryReport rc = corollary_check(X, Y0, Vw, Z0, coarse);
  const double stability = std::abs(rf.gamma_plus_norm - rc.gamma_plus_norm) / rf.gamma_plus_norm;
  const BoxGuardReport box = box_guard(L, 0.0, effective_momentum(narrow_gaussian()), T);
  const std::size_t k = rf.residual.size();
  const bool ok = box.wraps == 0 && rf.decreasing_tail && stability <= 0.2;
  std::string d = fmt("final residuals %.4e > %.4e > %.4e, ", rf.residual[k - 3], rf.residual[k - 2], rf.residual[k - 1]);
  d += fmt("gamma_+ norm %.4f (cut 16) vs %.4f (cut 8), change %.1f%% (tol 20%%), ", rf.gamma_plus_norm, rc.gamma_plus_norm,
           100.0 * stability);
  d += fmt("fastest wave travel %.2f < L = %.0f", box.travel, L);
  return {ok, d};
}

}  // namespace

int main() {
  int failures = 0;
  auto report = [&](int id, double budget, const std::function<Outcome()>& body) {
    const auto t0 = Clock::now();
    Outcome o;
    try {
      o = body();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
    const bool in_time = budget <= 0.0 || secs <= budget;
    const bool pass = o.pass && in_time;
    if (!pass) ++failures;
    std::printf("criterion %2d: %s  %s; runtime %.1f s%s\n", id, pass ? "PASS" : "FAIL", o.detail.c_str(), secs,
                budget > 0.0 ? fmt(" (budget %.0f s)", budget).c_str() : "");
    std::fflush(stdout);
  };
  CrossRun main_run, zero_run;
  report(1, 10.0, criterion1);
  report(2, 30.0, criterion2);
  report(3, 5.0, criterion3);
  report(4, 120.0, criterion4);
  report(5, 120.0, criterion5);
  report(6, 60.0, criterion6);
  report(7, 60.0, criterion7);
  report(8, 600.0, [&] { return criterion8(main_run, zero_run); });
  report(9, 0.0, [&] { return criterion9(main_run, zero_run); });
  report(10, 0.0, criterion10);
  report(11, 600.0, criterion11);
  std::printf("%d of 11 criteria passed\n", 11 - failures);
  return failures == 0 ? 0 : 1;
}
