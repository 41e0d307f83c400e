#include "hlab/cli.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>

#include "hlab/diagnostics.hpp"
#include "hlab/linear_response.hpp"
#include "hlab/parallel.hpp"
#include "hlab/quadratic.hpp"

namespace hlab {

json default_config() {
  return json::parse(R"({
    "profile": {"kind": "fermi", "dim": 3, "T": 1.0, "mu": 0.0, "alpha": 6.0, "amplitude": 1.0,
                "r_nodes": [], "f2_nodes": []},
    "potential": {"atom_weight": 0.1, "density": "none", "amplitude": 0.0, "scale": 1.0},
    "grid": {"n": 32, "L": 20.0},
    "ensemble": {"N": 256, "seed": 1},
    "perturbation": {"amplitude": 0.01, "width": 1.0},
    "evolution": {"dt": 0.01, "steps": 100, "mode": "midpoint", "support": -1.0, "box_guard": true,
                  "snapshots": 4},
    "fixed_point": {"T": 1.0, "steps": 32, "tol": 1e-8, "max_iter": 30, "system": "second", "cubic": false,
                    "override_hypotheses": false},
    "response": {"omega_max": 4.0, "n_omega": 33, "xi_max": 4.0, "n_xi": 32, "c_min": 1e-3},
    "kernel": {"eta": [3.0, 0.0, 0.0], "eta2": [0.0, 1.0, 0.0], "p": 2, "lambdas": [1.0, 2.0, 4.0, 8.0]},
    "diagnostics": {"norm_p": 2.0, "norm_q": 2.0, "norm_s": 0.0, "omega": "inside", "xi_cut": 0.0,
                    "schatten_p": 4.1, "schatten_s": 0.5, "eps_sweep": [0.1, 0.5, 1.0], "samples": 8,
                    "strichartz_p": 4.0, "strichartz_q": 4.0, "strichartz_s": 0.0},
    "output": {"dir": "run"}
  })");
}

const json& RunConfig::at(const std::string& dotted) const {
  const json* node = &values;
  std::stringstream ss(dotted);
  std::string part;
  while (std::getline(ss, part, '.')) {
    if (!node->contains(part)) raise(ErrorKind::Config, "InvalidConfig", "missing key '" + dotted + "'");
    node = &(*node)[part];
  }
  return *node;
}

double RunConfig::num(const std::string& dotted) const { return at(dotted).get<double>(); }
Index RunConfig::integer(const std::string& dotted) const {
  const json& v = at(dotted);
  if (v.is_number_float() && v.get<double>() != std::floor(v.get<double>()))
    raise(ErrorKind::Config, "InvalidConfig", "key '" + dotted + "' must be an integer");
  return static_cast<Index>(v.get<double>());
}
std::string RunConfig::str(const std::string& dotted) const { return at(dotted).get<std::string>(); }
bool RunConfig::flag(const std::string& dotted) const { return at(dotted).get<bool>(); }
std::vector<double> RunConfig::list(const std::string& dotted) const {
  std::vector<double> out;
  for (const auto& v : at(dotted)) {
    if (!v.is_number()) raise(ErrorKind::Config, "InvalidConfig", "key '" + dotted + "' must hold numbers");
    out.push_back(v.get<double>());
  }
  return out;
}

RunConfig resolve_config(const std::string& path, const std::vector<std::string>& overrides, const std::string* seed,
                         const std::string* out) {
  RunConfig cfg;
  std::string text;
  if (!path.empty()) {
    std::ifstream in(path);
    if (!in) raise(ErrorKind::Config, "ConfigNotFound", "cannot open config file " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    text = ss.str();
  }
  cfg.values = merge_config(default_config(), parse_toml(text, path.empty() ? "<defaults>" : path));
  std::string hashed = text;
  for (const auto& o : overrides) {
    apply_override(cfg.values, o);
    hashed += "\n--override " + o;
  }
  if (seed) {
    try {
      std::size_t used = 0;
      const unsigned long long s = std::stoull(*seed, &used);
      if (used != seed->size()) throw std::invalid_argument("seed");
      cfg.values["ensemble"]["seed"] = s;
    } catch (const std::exception&) {
      raise(ErrorKind::Config, "InvalidConfig", "seed must be an unsigned 64-bit integer");
    }
    hashed += "\n--seed " + *seed;
  }
  if (out) cfg.values["output"]["dir"] = *out;
  cfg.input_hash = sha256_hex(hashed);
  return cfg;
}

MomentumDistribution make_profile(const RunConfig& cfg) {
  ProfileParams p;
  p.T = cfg.num("profile.T");
  p.mu = cfg.num("profile.mu");
  p.alpha = cfg.num("profile.alpha");
  p.amplitude = cfg.num("profile.amplitude");
  p.r_nodes = cfg.list("profile.r_nodes");
  p.f2_nodes = cfg.list("profile.f2_nodes");
  const Index dim = cfg.integer("profile.dim");
  if (dim < 1 || dim > 3) raise(ErrorKind::Config, "InvalidConfig", "profile.dim must be 1, 2 or 3");
  return MomentumDistribution(parse_profile_kind(cfg.str("profile.kind")), p, static_cast<int>(dim));
}

PairPotential make_potential(const RunConfig& cfg) {
  PairPotential w;
  w.atom_weight = cfg.num("potential.atom_weight");
  w.density = parse_density_kind(cfg.str("potential.density"));
  w.density_amplitude = cfg.num("potential.amplitude");
  w.density_scale = cfg.num("potential.scale");
  w.dim = static_cast<int>(cfg.integer("profile.dim"));
  return w;
}

Grid make_grid(const RunConfig& cfg) {
  const Index n = cfg.integer("grid.n");
  const double L = cfg.num("grid.L");
  if (n < 2 || (n & (n - 1)) != 0) raise(ErrorKind::Config, "InvalidConfig", "grid.n must be a power of two");
  if (!(L > 0.0)) raise(ErrorKind::Config, "InvalidConfig", "grid.L must be positive");
  return Grid(static_cast<int>(cfg.integer("profile.dim")), static_cast<int>(n), L);
}

EnsembleField make_perturbation(const RunConfig& cfg, const Background& bg, const MomentumDistribution& f) {
  const Grid& g = bg.grid();
  const double eps = cfg.num("perturbation.amplitude"), width = cfg.num("perturbation.width");
  if (eps == 0.0) {
    EnsembleField z;
    z.grid = g;
    z.values = RowArrayXXc::Zero(bg.realizations(), g.size());
    z.provenance = WienerProvenance{bg.wiener().seed(), bg.realizations()};
    return z;
  }
  if (!(width > 0.0)) raise(ErrorKind::Config, "InvalidConfig", "perturbation.width must be positive");
  ArrayXc a(g.size());
  ArrayXr b(g.size());
  Eigen::Vector3d c = Eigen::Vector3d::Zero();
  for (int k = 0; k < g.dim(); ++k) c[k] = 0.5 * g.length();
  for (Index i = 0; i < g.size(); ++i) {
    a[i] = eps * std::exp(-(g.x(i) - c).squaredNorm() / (width * width));
    b[i] = f.f(std::sqrt(g.k2()[i]));
  }
  EnsembleField z = sample_structured_perturbation(StructuredProfile::modulated(a, b), bg);
  z.provenance = WienerProvenance{bg.wiener().seed(), bg.realizations()};
  return z;
}

const std::vector<std::string>& subcommands() {
  static const std::vector<std::string> names = {"check-hypotheses", "sample-equilibrium", "response-map", "q2-verify",
                                                 "kernel-bound", "evolve", "fixed-point", "scatter-report",
                                                 "norms", "density", "corollary-check"};
  return names;
}

namespace {

struct Context {
  RunConfig cfg;
  std::ostream& out;
  std::ostream& err;
};

struct Setup {
  MomentumDistribution f;
  PairKernel h;
  PairPotential w;
  Grid grid;
  std::string kernel_error;
};

const PairKernel& kernel(const Setup& s) {
  if (!s.kernel_error.empty()) raise(ErrorKind::Numerical, "QuadratureFailure", s.kernel_error);
  return s.h;
}

Setup make_setup(const RunConfig& cfg) {
  MomentumDistribution f = make_profile(cfg);
  Setup s{f, PairKernel(), make_potential(cfg), make_grid(cfg), ""};
  try {
    s.h = build_kernel_h(f);
  } catch (const Error& e) {
    if (e.code() != "QuadratureFailure") throw;
    KernelOptions loose;
    loose.tolerance = std::numeric_limits<double>::infinity();
    loose.compute_cp = false;
    s.h = build_kernel_h(f, loose);
    s.kernel_error = e.what();
  }
  return s;
}

Background make_background(const RunConfig& cfg, const Setup& s) {
  check_nyquist(s.f, s.grid);
  const Index N = cfg.integer("ensemble.N");
  if (N < 1) raise(ErrorKind::Config, "InvalidConfig", "ensemble.N must be positive");
  const auto seed = cfg.at("ensemble.seed").get<std::uint64_t>();
  return Background(s.grid, s.f, WienerSample(seed, N), equilibrium_mass(s.w, s.f, s.grid));
}

json hypotheses_json(const HypothesisReport& rep, double eps_h) {
  json entries = json::array();
  for (const auto& e : rep.entries)
    entries.push_back({{"name", e.name}, {"passed", e.passed}, {"margin", e.margin}, {"detail", e.detail}});
  return {{"passed", rep.passed}, {"eps_h", eps_h}, {"nodes", rep.nodes},
          {"node_spacing_max", rep.node_spacing_max}, {"entries", entries}};
}

HypothesisReport run_hypotheses(const Setup& s, json& report) {
  const EpsilonReport eps = epsilon_h(s.h);
  HypothesisReport rep = check_hypotheses(s.f, s.h, s.w, eps.value);
  if (!s.kernel_error.empty()) {
    rep.entries.push_back({"kernel_quadrature", false, -1.0, s.kernel_error});
    rep.passed = false;
  }
  report = hypotheses_json(rep, eps.value);
  report["eps_h_stabilized"] = eps.stabilized;
  report["kernel"] = {{"h0", s.h.h0()}, {"I0", s.h.I0()}, {"I1", s.h.I1()}, {"C1", s.h.C1()}, {"C2", s.h.C2()},
                      {"quadrature_error", s.h.quadrature_error()}};
  return rep;
}

std::vector<double> col(const std::vector<double>& v) { return v; }

int cmd_check_hypotheses(Context& ctx, RunDirectory& dir) {
  const Setup s = make_setup(ctx.cfg);
  json report;
  const HypothesisReport rep = run_hypotheses(s, report);
  dir.json_file("hypotheses.json", report);
  ctx.out << "hypotheses " << (rep.passed ? "passed" : "failed") << "\n";
  return rep.passed ? 0 : 2;
}

int cmd_sample_equilibrium(Context& ctx, RunDirectory& dir) {
  const Setup s = make_setup(ctx.cfg);
  const Background bg = make_background(ctx.cfg, s);
  const EnsembleField Y = sample_equilibrium(bg, 0.0);
  const ArrayXr m2 = mean_abs2(Y), m4 = mean_abs4(Y);
  const double variance = lattice_variance(s.f, s.grid);
  const double mean2 = m2.mean(), mean4 = m4.mean();
  std::vector<double> r, cov_re, cov_im, h_r;
  std::vector<std::array<int, 3>> offsets;
  for (int k = 0; k <= s.grid.n() / 4; ++k) offsets.push_back({k, 0, 0});
  const auto cov = covariance_offsets(Y, 0, offsets);
  for (std::size_t i = 0; i < offsets.size(); ++i) {
    const double dist = offsets[i][0] * s.grid.dx();
    r.push_back(dist);
    cov_re.push_back(cov[i].real());
    cov_im.push_back(cov[i].imag());
    h_r.push_back(s.h(dist));
  }
  dir.field_file("Y0", Y);
  dir.csv_file("covariance.csv", {"r", "cov_re", "cov_im", "h"}, {r, cov_re, cov_im, h_r});
  dir.json_file("equilibrium.json", {{"lattice_variance", variance}, {"mean_abs2", mean2},
                                     {"kurtosis", mean4 / (mean2 * mean2)}, {"nyquist_measure", nyquist_measure(s.f, s.grid)},
                                     {"mass", bg.mass()}, {"realizations", bg.realizations()}});
  ctx.out << "E|Y|^2 = " << mean2 << " (lattice " << variance << ")\n";
  return 0;
}

int cmd_response_map(Context& ctx, RunDirectory& dir) {
  const Setup s = make_setup(ctx.cfg);
  const Index no = ctx.cfg.integer("response.n_omega"), nx = ctx.cfg.integer("response.n_xi");
  const double om = ctx.cfg.num("response.omega_max"), xm = ctx.cfg.num("response.xi_max");
  if (no < 1 || nx < 1 || !(xm > 0.0)) raise(ErrorKind::Config, "InvalidConfig", "response grid is empty");
  std::vector<double> omega(no), xi(nx), w_hat(nx);
  for (Index i = 0; i < no; ++i) omega[i] = no == 1 ? 0.0 : -om + 2.0 * om * i / (no - 1);
  for (Index j = 0; j < nx; ++j) {
    xi[j] = xm * (j + 1) / nx;
    w_hat[j] = eval_w_hat(s.w, xi[j]);
  }
  const ResponseSymbol sym = compute_mf(kernel(s), omega, xi);
  const MarginReport margin = symbol_margin(sym, w_hat, ctx.cfg.num("response.c_min"));
  const EpsilonReport eps = epsilon_h(s.h);
  std::vector<double> c_om, c_xi, re, im, er;
  for (Index i = 0; i < no; ++i)
    for (Index j = 0; j < nx; ++j) {
      c_om.push_back(omega[i]);
      c_xi.push_back(xi[j]);
      re.push_back(sym(i, j).real());
      im.push_back(sym(i, j).imag());
      er.push_back(sym.errors(i, j));
    }
  dir.csv_file("mf.csv", {"omega", "xi", "re", "im", "error"}, {c_om, c_xi, re, im, er});
  dir.json_file("response.json", {{"margin", margin.margin}, {"omega_at", margin.omega_at}, {"xi_at", margin.xi_at},
                                  {"c_min", margin.c_min}, {"passed", margin.passed}, {"eps_h", eps.value},
                                  {"eps_h_levels", eps.level_max}, {"eps_h_stabilized", eps.stabilized}});
  ctx.out << "symbol margin " << margin.margin << "\n";
  if (!margin.passed) raise(ErrorKind::Numerical, "ResonantSymbol", "1 - w_hat m_f comes within c_min of zero");
  return 0;
}

SpaceTimePotential smooth_potential(const Grid& g, const std::vector<double>& times, int variant) {
  SpaceTimePotential V = SpaceTimePotential::zeros(g, times);
  const double k = g.dxi();
  for (std::size_t j = 0; j < times.size(); ++j)
    for (Index i = 0; i < g.size(); ++i) {
      const auto x = g.x(i);
      const double t = times[j];
      V.values(j, i) = variant == 0 ? std::sin(3.0 * t) * std::cos(k * x[0]) + 0.5 * t * std::sin(k * x[g.dim() - 1])
                                    : t * t * std::cos(k * (x[0] + x[g.dim() - 1])) + 0.3;
    }
  return V;
}

double rel_max(const RowArrayXXr& a, const RowArrayXXr& b) {
  const double scale = std::max(b.abs().maxCoeff(), 1e-300);
  return (a - b).abs().maxCoeff() / scale;
}

int cmd_q2_verify(Context& ctx, RunDirectory& dir) {
  const Setup s = make_setup(ctx.cfg);
  const Background bg = make_background(ctx.cfg, s);
  const auto times = uniform_times(ctx.cfg.num("fixed_point.T"), ctx.cfg.integer("fixed_point.steps"));
  const SpaceTimePotential U = smooth_potential(s.grid, times, 0), V = smooth_potential(s.grid, times, 1);
  const SpaceTimePotential qf = Q2_fourier(U, V, kernel(s));
  const SpaceTimePotential lemma = Q2_lemma_terms(U, V, kernel(s)).sum();
  RowArrayXXr sd;
  const SpaceTimePotential qe = Q2_ensemble(U, V, bg, &sd);
  const double mc = 5.0 * sd.maxCoeff() / std::sqrt(static_cast<double>(bg.realizations()));
  SpaceTimePotential Uc = SpaceTimePotential::zeros(s.grid, times), Vc = Uc;
  for (std::size_t j = 0; j < times.size(); ++j) {
    Uc.values.row(j).setConstant(std::cos(times[j]));
    Vc.values.row(j).setConstant(1.0 + times[j]);
  }
  const SpaceTimePotential qc = Q2_fourier(Uc, Vc, kernel(s));
  const double c_scale = std::max(qf.values.abs().maxCoeff(), 1e-300);
  json report = {{"max_abs", qf.values.abs().maxCoeff()},
                 {"lemma_vs_fourier_rel", rel_max(lemma.values, qf.values)},
                 {"ensemble_vs_fourier_abs", (qe.values - qf.values).abs().maxCoeff()},
                 {"monte_carlo_floor", mc},
                 {"constant_cancellation_abs", qc.values.abs().maxCoeff()},
                 {"constant_cancellation_rel", qc.values.abs().maxCoeff() / c_scale}};
  dir.json_file("q2.json", report);
  dir.potential_file("Q2_fourier", qf);
  ctx.out << "Q2 lemma/fourier relative difference " << report["lemma_vs_fourier_rel"].get<double>() << "\n";
  return 0;
}

int cmd_kernel_bound(Context& ctx, RunDirectory& dir) {
  const Setup s = make_setup(ctx.cfg);
  const auto eta_v = ctx.cfg.list("kernel.eta"), eta2_v = ctx.cfg.list("kernel.eta2");
  if (eta_v.size() != 3 || eta2_v.size() != 3) raise(ErrorKind::Config, "InvalidConfig", "kernel vectors need 3 entries");
  const Eigen::Vector3d eta(eta_v[0], eta_v[1], eta_v[2]), eta2(eta2_v[0], eta2_v[1], eta2_v[2]);
  const int p = static_cast<int>(ctx.cfg.integer("kernel.p"));
  std::vector<double> lam = ctx.cfg.list("kernel.lambdas"), norm2, bound, ratio;
  for (double l : lam) {
    const QKernelSample k = kernel_K_norms(l * eta, eta2, kernel(s), p);
    norm2.push_back(k.norm2());
    bound.push_back(k.bound);
    ratio.push_back(k.ratio());
  }
  double slope = 0.0;
  if (lam.size() >= 2) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = static_cast<double>(lam.size());
    for (std::size_t i = 0; i < lam.size(); ++i) {
      const double x = std::log(lam[i]), y = std::log(norm2[i]);
      sx += x, sy += y, sxx += x * x, sxy += x * y;
    }
    slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  }
  dir.csv_file("kernel_bound.csv", {"lambda", "norm2", "bound", "ratio"}, {lam, norm2, bound, ratio});
  dir.json_file("kernel_bound.json", {{"p", p}, {"slope", slope}, {"max_ratio", *std::max_element(ratio.begin(), ratio.end())}});
  ctx.out << "kernel norm slope " << slope << "\n";
  return 0;
}

std::vector<Index> sample_nodes(Index steps, Index count) {
  std::vector<Index> nodes;
  count = std::max<Index>(1, std::min(count, steps));
  for (Index i = 1; i <= count; ++i) nodes.push_back(i * steps / count);
  return nodes;
}

json scattering_json(const ScatteringReport& rep) {
  return {{"times", rep.times}, {"z_cauchy", rep.z_cauchy}, {"w_cauchy", rep.w_cauchy},
          {"z_profile_norm", rep.z_profile_norm}, {"z_decreasing", rep.z_decreasing}, {"w_decreasing", rep.w_decreasing}};
}

int cmd_evolve(Context& ctx, RunDirectory& dir) {
  const Setup s = make_setup(ctx.cfg);
  const Background bg = make_background(ctx.cfg, s);
  const EnsembleField Z0 = make_perturbation(ctx.cfg, bg, s.f);
  EnsembleField X0 = sample_equilibrium(bg, 0.0);
  X0.values += Z0.values;
  X0.provenance = Z0.provenance;
  EvolutionConfig ec;
  ec.dt = ctx.cfg.num("evolution.dt");
  ec.steps = ctx.cfg.integer("evolution.steps");
  ec.mode = parse_step_mode(ctx.cfg.str("evolution.mode"));
  const double support = ctx.cfg.num("evolution.support");
  ec.support = support >= 0.0 ? support : (ctx.cfg.num("perturbation.amplitude") == 0.0 ? 0.0 : 2.0 * ctx.cfg.num("perturbation.width"));
  ec.enforce_box_guard = ctx.cfg.flag("evolution.box_guard");
  if (!(ec.dt > 0.0) || ec.steps < 1) raise(ErrorKind::Config, "InvalidConfig", "evolution needs dt > 0 and steps >= 1");
  ec.snapshots = sample_nodes(ec.steps, ctx.cfg.integer("evolution.snapshots"));
  ec.snapshots.insert(ec.snapshots.begin(), 0);
  const Trajectory tr = evolve_hartree(X0, bg, s.w, ec);
  const ScatteringReport sc = extract_scattering(tr, bg);
  const bool zero = Z0.values.abs().maxCoeff() == 0.0;
  std::vector<double> vmax, vl2;
  for (Index j = 0; j < tr.V.values.rows(); ++j) {
    vmax.push_back(tr.V.values.row(j).abs().maxCoeff());
    vl2.push_back(std::sqrt(tr.V.values.row(j).square().sum() * s.grid.cell_volume()));
  }
  dir.csv_file("density.csv", {"t", "max_abs", "l2"}, {col(tr.times), vmax, vl2});
  dir.potential_file("V", tr.V);
  dir.field_file("X_final", tr.X);
  dir.json_file("evolve.json", {{"mode", to_string(ec.mode)}, {"dt", ec.dt}, {"steps", ec.steps},
                                {"mass", bg.mass()}, {"deviation_max", tr.deviation_max},
                                {"mass_drift_max", tr.mass_drift_max},
                                {"zero_perturbation", zero}, {"stationary_exact", zero && tr.deviation_max == 0.0},
                                {"box", {{"required", tr.box.required}, {"travel", tr.box.travel},
                                         {"wraps", tr.box.wraps}, {"ok", tr.box.ok}}},
                                {"scattering", scattering_json(sc)}});
  ctx.out << "evolve: deviation max " << tr.deviation_max << ", mass drift " << tr.mass_drift_max << "\n";
  return 0;
}

FixedPointConfig fixed_point_config(const RunConfig& cfg) {
  FixedPointConfig pc;
  pc.T = cfg.num("fixed_point.T");
  pc.steps = cfg.integer("fixed_point.steps");
  pc.tol = cfg.num("fixed_point.tol");
  pc.max_iter = static_cast<int>(cfg.integer("fixed_point.max_iter"));
  pc.cubic = cfg.flag("fixed_point.cubic");
  const std::string sys = cfg.str("fixed_point.system");
  if (sys == "linear") pc.system = FixedPointSystem::Linear;
  else if (sys == "second") pc.system = FixedPointSystem::Second;
  else raise(ErrorKind::Config, "InvalidConfig", "fixed_point.system must be 'linear' or 'second'");
  if (!(pc.T > 0.0) || pc.steps < 1) raise(ErrorKind::Config, "InvalidConfig", "fixed point needs T > 0 and steps >= 1");
  return pc;
}

FixedPointState run_fixed_point(Context& ctx, const Setup& s, const Background& bg, const EnsembleField& Z0,
                                json& report) {
  json hyp;
  const HypothesisReport rep = run_hypotheses(s, hyp);
  report["hypotheses"] = hyp;
  if (!rep.passed && !ctx.cfg.flag("fixed_point.override_hypotheses"))
    raise(ErrorKind::Validation, "HypothesisFailed", "hypotheses fail; set fixed_point.override_hypotheses to run anyway");
  const FixedPointConfig pc = fixed_point_config(ctx.cfg);
  const SpectralL2 L2(s.grid, uniform_times(pc.T, pc.steps), kernel(s), s.w);
  const MarginReport margin = L2.margin(ctx.cfg.num("response.c_min"));
  report["invertibility_margin"] = margin.margin;
  if (!margin.passed) raise(ErrorKind::Numerical, "ResonantSymbol", "1 - w_hat m_f comes within c_min of zero");
  const bool cubic_path = s.grid.dim() == 2 && pc.cubic;
  FixedPointState st = cubic_path ? picard_dim2_cubic(Z0, bg, s.h, s.w, pc) : picard_fixed_point(Z0, bg, s.h, s.w, pc);
  report["system"] = pc.system == FixedPointSystem::Linear ? "linear" : cubic_path ? "cubic" : "second";
  report["iterations"] = st.iterations;
  report["converged"] = st.converged;
  report["residual_Z"] = st.residual_Z;
  report["residual_V"] = st.residual_V;
  report["contraction"] = st.contraction;
  report["contraction_factor"] = st.contraction_factor;
  return st;
}

void residual_csv(RunDirectory& dir, const FixedPointState& st) {
  std::vector<double> it;
  for (int i = 1; i <= st.iterations; ++i) it.push_back(i);
  dir.csv_file("residuals.csv", {"iteration", "residual_Z", "residual_V"}, {it, st.residual_Z, st.residual_V});
}

int cmd_fixed_point(Context& ctx, RunDirectory& dir) {
  const Setup s = make_setup(ctx.cfg);
  const Background bg = make_background(ctx.cfg, s);
  const EnsembleField Z0 = make_perturbation(ctx.cfg, bg, s.f);
  json report;
  const FixedPointState st = run_fixed_point(ctx, s, bg, Z0, report);
  residual_csv(dir, st);
  dir.potential_file("V", st.V);
  dir.json_file("fixed_point.json", report);
  ctx.out << "fixed point: " << st.iterations << " iterations, converged " << st.converged << "\n";
  return 0;
}

int cmd_scatter_report(Context& ctx, RunDirectory& dir) {
  const Setup s = make_setup(ctx.cfg);
  const Background bg = make_background(ctx.cfg, s);
  const EnsembleField Z0 = make_perturbation(ctx.cfg, bg, s.f);
  json report;
  const FixedPointState st = run_fixed_point(ctx, s, bg, Z0, report);
  std::vector<Index> nodes = sample_nodes(ctx.cfg.integer("fixed_point.steps"), ctx.cfg.integer("diagnostics.samples"));
  nodes.insert(nodes.begin(), 0);
  const ScatteringReport sc = extract_scattering(st, bg, s.w, nodes);
  residual_csv(dir, st);
  std::vector<double> tc(sc.z_cauchy.size());
  for (std::size_t i = 0; i < tc.size(); ++i) tc[i] = sc.times[i + 1];
  dir.csv_file("scattering.csv", {"t", "z_cauchy", "w_cauchy"}, {tc, sc.z_cauchy, sc.w_cauchy});
  dir.field_file("Z_plus", sc.Z_plus);
  dir.field_file("Ztilde_plus", sc.Ztilde_plus);
  report["scattering"] = scattering_json(sc);
  dir.json_file("scattering.json", report);
  ctx.out << "scattering: z decreasing " << sc.z_decreasing << ", w decreasing " << sc.w_decreasing << "\n";
  return 0;
}

NormSpec norm_spec(const RunConfig& cfg) {
  NormSpec spec;
  spec.p = cfg.num("diagnostics.norm_p");
  spec.q = cfg.num("diagnostics.norm_q");
  spec.s = cfg.num("diagnostics.norm_s");
  spec.omega = parse_omega_order(cfg.str("diagnostics.omega"));
  spec.validate();
  return spec;
}

int cmd_norms(Context& ctx, RunDirectory& dir) {
  const Setup s = make_setup(ctx.cfg);
  const Background bg = make_background(ctx.cfg, s);
  const EnsembleField Z0 = make_perturbation(ctx.cfg, bg, s.f);
  const NormSpec spec = norm_spec(ctx.cfg);
  const auto times = uniform_times(ctx.cfg.num("fixed_point.T"), ctx.cfg.integer("fixed_point.steps"));
  FieldHistory yh = equilibrium_history(bg, times);
  FieldHistory zh = yh;
  for (Index r = 0; r < bg.realizations(); ++r) {
    ArrayXc zhat = Z0.values.row(r).transpose();
    s.grid.forward(zhat.data());
    for (std::size_t j = 0; j < times.size(); ++j) {
      for (Index k = 0; k < s.grid.size(); ++k)
        zh.realizations[r](j, k) = zhat[k] * std::polar(1.0 / static_cast<double>(s.grid.size()), -times[j] * s.grid.k2()[k]);
      s.grid.inverse(zh.realizations[r].row(j).data());
    }
  }
  json report = {{"spec", {{"p", spec.p}, {"q", spec.q}, {"s", spec.s}, {"omega", ctx.cfg.str("diagnostics.omega")}}},
                 {"equilibrium", spacetime_norm(yh, spec)}, {"free_perturbation", spacetime_norm(zh, spec)},
                 {"initial_perturbation", spacetime_norm(Z0, spec)}};
  StrichartzSpec ss;
  ss.p = ctx.cfg.num("diagnostics.strichartz_p");
  ss.q = ctx.cfg.num("diagnostics.strichartz_q");
  ss.s = ctx.cfg.num("diagnostics.strichartz_s");
  ss.T = ctx.cfg.num("fixed_point.T");
  ss.steps = ctx.cfg.integer("fixed_point.steps");
  if (strichartz_admissible(s.grid.dim(), ss.p, ss.q, ss.s) && s.grid.n() >= 4) {
    const double width = ctx.cfg.num("perturbation.width");
    auto factory = [&](const Grid& g) {
      EnsembleField z;
      z.grid = g;
      z.values.resize(1, g.size());
      Eigen::Vector3d c = Eigen::Vector3d::Zero();
      for (int k = 0; k < g.dim(); ++k) c[k] = 0.5 * g.length();
      for (Index i = 0; i < g.size(); ++i) z.values(0, i) = std::exp(-(g.x(i) - c).squaredNorm() / (width * width));
      return z;
    };
    const std::vector<Grid> ladder = {Grid(s.grid.dim(), s.grid.n() / 2, s.grid.length()), s.grid};
    const StrichartzReport sr = strichartz_ratio(factory, ladder, ss);
    report["strichartz"] = {{"n", sr.n}, {"ratio", sr.ratio}, {"spread", sr.spread}, {"degenerate", sr.degenerate}};
  } else {
    report["strichartz"] = {{"admissible", false}};
  }
  dir.json_file("norms.json", report);
  ctx.out << "norms: free perturbation " << report["free_perturbation"].get<double>() << "\n";
  return 0;
}

double xi_cut_of(const RunConfig& cfg, const Grid& g) {
  const double c = cfg.num("diagnostics.xi_cut");
  return c > 0.0 ? c : default_xi_cut(g);
}

int cmd_density(Context& ctx, RunDirectory& dir) {
  const Setup s = make_setup(ctx.cfg);
  const Background bg = make_background(ctx.cfg, s);
  const EnsembleField Y = sample_equilibrium(bg, 0.0);
  EnsembleField X = Y;
  X.values += make_perturbation(ctx.cfg, bg, s.f).values;
  const double cut = xi_cut_of(ctx.cfg, s.grid);
  const DensityOperator gy = build_density_operator(Y, cut), gx = build_density_operator(X, cut);
  double diag_err = 0.0, diag_scale = 0.0, off = 0.0;
  std::vector<double> xi, diag, expect;
  for (Index a = 0; a < gy.size(); ++a) {
    const double r = std::sqrt(s.grid.k2()[gy.modes[a]]);
    const double e = s.f.f2(r) * gy.normalization;
    xi.push_back(r);
    diag.push_back(gy.gamma(a, a).real());
    expect.push_back(e);
    diag_err = std::max(diag_err, std::abs(gy.gamma(a, a).real() - e));
    diag_scale = std::max(diag_scale, e);
    for (Index b = 0; b < gy.size(); ++b)
      if (a != b) off = std::max(off, std::abs(gy.gamma(a, b)));
  }
  const double sp = ctx.cfg.num("diagnostics.schatten_p"), ssv = ctx.cfg.num("diagnostics.schatten_s");
  dir.csv_file("gamma_diagonal.csv", {"xi", "gamma_kk", "f2_norm"}, {xi, diag, expect});
  dir.json_file("density.json", {{"xi_cut", cut}, {"basis_size", gy.size()}, {"normalization", gy.normalization},
                                 {"equilibrium", {{"diag_max_error", diag_err}, {"diag_scale", diag_scale},
                                                  {"offdiag_max", off}, {"hermitian_error", gy.hermitian_error()},
                                                  {"min_eigenvalue", gy.min_eigenvalue()},
                                                  {"schatten", schatten_norm(gy, sp, ssv)}}},
                                 {"perturbed", {{"hermitian_error", gx.hermitian_error()},
                                                {"min_eigenvalue", gx.min_eigenvalue()},
                                                {"schatten", schatten_norm(gx, sp, ssv)}}}});
  ctx.out << "density: basis " << gy.size() << ", diagonal error " << diag_err << "\n";
  return 0;
}

int cmd_corollary_check(Context& ctx, RunDirectory& dir) {
  const Setup s = make_setup(ctx.cfg);
  const Background bg = make_background(ctx.cfg, s);
  const EnsembleField Z0 = make_perturbation(ctx.cfg, bg, s.f);
  json report;
  const FixedPointState st = run_fixed_point(ctx, s, bg, Z0, report);
  const std::vector<Index> nodes = sample_nodes(ctx.cfg.integer("fixed_point.steps"), ctx.cfg.integer("diagnostics.samples"));
  const auto X = reconstruct_fields(st, bg, s.w, nodes);
  const SpaceTimePotential Vp = convolve_potential(st.V, w_hat_on_grid(s.w, s.grid));
  const EnsembleField Y0 = sample_equilibrium(bg, 0.0);
  const EnsembleField Zp = extract_scattering(st, bg, s.w, {static_cast<Index>(st.times.size()) - 1}).Z_plus;
  CorollaryOptions co;
  co.xi_cut = xi_cut_of(ctx.cfg, s.grid);
  co.s = ctx.cfg.num("diagnostics.schatten_s");
  json sweep = json::array();
  CorollaryReport main;
  for (double e : ctx.cfg.list("diagnostics.eps_sweep")) {
    co.p = 4.0 + e;
    const CorollaryReport rep = corollary_check(X, Y0, Vp, Zp, co);
    if (sweep.empty()) main = rep;
    sweep.push_back({{"p", co.p}, {"residual", rep.residual}, {"gamma_plus_norm", rep.gamma_plus_norm},
                     {"decreasing_tail", rep.decreasing_tail}});
  }
  dir.csv_file("corollary.csv", {"t", "residual"}, {main.times, main.residual});
  report["corollary"] = {{"xi_cut", main.xi_cut}, {"basis_size", main.basis_size},
                         {"normalization", main.normalization}, {"times", main.times}, {"sweep", sweep}};
  dir.json_file("corollary.json", report);
  ctx.out << "corollary: residual tail decreasing " << main.decreasing_tail << "\n";
  return 0;
}

using Handler = int (*)(Context&, RunDirectory&);

Handler handler_for(const std::string& name) {
  if (name == "check-hypotheses") return cmd_check_hypotheses;
  if (name == "sample-equilibrium") return cmd_sample_equilibrium;
  if (name == "response-map") return cmd_response_map;
  if (name == "q2-verify") return cmd_q2_verify;
  if (name == "kernel-bound") return cmd_kernel_bound;
  if (name == "evolve") return cmd_evolve;
  if (name == "fixed-point") return cmd_fixed_point;
  if (name == "scatter-report") return cmd_scatter_report;
  if (name == "norms") return cmd_norms;
  if (name == "density") return cmd_density;
  if (name == "corollary-check") return cmd_corollary_check;
  return nullptr;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Random-field Hartree toolkit"};
  app.require_subcommand(1, 1);
  std::string config, outdir, seed;
  int nworkers = 0;
  std::vector<std::string> overrides;
  for (const auto& name : subcommands()) {
    CLI::App* sub = app.add_subcommand(name);
    sub->add_option("--config", config, "TOML configuration file");
    sub->add_option("--out", outdir, "output directory");
    sub->add_option("--seed", seed, "64-bit seed override");
    sub->add_option("--workers", nworkers, "worker threads")->check(CLI::NonNegativeNumber);
    sub->add_option("--override", overrides, "dotted KEY=VALUE override")->allow_extra_args(false);
  }
  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return 4;
  }
  const std::string name = app.get_subcommands().front()->get_name();
  try {
    if (nworkers > 0) set_workers(nworkers);
    Context ctx{resolve_config(config, overrides, seed.empty() ? nullptr : &seed, outdir.empty() ? nullptr : &outdir),
                out, err};
    RunDirectory dir(ctx.cfg.str("output.dir"), name);
    const int code = handler_for(name)(ctx, dir);
    dir.finish(ctx.cfg.values, ctx.cfg.input_hash,
               {{"workers", workers()}, {"exit_code", code},
                {"density_normalization", "gamma_kk = E|<e_k, X>|^2, e_k = L^{-d/2} e^{i xi_k x}; equilibrium gives f^2(xi_k) (2 pi)^d"}});
    return code;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return exit_code(e);
  } catch (const nlohmann::json::exception& e) {
    err << "error: InvalidConfig: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 3;
  }
}

int run_cli(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run_cli(args, std::cout, std::cerr);
}

}  // namespace hlab
