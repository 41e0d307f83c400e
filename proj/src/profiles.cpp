#include "hlab/profiles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace hlab {

namespace {

constexpr double kTailRelative = 1e-12;
constexpr double kLinearEnd = 64.0;

std::vector<double> radial_nodes(double r_min, double r_max, int n_log, int n_lin, int n_tail) {
  if (r_max <= kLinearEnd) return log_linear_grid(r_min, r_max, n_log, n_lin + n_tail);
  std::vector<double> r = log_linear_grid(r_min, kLinearEnd, n_log, n_lin);
  const double l0 = std::log(kLinearEnd), l1 = std::log(r_max);
  for (int i = 1; i <= n_tail; ++i) r.push_back(std::exp(l0 + (l1 - l0) * i / n_tail));
  r.back() = r_max;
  return r;
}

// Nonuniform centered differences with one-sided stencils at the ends.
void finite_differences(const std::vector<double>& x, const std::vector<double>& y,
                        std::vector<double>& d1, std::vector<double>& d2) {
  const std::size_t n = x.size();
  d1.assign(n, 0.0);
  d2.assign(n, 0.0);
  if (n < 3) return;
  auto stencil = [&](std::size_t i0, std::size_t at, double& first, double& second) {
    const double x0 = x[i0], x1 = x[i0 + 1], x2 = x[i0 + 2], t = x[at];
    const double w0 = ((t - x1) + (t - x2)) / ((x0 - x1) * (x0 - x2));
    const double w1 = ((t - x0) + (t - x2)) / ((x1 - x0) * (x1 - x2));
    const double w2 = ((t - x0) + (t - x1)) / ((x2 - x0) * (x2 - x1));
    first = w0 * y[i0] + w1 * y[i0 + 1] + w2 * y[i0 + 2];
    second = 2.0 * (y[i0] / ((x0 - x1) * (x0 - x2)) + y[i0 + 1] / ((x1 - x0) * (x1 - x2)) +
                    y[i0 + 2] / ((x2 - x0) * (x2 - x1)));
  };
  stencil(0, 0, d1[0], d2[0]);
  for (std::size_t i = 1; i + 1 < n; ++i) stencil(i - 1, i, d1[i], d2[i]);
  stencil(n - 3, n - 1, d1[n - 1], d2[n - 1]);
}

double trapezoid(const std::vector<double>& x, const std::vector<double>& y) {
  double s = 0.0;
  for (std::size_t i = 0; i + 1 < x.size(); ++i) s += 0.5 * (x[i + 1] - x[i]) * (y[i] + y[i + 1]);
  return s;
}

// Effective decay exponent p of y ~ r^-p over the outer octave, minus 1; tails below 1e-8 of the peak count as decayed.
double tail_margin(const std::vector<double>& x, const std::vector<double>& y, double& total) {
  total = trapezoid(x, y);
  const double R = x.back();
  double outer = 0.0, inner = 0.0, peak = 0.0;
  for (double v : y) peak = std::max(peak, std::abs(v));
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] >= 0.75 * R) outer = std::max(outer, std::abs(y[i]));
    if (x[i] >= 0.375 * R && x[i] <= 0.5 * R) inner = std::max(inner, std::abs(y[i]));
  }
  if (outer <= 1e-8 * peak) return 300.0;
  if (inner <= 0.0) return -1.0;
  return std::min(300.0, std::log(inner / outer) / std::log(2.0) - 1.0);
}

std::string fmt_double(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

}  // namespace

ProfileKind parse_profile_kind(const std::string& name) {
  if (name == "fermi") return ProfileKind::Fermi;
  if (name == "bose") return ProfileKind::Bose;
  if (name == "bessel") return ProfileKind::Bessel;
  if (name == "gaussian") return ProfileKind::Gaussian;
  if (name == "tabulated") return ProfileKind::Tabulated;
  raise(ErrorKind::Config, "UnknownProfile", "unknown profile kind '" + name + "'");
}

std::string to_string(ProfileKind kind) {
  switch (kind) {
    case ProfileKind::Fermi: return "fermi";
    case ProfileKind::Bose: return "bose";
    case ProfileKind::Bessel: return "bessel";
    case ProfileKind::Gaussian: return "gaussian";
    case ProfileKind::Tabulated: return "tabulated";
  }
  return "unknown";
}

double sphere_area(int dim) {
  switch (dim) {
    case 1: return 2.0;
    case 2: return kTwoPi;
    default: return 4.0 * kPi;
  }
}

MomentumDistribution::MomentumDistribution(ProfileKind kind, ProfileParams params, int dim)
    : kind_(kind), params_(std::move(params)), dim_(dim) {
  if (dim < 1 || dim > 3) raise(ErrorKind::Config, "InvalidProfile", "dimension must be 1, 2 or 3");
  if (kind_ != ProfileKind::Tabulated && !(params_.T > 0.0))
    raise(ErrorKind::Config, "InvalidProfile", "temperature/width T must be positive");
  if (kind_ == ProfileKind::Bose && params_.mu > -1e-6)
    raise(ErrorKind::Config, "InvalidProfile", "bose profile requires mu <= -1e-6");
  if (kind_ == ProfileKind::Tabulated) {
    const auto& r = params_.r_nodes;
    if (r.size() < 2 || r.size() != params_.f2_nodes.size() || r.front() != 0.0)
      raise(ErrorKind::Config, "InvalidProfile", "tabulated profile needs matching nodes starting at r = 0");
    for (std::size_t i = 0; i + 1 < r.size(); ++i)
      if (!(r[i + 1] > r[i])) raise(ErrorKind::Config, "InvalidProfile", "tabulated radii must increase");
    r_max_ = r.back();
    return;
  }
  if (kind_ == ProfileKind::Bessel && params_.alpha <= dim_)
    raise(ErrorKind::Validation, "NonIntegrable", "bessel profile with alpha <= dim is not integrable");
  const double s0 = shape(0.0);
  double r = 1.0;
  while (shape(r) * std::pow(r, dim_) >= kTailRelative * s0) {
    r *= 1.02;
    if (r > 1e7) raise(ErrorKind::Validation, "NonIntegrable", "f^2 tail does not decay fast enough");
  }
  r_max_ = r;
}

MomentumDistribution MomentumDistribution::fermi(int dim, double T, double mu) {
  ProfileParams p;
  p.T = T;
  p.mu = mu;
  return {ProfileKind::Fermi, p, dim};
}

MomentumDistribution MomentumDistribution::bose(int dim, double T, double mu) {
  ProfileParams p;
  p.T = T;
  p.mu = mu;
  return {ProfileKind::Bose, p, dim};
}

MomentumDistribution MomentumDistribution::bessel(int dim, double alpha) {
  ProfileParams p;
  p.alpha = alpha;
  return {ProfileKind::Bessel, p, dim};
}

MomentumDistribution MomentumDistribution::gaussian(int dim, double width2) {
  ProfileParams p;
  p.T = width2;
  return {ProfileKind::Gaussian, p, dim};
}

MomentumDistribution MomentumDistribution::tabulated(int dim, std::vector<double> r, std::vector<double> f2) {
  ProfileParams p;
  p.r_nodes = std::move(r);
  p.f2_nodes = std::move(f2);
  return {ProfileKind::Tabulated, p, dim};
}

MomentumDistribution MomentumDistribution::scaled(double lambda) const {
  MomentumDistribution out = *this;
  out.params_.amplitude *= lambda;
  return out;
}

double MomentumDistribution::shape(double r) const {
  const auto& p = params_;
  switch (kind_) {
    case ProfileKind::Fermi: {
      const double x = (r * r - p.mu) / p.T;
      if (x > 0.0) {
        const double e = std::exp(-x);
        return e / (1.0 + e);
      }
      return 1.0 / (std::exp(x) + 1.0);
    }
    case ProfileKind::Bose: return 1.0 / std::expm1((r * r - p.mu) / p.T);
    case ProfileKind::Bessel: return std::pow(1.0 + r * r, -0.5 * p.alpha);
    case ProfileKind::Gaussian: return std::exp(-r * r / p.T);
    case ProfileKind::Tabulated: {
      const auto& x = p.r_nodes;
      const auto& y = p.f2_nodes;
      if (r < 0.0 || r > x.back()) return 0.0;
      const auto it = std::upper_bound(x.begin(), x.end(), r);
      const std::size_t i = std::min<std::size_t>(it - x.begin(), x.size() - 1);
      if (i == 0) return y[0];
      const double t = (r - x[i - 1]) / (x[i] - x[i - 1]);
      return (1.0 - t) * y[i - 1] + t * y[i];
    }
  }
  return 0.0;
}

double MomentumDistribution::shape_derivative(double r) const {
  const auto& p = params_;
  switch (kind_) {
    case ProfileKind::Fermi: {
      const double s = shape(r);
      return -(2.0 * r / p.T) * s * (1.0 - s);
    }
    case ProfileKind::Bose: {
      const double x = (r * r - p.mu) / p.T;
      const double em = std::expm1(x);
      return -(2.0 * r / p.T) * (em + 1.0) / (em * em);
    }
    case ProfileKind::Bessel: return -p.alpha * r * std::pow(1.0 + r * r, -0.5 * p.alpha - 1.0);
    case ProfileKind::Gaussian: return -(2.0 * r / p.T) * std::exp(-r * r / p.T);
    case ProfileKind::Tabulated: {
      const auto& x = p.r_nodes;
      const auto& y = p.f2_nodes;
      if (r < 0.0 || r >= x.back()) return 0.0;
      const auto it = std::upper_bound(x.begin(), x.end(), r);
      const std::size_t i = it - x.begin();
      return (y[i] - y[i - 1]) / (x[i] - x[i - 1]);
    }
  }
  return 0.0;
}

double MomentumDistribution::f2(double r) const { return params_.amplitude * shape(r); }
double MomentumDistribution::df2(double r) const { return params_.amplitude * shape_derivative(r); }
double MomentumDistribution::f(double r) const { return std::sqrt(std::max(0.0, f2(r))); }

double MomentumDistribution::df(double r) const {
  const double fv = f(r);
  if (fv <= 0.0) return 0.0;
  return df2(r) / (2.0 * fv);
}

PairKernel PairKernel::from_values(int dim, std::vector<double> r, std::vector<double> h, bool compute_cp) {
  PairKernel k;
  k.dim_ = dim;
  k.r_ = std::move(r);
  k.h_ = std::move(h);
  k.finalize(compute_cp);
  return k;
}

void PairKernel::finalize(bool compute_cp) {
  spline_ = PiecewiseCubic::spline(r_, h_, 0.0);
  r_cut_ = r_.back();
  {
    double hmax = 0.0;
    for (double v : h_) hmax = std::max(hmax, std::abs(v));
    double reff = 0.0;
    for (std::size_t i = 0; i < r_.size(); ++i)
      if (std::abs(h_[i]) > 1e-9 * hmax) reff = r_[std::min(i + 1, r_.size() - 1)];
    if (reff <= 0.0) reff = r_cut_;
    const double step = std::min(1.0 / 64.0, reff / 256.0);
    const Index n = static_cast<Index>(std::ceil(reff / step));
    std::vector<double> x(n + 1), y(n + 1);
    for (Index i = 0; i <= n; ++i) {
      x[i] = std::min(reff, step * static_cast<double>(i));
      y[i] = spline_(x[i]);
    }
    x[n] = reff;
    fourier_ = PiecewiseCubic::spline(x, y, 0.0);
  }
  finite_differences(r_, h_, dh_, d2h_);
  const std::size_t n = r_.size();
  std::vector<double> a0(n), a1(n), areg(n);
  sup_ = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    a0[i] = std::abs(h_[i]);
    a1[i] = r_[i] * std::abs(h_[i]);
    const double lead = r_[i] > 0.0 ? std::abs(dh_[i]) / r_[i] : std::abs(d2h_[i]);
    areg[i] = lead + std::abs(d2h_[i]);
    sup_ = std::max(sup_, std::abs(h_[i]));
  }
  I0_ = trapezoid(r_, a0);
  I1_ = trapezoid(r_, a1);
  Ireg_ = trapezoid(r_, areg);
  if (compute_cp) {
    C1_ = kernel_integrals(*this, 1);
    C2_ = kernel_integrals(*this, 2);
  }
}

double PairKernel::periodized(const Eigen::Vector3d& y, double L) const {
  int lo[3] = {0, 0, 0}, hi[3] = {0, 0, 0};
  for (int a = 0; a < dim_; ++a) {
    lo[a] = static_cast<int>(std::floor((-y[a] - r_cut_) / L));
    hi[a] = static_cast<int>(std::ceil((-y[a] + r_cut_) / L));
  }
  double s = 0.0;
  for (int i = lo[0]; i <= hi[0]; ++i)
    for (int j = lo[1]; j <= hi[1]; ++j)
      for (int k = lo[2]; k <= hi[2]; ++k) {
        const Eigen::Vector3d z = y + L * Eigen::Vector3d(i, j, k);
        s += (*this)(z.norm());
      }
  return s;
}

PairKernel build_kernel_h(const MomentumDistribution& f, const KernelOptions& opt) {
  const int dim = f.dim();
  const double R = f.r_max();
  const std::vector<double> x = radial_nodes(opt.r_min, R, opt.n_log, opt.n_lin, opt.n_tail);
  const std::size_t nx = x.size();
  std::vector<double> A(nx, 0.0);
  double abel_error = 0.0;
  if (dim == 1) {
    for (std::size_t i = 0; i < nx; ++i) A[i] = f.f2(x[i]);
  } else if (dim == 3) {
    auto g = [&](double s) { return s * f.f2(s); };
    for (std::size_t i = nx - 1; i-- > 0;) {
      const auto q = integrate<double>(g, x[i], x[i + 1], 0.0, 1e-13);
      A[i] = A[i + 1] + kTwoPi * q.value;
      abel_error += kTwoPi * q.error;
    }
  } else {
    const auto q0 = integrate<double>([&](double y) { return f.f2(y); }, 0.0, R, 0.0, 1e-13);
    A[0] = 2.0 * q0.value;
    abel_error = 2.0 * q0.error;
    for (std::size_t i = 1; i < nx; ++i) {
      const double xi = x[i];
      if (xi >= R) continue;
      const double U = std::acosh(R / xi);
      const auto q = integrate<double>(
          [&](double u) {
            const double c = std::cosh(u);
            return xi * c * f.f2(xi * c);
          },
          0.0, U, 0.0, 1e-13);
      A[i] = 2.0 * q.value;
      abel_error = std::max(abel_error, 2.0 * q.error);
    }
  }
  const PiecewiseCubic abel = PiecewiseCubic::spline(x, A, 0.0);
  const PiecewiseCubic abel_coarse = abel.coarsened();
  auto transform = [&](const PiecewiseCubic& p, double r) { return 2.0 * p.fourier(r).real(); };
  const double h0 = 2.0 * abel.integral();

  double R_h = 4.0;
  bool truncated = false;
  if (h0 != 0.0) {
    while (true) {
      double peak = 0.0;
      for (int j = 0; j <= 32; ++j) peak = std::max(peak, std::abs(transform(abel, R_h * (0.5 + j / 64.0))));
      if (peak < opt.decay * std::abs(h0)) break;
      R_h *= 1.5;
      if (R_h > opt.r_cap) {
        R_h = opt.r_cap;
        truncated = true;
        break;
      }
    }
  }
  PairKernel k;
  k.dim_ = dim;
  k.r_ = log_linear_grid(opt.r_min, R_h, opt.n_log, opt.n_lin + opt.n_tail);
  k.h_.resize(k.r_.size());
  double err = abel_error;
  for (std::size_t i = 0; i < k.r_.size(); ++i) {
    k.h_[i] = transform(abel, k.r_[i]);
    err = std::max(err, std::abs(k.h_[i] - transform(abel_coarse, k.r_[i])));
  }
  k.h_[0] = h0;
  k.quad_error_ = err;
  k.tail_truncated_ = truncated;
  if (err > opt.tolerance * std::abs(h0))
    raise(ErrorKind::Numerical, "QuadratureFailure",
          "radial transform error estimate " + fmt_double(err) + " exceeds tolerance");
  k.finalize(opt.compute_cp);
  return k;
}

double kernel_integrals(const PairKernel& h, int p) {
  if (p != 1 && p != 2) raise(ErrorKind::Config, "InvalidExponent", "C_p(h) defined for p = 1, 2");
  if (h.is_zero()) return 0.0;
  const double R = h.r_cut();
  auto inner = [&](double v) {
    const double umax = std::sqrt(std::max(0.0, R * R - v * v));
    if (p == 2) {
      const auto q = integrate<double>(
          [&](double u) { return sqr(h(std::sqrt(u * u + v * v))); }, 0.0, umax, 0.0, 1e-11);
      return 2.0 * q.value;
    }
    const auto q = integrate<double>(
        [&](double s) { return 2.0 * s * s * std::abs(h(std::sqrt(s * s * s * s + v * v))); }, 0.0,
        std::sqrt(umax), 0.0, 1e-11);
    return 2.0 * q.value;
  };
  const auto outer = integrate<double>(
      [&](double v) {
        const double I = inner(v);
        return p == 2 ? I : I * I;
      },
      0.0, R, 0.0, 1e-9);
  if (!outer.converged) raise(ErrorKind::Numerical, "QuadratureFailure", "C_p(h) quadrature did not converge");
  return 2.0 * outer.value;
}

DensityKind parse_density_kind(const std::string& name) {
  if (name == "none" || name.empty()) return DensityKind::None;
  if (name == "gaussian") return DensityKind::Gaussian;
  if (name == "exponential") return DensityKind::Exponential;
  raise(ErrorKind::Config, "UnknownDensity", "unknown density kind '" + name + "'");
}

std::string to_string(DensityKind kind) {
  switch (kind) {
    case DensityKind::None: return "none";
    case DensityKind::Gaussian: return "gaussian";
    case DensityKind::Exponential: return "exponential";
  }
  return "none";
}

double PairPotential::density_value(double r) const {
  switch (density) {
    case DensityKind::None: return 0.0;
    case DensityKind::Gaussian: return density_amplitude * std::exp(-sqr(r / density_scale));
    case DensityKind::Exponential: return density_amplitude * std::exp(-r / density_scale);
  }
  return 0.0;
}

double PairPotential::density_mass() const {
  const double a = std::abs(density_amplitude);
  switch (density) {
    case DensityKind::None: return 0.0;
    case DensityKind::Gaussian: return a * std::pow(kPi * sqr(density_scale), 0.5 * dim);
    case DensityKind::Exponential:
      return a * sphere_area(dim) * std::tgamma(static_cast<double>(dim)) * std::pow(density_scale, dim);
  }
  return 0.0;
}

double eval_w_hat(const PairPotential& w, double xi) {
  double out = w.atom_weight;
  if (w.density == DensityKind::None || w.density_amplitude == 0.0) return out;
  const double R = w.density_scale * (w.density == DensityKind::Gaussian ? 8.0 : 40.0);
  xi = std::abs(xi);
  std::function<double(double)> g;
  double pref = 1.0;
  if (w.dim == 1) {
    g = [&](double r) { return std::cos(xi * r) * w.density_value(r); };
    pref = 2.0;
  } else if (w.dim == 2) {
    g = [&](double r) { return r * std::cyl_bessel_j(0.0, xi * r) * w.density_value(r); };
    pref = kTwoPi;
  } else if (xi < 1e-8) {
    g = [&](double r) { return r * r * w.density_value(r); };
    pref = 4.0 * kPi;
  } else {
    g = [&](double r) { return r * std::sin(xi * r) * w.density_value(r); };
    pref = 4.0 * kPi / xi;
  }
  const auto q = integrate<double>(g, 0.0, R, 1e-15 * w.density_mass(), 1e-12, 20000);
  if (!q.converged) raise(ErrorKind::Numerical, "QuadratureFailure", "density transform did not converge");
  return out + pref * q.value;
}

double w_hat_negative_sup(const PairPotential& w, double xi_max, int samples) {
  double worst = std::max(0.0, -w.atom_weight);
  if (w.density == DensityKind::None || w.density_amplitude == 0.0) return worst;
  for (int i = 0; i < samples; ++i) worst = std::max(worst, -eval_w_hat(w, xi_max * i / (samples - 1)));
  return worst;
}

const HypothesisEntry* HypothesisReport::find(const std::string& name) const {
  for (const auto& e : entries)
    if (e.name == name) return &e;
  return nullptr;
}

bool HypothesisReport::f_conditions_pass() const {
  for (const char* n : {"positivity", "c1", "strictly_decreasing", "bounded", "moment_weighted_f2",
                        "moment_f_df"}) {
    const auto* e = find(n);
    if (!e || !e->passed) return false;
  }
  return true;
}

HypothesisReport check_hypotheses(const MomentumDistribution& f, const PairKernel& h,
                                  const PairPotential& w, double eps_h) {
  HypothesisReport rep;
  const int d = f.dim();
  std::vector<double> r = log_linear_grid(1e-4, f.r_max(), 512, 3583);
  if (f.kind() == ProfileKind::Tabulated) {
    for (double t : f.params().r_nodes) r.push_back(t);
    std::sort(r.begin(), r.end());
    r.erase(std::unique(r.begin(), r.end()), r.end());
  }
  rep.nodes = static_cast<Index>(r.size());
  for (std::size_t i = 0; i + 1 < r.size(); ++i) rep.node_spacing_max = std::max(rep.node_spacing_max, r[i + 1] - r[i]);

  auto add = [&](std::string name, bool pass, double margin, std::string detail) {
    rep.entries.push_back({std::move(name), pass, margin, std::move(detail)});
  };

  double fmin = std::numeric_limits<double>::infinity();
  double dmax = -std::numeric_limits<double>::infinity();
  double slope_max = 0.0, jump_max = 0.0;
  for (double t : r) {
    fmin = std::min(fmin, f.f(t));
    if (t > 0.0 && t < f.r_max()) dmax = std::max(dmax, f.df(t));
    slope_max = std::max(slope_max, std::abs(f.df(t)));
    if (t > 0.0) {
      const double delta = 1e-7 * std::max(1.0, t);
      jump_max = std::max(jump_max, std::abs(f.df(t + delta) - f.df(t - delta)));
    }
  }
  add("positivity", fmin > 0.0, fmin, "min f over tabulation nodes");
  const double jump_ratio = slope_max > 0.0 ? jump_max / slope_max : 0.0;
  add("c1", std::isfinite(jump_ratio) && jump_ratio < 0.05, 0.05 - jump_ratio,
      "max derivative jump across nodes relative to max |f'|");
  add("strictly_decreasing", dmax < 0.0, -dmax, "max of df/dr over nodes with r > 0");
  const double f0 = f.f(0.0);
  add("bounded", std::isfinite(f0), std::isfinite(f0) ? f0 : 0.0, "f(0)");

  const double area = sphere_area(d);
  std::vector<double> m1(r.size()), m2(r.size());
  for (std::size_t i = 0; i < r.size(); ++i) {
    const double t = r[i];
    m1[i] = area * std::pow(t, d - 1) * std::sqrt(1.0 + t * t) * f.f2(t);
    m2[i] = area * std::pow(t, d - 2 < 0 ? 0 : d - 2) * std::abs(f.f(t) * f.df(t));
  }
  double v1 = 0.0, v2 = 0.0;
  const double t1 = tail_margin(r, m1, v1);
  const double t2 = tail_margin(r, m2, v2);
  add("moment_weighted_f2", t1 > 0.0, t1, "int <xi> f^2 = " + fmt_double(v1));
  add("moment_f_df", t2 > 0.0, t2, "int |xi|^-1 |f df| = " + fmt_double(v2));

  std::vector<double> hw(h.r().size()), hr(h.r().size());
  for (std::size_t i = 0; i < h.r().size(); ++i) {
    const double t = h.r()[i];
    hw[i] = (1.0 + t) * std::abs(h.h()[i]);
    const double lead = t > 0.0 ? std::abs(h.dh()[i]) / t : std::abs(h.d2h()[i]);
    hr[i] = lead + std::abs(h.d2h()[i]);
  }
  double vh = 0.0, vr = 0.0;
  double th = tail_margin(h.r(), hw, vh);
  double tr = tail_margin(h.r(), hr, vr);
  if (h.tail_truncated()) th = tr = -1.0;
  add("h_integrable", th > 0.0, th, "int (1+r)|h| = " + fmt_double(vh));
  add("h_regularity", tr > 0.0, tr,
      std::string(d == 3 ? "required" : "not required in dimension 2") + "; int |h'|/r + |h''| = " + fmt_double(vr));

  const double wneg = w_hat_negative_sup(w);
  const double prod1 = wneg * h.I1();
  add("interaction_negative_part", prod1 < 2.0, 2.0 - prod1, "sup (w_hat)_- * int r|h| = " + fmt_double(prod1));
  const double w0p = std::max(0.0, eval_w_hat(w, 0.0));
  const double prod2 = w0p * eps_h;
  add("interaction_eps_h", prod2 < 1.0, 1.0 - prod2, "w_hat(0)_+ * eps_h = " + fmt_double(prod2));

  rep.passed = true;
  for (const auto& e : rep.entries) {
    if (e.name == "h_regularity" && d != 3) continue;
    rep.passed = rep.passed && e.passed;
  }
  return rep;
}

}  // namespace hlab
