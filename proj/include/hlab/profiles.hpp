#pragma once

#include <string>
#include <vector>

#include "hlab/core.hpp"
#include "hlab/quadrature.hpp"

namespace hlab {

enum class ProfileKind { Fermi, Bose, Bessel, Gaussian, Tabulated };

ProfileKind parse_profile_kind(const std::string& name);
std::string to_string(ProfileKind kind);

struct ProfileParams {
  double T = 1.0;
  double mu = 0.0;
  double alpha = 6.0;
  double amplitude = 1.0;
  // Tabulated kind: f^2 on increasing radii, linear in between, zero beyond.
  std::vector<double> r_nodes;
  std::vector<double> f2_nodes;
};

// Radial momentum distribution f(|xi|).
//   fermi:     f^2 = A / (exp((r^2 - mu)/T) + 1)
//   bose:      f^2 = A / (exp((r^2 - mu)/T) - 1),  mu <= -1e-6
//   bessel:    f^2 = A (1 + r^2)^(-alpha/2)
//   gaussian:  f^2 = A exp(-r^2 / T)
class MomentumDistribution {
 public:
  MomentumDistribution(ProfileKind kind, ProfileParams params, int dim);

  static MomentumDistribution fermi(int dim, double T, double mu);
  static MomentumDistribution bose(int dim, double T, double mu);
  static MomentumDistribution bessel(int dim, double alpha);
  static MomentumDistribution gaussian(int dim, double width2 = 1.0);
  static MomentumDistribution tabulated(int dim, std::vector<double> r, std::vector<double> f2);

  ProfileKind kind() const { return kind_; }
  const ProfileParams& params() const { return params_; }
  int dim() const { return dim_; }

  double f2(double r) const;
  double df2(double r) const;
  double f(double r) const;
  double df(double r) const;
  double r_max() const { return r_max_; }

  MomentumDistribution scaled(double lambda) const;

 private:
  double shape(double r) const;
  double shape_derivative(double r) const;
  ProfileKind kind_;
  ProfileParams params_;
  int dim_;
  double r_max_ = 0.0;
};

// Surface area of the unit sphere in R^dim.
double sphere_area(int dim);

struct KernelOptions {
  double r_min = 1e-4;
  int n_log = 512;
  int n_lin = 3072;
  int n_tail = 512;
  double tolerance = 1e-6;   // relative to h(0)
  double decay = 1e-10;      // h tabulated until |h| < decay * h(0)
  double r_cap = 2048.0;
  bool compute_cp = true;
};

// h = Fourier transform of f^2, tabulated with derivatives and functionals.
class PairKernel {
 public:
  PairKernel() = default;
  static PairKernel from_values(int dim, std::vector<double> r, std::vector<double> h,
                                bool compute_cp = true);

  int dim() const { return dim_; }
  const std::vector<double>& r() const { return r_; }
  const std::vector<double>& h() const { return h_; }
  const std::vector<double>& dh() const { return dh_; }
  const std::vector<double>& d2h() const { return d2h_; }

  double operator()(double r) const { return r > r_cut_ ? 0.0 : spline_(r); }
  // Sum over periodic images in a box of side L.
  double periodized(const Eigen::Vector3d& y, double L) const;
  const PiecewiseCubic& spline() const { return spline_; }
  // Uniform resample on [0, r_eff] used for oscillatory transforms.
  const PiecewiseCubic& fourier_spline() const { return fourier_; }
  double r_cut() const { return r_cut_; }
  double r_eff() const { return fourier_.nodes().empty() ? 0.0 : fourier_.back(); }

  double h0() const { return h_.empty() ? 0.0 : h_.front(); }
  double I0() const { return I0_; }
  double I1() const { return I1_; }
  double Ireg() const { return Ireg_; }
  double C1() const { return C1_; }
  double C2() const { return C2_; }
  double sup() const { return sup_; }
  double quadrature_error() const { return quad_error_; }
  bool tail_truncated() const { return tail_truncated_; }
  bool is_zero() const { return sup_ == 0.0; }

 private:
  friend PairKernel build_kernel_h(const MomentumDistribution&, const KernelOptions&);
  void finalize(bool compute_cp);
  int dim_ = 0;
  std::vector<double> r_, h_, dh_, d2h_;
  PiecewiseCubic spline_;
  PiecewiseCubic fourier_;
  double r_cut_ = 0.0;
  double I0_ = 0.0, I1_ = 0.0, Ireg_ = 0.0, C1_ = 0.0, C2_ = 0.0, sup_ = 0.0;
  double quad_error_ = 0.0;
  bool tail_truncated_ = false;
};

PairKernel build_kernel_h(const MomentumDistribution& f, const KernelOptions& options = {});

// C_p(h) = int dv ( int du |u|^{1/p-1/2} |h|^p(sqrt(u^2+v^2)) )^{2/p}, p in {1, 2}.
double kernel_integrals(const PairKernel& h, int p);

enum class DensityKind { None, Gaussian, Exponential };

// w = atom_weight * delta + density(|x|).
//   gaussian:    density = a exp(-|x|^2 / s^2)
//   exponential: density = a exp(-|x| / s)
struct PairPotential {
  double atom_weight = 0.0;
  DensityKind density = DensityKind::None;
  double density_amplitude = 0.0;
  double density_scale = 1.0;
  int dim = 3;

  static PairPotential delta(int dim, double c) { return {c, DensityKind::None, 0.0, 1.0, dim}; }
  double density_value(double r) const;
  double density_mass() const;
};

DensityKind parse_density_kind(const std::string& name);
std::string to_string(DensityKind kind);

double eval_w_hat(const PairPotential& w, double xi);
// sup over xi of max(-w_hat, 0), sampled on [0, xi_max].
double w_hat_negative_sup(const PairPotential& w, double xi_max = 50.0, int samples = 4001);

struct HypothesisEntry {
  std::string name;
  bool passed = false;
  double margin = 0.0;
  std::string detail;
};

struct HypothesisReport {
  std::vector<HypothesisEntry> entries;
  bool passed = false;
  Index nodes = 0;
  double node_spacing_max = 0.0;
  const HypothesisEntry* find(const std::string& name) const;
  bool f_conditions_pass() const;
};

HypothesisReport check_hypotheses(const MomentumDistribution& f, const PairKernel& h,
                                  const PairPotential& w, double eps_h);

}  // namespace hlab
