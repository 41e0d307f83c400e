#pragma once

#include <functional>
#include <vector>

#include "hlab/field.hpp"
#include "hlab/profiles.hpp"

namespace hlab {

// m_f(omega, xi) = -2 int_0^inf e^{-i omega t} sin(xi^2 t) h(2 xi t) dt.
cplx mf_value(const PairKernel& h, double omega, double xi);
// Same value and a node error estimate from the coarsened kernel spline.
cplx mf_value(const PairKernel& h, double omega, double xi, double& error);

struct ResponseSymbol {
  std::vector<double> omega;
  std::vector<double> xi;
  RowArrayXXc values;  // [omega][xi]
  RowArrayXXr errors;

  cplx operator()(Index i, Index j) const { return values(i, j); }
};

ResponseSymbol compute_mf(const PairKernel& h, const std::vector<double>& omega, const std::vector<double>& xi,
                          bool with_errors = true);

struct EpsilonReport {
  double value = 0.0;
  std::vector<double> level_max;  // max of Re m_f over the box of radius 2^-j
  double trend = 0.0;             // change between the two finest levels
  bool stabilized = true;
};

EpsilonReport epsilon_h(const PairKernel& h, int levels = 10, int angles = 128, double stab_tol = 1e-3);

struct MarginReport {
  double margin = 0.0;
  double omega_at = 0.0;
  double xi_at = 0.0;
  double c_min = 1e-3;
  bool passed = true;
};

// min |1 - w_hat(xi) m_f(omega, xi)| over the symbol nodes.
MarginReport symbol_margin(const ResponseSymbol& symbol, const std::vector<double>& w_hat, double c_min = 1e-3);

// Distinct |xi| values of the lattice and the map mode -> distinct index.
struct RadialModes {
  std::vector<double> xi;
  std::vector<Index> index;
};
RadialModes radial_modes(const Grid& grid);

ArrayXr w_hat_on_grid(const PairPotential& w, const Grid& grid);

// Space-time multiplier w_hat m_f on zero-padded time windows. On the time
// window the multiplier acts as a Toeplitz matrix of its lag kernel, so the
// inverse is exact on the window.
class SpectralL2 {
 public:
  SpectralL2(const Grid& grid, const std::vector<double>& times, const PairKernel& h, const PairPotential& w,
             Index min_padding_factor = 4);

  SpaceTimePotential apply(const SpaceTimePotential& V) const;
  SpaceTimePotential invert(const SpaceTimePotential& V, MarginReport& report, double c_min = 1e-3) const;
  MarginReport margin(double c_min = 1e-3) const;

  Index padded_length() const { return padded_; }
  const ResponseSymbol& symbol() const { return symbol_; }
  double imaginary_residue() const { return imag_residue_; }

 private:
  SpaceTimePotential transform(const SpaceTimePotential& V, bool inverse) const;
  Eigen::MatrixXd window_matrix(Index r) const;
  Grid grid_;
  std::vector<double> times_;
  Grid time_grid_;
  Index padded_ = 0;
  RadialModes radial_;
  ArrayXr w_hat_;
  ResponseSymbol symbol_;
  RowArrayXXr lags_;  // [radial][lag], includes w_hat
  mutable double imag_residue_ = 0.0;
};

SpaceTimePotential apply_L2(const SpaceTimePotential& V, const PairPotential& w, const PairKernel& h);
SpaceTimePotential invert_id_minus_L2(const SpaceTimePotential& V, const PairPotential& w, const PairKernel& h,
                                      MarginReport& report, double c_min = 1e-3);

// Causal convolution with the lattice kernel -2 sin(|xi|^2 s) h_per(2 s xi),
// trapezoidal in time; this is the exact mean of the ensemble response.
class CausalL2 {
 public:
  CausalL2(const Grid& grid, const std::vector<double>& times, const PairKernel& h, const ArrayXr& w_hat);

  SpaceTimePotential apply(const SpaceTimePotential& V) const;
  SpaceTimePotential invert(const SpaceTimePotential& V) const;
  const RowArrayXXr& kernel() const { return kernel_; }  // [lag][mode], includes w_hat

 private:
  Grid grid_;
  std::vector<double> times_;
  double dt_ = 0.0;
  RowArrayXXr kernel_;
};

// Continuous causal convolution for a separable potential V(t, x) = b(t) a(x),
// evaluated by adaptive quadrature in time.
SpaceTimePotential causal_L2_separable(const Grid& grid, const std::vector<double>& times,
                                       const std::function<double(double)>& b, const ArrayXr& a,
                                       const PairKernel& h, const PairPotential& w, double tol = 1e-12);

// Ensemble estimate 2 Re E(conj(Y) W_V(Y)) streamed over realizations.
// Optionally returns the per-node standard deviation of the single-realization estimator.
SpaceTimePotential ensemble_linear_response(const SpaceTimePotential& V, const Background& bg,
                                            RowArrayXXr* stddev = nullptr);

struct LinearCancellationReport {
  double re_cross_max = 0.0;   // sup |2 Re E(conj(Y) W_V(Y))|
  double w_norm = 0.0;         // (E|W_V(Y)|^2)^{1/2} at the final time, averaged over x
  double integral_V = 0.0;     // trapezoidal int_0^T V
  double y_norm = 0.0;         // (E|Y|^2)^{1/2}
  double scale = 0.0;          // E|Y|^2 * int_0^T |V|
};

LinearCancellationReport linear_cancellation_diag(const std::vector<double>& times, const std::vector<double>& V,
                                                  const Background& bg);

}  // namespace hlab
