#pragma once

#include <functional>

#include "hlab/field.hpp"
#include "hlab/profiles.hpp"

namespace hlab {

// Supplies the (M+1) x npts history of realization r.
using HistorySource = std::function<void(Index r, RowArrayXXc& out)>;

HistorySource history_source(const FieldHistory& Z);

// All potentials below are the potentials acting in the Duhamel terms.

// Q1(Z, V) = 2 Re E(conj(W_V(Y)) Z + conj(Y) W_V(Z)).
SpaceTimePotential Q1_ensemble(const HistorySource& Z, const SpaceTimePotential& V, const Background& bg);
SpaceTimePotential Q1_ensemble(const FieldHistory& Z, const SpaceTimePotential& V, const Background& bg);

// Q2(U, V) = 2 Re E(conj(W_V(Y)) W_U(Y) + conj(Y) (W_V W_U(Y) + W_U W_V(Y))).
// stddev, when given, receives the per-node spread of the single-realization estimator.
SpaceTimePotential Q2_ensemble(const SpaceTimePotential& U, const SpaceTimePotential& V, const Background& bg,
                               RowArrayXXr* stddev = nullptr);

struct Q2Options {
  double flop_budget = 2e10;
  double active_tol = 1e-14;  // modes below this fraction of the peak coefficient are dropped
};

// Lattice sum over eta_2 with nested trapezoidal time integrals of the sine-product kernel.
SpaceTimePotential Q2_fourier(const SpaceTimePotential& U, const SpaceTimePotential& V, const PairKernel& h,
                              const Q2Options& opts = {});

// The same object through the two cosine-kernel expressions: J1(U, V), J2(V after U), J2(U after V).
struct Q2LemmaTerms {
  SpaceTimePotential J1;
  SpaceTimePotential J2_VU;
  SpaceTimePotential J2_UV;
  SpaceTimePotential sum() const;
};

Q2LemmaTerms Q2_lemma_terms(const SpaceTimePotential& U, const SpaceTimePotential& V, const PairKernel& h,
                            const Q2Options& opts = {});

// K(t, s) = h(2 t eta + 2 s eta2) sin(t (|eta|^2 - eta2.eta)) sin(t eta2.eta + s |eta2|^2) on R^2.
struct QKernelSample {
  Eigen::Vector3d eta = Eigen::Vector3d::Zero();
  Eigen::Vector3d eta2 = Eigen::Vector3d::Zero();
  double norm2_L2L1 = 0.0;  // int dt (int ds |K|)^2
  double norm2_L2L2 = 0.0;  // int dt int ds K^2
  double determinant = 0.0;
  int p = 2;
  double bound = 0.0;  // det^{-1/2} C_p(h)
  double ratio() const { return bound > 0.0 ? (p == 1 ? norm2_L2L1 : norm2_L2L2) / bound : 0.0; }
  double norm2() const { return p == 1 ? norm2_L2L1 : norm2_L2L2; }
  // Optional uniform samples of K over the support box.
  std::vector<double> t_table, s_table;
  RowArrayXXr table;
};

double kernel_K(const PairKernel& h, const Eigen::Vector3d& eta, const Eigen::Vector3d& eta2, double t, double s);
QKernelSample kernel_K_norms(const Eigen::Vector3d& eta, const Eigen::Vector3d& eta2, const PairKernel& h, int p,
                             int table_size = 0);

// C1(V, U, W) = 2 Re E(conj(W_V(Y)) W_U W_W(Y) + conj(Y) W_V W_U W_W(Y)).
SpaceTimePotential cubic_C1(const SpaceTimePotential& V, const SpaceTimePotential& U, const SpaceTimePotential& W,
                            const Background& bg);
// C2(V, U, Z) = 2 Re E(conj(W_V(Y)) W_U(Z) + conj(Y) W_V W_U(Z)).
SpaceTimePotential cubic_C2(const SpaceTimePotential& V, const SpaceTimePotential& U, const HistorySource& Z,
                            const Background& bg);

namespace detail {
// Streams realizations: body(r, Y, acc) accumulates into acc ((M+1) x npts).
using StreamBody = std::function<void(Index r, const RowArrayXXc& Y, Eigen::Map<RowArrayXXr>& acc)>;
SpaceTimePotential stream_mean(const Background& bg, const std::vector<double>& times, const StreamBody& body,
                               RowArrayXXr* stddev = nullptr);
void check_compatible(const SpaceTimePotential& a, const SpaceTimePotential& b, const char* what);
}  // namespace detail

}  // namespace hlab
