#pragma once

#include <string>
#include <vector>

#include "hlab/field.hpp"
#include "hlab/linear_response.hpp"
#include "hlab/profiles.hpp"
#include "hlab/quadratic.hpp"

namespace hlab {

// m = w_hat(0) sum_k f^2(xi_k) dxi.
double equilibrium_mass(const PairPotential& w, const MomentumDistribution& f, const Grid& grid);

// Radius beyond which f^2 < rel f^2(0) (probed on [0, r_max]).
double effective_momentum(const MomentumDistribution& f, double rel = 1e-8);

struct BoxGuardReport {
  double required = 0.0;  // 4 * support + 2 xi_max T
  double travel = 0.0;    // 2 xi_max T
  int wraps = 0;          // completed box crossings of the fastest wave
  bool ok = true;
};

BoxGuardReport box_guard(double L, double support, double xi_max, double T);

enum class StepMode { Frozen, Midpoint };

StepMode parse_step_mode(const std::string& name);
std::string to_string(StepMode mode);

struct EvolutionConfig {
  double dt = 0.01;
  Index steps = 100;
  StepMode mode = StepMode::Midpoint;
  double support = 0.0;        // perturbation support diameter; 0 disables the box guard
  bool enforce_box_guard = true;
  std::vector<Index> snapshots;  // node indices whose X ensembles are kept
};

struct Trajectory {
  std::vector<double> times;
  SpaceTimePotential V;          // E|X|^2 - E|Y|^2 at every node
  double mass_drift_max = 0.0;   // max over steps and realizations of relative L^2 change
  double deviation_max = 0.0;    // max over nodes of |X - Y|
  std::vector<Index> snapshot_index;
  std::vector<EnsembleField> snapshots;
  EnsembleField X;  // final ensemble
  EnsembleField Y;  // final paired equilibrium
  BoxGuardReport box;
};

// Strang splitting: half kinetic (no mass), potential phase exp(-i dt Phi), half kinetic, with
// Phi = w * (E|X|^2 - E|Y|^2) + m from the coupled ensembles.
Trajectory evolve_hartree(const EnsembleField& X0, const Background& bg, const PairPotential& w,
                          const EvolutionConfig& cfg);

enum class FixedPointSystem { Linear, Second, Cubic };

struct FixedPointConfig {
  double T = 1.0;
  Index steps = 32;
  double tol = 1e-8;
  int max_iter = 30;
  FixedPointSystem system = FixedPointSystem::Second;
  bool cubic = false;  // used by picard_dim2_cubic
};

struct FixedPointState {
  int iterations = 0;
  std::vector<double> times;
  SpaceTimePotential V;                 // density response V (not convolved)
  std::vector<RowArrayXXc> Z;           // per realization, (M+1) x npts
  std::vector<double> residual_Z;       // relative, per iteration
  std::vector<double> residual_V;
  std::vector<double> contraction;      // ratio of consecutive residuals
  double contraction_factor = 0.0;      // geometric mean over the recorded ratios
  bool converged = false;
  EnsembleField Z0;
};

// Iterates (Z, V) -> (S Z0 + W^2(Y) + W(Z), (Id - L2)^-1 [C0 + E|Z|^2 + Q1(Z, V') + Q2(V')]) with V' = w * V.
FixedPointState picard_fixed_point(const EnsembleField& Z0, const Background& bg, const PairKernel& h,
                                   const PairPotential& w, const FixedPointConfig& cfg);
// Third-order system with the extra source and cubic terms; cfg.cubic = false runs the second-order system.
FixedPointState picard_dim2_cubic(const EnsembleField& Z0, const Background& bg, const PairKernel& h,
                                  const PairPotential& w, const FixedPointConfig& cfg);

// w * V row by row on the grid.
SpaceTimePotential convolve_potential(const SpaceTimePotential& V, const ArrayXr& w_hat);

struct ScatteringReport {
  std::vector<double> times;
  std::vector<double> z_cauchy;        // ||S(-t_i) Z(t_i) - S(-t_{i+1}) Z(t_{i+1})||, L^2_w H^1/2
  std::vector<double> w_cauchy;        // same for W_V(Y) in L^3_x L^2_w
  std::vector<double> z_profile_norm;  // ||S(-t_i) Z(t_i)||
  EnsembleField Z_plus;                // last back-propagated Z
  EnsembleField Ztilde_plus;           // last back-propagated W_V(Y)
  bool z_decreasing = false;
  bool w_decreasing = false;
};

ScatteringReport extract_scattering(const FixedPointState& state, const Background& bg, const PairPotential& w,
                                    const std::vector<Index>& sample_nodes);
// From ensemble snapshots: back-propagates X - Y at the recorded nodes.
ScatteringReport extract_scattering(const Trajectory& traj, const Background& bg);

// Discrete norms used for residuals and scattering trends.
double norm_L2w_Hs(const EnsembleField& u, double s);       // (E int |<D>^s u|^2 dx)^1/2
double norm_Lq_L2w(const EnsembleField& u, double q);       // (int (E|u|^2)^{q/2} dx)^{1/q}
double theta_V(const SpaceTimePotential& V);                // max(L^2_{t,x}, L^{5/2}_{t,x})

}  // namespace hlab
