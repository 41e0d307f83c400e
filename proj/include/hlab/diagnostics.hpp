#pragma once

#include <functional>
#include <limits>
#include <vector>

#include <Eigen/Dense>

#include "hlab/field.hpp"
#include "hlab/profiles.hpp"
#include "hlab/solver.hpp"

namespace hlab {

constexpr double kInf = std::numeric_limits<double>::infinity();

enum class OmegaOrder { Inside, Outside };
enum class NormDomain { Field, Potential };

// L^p_t W^{s,q}_x L^2_w with the L^2_w reduction inside (before x) or outside (after t).
struct NormSpec {
  double p = 2.0;
  double q = 2.0;
  double s = 0.0;
  OmegaOrder omega = OmegaOrder::Inside;
  NormDomain domain = NormDomain::Field;

  void validate() const;
};

OmegaOrder parse_omega_order(const std::string& name);
NormDomain parse_norm_domain(const std::string& name);

// Time integrals use trapezoidal weights; a single node is a pure space norm.
double spacetime_norm(const FieldHistory& u, const NormSpec& spec);
double spacetime_norm(const EnsembleField& u, const NormSpec& spec);
double spacetime_norm(const SpaceTimePotential& V, const NormSpec& spec);

// 2/p + d/q = d/2 - s with p in [2, inf], q in [2, inf).
bool strichartz_admissible(int dim, double p, double q, double s);

struct StrichartzSpec {
  double p = 10.0 / 3.0;
  double q = 10.0 / 3.0;
  double s = 0.0;
  double T = 1.0;
  Index steps = 32;
};

struct StrichartzReport {
  std::vector<int> n;
  std::vector<double> numerator;    // ||S(t) Z0||_{L^p_t L^q_x L^2_w}
  std::vector<double> denominator;  // ||Z0||_{L^2_w H^s}
  std::vector<double> ratio;
  double spread = 0.0;  // (max - min) / max over the ladder
  bool degenerate = false;
};

using FieldFactory = std::function<EnsembleField(const Grid&)>;

StrichartzReport strichartz_ratio(const FieldFactory& z0, const std::vector<Grid>& ladder, const StrichartzSpec& spec);

// gamma[k][k'] = E(y_k conj(y_k')) with y_k = <e_k, u>, e_k = L^{-d/2} e^{i xi_k.x}.
// For the equilibrium, E|y_k|^2 = f^2(xi_k) (2 pi)^d.
struct DensityOperator {
  Grid grid;
  double xi_cut = 0.0;
  std::vector<Index> modes;  // grid mode indices within the cutoff
  Eigen::MatrixXcd gamma;
  double normalization = 0.0;  // (2 pi)^d

  Index size() const { return static_cast<Index>(modes.size()); }
  Eigen::VectorXd bessel_weights(double s) const;  // <xi_k>^s
  double hermitian_error() const;
  double min_eigenvalue() const;
};

// Modes with |xi_k| <= xi_cut; raises CutoffTooLarge if the ball leaves the lattice.
std::vector<Index> truncated_basis(const Grid& grid, double xi_cut);
double default_xi_cut(const Grid& grid);

// Basis coefficients of every realization, basis x N.
Eigen::MatrixXcd basis_coefficients(const EnsembleField& u, const std::vector<Index>& modes);

DensityOperator build_density_operator(const EnsembleField& u, double xi_cut);

double schatten_norm(const Eigen::MatrixXcd& A, double p);
double schatten_norm(const DensityOperator& op, double p, double s);
double schatten_norm(const Eigen::MatrixXcd& gamma, const Eigen::VectorXd& weights, double p);

// -i int_0^T S(-t) V(t) S(t) dt on the basis, exact in time for linear-in-time V.
Eigen::MatrixXcd wave_operator_matrix(const SpaceTimePotential& V, const std::vector<Index>& modes);

struct CorollaryOptions {
  double xi_cut = 0.0;  // 0 selects the default
  double p = 4.1;
  double s = 0.5;
  // Theoretical diag(f^2 (2 pi)^d) when set; otherwise the sample E|Y0><Y0|.
  const MomentumDistribution* f = nullptr;
};

struct CorollaryReport {
  std::vector<double> times;
  std::vector<double> residual;  // ||S(-t) gamma(t) S(t) - gamma_f - gamma_+||_{S^{s,p}}
  double gamma_plus_norm = 0.0;
  double gamma_f_norm = 0.0;
  Index basis_size = 0;
  double xi_cut = 0.0;
  double normalization = 0.0;
  bool decreasing_tail = false;  // strictly decreasing over the last three samples
};

// X_t: ensembles at the sampled times; V: the potential acting in the flow.
CorollaryReport corollary_check(const std::vector<EnsembleField>& X_t, const EnsembleField& Y0,
                                const SpaceTimePotential& V, const EnsembleField& Z_plus,
                                const CorollaryOptions& opts);

// X(t) = Y + W_{w*V}(Y) + Z at the given nodes of a fixed-point run.
std::vector<EnsembleField> reconstruct_fields(const FixedPointState& state, const Background& bg,
                                              const PairPotential& w, const std::vector<Index>& nodes);

}  // namespace hlab
