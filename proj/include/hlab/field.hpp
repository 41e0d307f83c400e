#pragma once

#include <optional>
#include <vector>

#include "hlab/core.hpp"
#include "hlab/grid.hpp"
#include "hlab/profiles.hpp"
#include "hlab/random.hpp"

namespace hlab {

struct WienerProvenance {
  std::uint64_t seed = 0;
  Index realizations = 0;
};

// N realizations of a complex field on the grid at time t; row r is realization r.
struct EnsembleField {
  Grid grid;
  RowArrayXXc values;
  double t = 0.0;
  std::optional<WienerProvenance> provenance;

  Index realizations() const { return values.rows(); }
  void check_finite(const char* where) const;
};

// Real potential sampled at time nodes; row j is time t_j.
struct SpaceTimePotential {
  Grid grid;
  std::vector<double> times;
  RowArrayXXr values;

  Index steps() const { return static_cast<Index>(times.size()) - 1; }
  double dt() const;
  static SpaceTimePotential zeros(const Grid& grid, std::vector<double> times);
};

std::vector<double> uniform_times(double T, Index steps);
double uniform_step(const std::vector<double>& times);

// Ensemble history stored realization-major: one (M+1) x npts block per realization.
struct FieldHistory {
  Grid grid;
  std::vector<double> times;
  std::vector<RowArrayXXc> realizations;

  Index size() const { return static_cast<Index>(realizations.size()); }
  EnsembleField at(Index j) const;
  static FieldHistory zeros(const Grid& grid, const std::vector<double>& times, Index n);
};

// Lattice equilibrium: Y_r(t,x) = sum_k f(xi_k) sqrt(dxi) g[r][k] e^{i(xi_k.x - t(m+|xi_k|^2))}.
class Background {
 public:
  Background(const Grid& grid, const MomentumDistribution& f, const WienerSample& wiener, double m);

  const Grid& grid() const { return grid_; }
  double mass() const { return mass_; }
  const WienerSample& wiener() const { return wiener_; }
  Index realizations() const { return gaussians_.rows(); }
  const ArrayXr& weights() const { return weights_; }  // f(xi_k) sqrt(dxi)
  const RowArrayXXc& gaussians() const { return gaussians_; }
  double variance() const { return weights_.square().sum(); }

  void coefficients(Index r, double t, cplx* out) const;
  void realization(Index r, double t, cplx* out) const;
  void history(Index r, const std::vector<double>& times, RowArrayXXc& out) const;

 private:
  Grid grid_;
  double mass_;
  WienerSample wiener_;
  ArrayXr weights_;
  RowArrayXXc gaussians_;
};

// f(xi_edge)^2 dxi n^dim relative to sum f^2 dxi; raises NyquistUnderresolved above tol.
double nyquist_measure(const MomentumDistribution& f, const Grid& grid);
void check_nyquist(const MomentumDistribution& f, const Grid& grid, double tol = 1e-8);

double lattice_variance(const MomentumDistribution& f, const Grid& grid);

EnsembleField sample_equilibrium(const MomentumDistribution& f, const Grid& grid, const WienerSample& wiener,
                                 double t, double m);
EnsembleField sample_equilibrium(const Background& bg, double t);
FieldHistory equilibrium_history(const Background& bg, const std::vector<double>& times);

EnsembleField free_propagate(const EnsembleField& field, double dt, double m);
EnsembleField transported_propagate(const EnsembleField& field, double dt, const Eigen::Vector3d& xi);

// Trapezoidal Duhamel recursion for one realization history.
class DuhamelStepper {
 public:
  DuhamelStepper(const Grid& grid, double dt, double m);
  void apply(const RowArrayXXr& V, const RowArrayXXc& target, RowArrayXXc& out);

 private:
  Grid grid_;
  double dt_;
  ArrayXc propagator_;
  ArrayXc work_;
};

FieldHistory duhamel_WV(const SpaceTimePotential& V, const FieldHistory& target, double m);
FieldHistory duhamel_WV(const SpaceTimePotential& V, const FieldHistory& target, double m, double t_end);

// Distribution function g(x, xi) as a sum of separable terms a(x) b(xi_k).
struct StructuredProfile {
  struct Term {
    ArrayXc a;  // per grid point
    ArrayXc b;  // per lattice mode
  };
  std::vector<Term> terms;

  static StructuredProfile modulated(const ArrayXc& a, const ArrayXr& b);
};

EnsembleField sample_structured_perturbation(const StructuredProfile& g, const Background& bg, double tol = 1e-8);
void structured_realization(const StructuredProfile& g, const Background& bg, Index r, cplx* out);

// Ensemble statistics with deterministic reduction order.
ArrayXr mean_abs2(const EnsembleField& u);
ArrayXr mean_abs4(const EnsembleField& u);
ArrayXc mean_cross(const EnsembleField& a, const EnsembleField& b);  // E(conj(a) b)
// E(conj(u(x0)) u(x0 + offset)) for the given point offsets.
std::vector<cplx> covariance_offsets(const EnsembleField& u, Index x0, const std::vector<std::array<int, 3>>& offsets);
Index shifted_index(const Grid& grid, Index i, const std::array<int, 3>& offset);

}  // namespace hlab
