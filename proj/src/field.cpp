#include "hlab/field.hpp"

#include <cmath>

#include "hlab/parallel.hpp"

namespace hlab {

void EnsembleField::check_finite(const char* where) const {
  if (!values.allFinite()) raise(ErrorKind::Numerical, "NaNDetected", std::string("non-finite values in ") + where);
}

double SpaceTimePotential::dt() const { return uniform_step(times); }

SpaceTimePotential SpaceTimePotential::zeros(const Grid& grid, std::vector<double> times) {
  SpaceTimePotential V;
  V.grid = grid;
  V.values = RowArrayXXr::Zero(static_cast<Index>(times.size()), grid.size());
  V.times = std::move(times);
  return V;
}

std::vector<double> uniform_times(double T, Index steps) {
  std::vector<double> t(steps + 1);
  for (Index j = 0; j <= steps; ++j) t[j] = T * static_cast<double>(j) / static_cast<double>(steps);
  return t;
}

double uniform_step(const std::vector<double>& times) {
  if (times.size() < 2) return 0.0;
  const double dt = times[1] - times[0];
  for (std::size_t j = 1; j < times.size(); ++j)
    if (std::abs((times[j] - times[j - 1]) - dt) > 1e-9 * std::abs(dt))
      raise(ErrorKind::Validation, "GridMismatch", "time nodes are not uniform");
  return dt;
}

EnsembleField FieldHistory::at(Index j) const {
  EnsembleField out;
  out.grid = grid;
  out.t = times[j];
  out.values.resize(size(), grid.size());
  for (Index r = 0; r < size(); ++r) out.values.row(r) = realizations[r].row(j);
  return out;
}

FieldHistory FieldHistory::zeros(const Grid& grid, const std::vector<double>& times, Index n) {
  FieldHistory h;
  h.grid = grid;
  h.times = times;
  h.realizations.assign(n, RowArrayXXc::Zero(static_cast<Index>(times.size()), grid.size()));
  return h;
}

Background::Background(const Grid& grid, const MomentumDistribution& f, const WienerSample& wiener, double m)
    : grid_(grid), mass_(m), wiener_(wiener) {
  const Index npts = grid.size();
  const double root = std::sqrt(grid.dxi_volume());
  weights_.resize(npts);
  for (Index i = 0; i < npts; ++i) weights_[i] = f.f(std::sqrt(grid.k2()[i])) * root;
  gaussians_.resize(wiener.size(), npts);
  std::vector<std::uint64_t> ids(npts);
  for (Index i = 0; i < npts; ++i) ids[i] = grid.mode_id(i);
  parallel_for(wiener.size(), [&](Index r) {
    for (Index i = 0; i < npts; ++i) gaussians_(r, i) = wiener.coefficient(r, ids[i]);
  });
}

void Background::coefficients(Index r, double t, cplx* out) const {
  const Index npts = grid_.size();
  if (t == 0.0) {
    for (Index i = 0; i < npts; ++i) out[i] = weights_[i] * gaussians_(r, i);
    return;
  }
  const ArrayXr& k2 = grid_.k2();
  for (Index i = 0; i < npts; ++i) out[i] = weights_[i] * gaussians_(r, i) * std::polar(1.0, -t * (mass_ + k2[i]));
}

void Background::realization(Index r, double t, cplx* out) const {
  coefficients(r, t, out);
  grid_.inverse(out);
}

void Background::history(Index r, const std::vector<double>& times, RowArrayXXc& out) const {
  out.resize(static_cast<Index>(times.size()), grid_.size());
  for (std::size_t j = 0; j < times.size(); ++j) realization(r, times[j], out.row(j).data());
}

double lattice_variance(const MomentumDistribution& f, const Grid& grid) {
  double s = 0.0;
  for (Index i = 0; i < grid.size(); ++i) s += f.f2(std::sqrt(grid.k2()[i]));
  return s * grid.dxi_volume();
}

double nyquist_measure(const MomentumDistribution& f, const Grid& grid) {
  const double total = lattice_variance(f, grid);
  const double edge = f.f2(grid.xi_edge()) * std::pow(2.0 * grid.xi_edge(), grid.dim());
  return total > 0.0 ? edge / total : 0.0;
}

void check_nyquist(const MomentumDistribution& f, const Grid& grid, double tol) {
  const double m = nyquist_measure(f, grid);
  if (m > tol)
    raise(ErrorKind::Validation, "NyquistUnderresolved",
          "f is not negligible at the lattice edge (relative weight " + std::to_string(m) + ")");
}

EnsembleField sample_equilibrium(const MomentumDistribution& f, const Grid& grid, const WienerSample& wiener,
                                 double t, double m) {
  check_nyquist(f, grid);
  return sample_equilibrium(Background(grid, f, wiener, m), t);
}

EnsembleField sample_equilibrium(const Background& bg, double t) {
  EnsembleField out;
  out.grid = bg.grid();
  out.t = t;
  out.provenance = WienerProvenance{bg.wiener().seed(), bg.wiener().size()};
  out.values.resize(bg.realizations(), bg.grid().size());
  parallel_for(bg.realizations(), [&](Index r) { bg.realization(r, t, out.values.row(r).data()); });
  out.check_finite("sample_equilibrium");
  return out;
}

FieldHistory equilibrium_history(const Background& bg, const std::vector<double>& times) {
  FieldHistory h;
  h.grid = bg.grid();
  h.times = times;
  h.realizations.resize(bg.realizations());
  parallel_for(bg.realizations(), [&](Index r) { bg.history(r, times, h.realizations[r]); });
  return h;
}

namespace {

EnsembleField apply_to_rows(const EnsembleField& field, const ArrayXc& mult, double dt) {
  EnsembleField out = field;
  out.t = field.t + dt;
  parallel_for(out.realizations(), [&](Index r) { apply_multiplier(out.grid, out.values.row(r).data(), mult); });
  out.check_finite("propagation");
  return out;
}

}  // namespace

EnsembleField free_propagate(const EnsembleField& field, double dt, double m) {
  if (dt == 0.0) return field;
  const ArrayXr& k2 = field.grid.k2();
  ArrayXc mult(k2.size());
  for (Index i = 0; i < k2.size(); ++i) mult[i] = std::polar(1.0, -dt * (m + k2[i]));
  return apply_to_rows(field, mult, dt);
}

EnsembleField transported_propagate(const EnsembleField& field, double dt, const Eigen::Vector3d& xi) {
  const Grid& g = field.grid;
  for (int a = 0; a < 3; ++a) {
    if (a >= g.dim()) {
      if (xi[a] != 0.0) raise(ErrorKind::Validation, "OffLatticeFrequency", "frequency has extra components");
      continue;
    }
    const double q = xi[a] / g.dxi();
    if (std::abs(q - std::round(q)) > 1e-9 * std::max(1.0, std::abs(q)))
      raise(ErrorKind::Validation, "OffLatticeFrequency", "transport frequency is not on the lattice");
  }
  if (dt == 0.0) return field;
  ArrayXc mult(g.size());
  for (Index i = 0; i < g.size(); ++i) {
    const Eigen::Vector3d eta = g.xi(i);
    mult[i] = std::polar(1.0, -dt * (g.k2()[i] + 2.0 * eta.dot(xi)));
  }
  return apply_to_rows(field, mult, dt);
}

DuhamelStepper::DuhamelStepper(const Grid& grid, double dt, double m) : grid_(grid), dt_(dt) {
  const ArrayXr& k2 = grid.k2();
  const double scale = 1.0 / static_cast<double>(grid.size());
  propagator_.resize(k2.size());
  for (Index i = 0; i < k2.size(); ++i) propagator_[i] = std::polar(scale, -dt * (m + k2[i]));
  work_.resize(grid.size());
}

void DuhamelStepper::apply(const RowArrayXXr& V, const RowArrayXXc& target, RowArrayXXc& out) {
  const Index rows = V.rows();
  if (target.rows() != rows || V.cols() != grid_.size() || target.cols() != grid_.size())
    raise(ErrorKind::Validation, "GridMismatch", "potential and target histories differ in shape");
  out.resize(rows, grid_.size());
  out.row(0).setZero();
  const cplx c(0.0, -0.5 * dt_);
  for (Index j = 0; j + 1 < rows; ++j) {
    work_ = (out.row(j) + c * (V.row(j).cast<cplx>() * target.row(j))).transpose();
    grid_.forward(work_.data());
    work_ *= propagator_;
    grid_.inverse(work_.data());
    out.row(j + 1) = work_.transpose() + c * (V.row(j + 1).cast<cplx>() * target.row(j + 1));
  }
}

FieldHistory duhamel_WV(const SpaceTimePotential& V, const FieldHistory& target, double m) {
  require_same_grid(V.grid, target.grid, "duhamel_WV: potential and target grids differ");
  if (V.times.size() != target.times.size())
    raise(ErrorKind::Validation, "GridMismatch", "duhamel_WV: time nodes differ");
  for (std::size_t j = 0; j < V.times.size(); ++j)
    if (std::abs(V.times[j] - target.times[j]) > 1e-12 * (1.0 + std::abs(V.times[j])))
      raise(ErrorKind::Validation, "GridMismatch", "duhamel_WV: time nodes differ");
  const double dt = uniform_step(V.times);
  FieldHistory out;
  out.grid = target.grid;
  out.times = target.times;
  out.realizations.resize(target.size());
  const Index nblocks = (target.size() + kBlockSize - 1) / kBlockSize;
  parallel_for(nblocks, [&](Index b) {
    DuhamelStepper stepper(V.grid, dt, m);
    const Index r1 = std::min(target.size(), (b + 1) * kBlockSize);
    for (Index r = b * kBlockSize; r < r1; ++r) stepper.apply(V.values, target.realizations[r], out.realizations[r]);
  });
  return out;
}

FieldHistory duhamel_WV(const SpaceTimePotential& V, const FieldHistory& target, double m, double t_end) {
  Index keep = 0;
  while (keep < static_cast<Index>(V.times.size()) && V.times[keep] <= t_end + 1e-12) ++keep;
  SpaceTimePotential Vc = V;
  Vc.times.resize(keep);
  Vc.values.conservativeResize(keep, Eigen::NoChange);
  FieldHistory tc = target;
  tc.times.resize(keep);
  for (auto& r : tc.realizations) r.conservativeResize(keep, Eigen::NoChange);
  return duhamel_WV(Vc, tc, m);
}

StructuredProfile StructuredProfile::modulated(const ArrayXc& a, const ArrayXr& b) {
  StructuredProfile g;
  g.terms.push_back({a, b.cast<cplx>()});
  return g;
}

void structured_realization(const StructuredProfile& g, const Background& bg, Index r, cplx* out) {
  const Grid& grid = bg.grid();
  const Index npts = grid.size();
  const double root = std::sqrt(grid.dxi_volume());
  Eigen::Map<ArrayXc> acc(out, npts);
  acc.setZero();
  ArrayXc tmp(npts);
  for (const auto& term : g.terms) {
    for (Index i = 0; i < npts; ++i) tmp[i] = root * term.b[i] * bg.gaussians()(r, i);
    grid.inverse(tmp.data());
    acc += term.a * tmp;
  }
}

EnsembleField sample_structured_perturbation(const StructuredProfile& g, const Background& bg, double tol) {
  const Grid& grid = bg.grid();
  for (const auto& term : g.terms) {
    if (term.a.size() != grid.size() || term.b.size() != grid.size())
      raise(ErrorKind::Validation, "GridMismatch", "structured profile does not match the grid");
    double total = 0.0, edge = 0.0;
    for (Index i = 0; i < grid.size(); ++i) {
      const double w = std::norm(term.b[i]);
      total += w;
      const auto& k = grid.wavenumber(i);
      for (int a = 0; a < grid.dim(); ++a)
        if (k[a] == -grid.n() / 2) edge = std::max(edge, w);
    }
    if (total > 0.0 && edge * static_cast<double>(grid.size()) / total > tol)
      raise(ErrorKind::Validation, "NyquistUnderresolved", "structured profile is not negligible at the lattice edge");
  }
  EnsembleField out;
  out.grid = grid;
  out.t = 0.0;
  out.provenance = WienerProvenance{bg.wiener().seed(), bg.wiener().size()};
  out.values.resize(bg.realizations(), grid.size());
  parallel_for(bg.realizations(), [&](Index r) { structured_realization(g, bg, r, out.values.row(r).data()); });
  out.check_finite("sample_structured_perturbation");
  return out;
}

ArrayXr mean_abs2(const EnsembleField& u) {
  return ensemble_mean<double>(u.realizations(), u.grid.size(),
                               [&](Index r, ArrayXr& acc) { acc += u.values.row(r).transpose().abs2(); });
}

ArrayXr mean_abs4(const EnsembleField& u) {
  return ensemble_mean<double>(u.realizations(), u.grid.size(),
                               [&](Index r, ArrayXr& acc) { acc += u.values.row(r).transpose().abs2().square(); });
}

ArrayXc mean_cross(const EnsembleField& a, const EnsembleField& b) {
  require_same_grid(a.grid, b.grid, "mean_cross: grids differ");
  if (a.realizations() != b.realizations())
    raise(ErrorKind::Validation, "GridMismatch", "mean_cross: ensemble sizes differ");
  return ensemble_mean<cplx>(a.realizations(), a.grid.size(), [&](Index r, ArrayXc& acc) {
    acc += (a.values.row(r).conjugate() * b.values.row(r)).transpose();
  });
}

Index shifted_index(const Grid& grid, Index i, const std::array<int, 3>& offset) {
  auto c = grid.point_coords(i);
  Index idx = 0;
  for (int a = 0; a < grid.dim(); ++a) idx = idx * grid.n() + (((c[a] + offset[a]) % grid.n()) + grid.n()) % grid.n();
  return idx;
}

std::vector<cplx> covariance_offsets(const EnsembleField& u, Index x0, const std::vector<std::array<int, 3>>& offsets) {
  const Index k = static_cast<Index>(offsets.size());
  std::vector<Index> idx(k);
  for (Index j = 0; j < k; ++j) idx[j] = shifted_index(u.grid, x0, offsets[j]);
  const ArrayXc m = ensemble_mean<cplx>(u.realizations(), k, [&](Index r, ArrayXc& acc) {
    const cplx base = std::conj(u.values(r, x0));
    for (Index j = 0; j < k; ++j) acc[j] += base * u.values(r, idx[j]);
  });
  return std::vector<cplx>(m.data(), m.data() + k);
}

}  // namespace hlab
