#include <cmath>

#include "common.hpp"
#include "hlab/parallel.hpp"
#include "hlab/solver.hpp"

using namespace hlab;

namespace {

struct Run {
  Grid g;
  PairPotential w = PairPotential::delta(2, 0.5);
  Background bg;
  EnsembleField Z0;

  Run(int n, double L, Index N, double eps, std::uint64_t seed = 7)
      : g(2, n, L), bg(g, testing::gaussian2(), WienerSample(seed, N), equilibrium_mass(w, testing::gaussian2(), g)) {
    ArrayXc a(g.size());
    ArrayXr b(g.size());
    for (Index i = 0; i < g.size(); ++i) {
      const Eigen::Vector3d x = g.x(i) - Eigen::Vector3d(0.5 * L, 0.5 * L, 0.0);
      a[i] = eps * std::exp(-x.squaredNorm() / 4.0);
      b[i] = testing::gaussian2().f(std::sqrt(g.k2()[i]));
    }
    Z0 = sample_structured_perturbation(StructuredProfile::modulated(a, b), bg);
  }

  EnsembleField X0() const {
    EnsembleField x = sample_equilibrium(bg, 0.0);
    x.values += Z0.values;
    return x;
  }
};

EvolutionConfig steps(double dt, Index n) {
  EvolutionConfig ec;
  ec.dt = dt;
  ec.steps = n;
  return ec;
}

}  // namespace

TEST_SUITE("solver") {
  TEST_CASE("equilibrium is an exact fixed point of the coupled flow") {
    Run r(32, 16.0, 32, 0.0);
    const Trajectory tr = evolve_hartree(sample_equilibrium(r.bg, 0.0), r.bg, r.w, steps(0.01, 200));
    CHECK(tr.deviation_max == 0.0);
    CHECK(tr.V.values.abs().maxCoeff() == 0.0);
    CHECK(tr.mass_drift_max <= 1e-10);
  }

  TEST_CASE("mass is conserved per realization") {
    Run r(32, 16.0, 32, 0.05);
    const Trajectory tr = evolve_hartree(r.X0(), r.bg, r.w, steps(0.02, 50));
    CHECK(tr.mass_drift_max <= 50 * 1e-10);
    CHECK(tr.deviation_max > 0.0);
  }

  TEST_CASE("global phases leave the potential unchanged") {
    Run r(32, 16.0, 16, 0.05);
    EnsembleField x = r.X0();
    const Trajectory a = evolve_hartree(x, r.bg, r.w, steps(0.02, 20));
    for (Index k = 0; k < x.realizations(); ++k) x.values.row(k) *= cplx(0.0, k % 2 ? 1.0 : -1.0);
    const Trajectory b = evolve_hartree(x, r.bg, r.w, steps(0.02, 20));
    CHECK((a.V.values - b.V.values).abs().maxCoeff() == 0.0);
    EnsembleField y = r.X0();
    for (Index k = 0; k < y.realizations(); ++k) y.values.row(k) *= std::polar(1.0, 0.3 * k);
    const Trajectory c = evolve_hartree(y, r.bg, r.w, steps(0.02, 20));
    CHECK((a.V.values - c.V.values).abs().maxCoeff() <= 1e-12);
  }

  TEST_CASE("second order in time") {
    Run r(32, 16.0, 16, 0.3);
    const double T = 0.5;
    auto final_state = [&](Index n) { return evolve_hartree(r.X0(), r.bg, r.w, steps(T / n, n)).X.values; };
    const RowArrayXXc ref = final_state(64);
    const double e1 = (final_state(8) - ref).abs().maxCoeff();
    const double e2 = (final_state(16) - ref).abs().maxCoeff();
    CHECK(e1 / e2 == doctest::Approx(4.0).epsilon(0.2));
  }

  TEST_CASE("frozen mode runs and stays close to midpoint") {
    Run r(32, 16.0, 16, 0.05);
    EvolutionConfig ec = steps(0.01, 20);
    const Trajectory a = evolve_hartree(r.X0(), r.bg, r.w, ec);
    ec.mode = StepMode::Frozen;
    const Trajectory b = evolve_hartree(r.X0(), r.bg, r.w, ec);
    CHECK((a.V.values - b.V.values).abs().maxCoeff() <= 1e-3 * a.V.values.abs().maxCoeff());
    CHECK(parse_step_mode("frozen") == StepMode::Frozen);
    CHECK_THROWS_AS(parse_step_mode("euler"), Error);
  }

  TEST_CASE("box guard") {
    Run r(32, 16.0, 4, 0.05);
    EvolutionConfig ec = steps(0.1, 40);
    ec.support = 4.0;
    CHECK_THROWS_AS(evolve_hartree(r.X0(), r.bg, r.w, ec), Error);
    ec.enforce_box_guard = false;
    const Trajectory tr = evolve_hartree(r.X0(), r.bg, r.w, ec);
    CHECK_FALSE(tr.box.ok);
    CHECK(box_guard(100.0, 2.0, 3.0, 1.0).ok);
  }

  TEST_CASE("trajectory is reproducible across worker counts") {
    Run r(32, 16.0, 130, 0.05);
    set_workers(1);
    const Trajectory a = evolve_hartree(r.X0(), r.bg, r.w, steps(0.02, 10));
    set_workers(3);
    const Trajectory b = evolve_hartree(r.X0(), r.bg, r.w, steps(0.02, 10));
    set_workers(1);
    CHECK((a.V.values - b.V.values).abs().maxCoeff() <= 1e-12);
  }

  TEST_CASE("zero data is a fixed point after one iteration") {
    Run r(16, 12.0, 16, 0.0);
    FixedPointConfig pc;
    pc.T = 0.5;
    pc.steps = 8;
    const FixedPointState st = picard_fixed_point(r.Z0, r.bg, testing::gaussian2_kernel(), r.w, pc);
    CHECK(st.iterations == 1);
    CHECK(st.converged);
    CHECK(st.residual_Z[0] == 0.0);
    CHECK(st.V.values.abs().maxCoeff() == 0.0);
    const FixedPointState c = picard_dim2_cubic(r.Z0, r.bg, testing::gaussian2_kernel(), r.w, pc);
    CHECK(c.iterations == 1);
    CHECK(c.V.values.abs().maxCoeff() == 0.0);
  }

  TEST_CASE("small data contracts geometrically") {
    Run r(16, 12.0, 32, 0.05);
    FixedPointConfig pc;
    pc.T = 0.5;
    pc.steps = 8;
    pc.tol = 1e-12;
    const FixedPointState st = picard_fixed_point(r.Z0, r.bg, testing::gaussian2_kernel(), r.w, pc);
    CHECK(st.converged);
    CHECK(st.iterations >= 4);
    CHECK(st.contraction_factor < 1.0);
    for (double c : st.contraction) CHECK(c < 1.0);
  }

  TEST_CASE("cubic system without cubic terms is the second-order system") {
    Run r(16, 12.0, 16, 0.05);
    FixedPointConfig pc;
    pc.T = 0.5;
    pc.steps = 8;
    pc.max_iter = 3;
    const FixedPointState a = picard_fixed_point(r.Z0, r.bg, testing::gaussian2_kernel(), r.w, pc);
    const FixedPointState b = picard_dim2_cubic(r.Z0, r.bg, testing::gaussian2_kernel(), r.w, pc);
    CHECK((a.V.values - b.V.values).abs().maxCoeff() == 0.0);
    pc.cubic = true;
    const FixedPointState c = picard_dim2_cubic(r.Z0, r.bg, testing::gaussian2_kernel(), r.w, pc);
    CHECK((a.V.values - c.V.values).abs().maxCoeff() > 0.0);
  }

  TEST_CASE("fixed point agrees with the ensemble flow") {
    Run r(32, 24.0, 64, 0.05);
    const double T = 0.5;
    const Index M = 16;
    FixedPointConfig pc;
    pc.T = T;
    pc.steps = M;
    pc.tol = 1e-12;
    const FixedPointState st = picard_fixed_point(r.Z0, r.bg, testing::gaussian2_kernel(), r.w, pc);
    const Trajectory tr = evolve_hartree(r.X0(), r.bg, r.w, steps(T / M, M));
    const double diff = (st.V.values - tr.V.values).matrix().norm(), size = st.V.values.matrix().norm();
    CHECK(diff <= 0.2 * size);
  }

  TEST_CASE("scattering profiles") {
    Run r(16, 12.0, 16, 0.0);
    FixedPointConfig pc;
    pc.T = 0.5;
    pc.steps = 8;
    const FixedPointState zero = picard_fixed_point(r.Z0, r.bg, testing::gaussian2_kernel(), r.w, pc);
    const ScatteringReport a = extract_scattering(zero, r.bg, r.w, {0, 4, 8});
    for (double v : a.z_cauchy) CHECK(v == 0.0);
    for (double v : a.w_cauchy) CHECK(v == 0.0);
    Run s(16, 12.0, 16, 0.05);
    pc.system = FixedPointSystem::Linear;
    const FixedPointState lin = picard_fixed_point(s.Z0, s.bg, testing::gaussian2_kernel(), s.w, pc);
    const ScatteringReport b = extract_scattering(lin, s.bg, s.w, {0, 4, 8});
    for (double v : b.z_cauchy) CHECK(v <= 1e-12 * b.z_profile_norm[0]);
    CHECK(b.z_profile_norm[0] > 0.0);
  }
}
