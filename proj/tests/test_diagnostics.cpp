#include <cmath>
#include <random>

#include "common.hpp"
#include "hlab/diagnostics.hpp"

using namespace hlab;

namespace {

FieldHistory random_history(const Grid& g, Index R, Index M, unsigned seed) {
  std::srand(seed);
  FieldHistory h;
  h.grid = g;
  h.times = uniform_times(1.0, M);
  for (Index r = 0; r < R; ++r) h.realizations.push_back(RowArrayXXc::Random(M + 1, g.size()));
  return h;
}

Eigen::MatrixXcd random_hermitian(Index n, unsigned seed) {
  std::srand(seed);
  const Eigen::MatrixXcd a = Eigen::MatrixXcd::Random(n, n);
  return a + a.adjoint();
}

}  // namespace

TEST_SUITE("diagnostics") {
  TEST_CASE("norm of zero and the flat L2 identity") {
    const Grid g(2, 8, 4.0);
    FieldHistory h = random_history(g, 5, 4, 1);
    NormSpec spec;
    double flat = 0.0;
    const double dt = 0.25;
    for (const auto& r : h.realizations)
      for (Index j = 0; j <= 4; ++j) flat += (j == 0 || j == 4 ? 0.5 : 1.0) * dt * r.row(j).abs2().sum();
    flat = std::sqrt(flat * g.cell_volume() / 5.0);
    CHECK(spacetime_norm(h, spec) == doctest::Approx(flat).epsilon(1e-12));
    spec.omega = OmegaOrder::Outside;
    CHECK(spacetime_norm(h, spec) == doctest::Approx(flat).epsilon(1e-12));
    for (auto& r : h.realizations) r.setZero();
    CHECK(spacetime_norm(h, spec) == 0.0);
  }

  TEST_CASE("Bessel weight on a plane wave") {
    const Grid g(2, 8, 4.0);
    const Index k = g.index_of_wavenumber({2, -1, 0});
    EnsembleField u;
    u.grid = g;
    u.values.resize(1, g.size());
    for (Index i = 0; i < g.size(); ++i) u.values(0, i) = std::polar(1.0, g.xi(k).dot(g.x(i)));
    NormSpec s0, s1;
    s1.s = 0.7;
    s0.q = s1.q = 4.0;
    CHECK(spacetime_norm(u, s1) == doctest::Approx(std::pow(1.0 + g.k2()[k], 0.35) * spacetime_norm(u, s0)).epsilon(1e-12));
  }

  TEST_CASE("homogeneity and triangle inequality") {
    const Grid g(2, 8, 4.0);
    FieldHistory a = random_history(g, 3, 4, 2), b = random_history(g, 3, 4, 3);
    for (const NormSpec spec : {NormSpec{2, 2, 0}, NormSpec{4, 3, 0.5}, NormSpec{kInf, 10.0 / 3.0, 0.0, OmegaOrder::Outside}}) {
      FieldHistory scaled = a, sum = a;
      for (Index r = 0; r < 3; ++r) {
        scaled.realizations[r] *= cplx(0.0, -2.5);
        sum.realizations[r] += b.realizations[r];
      }
      CHECK(spacetime_norm(scaled, spec) == doctest::Approx(2.5 * spacetime_norm(a, spec)).epsilon(1e-12));
      CHECK(spacetime_norm(sum, spec) <= spacetime_norm(a, spec) + spacetime_norm(b, spec) + 1e-12);
    }
    NormSpec bad;
    bad.p = 0.5;
    CHECK_THROWS_AS(spacetime_norm(a, bad), Error);
  }

  TEST_CASE("Strichartz ratio") {
    CHECK(strichartz_admissible(3, 10.0 / 3.0, 10.0 / 3.0, 0.0));
    CHECK(strichartz_admissible(2, 4.0, 4.0, 0.0));
    CHECK_FALSE(strichartz_admissible(3, 2.0, 2.0, 0.0));
    auto gauss = [](double shift) {
      return [shift](const Grid& g) {
        EnsembleField z;
        z.grid = g;
        z.values.resize(1, g.size());
        for (Index i = 0; i < g.size(); ++i) {
          const auto x = g.x(i);
          z.values(0, i) = std::exp(-(sqr(x[0] - 4.0 - shift) + sqr(x[1] - 4.0) + sqr(x[2] - 4.0)));
        }
        return z;
      };
    };
    StrichartzSpec spec;
    spec.T = 0.5;
    spec.steps = 16;
    const std::vector<Grid> ladder = {Grid(3, 16, 8.0), Grid(3, 32, 8.0)};
    const StrichartzReport rep = strichartz_ratio(gauss(0.0), ladder, spec);
    CHECK_FALSE(rep.degenerate);
    CHECK(rep.spread < 0.2);
    const StrichartzReport shifted = strichartz_ratio(gauss(1.0), {ladder[0]}, spec);
    CHECK(std::abs(shifted.ratio[0] - rep.ratio[0]) <= 1e-6 * rep.ratio[0]);
    const StrichartzReport zero = strichartz_ratio([](const Grid& g) {
      EnsembleField z;
      z.grid = g;
      z.values = RowArrayXXc::Zero(1, g.size());
      return z;
    }, {ladder[0]}, spec);
    CHECK(zero.degenerate);
    spec.p = 2.0;
    CHECK_THROWS_AS(strichartz_ratio(gauss(0.0), {ladder[0]}, spec), Error);
  }

  TEST_CASE("density operator normalization and structure") {
    const Grid g(2, 32, 12.0);
    const Index N = 2048;
    const Background bg(g, testing::gaussian2(), WienerSample(6, N), 0.0);
    const DensityOperator op = build_density_operator(sample_equilibrium(bg, 0.0), default_xi_cut(g));
    CHECK(op.normalization == doctest::Approx(kTwoPi * kTwoPi));
    double diag = 0.0, off = 0.0, scale = 0.0;
    for (Index a = 0; a < op.size(); ++a) {
      const double e = testing::gaussian2().f2(std::sqrt(g.k2()[op.modes[a]])) * op.normalization;
      scale = std::max(scale, e);
      diag = std::max(diag, std::abs(op.gamma(a, a).real() - e));
      for (Index b = 0; b < op.size(); ++b)
        if (a != b) off = std::max(off, std::abs(op.gamma(a, b)));
    }
    CHECK(diag <= 5.0 / std::sqrt(double(N)) * scale);
    CHECK(off <= 5.0 / std::sqrt(double(N)) * scale);
    CHECK(op.hermitian_error() <= 1e-10);
    CHECK(op.min_eigenvalue() >= -1e-8 * op.gamma.trace().real());
    CHECK_THROWS_AS(build_density_operator(sample_equilibrium(bg, 0.0), 2.0 * g.xi_edge()), Error);
  }

  TEST_CASE("rank-one ensembles") {
    const Grid g(2, 8, 4.0);
    EnsembleField u;
    u.grid = g;
    u.values = RowArrayXXc::Random(1, g.size()).replicate(3, 1);
    const DensityOperator op = build_density_operator(u, 0.9 * g.xi_edge());
    const Eigen::MatrixXcd c = basis_coefficients(u, op.modes).col(0);
    CHECK((op.gamma - c * c.adjoint()).cwiseAbs().maxCoeff() <= 1e-12 * op.gamma.cwiseAbs().maxCoeff());
    const double top = c.squaredNorm();
    for (double p : {1.0, 2.0, 4.1, kInf}) CHECK(schatten_norm(op.gamma, p) == doctest::Approx(top).epsilon(1e-10));
  }

  TEST_CASE("Schatten norm identities") {
    const Eigen::MatrixXcd a = random_hermitian(12, 4);
    CHECK(schatten_norm(a, 2.0) == doctest::Approx(a.norm()).epsilon(1e-12));
    std::srand(5);
    const Eigen::MatrixXcd b = Eigen::MatrixXcd::Random(10, 10);
    CHECK(schatten_norm(b, 2.0) == doctest::Approx(b.norm()).epsilon(1e-12));
    CHECK(schatten_norm(b, 4.0) <= schatten_norm(b, 2.0));
    CHECK(schatten_norm(b, 2.0) <= schatten_norm(b, 1.0));
    const Eigen::VectorXd phases = Eigen::VectorXd::LinSpaced(12, 0.0, 3.0);
    Eigen::MatrixXcd u = Eigen::MatrixXcd::Zero(12, 12);
    for (Index k = 0; k < 12; ++k) u(k, k) = std::polar(1.0, phases[k] * phases[k]);
    CHECK(std::abs(schatten_norm(u * a * u.adjoint(), 4.1) - schatten_norm(a, 4.1)) <= 1e-10 * schatten_norm(a, 4.1));
  }

  TEST_CASE("wave operator of a constant potential") {
    const Grid g(2, 16, 8.0);
    const auto times = uniform_times(2.0, 8);
    SpaceTimePotential V = SpaceTimePotential::zeros(g, times);
    for (std::size_t j = 0; j < times.size(); ++j) V.values.row(j).setConstant(times[j]);
    const auto modes = truncated_basis(g, 3.0);
    const Eigen::MatrixXcd W = wave_operator_matrix(V, modes);
    const Eigen::MatrixXcd expect = cplx(0.0, -2.0) * Eigen::MatrixXcd::Identity(W.rows(), W.cols());
    CHECK((W - expect).cwiseAbs().maxCoeff() < 1e-12);
  }

  TEST_CASE("zero perturbation gives a flat corollary residual") {
    const Grid g(2, 32, 12.0);
    const Background bg(g, testing::gaussian2(), WienerSample(2, 64), 0.0);
    const auto times = uniform_times(1.0, 8);
    std::vector<EnsembleField> X;
    for (Index j : {2, 4, 6, 8}) X.push_back(sample_equilibrium(bg, times[j]));
    const EnsembleField Y0 = sample_equilibrium(bg, 0.0);
    EnsembleField Z = Y0;
    Z.values.setZero();
    CorollaryOptions opts;
    const CorollaryReport rep = corollary_check(X, Y0, SpaceTimePotential::zeros(g, times), Z, opts);
    for (double r : rep.residual) CHECK(r <= 1e-10 * rep.gamma_f_norm);
    CHECK(rep.gamma_plus_norm == 0.0);
    opts.f = &testing::gaussian2();
    const CorollaryReport theo = corollary_check(X, Y0, SpaceTimePotential::zeros(g, times), Z, opts);
    CHECK(theo.residual.front() > 0.0);
    CHECK(std::abs(theo.residual.back() - theo.residual.front()) <= 1e-10 * theo.residual.front());
  }
}
