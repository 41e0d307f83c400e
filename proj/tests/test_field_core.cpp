#include <cmath>
#include <random>

#include "common.hpp"
#include "hlab/field.hpp"
#include "hlab/parallel.hpp"

using namespace hlab;

namespace {

Background make_bg(const Grid& g, Index N, std::uint64_t seed = 5, double m = 0.0) {
  return Background(g, testing::gaussian2(), WienerSample(seed, N), m);
}

}  // namespace

TEST_SUITE("field_core") {
  TEST_CASE("Philox known-answer vectors") {
    const auto a = philox4x32({0, 0, 0, 0}, {0, 0});
    CHECK(a == PhiloxCounter{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8});
    const auto b = philox4x32({0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, {0xffffffff, 0xffffffff});
    CHECK(b == PhiloxCounter{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd});
    const auto c = philox4x32({0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, {0xa4093822, 0x299f31d0});
    CHECK(c == PhiloxCounter{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1});
  }

  TEST_CASE("Wiener coefficients are addressable and seed dependent") {
    const WienerSample a(3, 16), b(3, 16), c(4, 16);
    CHECK(a.coefficient(7, 11) == b.coefficient(7, 11));
    CHECK(a.coefficient(7, 11) != c.coefficient(7, 11));
    double m2 = 0.0;
    const int n = 20000;
    for (int i = 0; i < n; ++i) m2 += std::norm(a.coefficient(i, 3));
    CHECK(m2 / n == doctest::Approx(1.0).epsilon(0.05));
  }

  TEST_CASE("grid transforms and wavenumbers") {
    const Grid g(2, 8, 4.0);
    CHECK(g.size() == 64);
    CHECK(g.wavenumber(g.index_of_wavenumber({-3, 2, 0}))[0] == -3);
    ArrayXc u = ArrayXc::Random(g.size());
    ArrayXc v = u;
    g.forward(v.data());
    g.inverse(v.data());
    CHECK(((v / static_cast<double>(g.size())) - u).abs().maxCoeff() < 1e-14);
  }

  TEST_CASE("equilibrium isometry and Gaussian fourth moment") {
    const Grid g(2, 32, 16.0);
    const Index N = 1024;
    const Background bg = make_bg(g, N);
    const EnsembleField Y = sample_equilibrium(bg, 0.0);
    const double var = lattice_variance(testing::gaussian2(), g);
    const double m2 = mean_abs2(Y).mean(), m4 = mean_abs4(Y).mean();
    CHECK(std::abs(m2 - var) <= 5.0 / std::sqrt(double(N)) * var);
    CHECK(std::abs(m4 / (m2 * m2) - 2.0) <= 5.0 / std::sqrt(double(N)));
  }

  TEST_CASE("covariance reproduces the pair kernel") {
    const Grid g(2, 32, 16.0);
    const Index N = 1024;
    const Background bg = make_bg(g, N, 9);
    const EnsembleField Y = sample_equilibrium(bg, 0.0);
    const PairKernel& h = testing::gaussian2_kernel();
    std::vector<std::array<int, 3>> offs = {{0, 0, 0}, {1, 0, 0}, {0, 2, 0}, {3, 1, 0}};
    const auto cov = covariance_offsets(Y, 37, offs);
    for (std::size_t i = 0; i < offs.size(); ++i) {
      const double r = g.dx() * std::hypot(offs[i][0], offs[i][1]);
      CHECK(std::abs(cov[i] - h(r)) <= 5.0 / std::sqrt(double(N)) * h.h0());
    }
  }

  TEST_CASE("free propagation is a group and stationary in law") {
    const Grid g(2, 16, 12.0);
    const Background bg = make_bg(g, 8, 1, 0.7);
    const EnsembleField Y0 = sample_equilibrium(bg, 0.0);
    const EnsembleField a = free_propagate(free_propagate(Y0, 0.3, 0.7), 0.4, 0.7);
    const EnsembleField b = free_propagate(Y0, 0.7, 0.7);
    CHECK((a.values - b.values).abs().maxCoeff() < 1e-12);
    const EnsembleField Yt = sample_equilibrium(bg, 0.7);
    CHECK((Yt.values - b.values).abs().maxCoeff() < 1e-12);
  }

  TEST_CASE("transport identity on the grid") {
    const Grid g(2, 16, 8.0);
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    const double m = 0.4;
    for (int trial = 0; trial < 4; ++trial) {
      EnsembleField U;
      U.grid = g;
      U.values = RowArrayXXc::Random(2, g.size());
      for (Index r = 0; r < 2; ++r) {
        for (Index i = 0; i < g.size(); ++i) {
          const auto& k = g.wavenumber(i);
          if (std::abs(k[0]) > g.n() / 2 - 4 || std::abs(k[1]) > g.n() / 2 - 4) U.values(r, i) = 0.0;
        }
        g.inverse(U.values.row(r).data());
      }
      const Eigen::Vector3d xi(g.dxi() * std::round(3 * uni(rng)), g.dxi() * std::round(3 * uni(rng)), 0.0);
      const double tau = uni(rng), t = 2.0 * uni(rng);
      EnsembleField lhs_in = U;
      for (Index i = 0; i < g.size(); ++i)
        lhs_in.values.col(i) *= std::polar(1.0, -tau * (m + xi.squaredNorm()) + xi.dot(g.x(i)));
      const EnsembleField lhs = free_propagate(lhs_in, t - tau, m);
      EnsembleField rhs = transported_propagate(U, t - tau, xi);
      for (Index i = 0; i < g.size(); ++i) rhs.values.col(i) *= std::polar(1.0, -t * (m + xi.squaredNorm()) + xi.dot(g.x(i)));
      CHECK((lhs.values - rhs.values).abs().maxCoeff() <= 1e-11 * lhs.values.abs().maxCoeff());
    }
    EnsembleField U;
    U.grid = g;
    U.values = RowArrayXXc::Zero(1, g.size());
    CHECK_THROWS_AS(transported_propagate(U, 0.1, Eigen::Vector3d(0.3, 0.0, 0.0)), Error);
  }

  TEST_CASE("Duhamel term of a constant potential is a phase") {
    const Grid g(2, 16, 12.0);
    const Background bg = make_bg(g, 4);
    const auto times = uniform_times(1.0, 64);
    SpaceTimePotential V = SpaceTimePotential::zeros(g, times);
    V.values.setConstant(0.5);
    const FieldHistory Y = equilibrium_history(bg, times);
    const FieldHistory W = duhamel_WV(V, Y, bg.mass());
    const Index M = 64;
    const RowArrayXXc expect = cplx(0.0, -0.5) * Y.realizations[1].row(M);
    CHECK((W.realizations[1].row(M) - expect).abs().maxCoeff() < 1e-10 * expect.abs().maxCoeff());
    CHECK(W.realizations[0].row(0).abs().maxCoeff() == 0.0);
  }

  TEST_CASE("structured perturbations and Nyquist guard") {
    const Grid g(2, 8, 20.0);
    CHECK_THROWS_AS(check_nyquist(testing::gaussian2(), g), Error);
    const Grid fine(2, 32, 12.0);
    CHECK_NOTHROW(check_nyquist(testing::gaussian2(), fine));
    const Background bg = make_bg(fine, 64);
    ArrayXc a = ArrayXc::Constant(fine.size(), 1.0);
    ArrayXr b(fine.size());
    for (Index i = 0; i < fine.size(); ++i) b[i] = testing::gaussian2().f(std::sqrt(fine.k2()[i]));
    const EnsembleField z = sample_structured_perturbation(StructuredProfile::modulated(a, b), bg);
    const EnsembleField y = sample_equilibrium(bg, 0.0);
    CHECK((z.values - y.values).abs().maxCoeff() < 1e-12);
  }

  TEST_CASE("ensemble reductions do not depend on the worker count") {
    const Grid g(2, 16, 12.0);
    const Background bg = make_bg(g, 300);
    const EnsembleField Y = sample_equilibrium(bg, 0.2);
    set_workers(1);
    const ArrayXr a = mean_abs2(Y);
    set_workers(3);
    const ArrayXr b = mean_abs2(Y);
    set_workers(1);
    CHECK((a - b).abs().maxCoeff() == 0.0);
  }
}
