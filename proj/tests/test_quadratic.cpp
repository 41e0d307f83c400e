#include <cmath>

#include "common.hpp"
#include "hlab/quadratic.hpp"

using namespace hlab;

namespace {

struct Pair {
  Grid g{2, 16, 12.0};
  std::vector<double> times = uniform_times(1.0, 16);
  SpaceTimePotential U, V;

  Pair() {
    U = SpaceTimePotential::zeros(g, times);
    V = U;
    const double k = g.dxi();
    for (std::size_t j = 0; j < times.size(); ++j)
      for (Index i = 0; i < g.size(); ++i) {
        const auto x = g.x(i);
        const double t = times[j];
        U.values(j, i) = std::sin(3.0 * t) * std::cos(k * x[0]) + 0.5 * t * std::sin(k * x[1]);
        V.values(j, i) = t * t * std::cos(k * (x[0] + x[1])) + 0.3;
      }
  }
};

}  // namespace

TEST_SUITE("quadratic") {
  TEST_CASE("cosine-kernel terms sum to the sine-kernel form") {
    Pair p;
    const PairKernel& h = testing::unit_gaussian2_kernel();
    const SpaceTimePotential qf = Q2_fourier(p.U, p.V, h);
    const SpaceTimePotential ql = Q2_lemma_terms(p.U, p.V, h).sum();
    CHECK(qf.values.abs().maxCoeff() > 1e-3);
    CHECK((ql.values - qf.values).abs().maxCoeff() <= 1e-10 * qf.values.abs().maxCoeff());
  }

  TEST_CASE("spatially constant potentials cancel") {
    Pair p;
    const PairKernel& h = testing::unit_gaussian2_kernel();
    SpaceTimePotential Uc = SpaceTimePotential::zeros(p.g, p.times), Vc = Uc;
    for (std::size_t j = 0; j < p.times.size(); ++j) {
      Uc.values.row(j).setConstant(std::sin(3.0 * p.times[j]));
      Vc.values.row(j).setConstant(1.0 + p.times[j]);
    }
    CHECK(Q2_fourier(Uc, Vc, h).values.abs().maxCoeff() <= 1e-12);
    const Index N = 512;
    const Background bg(p.g, testing::unit_gaussian2(), WienerSample(8, N), 0.0);
    RowArrayXXr sd;
    const SpaceTimePotential qe = Q2_ensemble(Uc, Vc, bg, &sd);
    double iu = 0.0, iv = 0.0;
    const double dt = p.times[1] - p.times[0];
    for (std::size_t j = 0; j + 1 < p.times.size(); ++j) {
      iu += 0.5 * dt * (std::abs(Uc.values(j, 0)) + std::abs(Uc.values(j + 1, 0)));
      iv += 0.5 * dt * (std::abs(Vc.values(j, 0)) + std::abs(Vc.values(j + 1, 0)));
    }
    const double scale = bg.variance() * iu * iv;
    CHECK(qe.values.abs().maxCoeff() <= 5.0 / std::sqrt(double(N)) * scale);
  }

  TEST_CASE("ensemble estimate is symmetric and unbiased") {
    Pair p;
    const PairKernel& h = testing::unit_gaussian2_kernel();
    const Index N = 1024;
    const Background bg(p.g, testing::unit_gaussian2(), WienerSample(3, N), 0.0);
    RowArrayXXr sd;
    const SpaceTimePotential a = Q2_ensemble(p.U, p.V, bg, &sd);
    const SpaceTimePotential b = Q2_ensemble(p.V, p.U, bg);
    CHECK((a.values - b.values).abs().maxCoeff() == 0.0);
    const SpaceTimePotential qf = Q2_fourier(p.U, p.V, h);
    const double dt = p.times[1] - p.times[0];
    CHECK((a.values - qf.values).abs().maxCoeff() <= 5.0 * sd.maxCoeff() / std::sqrt(double(N)) + 4.0 * dt * dt);
  }

  TEST_CASE("lattice evaluation respects the operation budget") {
    Pair p;
    Q2Options opts;
    opts.flop_budget = 10.0;
    CHECK_THROWS_AS(Q2_fourier(p.U, p.V, testing::unit_gaussian2_kernel(), opts), Error);
  }

  TEST_CASE("kernel norms scale like the inverse determinant root") {
    const PairKernel& h = testing::unit_gaussian2_kernel();
    for (int pw = 1; pw <= 2; ++pw) {
      std::vector<double> n2;
      for (double lam : {1.0, 2.0, 4.0}) {
        const QKernelSample k = kernel_K_norms(Eigen::Vector3d(3.0 * lam, 0, 0), Eigen::Vector3d(0, 1, 0), h, pw);
        CHECK(k.norm2() <= 10.0 * k.bound);
        n2.push_back(k.norm2());
      }
      const double slope = std::log2(n2[2] / n2[0]) / 2.0;
      CHECK(slope == doctest::Approx(-1.0).epsilon(0.1));
    }
    CHECK_THROWS_AS(kernel_K_norms(Eigen::Vector3d(1, 0, 0), Eigen::Vector3d(2, 0, 0), h, 2), Error);
  }

  TEST_CASE("kernel samples the sine product") {
    const PairKernel& h = testing::unit_gaussian2_kernel();
    const Eigen::Vector3d eta(1.0, 0.5, 0.0), eta2(-0.3, 1.0, 0.0);
    const double t = 0.4, s = -0.2;
    const double expect = h((2.0 * t * eta + 2.0 * s * eta2).norm()) * std::sin(t * (eta.squaredNorm() - eta2.dot(eta))) *
                          std::sin(t * eta2.dot(eta) + s * eta2.squaredNorm());
    CHECK(kernel_K(h, eta, eta2, t, s) == doctest::Approx(expect).epsilon(1e-12));
  }

  TEST_CASE("first quadratic and cubic terms vanish with a zero argument") {
    Pair p;
    const Background bg(p.g, testing::unit_gaussian2(), WienerSample(1, 16), 0.0);
    const FieldHistory Z = FieldHistory::zeros(p.g, p.times, 16);
    CHECK(Q1_ensemble(Z, p.V, bg).values.abs().maxCoeff() == 0.0);
    const SpaceTimePotential zero = SpaceTimePotential::zeros(p.g, p.times);
    CHECK(cubic_C1(p.V, p.U, zero, bg).values.abs().maxCoeff() == 0.0);
    CHECK(cubic_C2(p.V, p.U, history_source(Z), bg).values.abs().maxCoeff() == 0.0);
  }
}
