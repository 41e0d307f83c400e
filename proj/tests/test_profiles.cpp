#include <cmath>
#include <limits>

#include "common.hpp"

using namespace hlab;

TEST_SUITE("profiles") {
  TEST_CASE("gaussian kernel matches the closed form") {
    const PairKernel& h = testing::unit_gaussian2_kernel();
    double err = 0.0;
    for (double r = 0.0; r < 12.0; r += 0.05) err = std::max(err, std::abs(h(r) - kPi * std::exp(-r * r / 4.0)));
    CHECK(err < 1e-8);
    CHECK(h.h0() == doctest::Approx(kPi).epsilon(1e-9));
    CHECK(h.I1() == doctest::Approx(2.0 * kPi).epsilon(1e-5));
  }

  TEST_CASE("kernel integral constant stays below 4 pi I1^2") {
    const PairKernel& h = testing::unit_gaussian2_kernel();
    CHECK(h.C1() > 0.0);
    CHECK(h.C1() <= 4.0 * kPi * h.I1() * h.I1());
    CHECK(h.C2() > 0.0);
  }

  TEST_CASE("profile formulas") {
    const auto fermi = MomentumDistribution::fermi(3, 2.0, 1.0);
    CHECK(fermi.f2(1.0) == doctest::Approx(1.0 / (std::exp(0.0) + 1.0)));
    CHECK(fermi.f(1.5) == doctest::Approx(std::sqrt(fermi.f2(1.5))));
    const auto bessel = MomentumDistribution::bessel(3, 6.0);
    CHECK(bessel.f2(2.0) == doctest::Approx(std::pow(5.0, -3.0)));
    const auto g = MomentumDistribution::gaussian(2, 0.5);
    CHECK(g.f2(1.0) == doctest::Approx(std::exp(-2.0)));
    CHECK_THROWS_AS(parse_profile_kind("maxwell"), Error);
  }

  TEST_CASE("positive temperature Fermi passes the f conditions") {
    const auto f = MomentumDistribution::fermi(3, 1.0, 0.0);
    const PairKernel h = build_kernel_h(f);
    const HypothesisReport rep = check_hypotheses(f, h, PairPotential::delta(3, 0.1), 0.5);
    CHECK(rep.f_conditions_pass());
    CHECK(rep.passed);
  }

  TEST_CASE("zero temperature step profile fails") {
    const auto f = MomentumDistribution::tabulated(2, {0.0, 1.0, 1.0 + 1e-9, 2.0}, {1.0, 1.0, 0.0, 0.0});
    KernelOptions opts;
    opts.compute_cp = false;
    opts.tolerance = std::numeric_limits<double>::infinity();
    const PairKernel h = build_kernel_h(f, opts);
    const HypothesisReport rep = check_hypotheses(f, h, PairPotential::delta(2, 0.0), 0.0);
    CHECK_FALSE(rep.f_conditions_pass());
    CHECK_FALSE(rep.passed);
  }

  TEST_CASE("delta interaction threshold") {
    const auto& f = testing::unit_gaussian2();
    const PairKernel& h = testing::unit_gaussian2_kernel();
    const double c_star = 2.0 / h.I1();
    const auto below = check_hypotheses(f, h, PairPotential::delta(2, -0.98 * c_star), 0.0);
    const auto above = check_hypotheses(f, h, PairPotential::delta(2, -1.02 * c_star), 0.0);
    CHECK(below.find("interaction_negative_part")->passed);
    CHECK_FALSE(above.find("interaction_negative_part")->passed);
  }

  TEST_CASE("potential transforms") {
    const PairPotential d = PairPotential::delta(3, 0.7);
    CHECK(eval_w_hat(d, 0.0) == doctest::Approx(0.7));
    CHECK(eval_w_hat(d, 5.0) == doctest::Approx(0.7));
    PairPotential g{0.0, DensityKind::Gaussian, 1.0, 1.0, 2};
    CHECK(eval_w_hat(g, 0.0) == doctest::Approx(g.density_mass()).epsilon(1e-8));
    CHECK(eval_w_hat(g, 0.0) == doctest::Approx(kPi).epsilon(1e-6));
    CHECK(w_hat_negative_sup(g) == doctest::Approx(0.0).epsilon(1e-12));
  }
}
