#include <cmath>

#include "common.hpp"
#include "hlab/linear_response.hpp"

using namespace hlab;

namespace {

struct SeparableCase {
  Grid g{2, 32, 12.0};
  std::vector<double> times = uniform_times(1.5, 64);
  std::function<double(double)> b = [](double t) { return std::exp(-0.5 * sqr((t - 0.75) / 0.1)); };
  ArrayXr a;
  SpaceTimePotential V;

  SeparableCase() {
    a.resize(g.size());
    for (Index i = 0; i < g.size(); ++i) {
      const auto x = g.x(i);
      a[i] = std::exp(-(sqr(x[0] - 6.0) + sqr(x[1] - 6.0)) / 4.0);
    }
    V = SpaceTimePotential::zeros(g, times);
    for (std::size_t j = 0; j < times.size(); ++j) V.values.row(j) = b(times[j]) * a.transpose();
  }
};

}  // namespace

TEST_SUITE("linear_response") {
  TEST_CASE("small-frequency limit of the response symbol") {
    const PairKernel& h = testing::unit_gaussian2_kernel();
    const cplx m = mf_value(h, 0.0, 1e-3);
    CHECK(m.real() == doctest::Approx(-kPi).epsilon(1e-4));
    double err = 0.0;
    const cplx m2 = mf_value(h, 0.3, 0.8, err);
    CHECK(std::isfinite(m2.real()));
    CHECK(err < 1e-6);
  }

  TEST_CASE("symbol agrees with direct quadrature") {
    const PairKernel& h = testing::unit_gaussian2_kernel();
    for (double om : {-1.0, 0.0, 2.0})
      for (double xi : {0.5, 1.5}) {
        auto re = [&](double t) { return -2.0 * std::cos(om * t) * std::sin(xi * xi * t) * h(2.0 * xi * t); };
        auto im = [&](double t) { return 2.0 * std::sin(om * t) * std::sin(xi * xi * t) * h(2.0 * xi * t); };
        const double T = h.r_cut() / (2.0 * xi);
        const double r = integrate<double>(re, 0.0, T, 1e-12).value, i = integrate<double>(im, 0.0, T, 1e-12).value;
        const cplx m = mf_value(h, om, xi);
        CHECK(std::abs(m - cplx(r, i)) < 1e-6);
      }
  }

  TEST_CASE("eps_h of the unit Gaussian") {
    const EpsilonReport e = epsilon_h(testing::unit_gaussian2_kernel());
    CHECK(e.value == doctest::Approx(0.8945).epsilon(2e-3));
    CHECK(e.stabilized);
  }

  TEST_CASE("symbol margin flags resonance") {
    const PairKernel& h = testing::unit_gaussian2_kernel();
    const ResponseSymbol s = compute_mf(h, {0.0}, {1e-3}, false);
    const MarginReport ok = symbol_margin(s, {0.1});
    CHECK(ok.passed);
    const MarginReport bad = symbol_margin(s, {-1.0 / kPi});
    CHECK_FALSE(bad.passed);
  }

  TEST_CASE("multiplier and causal kernel paths agree") {
    SeparableCase c;
    const PairKernel& h = testing::unit_gaussian2_kernel();
    const PairPotential w = PairPotential::delta(2, 1.0);
    const SpectralL2 op(c.g, c.times, h, w);
    const SpaceTimePotential s = op.apply(c.V);
    const SpaceTimePotential o = causal_L2_separable(c.g, c.times, c.b, c.a, h, w, 1e-13);
    CHECK((s.values - o.values).abs().maxCoeff() <= 1e-6 * o.values.abs().maxCoeff());
    CHECK(op.imaginary_residue() < 1e-12);
    MarginReport rep;
    const SpaceTimePotential inv = op.invert(s, rep);
    CHECK(rep.passed);
    CHECK((inv.values - op.apply(inv).values - s.values).abs().maxCoeff() < 1e-10 * s.values.abs().maxCoeff());
  }

  TEST_CASE("causal operator inverse and ensemble mean") {
    SeparableCase c;
    const PairKernel& h = testing::unit_gaussian2_kernel();
    const PairPotential w = PairPotential::delta(2, 1.0);
    const CausalL2 L(c.g, c.times, h, w_hat_on_grid(w, c.g));
    const SpaceTimePotential x = L.invert(c.V);
    CHECK((x.values - L.apply(x).values - c.V.values).abs().maxCoeff() < 1e-13);
    const Index N = 1024;
    const Background bg(c.g, testing::unit_gaussian2(), WienerSample(2, N), 0.0);
    RowArrayXXr sd;
    const SpaceTimePotential mc = ensemble_linear_response(c.V, bg, &sd);
    const SpaceTimePotential exact = L.apply(c.V);
    CHECK((mc.values - exact.values).abs().maxCoeff() <= 5.0 * sd.maxCoeff() / std::sqrt(double(N)));
  }

  TEST_CASE("constant potentials give no linear response") {
    const Grid g(2, 16, 12.0);
    const Background bg(g, testing::unit_gaussian2(), WienerSample(4, 512), 0.0);
    const auto times = uniform_times(1.0, 32);
    std::vector<double> v(times.size());
    for (std::size_t j = 0; j < v.size(); ++j) v[j] = 1.0 + times[j];
    const LinearCancellationReport rep = linear_cancellation_diag(times, v, bg);
    CHECK(rep.re_cross_max <= 5.0 / std::sqrt(512.0) * rep.scale);
    CHECK(std::abs(rep.w_norm - rep.integral_V * rep.y_norm) <= 5.0 / std::sqrt(512.0) * rep.integral_V * rep.y_norm);
  }

  TEST_CASE("radial modes and potential on the grid") {
    const Grid g(2, 8, 4.0);
    const RadialModes r = radial_modes(g);
    CHECK(r.xi.front() == 0.0);
    CHECK(r.index.size() == static_cast<std::size_t>(g.size()));
    const ArrayXr wh = w_hat_on_grid(PairPotential::delta(2, 0.4), g);
    CHECK((wh - 0.4).abs().maxCoeff() == 0.0);
  }
}
