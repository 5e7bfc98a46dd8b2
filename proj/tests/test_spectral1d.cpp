#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "fraclab/errors.hpp"
#include "fraclab/fraccore.hpp"
#include "fraclab/spectral1d.hpp"

using namespace fraclab;

namespace {

std::vector<double> sample(const PeriodicGrid1D& g, const std::function<double(double)>& f) {
  std::vector<double> u(g.n());
  for (int i = 0; i < g.n(); ++i) u[i] = f(g.x(i));
  return u;
}

double max_abs(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

WindowedFunction comparison_window(double s, double h, double lo, double hi) {
  FracParams p(s, 1);
  ComparisonFunction f(p);
  const double C = f.normalization(), a = p.a();
  auto fl = [=](double x) { return C * std::pow(-x, a - 1.0) / (1.0 - a); };
  auto fr = [=](double x) { return 1.0 - C * std::pow(x, a - 1.0) / (1.0 - a); };
  return WindowedFunction::sample([f](double x) { return f(x); }, lo, hi, h, fl, fr);
}

}  // namespace

TEST_CASE("periodic grid validation") {
  CHECK_THROWS_AS(PeriodicGrid1D(12), ConfigError);
  CHECK_THROWS_AS(PeriodicGrid1D(8), ConfigError);
  CHECK_THROWS_AS(PeriodicGrid1D(32, 0.0), ConfigError);
  PeriodicGrid1D g(32, 2.0);
  CHECK(g.h() == doctest::Approx(4.0 * std::numbers::pi / 32));
  CHECK(g.wavenumber(1) == doctest::Approx(0.5));
  CHECK(g.wavenumber(31) == doctest::Approx(-0.5));
}

TEST_CASE("symbol operator: constants, eigenfunctions, linearity") {
  for (double s : {0.25, 0.5, 0.75}) {
    PeriodicGrid1D g(64);
    const auto one = sample(g, [](double) { return 1.0; });
    CHECK(max_abs(frac_lap_symbol(g, one, s)) < 1e-13);
    for (int k : {1, 3, 7}) {
      const auto u = sample(g, [k](double x) { return std::cos(k * x); });
      const auto r = frac_lap_symbol(g, u, s);
      for (int i = 0; i < g.n(); ++i) {
        CHECK(r[i] == doctest::Approx(std::pow(k, 2.0 * s) * u[i]).epsilon(1e-12).scale(1.0));
      }
    }
    std::mt19937_64 rng(1);
    std::normal_distribution<double> nd;
    std::vector<double> u(g.n()), w(g.n()), c(g.n());
    for (int i = 0; i < g.n(); ++i) {
      u[i] = nd(rng);
      w[i] = nd(rng);
      c[i] = 2.0 * u[i] - 3.0 * w[i];
    }
    const auto ru = frac_lap_symbol(g, u, s), rw = frac_lap_symbol(g, w, s);
    const auto rc = frac_lap_symbol(g, c, s);
    for (int i = 0; i < g.n(); ++i) CHECK(rc[i] == doctest::Approx(2.0 * ru[i] - 3.0 * rw[i]).scale(10.0));
  }
  PeriodicGrid1D g2(64, 2.0);
  const auto u = sample(g2, [](double x) { return std::cos(x); });  // k = 1 on a period 4 pi
  const auto r = frac_lap_symbol(g2, u, 0.5);
  CHECK(r[5] == doctest::Approx(u[5]).epsilon(1e-12));
}

TEST_CASE("PV quadrature agrees with the symbol after calibration") {
  for (double s : {0.25, 0.5, 0.75}) {
    PeriodicGrid1D g(128);
    const auto one = sample(g, [](double) { return 1.0; });
    CHECK(max_abs(frac_lap_pv(g, one, s).values) < 1e-10);

    const auto c1 = sample(g, [](double x) { return std::cos(x); });
    const auto pv1 = frac_lap_pv(g, c1, s);
    for (int i = 0; i < g.n(); ++i) CHECK(pv1.values[i] == doctest::Approx(c1[i]).scale(1.0).epsilon(1e-9));
    CHECK_FALSE(pv1.any_warning);
    MESSAGE("s = " << s << " calibrated c = " << pv1.constant << ", closed form "
                   << standard_pv_constant(s));

    std::mt19937_64 rng(9);
    std::normal_distribution<double> nd;
    std::vector<double> u(g.n(), 0.0);
    for (int k = 1; k <= g.n() / 8; ++k) {
      const double a = nd(rng), b = nd(rng);
      for (int i = 0; i < g.n(); ++i) u[i] += a * std::cos(k * g.x(i)) + b * std::sin(k * g.x(i));
    }
    const auto sym = frac_lap_symbol(g, u, s);
    const auto pv = frac_lap_pv(g, u, s).values;
    double diff = 0.0;
    for (int i = 0; i < g.n(); ++i) diff = std::max(diff, std::abs(sym[i] - pv[i]));
    CHECK(diff <= 0.02 * max_abs(sym));
  }
}

TEST_CASE("PV raw symbol converges under oversampling") {
  const double s = 0.75;
  PeriodicGrid1D g(64);
  double prev = 1e300;
  for (int q : {1, 2, 4}) {
    PvOptions o;
    o.oversample = q;
    const auto lam = pv_raw_symbol(g, s, o);
    const double c = pv_calibration(g, s, o);
    double worst = 0.0;
    for (int m = 1; m <= 8; ++m) worst = std::max(worst, std::abs(c * lam[m] / std::pow(m, 2.0 * s) - 1.0));
    CHECK(worst < prev);
    prev = worst;
  }
}

TEST_CASE("PV flags sample discontinuities") {
  PeriodicGrid1D g(64);
  const auto step = sample(g, [](double x) { return x < 0.3 ? 0.0 : 1.0; });
  const auto r = frac_lap_pv(g, step, 0.5);
  CHECK(r.any_warning);
  int flagged = 0;
  for (char w : r.warnings) flagged += w;
  CHECK(flagged <= 4);
}

TEST_CASE("windowed PV reproduces the half-Laplacian of the arctangent profile") {
  // s = 1/2: f = 1/2 + atan(x)/pi and (-Delta)^{1/2} f = x / (pi (1 + x^2))
  const double s = 0.5;
  const auto w = comparison_window(s, 0.05, -300.0, 300.0);
  std::vector<int> nodes;
  for (double x : {-50.0, -10.0, -2.0, -0.5, 0.0, 0.7, 3.0, 20.0}) nodes.push_back(w.nearest(x));
  const auto r = frac_lap_pv_window(w, s, nodes, standard_pv_constant(s));
  for (std::size_t e = 0; e < nodes.size(); ++e) {
    const double x = w.x(nodes[e]);
    const double exact = x / (std::numbers::pi * (1.0 + x * x));
    CHECK(r.values[e] == doctest::Approx(exact).epsilon(1e-4).scale(1e-6));
  }
  CHECK_FALSE(r.any_warning);
  std::vector<int> edge{2};
  CHECK_THROWS_AS(frac_lap_pv_window(w, s, edge, 1.0), RangeError);
}

TEST_CASE("comparison function satisfies (-Delta)^s f >= -c f with a stable constant") {
  for (double s : {0.25, 0.5, 0.75}) {
    std::vector<double> cs;
    for (int ref : {1, 2}) {
      const double h = 10.0 / 49.0 / (2.0 * ref);
      const auto w = comparison_window(s, h, -10.0 - h * std::round(190.0 / h), 200.0);
      std::vector<int> nodes;
      for (int i = 0; i < 50; ++i) nodes.push_back(w.nearest(-10.0 + 10.0 * i / 49.0));
      const auto r = frac_lap_pv_window(w, s, nodes, standard_pv_constant(s));
      double c = 0.0;
      for (std::size_t e = 0; e < nodes.size(); ++e) c = std::max(c, -r.values[e] / w.u[nodes[e]]);
      for (std::size_t e = 0; e < nodes.size(); ++e) CHECK(r.values[e] >= -c * w.u[nodes[e]] * (1 + 1e-12));
      cs.push_back(c);
    }
    CHECK(std::isfinite(cs[0]));
    CHECK(cs[0] > 0.0);
    CHECK(cs[1] == doctest::Approx(cs[0]).epsilon(0.1));
  }
}
