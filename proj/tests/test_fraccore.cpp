#include <array>
#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/special_functions/beta.hpp>
#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "fraclab/errors.hpp"
#include "fraclab/fraccore.hpp"

using namespace fraclab;

namespace {

// f(x) = 1/2 + sign(x)/2 * I_{x^2/(1+x^2)}(1/2, s), via u = t^2 / (1 + t^2).
// The reflected form I_{1/(1+x^2)}(s, 1/2) keeps the far tails accurate.
double comparison_oracle(double x, double s) {
  const double w = 1.0 / (1.0 + x * x);
  const double lower = 0.5 * boost::math::ibeta(s, 0.5, w);
  return x >= 0.0 ? 1.0 - lower : lower;
}

}  // namespace

TEST_CASE("FracParams validation") {
  CHECK_THROWS_AS(FracParams(0.0, 1), ConfigError);
  CHECK_THROWS_AS(FracParams(1.0, 1), ConfigError);
  CHECK_THROWS_AS(FracParams(0.5, 0), ConfigError);
  FracParams p(0.3, 2);
  CHECK(p.a() == 1.0 - 2.0 * 0.3);
  CHECK(p.a() > -1.0);
  CHECK(p.a() < 1.0);
  CHECK_THROWS_AS(FracParams(0.75, 1).require_kernel_admissible(), ConfigError);
  CHECK_NOTHROW(FracParams(0.25, 1).require_kernel_admissible());
}

TEST_CASE("gamma_map landmarks") {
  for (double s : {0.25, 0.5, 0.75}) {
    for (int N : {1, 2, 3}) {
      FracParams p(s, N);
      // for N < 2s the positive root at t = 0 is 2s - N rather than 0
      CHECK(gamma_map(0.0, p) == doctest::Approx(std::max(0.0, 2.0 * s - N)).epsilon(1e-15));
      CHECK(gamma_map(2.0 * s * N, p) == doctest::Approx(2.0 * s).epsilon(1e-12));
      CHECK(gamma_map(s * (N - s), p) == doctest::Approx(s).epsilon(1e-12));
      CHECK(gamma_inverse(0.0, p) == 0.0);
      CHECK(gamma_inverse(2.0 * s, p) == doctest::Approx(2.0 * s * N).epsilon(1e-12));
      if (s > 0.5) {
        CHECK(gamma_inverse(2.0 * s - 1.0, p) ==
              doctest::Approx((2.0 * s - 1.0) * (N - 1)).epsilon(1e-12));
      }
    }
  }
  CHECK_THROWS_AS(gamma_map(-1e-3, FracParams(0.5, 2)), DomainError);
  CHECK_THROWS_AS(gamma_inverse(-1.0, FracParams(0.5, 2)), DomainError);
}

TEST_CASE("gamma_map solves the quadratic and is increasing") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> ts(0.0, 100.0);
  for (double s : {0.1, 0.5, 0.9}) {
    for (int N : {1, 2, 3}) {
      FracParams p(s, N);
      double prev = -1.0;
      for (int i = 0; i <= 200; ++i) {
        const double t = 0.5 * i;
        const double g = gamma_map(t, p);
        CHECK(g >= 0.0);
        CHECK(g > prev);
        prev = g;
        if (t > 0.0) CHECK(g * (g + N - 2.0 * s) == doctest::Approx(t).epsilon(1e-10));
      }
      for (int i = 0; i < 50; ++i) {
        // gamma_map is the inverse on the branch g >= max(0, 2s - N)
        const double g = std::max(0.0, 2.0 * s - N) + ts(rng) * 0.1;
        CHECK(gamma_map(gamma_inverse(g, p), p) == doctest::Approx(g).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("regularized kernel values") {
  FracParams p(0.5, 2);
  RegularizedKernel k(1.0, p);
  std::array<double, 3> origin{0.0, 0.0, 0.0};
  CHECK(k(origin) == doctest::Approx(1.5));
  for (double s : {0.25, 0.5, 0.75}) {
    for (int N : {1, 2, 3}) {
      FracParams q(s, N);
      if (!(N > 2.0 * s)) continue;
      RegularizedKernel kk(1.0, q);
      CHECK(kk.radial(1.0) == doctest::Approx(1.0));
      CHECK(kk.radial(2.0) == doctest::Approx(std::pow(2.0, 2.0 * s - N)));
    }
  }
  CHECK_THROWS_AS(RegularizedKernel(1.0, FracParams(0.75, 1)), ConfigError);
  CHECK_THROWS_AS(RegularizedKernel(0.0, p), ConfigError);
}

TEST_CASE("regularized kernel is C1 at the seam") {
  for (double s : {0.25, 0.75}) {
    for (int N : {1, 2, 3}) {
      FracParams p(s, N);
      if (!(N > 2.0 * s)) continue;
      const double eps = 0.7;
      RegularizedKernel k(eps, p);
      CHECK(k.radial(eps * (1 - 1e-12)) == doctest::Approx(k.radial(eps)).epsilon(1e-10));
      double prev_jump = 1e300;
      for (double h : {1e-2, 5e-3, 2.5e-3}) {
        const double left = (k.radial(eps) - k.radial(eps - h)) / h;
        const double right = (k.radial(eps + h) - k.radial(eps)) / h;
        const double jump = std::abs(right - left);
        // first-order difference quotients: a C1 seam leaves an O(h) jump
        if (prev_jump < 1e299) CHECK(jump / prev_jump < 0.6);
        prev_jump = jump;
      }
      CHECK(k.radial_derivative(eps * (1 - 1e-14)) ==
            doctest::Approx(k.radial_derivative(eps)).epsilon(1e-10));
    }
  }
}

TEST_CASE("regularized kernel increases as eps decreases") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> r(0.0, 3.0);
  for (double s : {0.25, 0.5, 0.75}) {
    for (int N : {1, 2, 3}) {
      FracParams p(s, N);
      if (!(N > 2.0 * s)) continue;
      const std::array<double, 5> eps{2.0, 1.0, 0.5, 0.1, 0.01};
      for (int t = 0; t < 200; ++t) {
        const double x = r(rng);
        double prev = 0.0;
        for (double e : eps) {
          const double v = RegularizedKernel(e, p).radial(x);
          CHECK(v >= prev * (1 - 1e-14));
          prev = v;
        }
        if (x > 0.01) CHECK(prev == doctest::Approx(std::pow(x, 2.0 * s - N)));
      }
    }
  }
}

TEST_CASE("named solutions: values, degrees and errors") {
  FracParams p(0.5, 1);
  NamedSolution hs(SolutionTag::halfspace, p);
  std::array<double, 2> X{1.0, 0.0};
  CHECK(hs.eval(X) == doctest::Approx(1.0));
  X = {-1.0, 0.0};
  CHECK(hs.eval(X) == 0.0);

  NamedSolution cd(SolutionTag::codim1, FracParams(0.75, 1));
  X = {1.0, 0.0};
  CHECK(cd.eval(X) == doctest::Approx(1.0));
  CHECK(cd.degree() == doctest::Approx(0.5));

  NamedSolution vt(SolutionTag::vanish_trace, FracParams(0.3, 2));
  std::array<double, 3> X3{0.4, -2.0, 0.0};
  CHECK(vt.eval(X3) == 0.0);

  CHECK_THROWS_AS(NamedSolution(SolutionTag::codim1, FracParams(0.5, 1)), ConfigError);
  CHECK_THROWS_AS(NamedSolution(SolutionTag::fundamental, FracParams(0.75, 1)), ConfigError);
  NamedSolution fu(SolutionTag::fundamental, FracParams(0.25, 1));
  std::array<double, 2> zero{0.0, 0.0};
  CHECK_THROWS_AS(fu.eval(zero), SingularityError);
  std::array<double, 3> wrong{0.0, 0.0, 1.0};
  CHECK_THROWS_AS(hs.eval(wrong), DomainError);

  CHECK(solution_tag_from_string(to_string(SolutionTag::codim1)) == SolutionTag::codim1);
  CHECK_THROWS_AS(solution_tag_from_string("bogus"), ConfigError);
}

TEST_CASE("named solutions are homogeneous") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (auto tag : {SolutionTag::vanish_trace, SolutionTag::halfspace, SolutionTag::codim1,
                   SolutionTag::fundamental}) {
    for (int N : {1, 2}) {
      const double s = tag == SolutionTag::codim1 ? 0.75 : 0.4;
      FracParams p(s, N);
      NamedSolution sol(tag, p);
      for (int t = 0; t < 30; ++t) {
        std::vector<double> X(N + 1);
        for (int i = 0; i < N; ++i) X[i] = u(rng);
        X[N] = std::abs(u(rng)) + 0.01;
        const double base = sol.eval(X);
        for (double lam : {0.5, 2.0, 3.0}) {
          std::vector<double> Y(X);
          for (double& c : Y) c *= lam;
          CHECK(sol.eval(Y) == doctest::Approx(std::pow(lam, sol.degree()) * base).epsilon(1e-12));
        }
      }
    }
  }
}

TEST_CASE("exact DtN values") {
  for (double s : {0.25, 0.5, 0.75}) {
    FracParams p(s, 1);
    NamedSolution vt(SolutionTag::vanish_trace, p);
    std::array<double, 1> x{0.3};
    CHECK(vt.dtn_exact(x) == doctest::Approx(-2.0 * s));
    NamedSolution hs(SolutionTag::halfspace, p);
    x = {0.5};
    CHECK(hs.dtn_exact(x) == 0.0);
    x = {0.0};
    CHECK_THROWS_AS(hs.dtn_exact(x), DomainError);

    // Independent check of the x1 < 0 value: -y^a d_y v by a small-y difference quotient.
    x = {-0.7};
    const double y = 1e-7;
    std::array<double, 2> X0{-0.7, 0.0}, X1{-0.7, y};
    const double fd = -(hs.eval(X1) - hs.eval(X0)) / std::pow(y, 2.0 * s) * 2.0 * s;
    CHECK(hs.dtn_exact(x) == doctest::Approx(fd).epsilon(1e-4));
  }
  NamedSolution fu(SolutionTag::fundamental, FracParams(0.25, 1));
  std::array<double, 1> x{1.0};
  CHECK_THROWS_AS(fu.dtn_exact(x), NotAvailableError);
}

TEST_CASE("comparison function matches the incomplete beta closed form") {
  for (double s : {0.1, 0.25, 0.5, 0.75, 0.9}) {
    FracParams p(s, 1);
    ComparisonFunction f(p);
    CHECK(f(0.0) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(f(2.0) + f(-2.0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(f(std::numeric_limits<double>::infinity()) == 1.0);
    double prev = 0.0;
    for (double x : {-1e7, -1e3, -50.0, -3.0, -0.2, 0.0, 0.4, 5.0, 80.0, 1e4, 2e6}) {
      const double v = f(x);
      CHECK(v > prev);
      CHECK(v < 1.0);
      CHECK(v == doctest::Approx(comparison_oracle(x, s)).epsilon(1e-8));
      prev = v;
    }
    CHECK(f.normalization() == doctest::Approx(1.0 / boost::math::beta(0.5, s)).epsilon(1e-10));
  }
  FracParams half(0.5, 1);
  CHECK(comparison_f(1.0, half) == doctest::Approx(0.75).epsilon(1e-10));
}

TEST_CASE("comparison function derivative decays like |t|^(a-2)") {
  for (double s : {0.25, 0.5, 0.75}) {
    FracParams p(s, 1);
    ComparisonFunction f(p);
    double lo = 1e300, hi = 0.0;
    for (double t = 50.0; t <= 200.0; t += 10.0) {
      for (double sign : {-1.0, 1.0}) {
        const double x = sign * t;
        const double h = 1e-2;
        const double fd = (f(x + h) - f(x - h)) / (2.0 * h);
        const double ratio = fd * std::pow(t, 2.0 - p.a());
        lo = std::min(lo, ratio);
        hi = std::max(hi, ratio);
      }
    }
    CHECK(hi / lo - 1.0 < 0.01);
  }
}

TEST_CASE("Poisson kernel normalization and scaling") {
  using boost::math::quadrature::exp_sinh;
  for (double s : {0.25, 0.5, 0.75}) {
    FracParams p(s, 1);
    const double y = 0.3;
    exp_sinh<double> q;
    const double half = q.integrate([&](double xi) { return poisson_kernel(xi, y, p); }, 0.0,
                                    std::numeric_limits<double>::infinity());
    CHECK(2.0 * half == doctest::Approx(1.0).epsilon(1e-8));
    CHECK(poisson_kernel(2.0, 2.0, p) == doctest::Approx(0.5 * poisson_kernel(1.0, 1.0, p)));
    CHECK(poisson_kernel(0.7, 1.9, p) ==
          doctest::Approx(poisson_kernel(0.7 / 1.9, 1.0, p) / 1.9).epsilon(1e-13));
    CHECK_THROWS_AS(poisson_kernel(0.0, 0.0, p), DomainError);
  }
  CHECK(poisson_kernel(0.0, 1.0, FracParams(0.5, 1)) == doctest::Approx(1.0 / std::numbers::pi));
}
