#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "fraclab/errors.hpp"
#include "fraclab/extension_grid.hpp"

using namespace fraclab;

namespace {

Eigen::VectorXd as_vec(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

// Bounded L_a-harmonic extension of cos(k x): cos(k x) phi(k y),
// phi(t) = 2^{1-s} / Gamma(s) t^s K_s(t), phi(0) = 1.
double bessel_profile(double t, double s) {
  if (t == 0.0) return 1.0;
  return std::pow(2.0, 1.0 - s) / std::tgamma(s) * std::pow(t, s) * std::cyl_bessel_k(s, t);
}

// -lim y^a d_y phi(k y) = k^{2s} 2^{1-2s} Gamma(1-s) / Gamma(s)
double bessel_dtn_constant(double s) {
  return std::pow(2.0, 1.0 - 2.0 * s) * std::tgamma(1.0 - s) / std::tgamma(s);
}

double max_interior_residual(const HalfSpaceGrid& g, const SparseMatrix& A, const Field& f,
                             bool include_trace) {
  const Eigen::VectorXd r = A * as_vec(f.values());
  double worst = 0.0;
  for (std::size_t n = 0; n < g.num_nodes(); ++n) {
    if (g.on_lateral(n) || g.on_top(n)) continue;
    if (!include_trace && n < g.layer_size()) continue;
    worst = std::max(worst, std::abs(r[static_cast<Eigen::Index>(n)]));
  }
  return worst;
}

}  // namespace

TEST_CASE("grid construction and face weights") {
  FracParams half(0.5, 1);
  HalfSpaceGrid g({1, 1.0, 2.0, 9, 8, 1.0}, half);
  for (int j = 0; j < g.ny(); ++j) {
    CHECK(g.face_weight(j) == doctest::Approx(1.0));
    CHECK(g.vertical_weight(j) == doctest::Approx(1.0));
    CHECK(g.y()[j + 1] - g.y()[j] == doctest::Approx(2.0 / 8));
  }
  for (double s : {0.2, 0.5, 0.8}) {
    FracParams p(s, 1);
    HalfSpaceGrid gp({1, 1.0, 1.0, 8, 16, std::nullopt}, p);
    const double h = gp.y()[1];
    CHECK(gp.face_weight(0) == doctest::Approx(std::pow(h, p.a()) / (1.0 + p.a())));
    CHECK(gp.grading() == doctest::Approx(std::max(1.0, 2.0 / (1.0 + p.a()))));
    for (int j = 0; j < gp.ny(); ++j) {
      CHECK(gp.face_weight(j) > 0.0);
      CHECK(std::isfinite(gp.face_weight(j)));
      CHECK(gp.y()[j + 1] > gp.y()[j]);
    }
    CHECK(gp.y()[0] == 0.0);
    CHECK(gp.y().back() == doctest::Approx(1.0));
  }
  CHECK_THROWS_AS(HalfSpaceGrid({1, 1.0, 1.0, 3, 8, std::nullopt}, half), ConfigError);
  CHECK_THROWS_AS(HalfSpaceGrid({1, 0.0, 1.0, 8, 8, std::nullopt}, half), ConfigError);
  CHECK_THROWS_AS(HalfSpaceGrid({3, 1.0, 1.0, 8, 8, std::nullopt}, half), ConfigError);
  CHECK_THROWS_AS(HalfSpaceGrid({1, 1.0, 1.0, 8, 8, 0.5}, half), ConfigError);
}

TEST_CASE("node indexing") {
  FracParams p(0.4, 2);
  HalfSpaceGrid g({2, 1.0, 1.0, 5, 4, std::nullopt}, p);
  CHECK(g.num_nodes() == 5u * 5u * 5u);
  const std::size_t n = g.index(3, 1, 2);
  CHECK(n == (2u * 5u + 1u) * 5u + 3u);
  const auto u = g.unpack(n);
  CHECK(u[0] == 3);
  CHECK(u[1] == 1);
  CHECK(u[2] == 2);
  const auto X = g.coords(n);
  CHECK(X[0] == doctest::Approx(0.5));
  CHECK(X[1] == doctest::Approx(-0.5));
  CHECK(X[2] == doctest::Approx(g.y()[2]));
}

TEST_CASE("operator kernel, exact profiles and symmetry") {
  for (int d : {1, 2}) {
    for (double s : {0.25, 0.5, 0.75}) {
      FracParams p(s, d);
      HalfSpaceGrid g({d, 1.0, 1.5, d == 1 ? 17 : 9, 12, std::nullopt}, p);
      const auto A = assemble_La(g);
      const double scale = A.diagonal().cwiseAbs().maxCoeff();

      const Field c = Field::sample(g, [](std::span<const double>) { return 3.0; });
      CHECK((A * as_vec(c.values())).cwiseAbs().maxCoeff() <= 1e-12 * scale);

      const Field lin = Field::sample(g, [](std::span<const double> X) { return X[0]; });
      CHECK(max_interior_residual(g, A, lin, true) <= 1e-12 * scale);

      // y^{2s} is L_a-harmonic; the harmonic vertical weights reproduce its flux exactly
      const Field vt = Field::sample(g, [&](std::span<const double> X) {
        return std::pow(X.back(), 2.0 * s);
      });
      CHECK(max_interior_residual(g, A, vt, false) <= 1e-10 * scale);

      std::mt19937_64 rng(5 + d);
      std::normal_distribution<double> nd;
      Eigen::VectorXd u(g.num_nodes()), w(g.num_nodes());
      for (Eigen::Index i = 0; i < u.size(); ++i) {
        u[i] = nd(rng);
        w[i] = nd(rng);
      }
      const double uAw = u.dot(A * w), wAu = w.dot(A * u);
      CHECK(std::abs(uAw - wAu) <= 1e-12 * std::max(std::abs(uAw), 1.0) * 10);
      CHECK(u.dot(A * u) >= 0.0);
      for (int k = 0; k < A.outerSize(); ++k) {
        for (SparseMatrix::InnerIterator it(A, k); it; ++it) {
          if (it.row() != it.col()) CHECK(it.value() <= 0.0);
        }
      }
    }
  }
}

TEST_CASE("matched trace stencil") {
  for (double s : {0.25, 0.5, 0.75}) {
    FracParams p(s, 1);
    HalfSpaceGrid g({1, 1.0, 1.0, 9, 10, std::nullopt}, p);
    const Field vt = Field::sample(g, [&](std::span<const double> X) {
      return std::pow(X.back(), 2.0 * s);
    });
    for (double v : dtn_trace(g, vt)) CHECK(v == doctest::Approx(-2.0 * s).epsilon(1e-13));
    const Field c = Field::sample(g, [](std::span<const double>) { return -1.25; });
    for (double v : dtn_trace(g, c)) CHECK(v == 0.0);
  }
}

TEST_CASE("solve_linear: constants and the y^{2s} profile") {
  for (int d : {1, 2}) {
    for (double s : {0.25, 0.5, 0.75}) {
      FracParams p(s, d);
      HalfSpaceGrid g({d, 1.0, 1.0, d == 1 ? 33 : 13, 16, std::nullopt}, p);
      const auto A = assemble_La(g);
      const Field c = solve_linear(g, A, BoundaryData::constant(g, 0.7));
      for (double v : c.values()) CHECK(v == doctest::Approx(0.7).epsilon(1e-9));

      auto bd = BoundaryData::from_function(g, [&](std::span<const double> X) {
        return std::pow(X.back(), 2.0 * s);
      });
      bd.g0.assign(g.layer_size(), -2.0 * s);
      LinearSolveInfo info;
      const Field v = solve_linear(g, A, bd, {}, &info);
      CHECK(info.residual <= 1e-10);
      double err = 0.0;
      for (std::size_t n = 0; n < g.num_nodes(); ++n) {
        err = std::max(err, std::abs(v[n] - std::pow(g.coords(n).back(), 2.0 * s)));
      }
      CHECK(err < 1e-7);
    }
  }
}

TEST_CASE("solve_linear converges at second order on the Bessel extension") {
  for (double s : {0.25, 0.5, 0.75}) {
    FracParams p(s, 1);
    const double k = 1.0;
    auto exact = [&](std::span<const double> X) {
      return std::cos(k * X[0]) * bessel_profile(k * X[1], s);
    };
    std::vector<double> errs;
    for (int m : {1, 2, 4}) {
      HalfSpaceGrid g({1, std::numbers::pi, 3.0, 16 * m + 1, 12 * m, std::nullopt}, p);
      const auto A = assemble_La(g);
      auto bd = BoundaryData::from_function(g, exact);
      bd.g0.resize(g.layer_size());
      for (std::size_t t = 0; t < g.layer_size(); ++t) {
        bd.g0[t] = bessel_dtn_constant(s) * std::pow(k, 2.0 * s) * std::cos(k * g.x()[t]);
      }
      const Field v = solve_linear(g, A, bd);
      double err = 0.0;
      for (std::size_t n = 0; n < g.num_nodes(); ++n) {
        err = std::max(err, std::abs(v[n] - exact(g.coords(n))));
      }
      errs.push_back(err);
    }
    MESSAGE("s = " << s << " errors " << errs[0] << " " << errs[1] << " " << errs[2]);
    CHECK(errs[0] / errs[1] >= 1.8);
    CHECK(errs[1] / errs[2] >= 1.8);
  }
}

TEST_CASE("DtN of cos(kx) scales like k^{2s}") {
  for (double s : {0.25, 0.5, 0.75}) {
    FracParams p(s, 1);
    HalfSpaceGrid g({1, std::numbers::pi, 3.0 * std::numbers::pi, 129, 96, std::nullopt}, p);
    const auto A = assemble_La(g);
    std::vector<double> amp;
    for (double k : {1.0, 2.0, 4.0}) {
      auto exact = [&](std::span<const double> X) {
        return std::cos(k * X[0]) * bessel_profile(k * X[1], s);
      };
      auto bd = BoundaryData::from_function(g, exact);
      bd.dirichlet_trace = true;
      const Field v = solve_linear(g, A, bd);
      const auto dtn = dtn_trace(g, v);
      const std::size_t mid = g.layer_size() / 2;  // x = 0
      amp.push_back(dtn[mid]);
    }
    CHECK(amp[1] / amp[0] == doctest::Approx(std::pow(2.0, 2.0 * s)).epsilon(0.03));
    CHECK(amp[2] / amp[1] == doctest::Approx(std::pow(2.0, 2.0 * s)).epsilon(0.03));
    CHECK(amp[0] == doctest::Approx(bessel_dtn_constant(s)).epsilon(0.05));
  }
}

TEST_CASE("discrete maximum principle") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 6; ++trial) {
    const double s = 0.2 + 0.1 * trial;
    const int d = trial % 2 == 0 ? 1 : 2;
    FracParams p(s, d);
    HalfSpaceGrid g({d, 1.0, 1.0, d == 1 ? 25 : 9, 10, std::nullopt}, p);
    const auto A = assemble_La(g);
    BoundaryData bd;
    bd.dirichlet.resize(g.num_nodes());
    for (double& v : bd.dirichlet) v = u(rng);
    bd.m.resize(g.layer_size());
    for (double& v : bd.m) v = 50.0 * u(rng);
    const Field v = solve_linear(g, A, bd);
    for (double x : v.values()) CHECK(x >= -1e-12);
  }
}

TEST_CASE("boundary data validation") {
  FracParams p(0.5, 1);
  HalfSpaceGrid g({1, 1.0, 1.0, 9, 8, std::nullopt}, p);
  const auto A = assemble_La(g);
  auto bd = BoundaryData::constant(g, 1.0);
  bd.m.assign(g.layer_size(), -1.0);
  CHECK_THROWS_AS(solve_linear(g, A, bd), DomainError);
  bd.m.assign(3, 1.0);
  CHECK_THROWS_AS(solve_linear(g, A, bd), ConfigError);
  std::vector<double> bad(g.num_nodes(), 0.0);
  bad[3] = std::nan("");
  CHECK_THROWS_AS(Field(g, bad), DomainError);
  auto ok = BoundaryData::constant(g, 1.0);
  CHECK_THROWS_AS(solve_linear(g, A, ok, {LinearMethod::pcg, 1e-30, 1}), ConvergenceError);
}

TEST_CASE("trace Schur reduction matches the full solve") {
  for (double s : {0.3, 0.7}) {
    FracParams p(s, 1);
    HalfSpaceGrid g({1, 1.0, 1.0, 21, 12, std::nullopt}, p);
    const auto A = assemble_La(g);
    auto bd = BoundaryData::from_function(g, [](std::span<const double> X) {
      return 1.0 + 0.5 * X[0] + X[1];
    });
    bd.g0.resize(g.layer_size());
    bd.m.resize(g.layer_size());
    for (std::size_t t = 0; t < g.layer_size(); ++t) {
      bd.g0[t] = std::sin(3.0 * g.x()[t]);
      bd.m[t] = 2.0 + g.x()[t];
    }
    const Field full = solve_linear(g, A, bd, {LinearMethod::direct});
    TraceReducedSystem red(g, A, bd.dirichlet_mask(g));
    const auto& T = red.trace_nodes();
    Eigen::MatrixXd K = red.schur();
    Eigen::VectorXd rhs = -red.lift(bd.dirichlet);
    for (std::size_t k = 0; k < T.size(); ++k) {
      const double area = g.trace_area(T[k]);
      K(k, k) += bd.m[T[k]] * area;
      rhs[k] += bd.g0[T[k]] * area;
    }
    const Eigen::VectorXd vT = K.llt().solve(rhs);
    const auto v = red.reconstruct(vT, bd.dirichlet);
    for (std::size_t n = 0; n < v.size(); ++n) CHECK(v[n] == doctest::Approx(full[n]).epsilon(1e-9));
  }
}

TEST_CASE("PCG and direct factorization agree") {
  for (double s : {0.3, 0.75}) {
    FracParams p(s, 2);
    HalfSpaceGrid g({2, 1.0, 1.0, 17, 16, std::nullopt}, p);
    const auto A = assemble_La(g);
    auto bd = BoundaryData::from_function(g, [](std::span<const double> X) {
      return 1.0 + X[0] * X[1] + X[2];
    });
    bd.g0.assign(g.layer_size(), 0.3);
    bd.m.assign(g.layer_size(), 4.0);
    LinearSolveInfo info;
    const Field it = solve_linear(g, A, bd, {LinearMethod::pcg}, &info);
    const Field dir = solve_linear(g, A, bd, {LinearMethod::direct});
    MESSAGE("s = " << s << " pcg iterations " << info.iterations);
    CHECK(info.residual <= 1e-10);
    double diff = 0.0;
    for (std::size_t n = 0; n < g.num_nodes(); ++n) diff = std::max(diff, std::abs(it[n] - dir[n]));
    CHECK(diff < 1e-6);
  }
}
