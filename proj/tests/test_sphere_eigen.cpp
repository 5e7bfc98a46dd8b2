#include <cmath>
#include <numbers>

#include "doctest.h"
#include "fraclab/errors.hpp"
#include "fraclab/sphere_eigen.hpp"

using namespace fraclab;

namespace {

constexpr double kPi = std::numbers::pi;

double rel_err(double x, double ref) { return std::abs(x - ref) / std::abs(ref); }

}  // namespace

TEST_CASE("hemisphere mesh: mass totals and stiffness structure") {
  for (double s : {0.25, 0.5, 0.75}) {
    const FracParams p2(s, 2), p1(s, 1);
    const double a = p2.a();
    HemisphereMesh m2(p2, 16, 32);
    double tot = 0.0;
    for (double v : m2.mass()) tot += v;
    CHECK(tot == doctest::Approx(2.0 * kPi / (a + 1.0)).epsilon(1e-12));

    HemisphereMesh m1(p1, 16);
    tot = 0.0;
    for (double v : m1.mass()) tot += v;
    const double ref = std::sqrt(kPi) * std::tgamma(0.5 * (a + 1.0)) / std::tgamma(0.5 * a + 1.0);
    CHECK(tot == doctest::Approx(ref).epsilon(1e-10));

    const auto& K = m2.stiffness();
    const Eigen::SparseMatrix<double> KT = K.transpose();
    CHECK((K - KT).norm() < 1e-12 * K.norm());
    const Eigen::VectorXd rs = K * Eigen::VectorXd::Ones(K.rows());
    CHECK(rs.cwiseAbs().maxCoeff() < 1e-10 * K.norm());
    for (int k = 0; k < K.outerSize(); ++k) {
      for (Eigen::SparseMatrix<double>::InnerIterator it(K, k); it; ++it) {
        if (it.row() != it.col()) CHECK(it.value() <= 0.0);
      }
    }
    CHECK(m2.equator_nodes().size() == 32);
    CHECK(m1.equator_angles().size() == 2);
  }
  CHECK_THROWS_AS(HemisphereMesh(FracParams(0.5, 3), 8, 8), ConfigError);
  CHECK_THROWS_AS(HemisphereMesh(FracParams(0.5, 2), 8, 7), ConfigError);
  CHECK_THROWS_AS(HemisphereMesh(FracParams(0.5, 2), 1, 8), ConfigError);
}

TEST_CASE("equator regions: open arcs, disjointness, rotation") {
  const auto half = EquatorRegion::arc(0.0, kPi / 2);
  CHECK(half.contains(0.3));
  CHECK(half.contains(2 * kPi - 0.3));
  CHECK_FALSE(half.contains(kPi / 2));
  CHECK_FALSE(half.contains(kPi));
  CHECK(EquatorRegion::full().contains(kPi));
  CHECK(EquatorRegion::full().measure() == doctest::Approx(2 * kPi));
  CHECK_FALSE(EquatorRegion::empty().contains(0.0));
  CHECK(half.rotated(kPi).contains(kPi + 0.1));
  EquatorRegion two = EquatorRegion::arc(0.0, 1.0);
  two.add(kPi, kPi - 1.0);  // touching arcs are allowed
  CHECK(two.measure() == doctest::Approx(2 * kPi));
  CHECK_THROWS_AS(two.add(0.5, 0.1), ConfigError);
  CHECK_THROWS_AS(EquatorRegion::arc(0.0, -1.0), ConfigError);
  CHECK_THROWS_AS(CapPair(2.0, 2.0), ConfigError);
}

TEST_CASE("half circle reduction reproduces the one-dimensional landmarks") {
  for (double s : {0.25, 0.5, 0.75}) {
    HemisphereMesh m(FracParams(s, 1), 256);
    const auto e0 = lambda1(m, EquatorRegion::empty());
    const auto e1 = lambda1(m, EquatorRegion::endpoints(true, false));
    const auto e2 = lambda1(m, EquatorRegion::endpoints(false, true));
    const auto ef = lambda1(m, EquatorRegion::endpoints(true, true));
    CHECK(rel_err(e0.lambda, 2 * s) < 0.01);
    CHECK(rel_err(e1.lambda, s * (1 - s)) < 0.01);
    CHECK(e2.lambda == doctest::Approx(e1.lambda).epsilon(1e-9));
    CHECK(ef.lambda == 0.0);
    CHECK(e0.sign_definite);
    CHECK(e1.sign_definite);
  }
}

TEST_CASE("half circle errors shrink under refinement") {
  for (double s : {0.25, 0.75}) {
    double prev0 = 0.0, prev1 = 0.0;
    for (int nt : {64, 128, 256}) {
      HemisphereMesh m(FracParams(s, 1), nt);
      const double e0 = rel_err(lambda1(m, EquatorRegion::empty()).lambda, 2 * s);
      const double e1 = rel_err(lambda1(m, EquatorRegion::endpoints(true, false)).lambda, s * (1 - s));
      if (prev0 > 0.0) {
        CHECK(prev0 / e0 >= 1.8);
        CHECK(prev1 / e1 >= 1.8);
      }
      prev0 = e0;
      prev1 = e1;
    }
  }
}

TEST_CASE("hemisphere landmarks at N = 2") {
  for (double s : {0.25, 0.5, 0.75}) {
    HemisphereMesh m(FracParams(s, 2), 32, 64);
    const auto full = lambda1(m, EquatorRegion::full());
    CHECK(full.lambda == 0.0);
    const double c = full.eigenfunction.front();
    for (double v : full.eigenfunction) CHECK(v == doctest::Approx(c));
    const auto e0 = lambda1(m, EquatorRegion::empty());
    const auto eh = lambda1(m, EquatorRegion::arc(0.0, kPi / 2));
    MESSAGE("s = " << s << " lambda(empty) = " << e0.lambda << " lambda(half) = " << eh.lambda);
    CHECK(rel_err(e0.lambda, 4 * s) < 0.02);
    CHECK(rel_err(eh.lambda, s * (2 - s)) < 0.04);
    CHECK(e0.sign_definite);
    CHECK(eh.sign_definite);
    CHECK(eh.eigenfunction.front() > 0.0);
  }
}

TEST_CASE("eigenvalue decreases along nested arcs") {
  HemisphereMesh m(FracParams(0.5, 2), 16, 64);
  double prev = 1e300;
  for (double t : {0.0, 0.3, 0.7, 1.2, 1.8, 2.5, 3.0, kPi}) {
    const auto r = lambda1(m, EquatorRegion::arc(0.4, t));
    CHECK(r.lambda <= prev + 1e-10);
    CHECK(r.sign_definite);
    prev = r.lambda;
  }
}

TEST_CASE("eigenvalue is invariant under mesh-aligned rotations") {
  HemisphereMesh m(FracParams(0.3, 2), 16, 32);
  const double dph = 2 * kPi / 32;
  EquatorRegion w = EquatorRegion::arc(0.0, 1.0);
  w.add(kPi, 0.6);
  const double l0 = lambda1(m, w).lambda;
  for (int r : {1, 5, 16, 27}) {
    CHECK(lambda1(m, w.rotated(r * dph)).lambda == doctest::Approx(l0).epsilon(1e-8));
  }
}

TEST_CASE("point constraints: positive capacity only for s > 1/2") {
  // s = 0.75: two equator points keep the eigenvalue bounded below, near (2s - 1)(N - 1)
  {
    double prev = 0.0;
    for (int nt : {16, 32, 64}) {
      HemisphereMesh m(FracParams(0.75, 2), nt, 2 * nt);
      const double l = lambda1_codim1(m).lambda;
      MESSAGE("codim-1 s = 0.75, mesh " << nt << ": " << l);
      CHECK(l > 0.3);
      if (prev > 0.0) CHECK(std::abs(l - 0.5) < std::abs(prev - 0.5));
      prev = l;
    }
  }
  // s <= 1/2: the same constraint collapses toward zero
  // (logarithmically slow at s = 1/2)
  for (double s : {0.3, 0.5}) {
    double first = 0.0, prev = 1e300;
    for (int nt : {16, 32, 64}) {
      HemisphereMesh m(FracParams(s, 2), nt, 2 * nt);
      const double l = lambda1_points(m, {kPi / 2, 3 * kPi / 2}).lambda;
      CHECK(l < prev);
      if (first == 0.0) first = l;
      prev = l;
    }
    CHECK(prev < 0.75 * first);
  }
  CHECK_THROWS_AS(lambda1_codim1(HemisphereMesh(FracParams(0.5, 2), 8, 16)), ConfigError);
}

TEST_CASE("cap pairs: endpoint partitions and scan bounds") {
  for (double s : {0.25, 0.5, 0.75}) {
    HemisphereMesh m(FracParams(s, 2), 32, 64);
    const auto deg = evaluate_caps(m, CapPair(0.0, kPi));
    const auto cut = evaluate_caps(m, CapPair(kPi / 2, kPi / 2));
    CHECK(deg.gamma2 == 0.0);
    CHECK(rel_err(deg.mean_gamma, s) < 0.02);
    CHECK(rel_err(cut.mean_gamma, s) < 0.04);
    CHECK(cut.lambda1_omega1 == doctest::Approx(cut.lambda1_omega2).epsilon(1e-8));
  }
  HemisphereMesh m(FracParams(0.5, 2), 16, 32);
  std::vector<double> radii;
  for (int k = 0; k <= 8; ++k) radii.push_back(kPi * k / 8);
  const auto res = nu_acf_caps(m, radii);
  CHECK(res.table.size() == 45);
  CHECK(res.nu_hat > 0.0);
  CHECK(res.nu_hat <= 0.5 + 0.02);
  for (const auto& row : res.table) {
    CHECK(row.mean_gamma >= res.nu_hat);
    CHECK(row.t1 + row.t2 <= kPi + 1e-9);
  }
  CHECK(std::isfinite(res.eigenfunction_overlap));
  CHECK_THROWS_AS(nu_acf_caps(m, {}), ConfigError);
  CHECK_THROWS_AS(nu_acf_caps(m, {4.0}), ConfigError);
}
