#include "fraclab/sphere_eigen.hpp"

#include <Eigen/SparseCholesky>
#include <algorithm>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <numbers>

#include "fraclab/errors.hpp"

namespace fraclab {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kHalfPi = std::numbers::pi / 2.0;

// Integrals in u = pi/2 - theta, so cos(theta) = sin(u) stays accurate near the equator.
double integrate_u(const std::function<double(double)>& f, double u0, double u1) {
  if (u1 <= u0) return 0.0;
  thread_local boost::math::quadrature::tanh_sinh<double> q;
  return q.integrate(f, u0, u1);
}

// int_{th0}^{th1} cos^a over a subinterval of [0, pi/2]
double int_cos_pow(double a, double th0, double th1) {
  return integrate_u([a](double u) { return std::pow(std::sin(u), a); }, kHalfPi - th1, kHalfPi - th0);
}

double wrap_angle(double x) {
  double r = std::fmod(x, 2.0 * kPi);
  if (r < 0.0) r += 2.0 * kPi;
  return r;
}

double angular_distance(double x, double y) {
  const double d = wrap_angle(x - y);
  return std::min(d, 2.0 * kPi - d);
}

}  // namespace

HemisphereMesh::HemisphereMesh(const FracParams& params, int ntheta, int nphi)
    : p_(params), ntheta_(ntheta), nphi_(nphi) {
  if (p_.N() != 1 && p_.N() != 2) throw ConfigError("hemisphere mesh supports N = 1 or N = 2");
  if (ntheta < 2) throw ConfigError("hemisphere mesh needs ntheta >= 2");
  if (p_.N() == 2) {
    if (nphi < 4 || nphi % 2 != 0) throw ConfigError("hemisphere mesh needs an even nphi >= 4");
    build_sphere();
  } else {
    nphi_ = 0;
    build_circle();
  }
}

void HemisphereMesh::build_circle() {
  // theta_k = -pi/2 + k dth, k = 0..2 nt; weight cos^a is even so only |theta| matters
  const double a = p_.a();
  const int nt = ntheta_;
  const int n = 2 * nt + 1;
  const double dth = kHalfPi / nt;
  auto th = [&](int k) { return -kHalfPi + k * dth; };
  auto int_abs = [&](double lo, double hi, auto&& f) {
    // integral over [lo, hi] of an even function given on [0, pi/2]
    if (lo >= 0.0) return f(lo, hi);
    if (hi <= 0.0) return f(-hi, -lo);
    return f(0.0, -lo) + f(0.0, hi);
  };

  mass_.assign(n, 0.0);
  for (int k = 0; k < n; ++k) {
    const double lo = std::max(-kHalfPi, th(k) - 0.5 * dth);
    const double hi = std::min(kHalfPi, th(k) + 0.5 * dth);
    mass_[k] = int_abs(lo, hi, [a](double x0, double x1) { return int_cos_pow(a, x0, x1); });
  }
  std::vector<Eigen::Triplet<double>> trip;
  for (int k = 0; k + 1 < n; ++k) {
    const double r = int_abs(th(k), th(k + 1), [a](double x0, double x1) { return int_cos_pow(-a, x0, x1); });
    const double c = 1.0 / r;
    trip.emplace_back(k, k, c);
    trip.emplace_back(k + 1, k + 1, c);
    trip.emplace_back(k, k + 1, -c);
    trip.emplace_back(k + 1, k, -c);
  }
  K_.resize(n, n);
  K_.setFromTriplets(trip.begin(), trip.end());
  eq_nodes_ = {static_cast<std::size_t>(n - 1), 0};
  eq_angles_ = {0.0, kPi};
}

void HemisphereMesh::build_sphere() {
  const double a = p_.a();
  const int nt = ntheta_, np = nphi_;
  const double dth = kHalfPi / nt, dph = 2.0 * kPi / np;
  const std::size_t n = 1 + static_cast<std::size_t>(nt) * np;
  auto node = [&](int i, int j) -> int { return i == 0 ? 0 : 1 + (i - 1) * np + ((j % np) + np) % np; };
  // dual ring boundaries: tb(i) = theta_i - dth / 2, tb(nt + 1) = pi/2
  auto tb = [&](int i) { return i > nt ? kHalfPi : (i - 0.5) * dth; };
  auto cpow = [&](double th) { return std::pow(std::sin(kHalfPi - th), a + 1.0); };

  mass_.assign(n, 0.0);
  mass_[0] = 2.0 * kPi * (1.0 - cpow(tb(1))) / (a + 1.0);
  for (int i = 1; i <= nt; ++i) {
    const double m = dph * (cpow(tb(i)) - cpow(tb(i + 1))) / (a + 1.0);
    for (int j = 0; j < np; ++j) mass_[node(i, j)] = m;
  }

  std::vector<Eigen::Triplet<double>> trip;
  auto edge = [&](int p, int q, double c) {
    trip.emplace_back(p, p, c);
    trip.emplace_back(q, q, c);
    trip.emplace_back(p, q, -c);
    trip.emplace_back(q, p, -c);
  };
  // pole to first ring, midpoint rule on the pole cell boundary
  {
    const double m = tb(1);
    const double c = std::sin(m) * std::pow(std::cos(m), a) / dth * dph;
    for (int j = 0; j < np; ++j) edge(0, node(1, j), c);
  }
  for (int i = 1; i <= nt; ++i) {
    // azimuthal edges: int cos^a / sin over the dual ring, divided by dphi
    const double g = integrate_u([a](double u) { return std::pow(std::sin(u), a) / std::cos(u); },
                                 kHalfPi - tb(i + 1), kHalfPi - tb(i));
    for (int j = 0; j < np; ++j) edge(node(i, j), node(i, j + 1), g / dph);
    if (i < nt) {
      // polar edges: harmonic average of 1 / (sin cos^a) along the edge
      const double r = integrate_u([a](double u) { return 1.0 / (std::cos(u) * std::pow(std::sin(u), a)); },
                                   kHalfPi - (i + 1) * dth, kHalfPi - i * dth);
      for (int j = 0; j < np; ++j) edge(node(i, j), node(i + 1, j), dph / r);
    }
  }
  K_.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  K_.setFromTriplets(trip.begin(), trip.end());

  eq_nodes_.resize(np);
  eq_angles_.resize(np);
  for (int j = 0; j < np; ++j) {
    eq_nodes_[j] = static_cast<std::size_t>(node(nt, j));
    eq_angles_[j] = j * dph;
  }
}

// ---------------------------------------------------------------------------

EquatorRegion EquatorRegion::full() { return arc(0.0, kPi); }

EquatorRegion EquatorRegion::arc(double center, double half_width) {
  EquatorRegion r;
  r.add(center, half_width);
  return r;
}

EquatorRegion EquatorRegion::endpoints(bool plus, bool minus) {
  EquatorRegion r;
  if (plus) r.add(0.0, kHalfPi);
  if (minus) r.add(kPi, kHalfPi);
  return r;
}

EquatorRegion& EquatorRegion::add(double center, double half_width) {
  if (!std::isfinite(center) || !(half_width >= 0.0)) throw ConfigError("invalid equator arc");
  if (half_width == 0.0) return *this;
  const double w = std::min(half_width, kPi);
  for (const Arc& o : arcs_) {
    const bool overlap = w >= kPi || o.half_width >= kPi ||
                         angular_distance(center, o.center) < w + o.half_width - 1e-12;
    if (overlap) throw ConfigError("equator arcs must be disjoint");
  }
  arcs_.push_back({wrap_angle(center), w});
  return *this;
}

EquatorRegion EquatorRegion::rotated(double delta) const {
  EquatorRegion r;
  for (const Arc& o : arcs_) r.arcs_.push_back({wrap_angle(o.center + delta), o.half_width});
  return r;
}

bool EquatorRegion::contains(double angle) const {
  for (const Arc& o : arcs_) {
    if (o.half_width >= kPi || angular_distance(angle, o.center) < o.half_width - 1e-12) return true;
  }
  return false;
}

double EquatorRegion::measure() const {
  double m = 0.0;
  for (const Arc& o : arcs_) m += 2.0 * o.half_width;
  return std::min(m, 2.0 * kPi);
}

// ---------------------------------------------------------------------------

EigenResult lambda1_masked(const HemisphereMesh& mesh, const std::vector<char>& equator_dirichlet,
                           const EigenOptions& opts) {
  const auto& eq = mesh.equator_nodes();
  if (equator_dirichlet.size() != eq.size()) throw ConfigError("equator mask size mismatch");
  const std::size_t n = mesh.num_nodes();
  const auto& M = mesh.mass();
  std::vector<char> dir(n, 0);
  for (std::size_t e = 0; e < eq.size(); ++e) dir[eq[e]] = equator_dirichlet[e];

  EigenResult res;
  res.eigenfunction.assign(n, 0.0);
  if (std::none_of(dir.begin(), dir.end(), [](char c) { return c != 0; })) {
    // pure Neumann problem: the constant is the first eigenfunction
    double tot = 0.0;
    for (double m : M) tot += m;
    std::fill(res.eigenfunction.begin(), res.eigenfunction.end(), 1.0 / std::sqrt(tot));
    return res;
  }

  std::vector<Eigen::Index> map(n, -1);
  std::vector<std::size_t> free;
  for (std::size_t k = 0; k < n; ++k) {
    if (!dir[k]) {
      map[k] = static_cast<Eigen::Index>(free.size());
      free.push_back(k);
    }
  }
  const auto nf = static_cast<Eigen::Index>(free.size());
  if (nf == 0) throw ConfigError("no free nodes left on the hemisphere mesh");
  const auto& K = mesh.stiffness();
  std::vector<Eigen::Triplet<double>> trip;
  for (Eigen::Index c = 0; c < K.outerSize(); ++c) {
    for (Eigen::SparseMatrix<double>::InnerIterator it(K, c); it; ++it) {
      const auto r = map[it.row()], q = map[it.col()];
      if (r >= 0 && q >= 0) trip.emplace_back(r, q, it.value());
    }
  }
  Eigen::SparseMatrix<double> Kf(nf, nf);
  Kf.setFromTriplets(trip.begin(), trip.end());
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(Kf);
  if (ldlt.info() != Eigen::Success) throw ConvergenceError("hemisphere stiffness factorization failed", 0.0, 0);

  Eigen::VectorXd Mf(nf);
  for (Eigen::Index k = 0; k < nf; ++k) Mf[k] = M[free[k]];
  Eigen::VectorXd x = Eigen::VectorXd::Ones(nf);
  x /= std::sqrt(x.dot(Mf.cwiseProduct(x)));
  double lam = 0.0, prev = -1.0;
  int it = 0;
  for (; it < opts.max_iter; ++it) {
    const Eigen::VectorXd y = Mf.cwiseProduct(x);
    Eigen::VectorXd z = ldlt.solve(y);
    const double zMz = z.dot(Mf.cwiseProduct(z));
    lam = z.dot(y) / zMz;
    x = z / std::sqrt(zMz);
    if (prev >= 0.0 && std::abs(lam - prev) <= opts.tol * std::max(std::abs(lam), 1e-300)) break;
    prev = lam;
  }
  if (it == opts.max_iter) {
    throw ConvergenceError("inverse iteration did not converge", std::abs(lam - prev), it);
  }
  res.iterations = it + 1;
  res.lambda = std::max(lam, 0.0);

  double first = 0.0, amax = 0.0;
  for (Eigen::Index k = 0; k < nf; ++k) {
    if (first == 0.0 && std::abs(x[k]) > 1e-14) first = x[k];
    amax = std::max(amax, std::abs(x[k]));
  }
  if (first < 0.0) x = -x;
  for (Eigen::Index k = 0; k < nf; ++k) {
    res.eigenfunction[free[k]] = x[k];
    if (x[k] < -1e-8 * amax) res.sign_definite = false;
  }
  return res;
}

EigenResult lambda1(const HemisphereMesh& mesh, const EquatorRegion& omega, const EigenOptions& opts) {
  const auto& ang = mesh.equator_angles();
  std::vector<char> mask(ang.size());
  for (std::size_t e = 0; e < ang.size(); ++e) mask[e] = omega.contains(ang[e]) ? 0 : 1;
  return lambda1_masked(mesh, mask, opts);
}

EigenResult lambda1_points(const HemisphereMesh& mesh, const std::vector<double>& angles,
                           const EigenOptions& opts) {
  const auto& ang = mesh.equator_angles();
  std::vector<char> mask(ang.size(), 0);
  for (double t : angles) {
    std::size_t best = 0;
    for (std::size_t e = 1; e < ang.size(); ++e) {
      if (angular_distance(ang[e], t) < angular_distance(ang[best], t)) best = e;
    }
    mask[best] = 1;
  }
  return lambda1_masked(mesh, mask, opts);
}

EigenResult lambda1_codim1(const HemisphereMesh& mesh, const EigenOptions& opts) {
  if (mesh.N() != 2) throw ConfigError("codimension-one region needs N = 2");
  if (!(mesh.params().s() > 0.5)) throw ConfigError("codimension-one Dirichlet sets need s > 1/2");
  return lambda1_points(mesh, {kHalfPi, 3.0 * kHalfPi}, opts);
}

// ---------------------------------------------------------------------------

CapPair::CapPair(double a, double b) : t1(a), t2(b) {
  if (!(a >= 0.0) || !(b >= 0.0) || a + b > kPi + 1e-12) {
    throw ConfigError("cap radii must be nonnegative with t1 + t2 <= pi");
  }
}

EquatorRegion CapPair::omega1() const { return EquatorRegion::arc(0.0, t1); }
EquatorRegion CapPair::omega2() const { return EquatorRegion::arc(kPi, t2); }

namespace {

EigenResult solve_cap(const HemisphereMesh& mesh, const EquatorRegion& omega, const CapPair& caps,
                      const EigenOptions& opts) {
  try {
    return lambda1(mesh, omega, opts);
  } catch (const ConvergenceError& e) {
    throw ConvergenceError("inverse iteration failed for cap pair (" + std::to_string(caps.t1) + ", " +
                               std::to_string(caps.t2) + ")",
                           e.residual(), e.iterations());
  }
}

NuAcfRow make_row(const HemisphereMesh& mesh, const CapPair& c, double l1, double l2) {
  NuAcfRow r{};
  r.t1 = c.t1;
  r.t2 = c.t2;
  r.lambda1_omega1 = l1;
  r.lambda1_omega2 = l2;
  r.gamma1 = gamma_map(l1, mesh.params());
  r.gamma2 = gamma_map(l2, mesh.params());
  r.mean_gamma = 0.5 * (r.gamma1 + r.gamma2);
  return r;
}

}  // namespace

NuAcfRow evaluate_caps(const HemisphereMesh& mesh, const CapPair& caps, const EigenOptions& opts) {
  const double l1 = solve_cap(mesh, caps.omega1(), caps, opts).lambda;
  const double l2 = solve_cap(mesh, caps.omega2(), caps, opts).lambda;
  return make_row(mesh, caps, l1, l2);
}

NuAcfResult nu_acf_caps(const HemisphereMesh& mesh, const std::vector<double>& radii,
                        const EigenOptions& opts) {
  if (radii.empty()) throw ConfigError("cap scan needs at least one radius");
  for (double t : radii) {
    if (!(t >= 0.0 && t <= kPi + 1e-12)) throw ConfigError("cap radii must lie in [0, pi]");
  }
  NuAcfResult out;
  out.s = mesh.params().s();
  // the regions of a pair depend on one radius each, so solves are shared across the table
  std::map<std::pair<int, double>, EigenResult> cache;
  auto get = [&](int side, double t, const CapPair& c) -> const EigenResult& {
    auto key = std::make_pair(side, t);
    auto it = cache.find(key);
    if (it == cache.end()) {
      const EquatorRegion w = side == 0 ? EquatorRegion::arc(0.0, t) : EquatorRegion::arc(kPi, t);
      it = cache.emplace(key, solve_cap(mesh, w, c, opts)).first;
    }
    return it->second;
  };

  double best = std::numeric_limits<double>::infinity();
  for (double t1 : radii) {
    for (double t2 : radii) {
      if (t1 + t2 > kPi + 1e-12) continue;
      const CapPair c(t1, std::min(t2, kPi - t1 + 1e-12));
      const NuAcfRow row = make_row(mesh, c, get(0, t1, c).lambda, get(1, t2, c).lambda);
      out.table.push_back(row);
      if (row.mean_gamma < best) {
        best = row.mean_gamma;
        out.argmin = c;
      }
    }
  }
  out.nu_hat = best;
  const auto& u1 = get(0, out.argmin.t1, out.argmin).eigenfunction;
  const auto& u2 = get(1, out.argmin.t2, out.argmin).eigenfunction;
  double ov = 0.0;
  for (std::size_t k = 0; k < u1.size(); ++k) ov += mesh.mass()[k] * u1[k] * u2[k];
  out.eigenfunction_overlap = ov;
  return out;
}

}  // namespace fraclab
