#include "fraclab/acceptance.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>

#include "fraclab/diagnostics.hpp"
#include "fraclab/errors.hpp"
#include "fraclab/extension_grid.hpp"
#include "fraclab/fraccore.hpp"
#include "fraclab/spectral1d.hpp"
#include "fraclab/sphere_eigen.hpp"
#include "fraclab/system_solver.hpp"

namespace fraclab {

namespace {

constexpr double kPi = std::numbers::pi;
const std::vector<double> kSValues{0.25, 0.5, 0.75};
const std::vector<double> kOrigin{0.0};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

std::string tag(double s) { return "s=" + fmt("%g", s); }

double rel_err(double v, double ref) { return std::abs(v - ref) / std::abs(ref); }

double spread(const std::vector<double>& v) {
  const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
  return *hi / *lo - 1.0;
}

std::vector<double> radii_list(double r0, double r1, double ratio) {
  std::vector<double> r;
  for (double x = r0; x <= r1 + 1e-12; x *= ratio) r.push_back(x);
  return r;
}

struct Ctx {
  bool quick;
  std::vector<CheckResult>* out;

  // error tolerances widen by 2 in quick mode
  double tol(double t) const { return quick ? 2.0 * t : t; }
  void le(std::string name, double v, double thr) const {
    out->push_back({std::move(name), v, "<=", thr, v <= thr, true});
  }
  void ge(std::string name, double v, double thr) const {
    out->push_back({std::move(name), v, ">=", thr, v >= thr, true});
  }
  void info(std::string name, double v) const { out->push_back({std::move(name), v, "info", 0.0, true, false}); }
};

HalfSpaceGrid uniform_grid(double s, int nx) {
  GridConfig gc;
  gc.nx = nx;
  gc.ny = (nx - 1) / 2;
  gc.grading_p = 1.0;
  return HalfSpaceGrid(gc, FracParams(s, 1));
}

Field sample_solution(const HalfSpaceGrid& g, SolutionTag t) {
  const NamedSolution sol(t, g.params());
  return Field::sample(g, [&](std::span<const double> X) { return sol.eval(X); });
}

// 1. gamma-map landmarks
void gamma_landmarks(const Ctx& c) {
  double worst_map = 0.0, worst_trip = 0.0;
  for (double s : kSValues) {
    for (int N : {1, 2, 3}) {
      const FracParams p(s, N);
      worst_map = std::max(worst_map, rel_err(gamma_map(2 * s * N, p), 2 * s));
      for (double g : {2 * s, 0.5 * s + std::max(0.0, 2 * s - N), 1.0, 2.5}) {
        if (g < std::max(0.0, 2 * s - N)) continue;
        worst_trip = std::max(worst_trip, rel_err(gamma_map(gamma_inverse(g, p), p), g));
      }
      for (double t : {0.1, 1.0, 7.0}) {
        worst_trip = std::max(worst_trip, rel_err(gamma_inverse(gamma_map(t, p), p), t));
      }
    }
  }
  c.le("max rel err gamma(2sN) vs 2s", worst_map, 1e-10);
  c.le("max rel err gamma/gamma_inverse round trip", worst_trip, 1e-10);
}

// bounded L_a-harmonic extension of cos(k x): cos(k x) phi(k y)
double bessel_profile(double t, double s) {
  if (t == 0.0) return 1.0;
  return std::pow(2.0, 1.0 - s) / std::tgamma(s) * std::pow(t, s) * std::cyl_bessel_k(s, t);
}

// 2. DtN symbol
void dtn_symbol(const Ctx& c) {
  const int nx = c.quick ? 128 : 512, ny = nx / 2;
  for (double s : kSValues) {
    const HalfSpaceGrid g({1, kPi, 3 * kPi, nx, ny, std::nullopt}, FracParams(s, 1));
    const auto A = assemble_La(g);
    std::vector<double> amp;
    for (double k : {1.0, 2.0, 4.0}) {
      auto bd = BoundaryData::from_function(
          g, [&](std::span<const double> X) { return std::cos(k * X[0]) * bessel_profile(k * X[1], s); });
      bd.dirichlet_trace = true;
      const auto dtn = dtn_trace(g, solve_linear(g, A, bd));
      // least-squares amplitude of cos(k x) over the interior trace nodes
      double num = 0.0, den = 0.0;
      for (int i = 1; i + 1 < g.nx(); ++i) {
        const double ck = std::cos(k * g.x()[i]);
        num += dtn[i] * ck;
        den += ck * ck;
      }
      amp.push_back(num / den);
    }
    const double want = std::pow(2.0, 2 * s);
    c.le(tag(s) + " rel err dtn(2)/dtn(1) vs 2^{2s}", rel_err(amp[1] / amp[0], want), c.tol(0.03));
    c.le(tag(s) + " rel err dtn(4)/dtn(2) vs 2^{2s}", rel_err(amp[2] / amp[1], want), c.tol(0.03));
    c.info(tag(s) + " dtn(1) / (2^{1-2s} Gamma(1-s) / Gamma(s))",
           amp[0] / (std::pow(2.0, 1 - 2 * s) * std::tgamma(1 - s) / std::tgamma(s)));
  }
}

// 3. hemisphere eigenvalues
void hemisphere(const Ctx& c) {
  const int nt = c.quick ? 32 : 64;
  for (double s : kSValues) {
    const FracParams p(s, 2);
    const HemisphereMesh fine(p, nt, 2 * nt), coarse(p, nt / 2, nt);
    const double e_f = lambda1(fine, EquatorRegion::empty()).lambda;
    const double h_f = lambda1(fine, EquatorRegion::arc(0.0, kPi / 2)).lambda;
    const double e_c = lambda1(coarse, EquatorRegion::empty()).lambda;
    const double h_c = lambda1(coarse, EquatorRegion::arc(0.0, kPi / 2)).lambda;
    const double ee_f = rel_err(e_f, 4 * s), eh_f = rel_err(h_f, s * (2 - s));
    c.le(tag(s) + " rel err lambda(empty) vs 2sN", ee_f, c.tol(0.02));
    c.le(tag(s) + " rel err lambda(half) vs s(N-s)", eh_f, c.tol(0.02));
    c.ge(tag(s) + " error ratio lambda(empty) under doubling", rel_err(e_c, 4 * s) / ee_f, 1.8);
    c.ge(tag(s) + " error ratio lambda(half) under doubling", rel_err(h_c, s * (2 - s)) / eh_f, 1.8);
  }
  const int nc = c.quick ? 128 : 256;
  const double l = lambda1_codim1(HemisphereMesh(FracParams(0.75, 2), nc, 2 * nc)).lambda;
  c.le("s=0.75 rel err codim-1 lambda vs (2s-1)(N-1)", rel_err(l, 0.5), c.tol(0.05));
}

std::vector<double> cap_radii(int n) {
  std::vector<double> r;
  for (int k = 0; k <= n; ++k) r.push_back(kPi * k / n);
  return r;
}

// 4. nu_ACF scan
void nu_scan(const Ctx& c) {
  const int nt = c.quick ? 32 : 64;
  for (double s : kSValues) {
    const HemisphereMesh m(FracParams(s, 2), nt, 2 * nt);
    const auto res = nu_acf_caps(m, cap_radii(c.quick ? 8 : 16));
    c.ge(tag(s) + " nu_hat (positive)", res.nu_hat, 1e-12);
    c.le(tag(s) + " nu_hat - s", res.nu_hat - s, 0.02);
    const auto deg = evaluate_caps(m, CapPair(0.0, kPi));
    const auto cut = evaluate_caps(m, CapPair(kPi / 2, kPi / 2));
    c.le(tag(s) + " rel err degenerate partition vs s", rel_err(deg.mean_gamma, s), c.tol(0.02));
    c.le(tag(s) + " rel err equatorial cut vs s", rel_err(cut.mean_gamma, s), c.tol(0.02));
  }
}

int diag_nx(const Ctx& c) { return c.quick ? 801 : 1601; }

// 5. Almgren suite
void almgren_suite(const Ctx& c) {
  const auto r = radii_list(0.1, 0.5, 1.08);
  for (double s : kSValues) {
    const auto g = uniform_grid(s, diag_nx(c));
    for (auto [t, want] : {std::pair{SolutionTag::vanish_trace, 2 * s}, std::pair{SolutionTag::halfspace, s}}) {
      const auto al = almgren(g, {sample_solution(g, t)}, kOrigin, r);
      double worst = 0.0;
      for (double n : al.Nfreq.values) worst = std::max(worst, rel_err(n, want));
      c.le(tag(s) + " " + to_string(t) + " max rel err Nfreq", worst, c.tol(0.01));
      c.le(tag(s) + " " + to_string(t) + " log-derivative defect", log_derivative_defect(al), c.tol(0.01));
    }
  }
}

// 6. ACF monotonicity
void acf_monotonicity(const Ctx& c) {
  const auto r = radii_list(0.1, 0.5, 1.08);
  for (double s : kSValues) {
    const auto g = uniform_grid(s, diag_nx(c));
    c.le(tag(s) + " vanish ACF spread",
         spread(acf_one_phase(g, sample_solution(g, SolutionTag::vanish_trace), kOrigin, r, AcfVariant::vanish).values),
         c.tol(0.02));
    c.le(tag(s) + " halfspace ACF spread",
         spread(acf_one_phase(g, sample_solution(g, SolutionTag::halfspace), kOrigin, r, AcfVariant::halfspace).values),
         c.tol(0.02));
    if (s > 0.5) {
      c.le(tag(s) + " codim1 ACF spread",
           spread(acf_one_phase(g, sample_solution(g, SolutionTag::codim1), kOrigin, r, AcfVariant::codim1).values),
           c.tol(0.02));
    }
  }
  const std::vector<int> levels = c.quick ? std::vector<int>{101, 201} : std::vector<int>{201, 401, 801};
  for (double s : kSValues) {
    double prev = 0.0;
    for (std::size_t q = 0; q < levels.size(); ++q) {
      const auto g = uniform_grid(s, levels[q]);
      const NamedSolution sol(SolutionTag::vanish_trace, g.params());
      auto bd = BoundaryData::from_function(g, [&](std::span<const double> X) { return sol.eval(X); });
      bd.dirichlet_trace = true;
      const Field v = solve_linear(g, assemble_La(g), bd);
      const double tol = 25 * g.hx() * g.hx();
      const auto rep = monotonicity_check(acf_one_phase(g, v, kOrigin, r, AcfVariant::vanish), tol);
      const std::string pre = tag(s) + " nx=" + std::to_string(levels[q]);
      c.le(pre + " solved ACF max violation vs 25 h^2", rep.max_violation, tol);
      if (q > 0) c.le(pre + " violation vs coarser level", rep.max_violation, prev);
      prev = rep.max_violation;
    }
  }
}

// 7. Pohozaev residual
void pohozaev(const Ctx& c) {
  for (double s : kSValues) {
    const auto g = uniform_grid(s, diag_nx(c));
    std::vector<SolutionTag> tags{SolutionTag::vanish_trace, SolutionTag::halfspace};
    if (s > 0.5) tags.push_back(SolutionTag::codim1);
    for (auto t : tags) {
      const Field f = sample_solution(g, t);
      double worst = 0.0, outer = 0.0;
      for (double r : {0.1, 0.2, 0.3, 0.4, 0.5}) {
        outer = std::abs(pohozaev_residual(g, {f}, kOrigin, r));
        worst = std::max(worst, outer);
      }
      c.le(tag(s) + " " + to_string(t) + " max |residual| over r = 0.1..0.5", worst, c.tol(0.03));
      if (t == SolutionTag::codim1) c.info(tag(s) + " codim1 |residual| at r = 0.5", outer);
    }
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    double co[4][3];
    for (auto& row : co)
      for (double& x : row) x = U(rng);
    const Field rnd = Field::sample(g, [&](std::span<const double> X) {
      double v = 0.0;
      for (int k = 0; k < 4; ++k) v += co[k][0] * std::sin((k + 1) * X[0] + co[k][1]) * std::cos((k + 1) * co[k][2] * X[1]);
      return v;
    });
    c.ge(tag(s) + " random smooth field |residual| at r=0.3", std::abs(pohozaev_residual(g, {rnd}, kOrigin, 0.3)), 0.10);
  }
}

// 8. decay lemma on the half ball with unit data outside it
void decay(const Ctx& c) {
  const double delta = 0.1;
  const int nx = c.quick ? 201 : 401;
  for (double s : kSValues) {
    GridConfig gc;
    gc.nx = nx;
    gc.ny = (nx - 1) / 2;
    const HalfSpaceGrid g(gc, FracParams(s, 1));
    const auto A = assemble_La(g);
    std::vector<double> scaled;
    for (double M : {10.0, 100.0}) {
      auto bd = BoundaryData::constant(g, 1.0);
      bd.m.assign(g.layer_size(), M);
      bd.g0.assign(g.layer_size(), delta);
      bd.extra_dirichlet.assign(g.num_nodes(), 0);
      for (std::size_t n = 0; n < g.num_nodes(); ++n) {
        const auto X = g.coords(n);
        if (X[0] * X[0] + X[1] * X[1] >= 1.0 - 1e-12) bd.extra_dirichlet[n] = 1;
      }
      const Field v = solve_linear(g, A, bd);
      double sup = 0.0;
      for (int i = 0; i < g.nx(); ++i) {
        if (std::abs(g.x()[i]) <= 0.5) sup = std::max(sup, v[g.index(i, 0, 0)]);
      }
      const std::string pre = tag(s) + " M=" + fmt("%g", M);
      c.le(pre + " sup on inner half trace", sup, c.tol((1 + delta) / M + 5 * g.hx()));
      c.info(pre + " M * sup", M * sup);
      scaled.push_back(M * sup);
    }
    c.info(tag(s) + " M * sup at M=100 over M=10", scaled[1] / scaled[0]);
  }
}

WindowedFunction comparison_window(double s, double h, double lo, double hi) {
  const FracParams p(s, 1);
  const ComparisonFunction f(p);
  const double C = f.normalization(), a = p.a();
  auto fl = [=](double x) { return C * std::pow(-x, a - 1.0) / (1.0 - a); };
  auto fr = [=](double x) { return 1.0 - C * std::pow(x, a - 1.0) / (1.0 - a); };
  return WindowedFunction::sample([f](double x) { return f(x); }, lo, hi, h, fl, fr);
}

double far_slope(double s, double h, double x_lo, double x_hi) {
  const double X = -x_lo;
  const auto w = comparison_window(s, h, -8 * X, 8 * X);
  std::vector<int> nodes;
  for (int i = 0; i < 9; ++i) nodes.push_back(w.nearest(x_lo * std::pow(x_hi / x_lo, i / 8.0)));
  const auto r = frac_lap_pv_window(w, s, nodes, standard_pv_constant(s));
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(nodes.size());
  for (std::size_t e = 0; e < nodes.size(); ++e) {
    const double lx = std::log(-w.x(nodes[e])), ly = std::log(std::abs(r.values[e]));
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

// 9. comparison function
void comparison(const Ctx& c) {
  for (double s : kSValues) {
    std::vector<double> cs;
    for (int ref : {1, 2}) {
      const double h = 10.0 / 49.0 / ((c.quick ? 1.0 : 2.0) * ref);
      const auto w = comparison_window(s, h, -10.0 - h * std::round(190.0 / h), 200.0);
      std::vector<int> nodes;
      for (int i = 0; i < 50; ++i) nodes.push_back(w.nearest(-10.0 + 10.0 * i / 49.0));
      const auto r = frac_lap_pv_window(w, s, nodes, standard_pv_constant(s));
      double cf = 0.0;
      for (std::size_t e = 0; e < nodes.size(); ++e) cf = std::max(cf, -r.values[e] / w.u[nodes[e]]);
      cs.push_back(cf);
    }
    c.ge(tag(s) + " fitted c finite (1 if finite)", std::isfinite(cs[0]) && std::isfinite(cs[1]) ? 1.0 : 0.0, 1.0);
    c.info(tag(s) + " fitted c", cs[1]);
    c.le(tag(s) + " rel change of c under refinement", rel_err(cs[1], cs[0]), c.tol(0.1));
    const double a = 1.0 - 2.0 * s;
    const double h = c.quick ? 1.0 : 0.5;
    c.le(tag(s) + " rel err far-field slope on [-100,-20] vs a-1", rel_err(far_slope(s, h, -100.0, -20.0), a - 1.0),
         c.tol(0.1));
    c.info(tag(s) + " far-field slope on [-500,-100]", far_slope(s, h, -500.0, -100.0));
  }
}

// 10. beta-sweep segregation
void segregation(const Ctx& c) {
  const int nx = c.quick ? 128 : 256;
  for (double s : {0.3, 0.5, 0.75}) {
    const HemisphereMesh m(FracParams(s, 2), 32, 64);
    const double nu_hat = nu_acf_caps(m, cap_radii(8)).nu_hat;
    double alpha = std::min(s, nu_hat);
    if (s > 0.5) alpha = std::min(alpha, 2 * s - 1);
    alpha *= 0.1;
    GridConfig gc;
    gc.nx = nx;
    gc.ny = nx / 2;
    const auto p = mirror_bump_problem(FracParams(s, 1), gc, 0.3);
    SweepOptions so;
    so.holder_alpha = alpha;
    const auto sw = sweep_beta(p, {1e2, 1e3, 1e4, 1e5}, so);
    const auto& e = sw.entries;
    double bo = 0.0, hol = 0.0;
    bool conv = true;
    for (const auto& x : e) {
      bo = std::max(bo, x.beta_times_overlap);
      hol = std::max(hol, x.holder_seminorm);
      conv = conv && x.converged;
    }
    c.info(tag(s) + " holder alpha", alpha);
    c.ge(tag(s) + " all sweeps converged (1 if so)", conv ? 1.0 : 0.0, 1.0);
    c.ge(tag(s) + " overlap(1e2) / overlap(1e5)", e.front().overlap / e.back().overlap, 10.0);
    c.le(tag(s) + " max beta*overlap / value at 1e2", bo / e.front().beta_times_overlap, 10.0);
    c.le(tag(s) + " max holder seminorm / value at 1e2 - 1", hol / e.front().holder_seminorm - 1.0, c.tol(0.5));
  }
}

// 11. PV vs symbol
void oracle_consistency(const Ctx& c) {
  for (double s : kSValues) {
    const PeriodicGrid1D g(128);
    std::mt19937_64 rng(9);
    std::normal_distribution<double> nd;
    std::vector<double> u(g.n(), 0.0);
    for (int k = 1; k <= g.n() / 8; ++k) {
      const double a = nd(rng), b = nd(rng);
      for (int i = 0; i < g.n(); ++i) u[i] += a * std::cos(k * g.x(i)) + b * std::sin(k * g.x(i));
    }
    const auto sym = frac_lap_symbol(g, u, s);
    const auto pv = frac_lap_pv(g, u, s).values;
    double diff = 0.0, scale = 0.0;
    for (int i = 0; i < g.n(); ++i) {
      diff = std::max(diff, std::abs(sym[i] - pv[i]));
      scale = std::max(scale, std::abs(sym[i]));
    }
    c.le(tag(s) + " max |pv - symbol| / max |symbol|", diff / scale, c.tol(0.02));
  }
}

struct Spec {
  const char* title;
  double limit;
  void (*run)(const Ctx&);
};

const Spec kSpecs[kNumCriteria] = {
    {"gamma-map landmarks", 1, gamma_landmarks},
    {"DtN symbol", 120, dtn_symbol},
    {"hemisphere eigenvalues", 300, hemisphere},
    {"nu_ACF cap scan", 600, nu_scan},
    {"Almgren suite", 60, almgren_suite},
    {"ACF monotonicity", 120, acf_monotonicity},
    {"Pohozaev residual", 60, pohozaev},
    {"decay lemma", 60, decay},
    {"comparison-function estimate", 60, comparison},
    {"beta-sweep segregation", 600, segregation},
    {"oracle consistency", 30, oracle_consistency},
};

}  // namespace

bool CriterionResult::pass() const {
  if (!error.empty()) return false;
  return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.pass || !c.mandatory; });
}

std::string CriterionResult::summary() const {
  if (!error.empty()) return error;
  std::string out;
  for (const auto& c : checks) {
    if (c.pass || !c.mandatory) continue;
    if (!out.empty()) out += "; ";
    out += c.name + " = " + fmt("%.4g", c.value) + " (" + c.relation + " " + fmt("%.4g", c.threshold) + ")";
  }
  return out;
}

CriterionResult run_criterion(int id, const AcceptanceOptions& opts) {
  if (id < 1 || id > kNumCriteria) throw ConfigError("unknown acceptance criterion " + std::to_string(id));
  const Spec& sp = kSpecs[id - 1];
  CriterionResult r;
  r.id = id;
  r.title = sp.title;
  r.runtime_limit = sp.limit;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    sp.run(Ctx{opts.quick, &r.checks});
  } catch (const std::exception& e) {
    r.error = e.what();
  }
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  r.checks.push_back({"runtime seconds", r.seconds, "<=", sp.limit, r.seconds <= sp.limit, true});
  return r;
}

std::vector<CriterionResult> run_acceptance(const std::vector<int>& ids, const AcceptanceOptions& opts) {
  std::vector<CriterionResult> out;
  for (int id : ids) out.push_back(run_criterion(id, opts));
  return out;
}

std::string criterion_line(const CriterionResult& r) {
  std::ostringstream os;
  os << (r.pass() ? "[PASS] " : "[FAIL] ") << r.id << "  " << r.title << "  (" << fmt("%.1f", r.seconds) << " s)";
  if (!r.pass()) os << "  " << r.summary();
  return os.str();
}

std::string acceptance_table(const std::vector<CriterionResult>& results) {
  std::ostringstream os;
  for (const auto& r : results) {
    os << criterion_line(r) << "\n";
    for (const auto& c : r.checks) {
      char buf[256];
      if (c.relation == "info") {
        std::snprintf(buf, sizeof buf, "       %-4s %-60s %12.6g\n", "", c.name.c_str(), c.value);
      } else {
        std::snprintf(buf, sizeof buf, "       %-4s %-60s %12.6g %s %-10.4g\n", c.pass ? "ok" : "FAIL",
                      c.name.c_str(), c.value, c.relation.c_str(), c.threshold);
      }
      os << buf;
    }
  }
  int passed = 0;
  for (const auto& r : results) passed += r.pass() ? 1 : 0;
  os << passed << " / " << results.size() << " criteria passed\n";
  return os.str();
}

nlohmann::json to_json(const CriterionResult& r) {
  nlohmann::json checks = nlohmann::json::array();
  for (const auto& c : r.checks) {
    checks.push_back({{"name", c.name},
                      {"value", c.value},
                      {"relation", c.relation},
                      {"threshold", c.threshold},
                      {"pass", c.pass},
                      {"mandatory", c.mandatory}});
  }
  return {{"id", r.id},           {"title", r.title},         {"pass", r.pass()},
          {"seconds", r.seconds}, {"runtime_limit", r.runtime_limit}, {"error", r.error},
          {"checks", checks}};
}

nlohmann::json acceptance_json(const std::vector<CriterionResult>& results, bool quick) {
  nlohmann::json arr = nlohmann::json::array();
  bool all = true;
  for (const auto& r : results) {
    arr.push_back(to_json(r));
    all = all && r.pass();
  }
  return {{"suite", "acceptance"}, {"quick", quick}, {"pass", all}, {"criteria", arr}};
}

}  // namespace fraclab
