#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <future>
#include <numbers>
#include <numeric>

#include "fraclab/diagnostics.hpp"
#include "fraclab/errors.hpp"
#include "fraclab/io.hpp"
#include "fraclab/spectral1d.hpp"
#include "fraclab/sphere_eigen.hpp"
#include "fraclab/system_solver.hpp"

namespace fraclab::cli {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr double kPi = std::numbers::pi;

// Runs jobs in order or concurrently; results keep the input order either way.
template <typename T>
std::vector<T> run_all(const std::vector<std::function<T()>>& jobs, bool serial) {
  std::vector<T> out;
  if (serial) {
    for (const auto& j : jobs) out.push_back(j());
    return out;
  }
  std::vector<std::future<T>> fut;
  for (const auto& j : jobs) fut.push_back(std::async(std::launch::async, j));
  for (auto& f : fut) out.push_back(f.get());
  return out;
}

std::string trace_csv(const HalfSpaceGrid& g, const std::vector<Field>& fields) {
  std::string out = g.d() == 1 ? "x1" : "x1,x2";
  for (std::size_t i = 0; i < fields.size(); ++i) out += ",u_" + std::to_string(i + 1);
  out += "\n";
  for (std::size_t t = 0; t < g.layer_size(); ++t) {
    const auto X = g.coords(t);
    for (int c = 0; c < g.d(); ++c) out += (c ? "," : "") + format_double(X[c]);
    for (const auto& f : fields) out += "," + format_double(f[t]);
    out += "\n";
  }
  return out;
}

double rel_err(double v, double ref) { return std::abs(v - ref) / std::abs(ref); }

EigenResult solve_region(const HemisphereMesh& m, const std::string& r) {
  if (r == "full") return lambda1(m, EquatorRegion::full());
  if (r == "empty") return lambda1(m, EquatorRegion::empty());
  if (r == "half") return lambda1(m, EquatorRegion::arc(0.0, kPi / 2));
  if (r == "codim1") return lambda1_codim1(m);
  double c = 0.0, w = 0.0;
  std::sscanf(r.c_str() + 4, "%lf:%lf", &c, &w);
  return lambda1(m, EquatorRegion::arc(c, w));
}

HemisphereMesh make_mesh(const RunConfig& cfg) {
  return HemisphereMesh(cfg.params(), cfg.eigen.mesh_ntheta, cfg.N == 1 ? 0 : cfg.eigen.mesh_nphi);
}

std::vector<double> cap_radii(int n) {
  std::vector<double> r;
  for (int k = 0; k <= n; ++k) r.push_back(kPi * k / n);
  return r;
}

}  // namespace

bool RunReport::pass() const {
  return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.pass || !c.mandatory; });
}

void RunReport::le(std::string name, double v, double thr) {
  checks.push_back({std::move(name), v, "<=", thr, v <= thr, true});
}

void RunReport::ge(std::string name, double v, double thr) {
  checks.push_back({std::move(name), v, ">=", thr, v >= thr, true});
}

void RunReport::info(std::string name, double v) { checks.push_back({std::move(name), v, "info", 0.0, true, false}); }

json RunReport::to_json(const fs::path& out_dir) const {
  json cs = json::array();
  for (const auto& c : checks) {
    cs.push_back({{"name", c.name},
                  {"value", c.value},
                  {"relation", c.relation},
                  {"threshold", c.threshold},
                  {"pass", c.pass},
                  {"mandatory", c.mandatory}});
  }
  json outputs = json::array();
  for (const auto& f : files) outputs.push_back((out_dir / f.first).string());
  return {{"command", command}, {"pass", pass()}, {"checks", cs}, {"outputs", outputs}, {"summary", summary}};
}

RunReport cmd_solve(const RunConfig& cfg, const CliOptions&) {
  if (cfg.problem.betas.size() != 1) throw ConfigError("problem.betas: solve needs exactly one beta");
  const auto prob = make_problem(cfg, cfg.problem.betas.front());
  const auto res = solve_system(prob);
  const HalfSpaceGrid g(prob.grid, prob.params);
  RunReport rep;
  rep.command = "solve";
  rep.ge("converged (1 if so)", res.converged ? 1.0 : 0.0, 1.0);
  double lo = 0.0;
  for (const auto& f : res.fields) lo = std::min(lo, *std::min_element(f.values().begin(), f.values().end()));
  rep.ge("min field value", lo, -1e-12);
  rep.info("outer iterations", res.outer_iterations);
  if (prob.k > 1) rep.info("trace overlap", trace_overlap(g, res.fields));
  json sup = json::array();
  for (const auto& f : res.fields) sup.push_back(*std::max_element(f.values().begin(), f.values().end()));
  rep.summary = {{"beta", prob.beta}, {"k", prob.k}, {"outer_iterations", res.outer_iterations}, {"sup_norms", sup}};
  if (cfg.output.wants("binary")) {
    for (std::size_t i = 0; i < res.fields.size(); ++i) {
      rep.files.emplace_back("field_" + std::to_string(i + 1) + ".bin", snapshot_bytes(g, res.fields[i]));
    }
  }
  if (cfg.output.wants("csv")) rep.files.emplace_back("trace.csv", trace_csv(g, res.fields));
  return rep;
}

RunReport cmd_sweep(const RunConfig& cfg, const CliOptions&) {
  const auto prob = make_problem(cfg, cfg.problem.betas.front());
  SweepOptions so;
  so.holder_alpha = cfg.diagnostics.alphas.empty() ? 0.05 : cfg.diagnostics.alphas.front();
  const auto sw = sweep_beta(prob, cfg.problem.betas, so);
  RunReport rep;
  rep.command = "sweep";
  bool conv = true;
  double lo = 0.0;
  for (const auto& e : sw.entries) {
    conv = conv && e.converged;
    lo = std::min(lo, e.min_value);
  }
  rep.ge("all betas converged (1 if so)", conv ? 1.0 : 0.0, 1.0);
  rep.ge("min field value", lo, -1e-12);
  const auto& f = sw.entries.front();
  const auto& b = sw.entries.back();
  if (b.overlap > 0.0) rep.info("overlap first / last", f.overlap / b.overlap);
  if (f.holder_seminorm > 0.0) rep.info("holder seminorm last / first", b.holder_seminorm / f.holder_seminorm);
  rep.summary = {{"betas", cfg.problem.betas}, {"holder_alpha", so.holder_alpha}};
  rep.files.emplace_back("sweep.csv", sweep_csv(sw));
  return rep;
}

RunReport cmd_diagnose(const RunConfig& cfg, const CliOptions& opts) {
  if (opts.snapshots.empty()) throw ConfigError("diagnose needs at least one --snapshot");
  std::vector<Snapshot> snaps;
  for (const auto& p : opts.snapshots) snaps.push_back(read_snapshot(p));
  const auto& s0 = snaps.front();
  for (const auto& s : snaps) {
    if (s.values.size() != s0.values.size() || s.grid.nx != s0.grid.nx || s.grid.ny != s0.grid.ny ||
        s.grid.d != s0.grid.d || s.grid.L != s0.grid.L || s.grid.Y != s0.grid.Y || s.s != s0.s) {
      throw ConfigError("snapshots must share one grid and s");
    }
  }
  const HalfSpaceGrid g(s0.grid, FracParams(s0.s, s0.N));
  std::vector<Field> fields;
  for (const auto& s : snaps) fields.emplace_back(g, s.values, s.component);
  const auto& d = cfg.diagnostics;
  const auto radii = d.radii();
  const double nu = d.nu.value_or(0.5 * s0.s);

  using Profiles = std::vector<RadialProfile>;
  std::vector<std::function<Profiles()>> jobs;
  for (const auto& c : d.centers) {
    if (static_cast<int>(c.size()) != g.d()) throw ConfigError("diagnostics.centers must match the snapshot dimension");
    jobs.push_back([&, c] {
      Profiles out;
      for (const auto& q : d.quantities) {
        if (q == "acf_vanish") out.push_back(acf_one_phase(g, fields[0], c, radii, AcfVariant::vanish));
        if (q == "acf_halfspace") out.push_back(acf_one_phase(g, fields[0], c, radii, AcfVariant::halfspace));
        if (q == "acf_codim1") out.push_back(acf_one_phase(g, fields[0], c, radii, AcfVariant::codim1));
        if (q == "acf_two_phase" || q == "acf_perturbed") {
          if (fields.size() < 2) throw ConfigError(q + " needs two snapshots");
          out.push_back(q == "acf_two_phase" ? acf_two_phase(g, fields[0], fields[1], c, radii, nu)
                                             : acf_perturbed(g, fields[0], fields[1], c, radii, nu, d.a12));
        }
      }
      const bool almgren_wanted = std::any_of(d.quantities.begin(), d.quantities.end(),
                                              [](const std::string& q) { return q == "E" || q == "H" || q == "Nfreq"; });
      if (almgren_wanted) {
        const auto al = almgren(g, fields, c, radii);
        for (const auto& q : d.quantities) {
          if (q == "E") out.push_back(al.E);
          if (q == "H") out.push_back(al.H);
          if (q == "Nfreq") out.push_back(al.Nfreq);
        }
      }
      return out;
    });
  }
  const auto per_center = run_all(jobs, opts.serial);

  RunReport rep;
  rep.command = "diagnose";
  Profiles all;
  for (std::size_t ci = 0; ci < per_center.size(); ++ci) {
    std::string where = "center";
    for (double x : d.centers[ci]) where += " " + format_double(x);
    for (const auto& p : per_center[ci]) {
      all.push_back(p);
      const auto mon = monotonicity_check(p, d.monotonicity_tol);
      const std::string name = where + " " + to_string(p.quantity);
      const bool acf = p.quantity == Quantity::acf_vanish || p.quantity == Quantity::acf_halfspace ||
                       p.quantity == Quantity::acf_codim1 || p.quantity == Quantity::acf_two_phase ||
                       p.quantity == Quantity::acf_perturbed;
      if (acf) {
        rep.le(name + " max relative decrease", mon.max_violation, d.monotonicity_tol);
        rep.info(name + " hypothesis residual", p.hypothesis_residual);
      } else {
        rep.info(name + " max relative decrease", mon.max_violation);
      }
    }
    for (double a : d.alphas) {
      for (std::size_t i = 0; i < fields.size(); ++i) {
        rep.info(where + " trace holder alpha=" + format_double(a) + " u_" + std::to_string(i + 1),
                 trace_holder_seminorm(g, fields[i], a, d.centers[ci], radii.back()));
      }
    }
  }
  rep.summary = {{"snapshots", snaps.size()}, {"s", s0.s}, {"radii", radii.size()}};
  rep.files.emplace_back("diagnostics.csv", diagnostic_csv(all, d.monotonicity_tol));
  return rep;
}

RunReport cmd_eigen(const RunConfig& cfg, const CliOptions& opts) {
  const auto mesh = make_mesh(cfg);
  std::vector<std::function<EigenResult()>> jobs;
  for (const auto& r : cfg.eigen.regions) jobs.push_back([&mesh, r] { return solve_region(mesh, r); });
  const auto res = run_all(jobs, opts.serial);
  RunReport rep;
  rep.command = "eigen";
  const double s = cfg.s, N = cfg.N, tol = cfg.diagnostics.eigen_tol;
  std::string csv = "region,s,N,lambda1,gamma,sign_definite,iterations\n";
  for (std::size_t q = 0; q < res.size(); ++q) {
    const auto& r = cfg.eigen.regions[q];
    const double lam = res[q].lambda;
    csv += r + "," + format_double(s) + "," + std::to_string(cfg.N) + "," + format_double(lam) + "," +
           format_double(gamma_map(std::max(lam, 0.0), cfg.params())) + "," + (res[q].sign_definite ? "1" : "0") + "," +
           std::to_string(res[q].iterations) + "\n";
    rep.ge(r + " eigenfunction sign-definite (1 if so)", res[q].sign_definite ? 1.0 : 0.0, 1.0);
    if (r == "full") {
      rep.le("full lambda1", std::abs(lam), 1e-8);
    } else if (r == "empty") {
      rep.le("empty rel err vs 2sN", rel_err(lam, 2 * s * N), tol);
    } else if (r == "half") {
      rep.le("half rel err vs s(N-s)", rel_err(lam, s * (N - s)), tol);
    } else {
      rep.info(r + " lambda1", lam);
    }
  }
  rep.summary = {{"s", s}, {"N", cfg.N}, {"mesh_ntheta", cfg.eigen.mesh_ntheta}, {"mesh_nphi", cfg.eigen.mesh_nphi}};
  rep.files.emplace_back("eigen.csv", csv);
  return rep;
}

RunReport cmd_nuacf(const RunConfig& cfg, const CliOptions&) {
  const auto mesh = make_mesh(cfg);
  const auto res = nu_acf_caps(mesh, cap_radii(cfg.eigen.cap_grid));
  const double s = cfg.s, tol = cfg.diagnostics.eigen_tol;
  RunReport rep;
  rep.command = "nuacf";
  rep.ge("nu_hat (positive)", res.nu_hat, 1e-12);
  rep.le("nu_hat - s", res.nu_hat - s, 0.02);
  const auto deg = evaluate_caps(mesh, CapPair(0.0, kPi));
  const auto cut = evaluate_caps(mesh, CapPair(kPi / 2, kPi / 2));
  rep.le("degenerate partition rel err vs s", rel_err(deg.mean_gamma, s), tol);
  rep.le("equatorial cut rel err vs s", rel_err(cut.mean_gamma, s), tol);
  rep.info("eigenfunction overlap at argmin", res.eigenfunction_overlap);
  std::string csv = "s,t1,t2,lambda1_omega1,lambda1_omega2,gamma1,gamma2,mean_gamma\n";
  for (const auto& r : res.table) {
    csv += format_double(s) + "," + format_double(r.t1) + "," + format_double(r.t2) + "," +
           format_double(r.lambda1_omega1) + "," + format_double(r.lambda1_omega2) + "," + format_double(r.gamma1) + "," +
           format_double(r.gamma2) + "," + format_double(r.mean_gamma) + "\n";
  }
  const json summary = {{"s", s}, {"nu_hat", res.nu_hat}, {"t1_star", res.argmin.t1}, {"t2_star", res.argmin.t2}};
  rep.summary = summary;
  rep.files.emplace_back("nuacf.csv", csv);
  rep.files.emplace_back("nuacf_summary.json", summary.dump(2) + "\n");
  return rep;
}

RunReport cmd_oracle(const RunConfig& cfg, const CliOptions&) {
  const PeriodicGrid1D g(cfg.oracle.n, cfg.oracle.L);
  std::vector<double> u(g.n(), 0.0);
  for (const auto& m : cfg.oracle.modes) {
    for (int i = 0; i < g.n(); ++i) u[i] += m.cos_amp * std::cos(m.k * g.x(i)) + m.sin_amp * std::sin(m.k * g.x(i));
  }
  const auto sym = frac_lap_symbol(g, u, cfg.s);
  const auto pv = frac_lap_pv(g, u, cfg.s);
  double diff = 0.0, scale = 0.0;
  std::string csv = "x,u,symbol,pv\n";
  for (int i = 0; i < g.n(); ++i) {
    diff = std::max(diff, std::abs(sym[i] - pv.values[i]));
    scale = std::max(scale, std::abs(sym[i]));
    csv += format_double(g.x(i)) + "," + format_double(u[i]) + "," + format_double(sym[i]) + "," +
           format_double(pv.values[i]) + "\n";
  }
  RunReport rep;
  rep.command = "oracle";
  rep.le("max |pv - symbol| relative to max |symbol|", scale > 0.0 ? diff / scale : diff, cfg.diagnostics.oracle_tol);
  rep.ge("no discontinuity warnings (1 if none)", pv.any_warning ? 0.0 : 1.0, 1.0);
  rep.info("calibrated pv constant", pv.constant);
  rep.summary = {{"s", cfg.s}, {"n", g.n()}, {"L", g.L()}, {"pv_constant", pv.constant}};
  rep.files.emplace_back("oracle.csv", csv);
  return rep;
}

RunReport cmd_verify(const RunConfig&, const CliOptions& opts) {
  std::vector<int> ids = opts.criteria;
  if (ids.empty()) {
    ids.resize(kNumCriteria);
    std::iota(ids.begin(), ids.end(), 1);
  }
  for (int id : ids) {
    if (id < 1 || id > kNumCriteria) throw ConfigError("verify: criterion " + std::to_string(id) + " out of range");
  }
  AcceptanceOptions ao;
  ao.quick = opts.quick;
  const auto results = run_acceptance(ids, ao);
  RunReport rep;
  rep.command = "verify";
  for (const auto& r : results) {
    for (const auto& c : r.checks) {
      auto copy = c;
      copy.name = std::to_string(r.id) + " " + r.title + ": " + c.name;
      rep.checks.push_back(copy);
    }
    if (!r.error.empty()) {
      rep.checks.push_back({std::to_string(r.id) + " " + r.title + ": error " + r.error, 1.0, "<=", 0.0, false, true});
    }
  }
  rep.summary = acceptance_json(results, opts.quick);
  rep.files.emplace_back("acceptance.txt", acceptance_table(results));
  return rep;
}

RunReport run_command(const std::string& name, const RunConfig& cfg, const CliOptions& opts) {
  if (name == "solve") return cmd_solve(cfg, opts);
  if (name == "sweep") return cmd_sweep(cfg, opts);
  if (name == "diagnose") return cmd_diagnose(cfg, opts);
  if (name == "eigen") return cmd_eigen(cfg, opts);
  if (name == "nuacf") return cmd_nuacf(cfg, opts);
  if (name == "oracle") return cmd_oracle(cfg, opts);
  if (name == "verify") return cmd_verify(cfg, opts);
  throw ConfigError("unknown command " + name);
}

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const ConfigError*>(&e) || dynamic_cast<const RangeError*>(&e)) return kConfigError;
  if (dynamic_cast<const nlohmann::json::exception*>(&e)) return kConfigError;
  return kNumericalError;
}

void commit(const RunReport& report, const fs::path& out_dir) {
  std::vector<fs::path> written;
  try {
    for (const auto& [name, content] : report.files) {
      const fs::path p = out_dir / name;
      write_file_atomic(p, content);
      written.push_back(p);
    }
    const fs::path rp = out_dir / "report.json";
    write_file_atomic(rp, report.to_json(out_dir).dump(2) + "\n");
  } catch (...) {
    std::error_code ec;
    for (const auto& p : written) fs::remove(p, ec);
    throw;
  }
}

}  // namespace fraclab::cli
