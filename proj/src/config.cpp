#include "fraclab/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "fraclab/errors.hpp"

namespace fraclab {

using nlohmann::json;

namespace {

const std::set<std::string> kQuantities{"acf_vanish", "acf_halfspace", "acf_codim1", "acf_two_phase",
                                        "acf_perturbed", "E", "H", "Nfreq"};

[[noreturn]] void fail(const std::string& path, const std::string& what) { throw ConfigError(path + ": " + what); }

std::string num_str(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

// Object section with a fixed key set.
class Section {
 public:
  Section(const json& j, std::string path, std::initializer_list<const char*> keys) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) fail(path_, "expected an object");
    for (const auto& item : j_.items()) {
      if (std::none_of(keys.begin(), keys.end(), [&](const char* k) { return item.key() == k; })) {
        fail(path_ + "." + item.key(), "unknown key");
      }
    }
  }

  bool has(const char* key) const { return j_.contains(key); }
  const json& at(const char* key) const { return j_.at(key); }
  std::string path(const char* key) const { return path_ + "." + key; }

  // value in [lo, hi], or (lo, hi] when open_lo
  double number(const char* key, double def, double lo, double hi, bool open_lo = false) const {
    if (!has(key)) return def;
    return check_number(at(key), path(key), lo, hi, open_lo);
  }

  int integer(const char* key, int def, int lo, int hi) const {
    if (!has(key)) return def;
    return check_integer(at(key), path(key), lo, hi);
  }

  std::string string(const char* key, const std::string& def) const {
    if (!has(key)) return def;
    if (!at(key).is_string()) fail(path(key), "expected a string");
    return at(key).get<std::string>();
  }

  static double check_number(const json& v, const std::string& p, double lo, double hi, bool open_lo = false,
                             bool open_hi = false) {
    if (!v.is_number()) fail(p, "expected a number");
    const double x = v.get<double>();
    if (!std::isfinite(x) || x > hi || x < lo || (open_lo && x == lo) || (open_hi && x == hi)) {
      fail(p, num_str(x) + " outside " + (open_lo ? "(" : "[") + num_str(lo) + ", " + num_str(hi) + (open_hi ? ")" : "]"));
    }
    return x;
  }

  static int check_integer(const json& v, const std::string& p, int lo, int hi) {
    if (!v.is_number_integer()) fail(p, "expected an integer");
    const auto x = v.get<long long>();
    if (x < lo || x > hi) fail(p, std::to_string(x) + " outside [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
    return static_cast<int>(x);
  }

  const json& array(const char* key) const {
    if (!at(key).is_array()) fail(path(key), "expected an array");
    return at(key);
  }

 private:
  const json& j_;
  std::string path_;
};

void parse_fractional(const json& j, RunConfig& c) {
  Section s(j, "fractional", {"s", "N"});
  if (s.has("s")) c.s = Section::check_number(s.at("s"), s.path("s"), 0.0, 1.0, true, true);
  c.N = s.integer("N", c.N, 1, 3);
}

void parse_grid(const json& j, RunConfig& c) {
  Section s(j, "grid", {"d", "L", "Y", "nx", "ny", "grading_p"});
  c.grid.d = s.integer("d", c.grid.d, 1, 2);
  c.grid.L = s.number("L", c.grid.L, 0.0, 1e6, true);
  c.grid.Y = s.number("Y", c.grid.Y, 0.0, 1e6, true);
  c.grid.nx = s.integer("nx", c.grid.nx, 4, 100000);
  c.grid.ny = s.integer("ny", c.grid.ny, 4, 100000);
  if (s.has("grading_p")) c.grid.grading_p = s.number("grading_p", 1.0, 1.0, 20.0);
}

Reaction parse_reaction(const json& j, const std::string& p) {
  Section s(j, p, {"kind", "lambda"});
  Reaction r;
  r.kind = reaction_kind_from_string(s.string("kind", "zero"));
  r.lambda = s.number("lambda", 1.0, -1e3, 1e3);
  return r;
}

void parse_problem(const json& j, RunConfig& c) {
  Section s(j, "problem", {"k", "betas", "coupling", "reactions", "boundary_data"});
  auto& p = c.problem;
  p.k = s.integer("k", p.k, 1, 8);
  if (s.has("betas")) {
    const auto& arr = s.array("betas");
    if (arr.empty()) fail(s.path("betas"), "needs at least one value");
    p.betas.clear();
    for (std::size_t i = 0; i < arr.size(); ++i) {
      p.betas.push_back(Section::check_number(arr[i], s.path("betas") + "[" + std::to_string(i) + "]", 0.0, 1e12));
    }
  }
  if (s.has("coupling")) {
    const auto& arr = s.array("coupling");
    if (static_cast<int>(arr.size()) != p.k) fail(s.path("coupling"), "must have k rows");
    Eigen::MatrixXd m(p.k, p.k);
    for (int r = 0; r < p.k; ++r) {
      const std::string rp = s.path("coupling") + "[" + std::to_string(r) + "]";
      if (!arr[r].is_array() || static_cast<int>(arr[r].size()) != p.k) fail(rp, "must have k entries");
      for (int q = 0; q < p.k; ++q) m(r, q) = Section::check_number(arr[r][q], rp + "[" + std::to_string(q) + "]", 0.0, 1e6);
    }
    for (int r = 0; r < p.k; ++r) {
      if (m(r, r) != 0.0) fail(s.path("coupling"), "diagonal must be zero");
      for (int q = 0; q < p.k; ++q) {
        if (r != q && (m(r, q) <= 0.0 || m(r, q) != m(q, r))) {
          fail(s.path("coupling"), "off-diagonal entries must be positive and symmetric");
        }
      }
    }
    p.coupling = m;
  }
  if (s.has("reactions")) {
    const auto& arr = s.array("reactions");
    if (static_cast<int>(arr.size()) != p.k) fail(s.path("reactions"), "needs one entry per component");
    p.reactions.clear();
    for (std::size_t i = 0; i < arr.size(); ++i) {
      p.reactions.push_back(parse_reaction(arr[i], s.path("reactions") + "[" + std::to_string(i) + "]"));
    }
  }
  if (s.has("boundary_data")) {
    Section b(s.at("boundary_data"), s.path("boundary_data"), {"kind", "width", "values"});
    p.boundary.kind = b.string("kind", p.boundary.kind);
    if (p.boundary.kind != "mirror_tanh" && p.boundary.kind != "constant" && p.boundary.kind != "zero") {
      fail(b.path("kind"), "expected mirror_tanh, constant or zero");
    }
    p.boundary.width = b.number("width", p.boundary.width, 0.0, 1e3, true);
    if (b.has("values")) {
      const auto& arr = b.array("values");
      p.boundary.values.clear();
      for (std::size_t i = 0; i < arr.size(); ++i) {
        p.boundary.values.push_back(Section::check_number(arr[i], b.path("values") + "[" + std::to_string(i) + "]", 0.0, 1e6));
      }
    }
  }
  // mirror data is the default only where it applies
  if (!s.has("boundary_data") && (p.k != 2 || c.grid.d != 1)) p.boundary.kind = "zero";
  if (p.boundary.kind == "mirror_tanh" && (p.k != 2 || c.grid.d != 1)) {
    fail("problem.boundary_data.kind", "mirror_tanh needs k = 2 and grid.d = 1");
  }
  if (p.boundary.kind == "constant" && static_cast<int>(p.boundary.values.size()) != p.k) {
    fail("problem.boundary_data.values", "needs one value per component");
  }
}

void parse_diagnostics(const json& j, RunConfig& c) {
  Section s(j, "diagnostics", {"centers", "radii", "alphas", "quantities", "nu", "a12", "tolerances"});
  auto& d = c.diagnostics;
  if (s.has("centers")) {
    const auto& arr = s.array("centers");
    if (arr.empty()) fail(s.path("centers"), "needs at least one center");
    d.centers.clear();
    for (std::size_t i = 0; i < arr.size(); ++i) {
      const std::string cp = s.path("centers") + "[" + std::to_string(i) + "]";
      if (!arr[i].is_array() || static_cast<int>(arr[i].size()) != c.grid.d) fail(cp, "needs grid.d coordinates");
      std::vector<double> x;
      for (const auto& v : arr[i]) x.push_back(Section::check_number(v, cp, -c.grid.L, c.grid.L));
      d.centers.push_back(x);
    }
  }
  if (s.has("radii")) {
    Section r(s.at("radii"), s.path("radii"), {"min", "max", "ratio"});
    d.r_min = r.number("min", d.r_min, 0.0, 1e6, true);
    d.r_max = r.number("max", d.r_max, d.r_min, 1e6);
    d.r_ratio = r.number("ratio", d.r_ratio, 1.0, 4.0, true);
  }
  if (s.has("alphas")) {
    const auto& arr = s.array("alphas");
    d.alphas.clear();
    for (std::size_t i = 0; i < arr.size(); ++i) {
      d.alphas.push_back(Section::check_number(arr[i], s.path("alphas") + "[" + std::to_string(i) + "]", 0.0, 1.0, true));
    }
  }
  if (s.has("quantities")) {
    const auto& arr = s.array("quantities");
    d.quantities.clear();
    for (std::size_t i = 0; i < arr.size(); ++i) {
      const std::string qp = s.path("quantities") + "[" + std::to_string(i) + "]";
      if (!arr[i].is_string() || !kQuantities.count(arr[i].get<std::string>())) fail(qp, "unknown quantity");
      d.quantities.push_back(arr[i].get<std::string>());
    }
  }
  if (s.has("nu")) d.nu = s.number("nu", 0.0, 0.0, 1.0, true);
  d.a12 = s.number("a12", d.a12, 0.0, 1e6);
  if (s.has("tolerances")) {
    Section t(s.at("tolerances"), s.path("tolerances"), {"monotonicity", "eigen_landmark", "oracle"});
    d.monotonicity_tol = t.number("monotonicity", d.monotonicity_tol, 0.0, 1.0);
    d.eigen_tol = t.number("eigen_landmark", d.eigen_tol, 0.0, 1.0, true);
    d.oracle_tol = t.number("oracle", d.oracle_tol, 0.0, 1.0, true);
  }
}

void check_region(const std::string& r, const std::string& p) {
  if (r == "full" || r == "empty" || r == "half" || r == "codim1") return;
  if (r.rfind("arc:", 0) == 0) {
    double c = 0.0, w = 0.0;
    char extra = 0;
    if (std::sscanf(r.c_str() + 4, "%lf:%lf%c", &c, &w, &extra) == 2 && std::isfinite(c) && w >= 0.0) return;
  }
  fail(p, "expected full, empty, half, codim1 or arc:<center>:<half_width>");
}

void parse_eigen(const json& j, RunConfig& c) {
  Section s(j, "eigen", {"mesh_ntheta", "mesh_nphi", "cap_grid", "regions"});
  auto& e = c.eigen;
  e.mesh_ntheta = s.integer("mesh_ntheta", e.mesh_ntheta, 2, 2048);
  e.mesh_nphi = s.integer("mesh_nphi", e.mesh_nphi, 4, 4096);
  if (e.mesh_nphi % 2 != 0) fail(s.path("mesh_nphi"), "must be even");
  e.cap_grid = s.integer("cap_grid", e.cap_grid, 1, 256);
  if (s.has("regions")) {
    const auto& arr = s.array("regions");
    e.regions.clear();
    for (std::size_t i = 0; i < arr.size(); ++i) {
      const std::string rp = s.path("regions") + "[" + std::to_string(i) + "]";
      if (!arr[i].is_string()) fail(rp, "expected a string");
      check_region(arr[i].get<std::string>(), rp);
      e.regions.push_back(arr[i].get<std::string>());
    }
  }
}

void parse_oracle(const json& j, RunConfig& c) {
  Section s(j, "oracle", {"n", "L", "modes"});
  auto& o = c.oracle;
  o.n = s.integer("n", o.n, 16, 1 << 20);
  if ((o.n & (o.n - 1)) != 0) fail(s.path("n"), "must be a power of two");
  o.L = s.number("L", o.L, 0.0, 1e6, true);
  if (s.has("modes")) {
    const auto& arr = s.array("modes");
    o.modes.clear();
    for (std::size_t i = 0; i < arr.size(); ++i) {
      const std::string mp = s.path("modes") + "[" + std::to_string(i) + "]";
      Section m(arr[i], mp, {"k", "cos", "sin"});
      OracleMode mode;
      mode.k = m.number("k", mode.k, 0.0, 0.5 * o.n / o.L);
      const double kl = mode.k * o.L;
      if (std::abs(kl - std::round(kl)) > 1e-9) fail(m.path("k"), "k L must be an integer for a periodic sample");
      mode.cos_amp = m.number("cos", 1.0, -1e6, 1e6);
      mode.sin_amp = m.number("sin", 0.0, -1e6, 1e6);
      o.modes.push_back(mode);
    }
  }
}

void parse_output(const json& j, RunConfig& c) {
  Section s(j, "output", {"directory", "formats"});
  c.output.directory = s.string("directory", c.output.directory);
  if (c.output.directory.empty()) fail(s.path("directory"), "must not be empty");
  if (s.has("formats")) {
    const auto& arr = s.array("formats");
    c.output.formats.clear();
    for (const auto& v : arr) {
      if (!v.is_string() || (v.get<std::string>() != "csv" && v.get<std::string>() != "binary")) {
        fail(s.path("formats"), "entries must be csv or binary");
      }
      c.output.formats.push_back(v.get<std::string>());
    }
  }
}

}  // namespace

std::vector<double> DiagnosticsConfig::radii() const {
  std::vector<double> r;
  for (double x = r_min; x <= r_max * (1 + 1e-12); x *= r_ratio) r.push_back(x);
  return r;
}

bool OutputConfig::wants(const std::string& f) const {
  return std::find(formats.begin(), formats.end(), f) != formats.end();
}

RunConfig parse_run_config(const json& doc) {
  Section top(doc, "config", {"$schema", "fractional", "grid", "problem", "diagnostics", "eigen", "oracle", "output"});
  RunConfig c;
  // grid before problem and diagnostics, which check against it
  if (top.has("fractional")) parse_fractional(top.at("fractional"), c);
  if (top.has("grid")) parse_grid(top.at("grid"), c);
  parse_problem(top.has("problem") ? top.at("problem") : json::object(), c);
  if (top.has("diagnostics")) parse_diagnostics(top.at("diagnostics"), c);
  if (top.has("eigen")) parse_eigen(top.at("eigen"), c);
  if (top.has("oracle")) parse_oracle(top.at("oracle"), c);
  if (top.has("output")) parse_output(top.at("output"), c);
  if (c.diagnostics.centers.front().size() != static_cast<std::size_t>(c.grid.d)) {
    c.diagnostics.centers.assign(1, std::vector<double>(c.grid.d, 0.0));
  }
  (void)c.params();
  return c;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open config " + path.string());
  json doc;
  try {
    doc = json::parse(f);
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + ": malformed JSON: " + e.what());
  }
  return parse_run_config(doc);
}

json to_json(const RunConfig& c) {
  json grid = {{"d", c.grid.d}, {"L", c.grid.L}, {"Y", c.grid.Y}, {"nx", c.grid.nx}, {"ny", c.grid.ny}};
  if (c.grid.grading_p) grid["grading_p"] = *c.grid.grading_p;
  json problem = {{"k", c.problem.k}, {"betas", c.problem.betas}};
  if (c.problem.coupling) {
    json m = json::array();
    for (int r = 0; r < c.problem.k; ++r) {
      json row = json::array();
      for (int q = 0; q < c.problem.k; ++q) row.push_back((*c.problem.coupling)(r, q));
      m.push_back(row);
    }
    problem["coupling"] = m;
  }
  if (!c.problem.reactions.empty()) {
    json rs = json::array();
    for (const auto& r : c.problem.reactions) rs.push_back({{"kind", to_string(r.kind)}, {"lambda", r.lambda}});
    problem["reactions"] = rs;
  }
  problem["boundary_data"] = {{"kind", c.problem.boundary.kind}, {"width", c.problem.boundary.width}};
  if (!c.problem.boundary.values.empty()) problem["boundary_data"]["values"] = c.problem.boundary.values;
  const auto& d = c.diagnostics;
  json diag = {{"centers", d.centers},
               {"radii", {{"min", d.r_min}, {"max", d.r_max}, {"ratio", d.r_ratio}}},
               {"alphas", d.alphas},
               {"quantities", d.quantities},
               {"a12", d.a12},
               {"tolerances",
                {{"monotonicity", d.monotonicity_tol}, {"eigen_landmark", d.eigen_tol}, {"oracle", d.oracle_tol}}}};
  if (d.nu) diag["nu"] = *d.nu;
  json modes = json::array();
  for (const auto& m : c.oracle.modes) modes.push_back({{"k", m.k}, {"cos", m.cos_amp}, {"sin", m.sin_amp}});
  return {{"fractional", {{"s", c.s}, {"N", c.N}}},
          {"grid", grid},
          {"problem", problem},
          {"diagnostics", diag},
          {"eigen",
           {{"mesh_ntheta", c.eigen.mesh_ntheta},
            {"mesh_nphi", c.eigen.mesh_nphi},
            {"cap_grid", c.eigen.cap_grid},
            {"regions", c.eigen.regions}}},
          {"oracle", {{"n", c.oracle.n}, {"L", c.oracle.L}, {"modes", modes}}},
          {"output", {{"directory", c.output.directory}, {"formats", c.output.formats}}}};
}

CompetitionProblem make_problem(const RunConfig& cfg, double beta) {
  const auto& pc = cfg.problem;
  CompetitionProblem p;
  if (pc.boundary.kind == "mirror_tanh") {
    p = mirror_bump_problem(cfg.params(), cfg.grid, pc.boundary.width);
  } else {
    p.params = cfg.params();
    p.grid = cfg.grid;
    p.k = pc.k;
    p.coupling = Eigen::MatrixXd::Ones(pc.k, pc.k);
    p.coupling.diagonal().setZero();
    p.reactions.assign(pc.k, Reaction{});
    const HalfSpaceGrid g(cfg.grid, p.params);
    p.dirichlet.resize(pc.k);
    for (int i = 0; i < pc.k; ++i) {
      const double v = pc.boundary.kind == "constant" ? pc.boundary.values[i] : 0.0;
      p.dirichlet[i].assign(g.num_nodes(), v);
    }
  }
  if (pc.coupling) p.coupling = *pc.coupling;
  if (!pc.reactions.empty()) p.reactions = pc.reactions;
  p.beta = beta;
  p.validate();
  return p;
}

}  // namespace fraclab
