#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "fraclab/extension_grid.hpp"
#include "fraclab/system_solver.hpp"
#include "json.hpp"

namespace fraclab {

/// Trace boundary data for the competition system, applied on top and lateral faces.
struct BoundarySpec {
  std::string kind = "mirror_tanh";  // mirror_tanh | constant | zero
  double width = 0.3;                // mirror_tanh
  std::vector<double> values;        // constant: one value per component
};

struct ProblemConfig {
  int k = 2;
  std::vector<double> betas{1e2};
  std::optional<Eigen::MatrixXd> coupling;  // default: ones off the diagonal
  std::vector<Reaction> reactions;          // default: zero for every component
  BoundarySpec boundary;
};

struct DiagnosticsConfig {
  std::vector<std::vector<double>> centers{{0.0}};
  double r_min = 0.1;
  double r_max = 0.5;
  double r_ratio = 1.08;
  std::vector<double> alphas{0.05};
  std::vector<std::string> quantities{"E", "H", "Nfreq"};
  std::optional<double> nu;  // two-phase exponent, default s / 2
  double a12 = 1.0;          // perturbed ACF coupling
  double monotonicity_tol = 1e-3;
  double eigen_tol = 0.02;
  double oracle_tol = 0.02;

  std::vector<double> radii() const;
};

struct EigenConfig {
  int mesh_ntheta = 32;
  int mesh_nphi = 64;
  int cap_grid = 8;  // radii k pi / cap_grid, k = 0..cap_grid
  /// full | empty | half | codim1 | arc:<center>:<half_width>
  std::vector<std::string> regions{"full", "empty", "half"};
};

struct OracleMode {
  double k = 2.0;
  double cos_amp = 1.0;
  double sin_amp = 0.0;
};

struct OracleConfig {
  int n = 128;
  double L = 1.0;
  std::vector<OracleMode> modes{OracleMode{}};
};

struct OutputConfig {
  std::string directory = "out";
  std::vector<std::string> formats{"csv", "binary"};  // subset of csv, binary

  bool wants(const std::string& f) const;
};

struct RunConfig {
  double s = 0.5;
  int N = 1;
  GridConfig grid;
  ProblemConfig problem;
  DiagnosticsConfig diagnostics;
  EigenConfig eigen;
  OracleConfig oracle;
  OutputConfig output;

  FracParams params() const { return FracParams(s, N); }
};

/// Validates against the shipped schema rules: unknown keys and out-of-range values throw
/// ConfigError naming the offending path. Missing sections take defaults.
RunConfig parse_run_config(const nlohmann::json& doc);
RunConfig load_run_config(const std::filesystem::path& path);
nlohmann::json to_json(const RunConfig& cfg);

/// Competition problem for one beta.
CompetitionProblem make_problem(const RunConfig& cfg, double beta);

}  // namespace fraclab
