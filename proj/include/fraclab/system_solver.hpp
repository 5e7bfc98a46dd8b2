#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "fraclab/extension_grid.hpp"

namespace fraclab {

enum class ReactionKind { zero, linear, logistic };

/// f(u) = 0, lambda u, or lambda u (1 - u).
struct Reaction {
  ReactionKind kind = ReactionKind::zero;
  double lambda = 1.0;

  double operator()(double u) const;
  /// f(u) / u, the growth rate used by the sign-preserving split.
  double rate(double u) const;
};

std::string to_string(ReactionKind kind);
ReactionKind reaction_kind_from_string(const std::string& name);

/// k-component competition system in extension form:
///   L_a v_i = 0 in the box, v_i = Dirichlet data on top and lateral faces,
///   d_nu^a v_i = f_i(v_i) - beta v_i sum_j a_ij v_j^2 on y = 0.
struct CompetitionProblem {
  FracParams params{0.5, 1};
  GridConfig grid;
  int k = 2;
  double beta = 0.0;
  Eigen::MatrixXd coupling;         // k x k, symmetric, zero diagonal, positive off-diagonal
  std::vector<Reaction> reactions;  // one per component
  /// Boundary values per component, one per grid node; only top and lateral nodes are read.
  std::vector<std::vector<double>> dirichlet;

  void validate() const;
};

struct SystemSolveOptions {
  double tol = 1e-8;
  int max_outer = 500;
  /// Also require the contraction estimate rho / (1 - rho) * change <= tol.
  bool contraction_stop = true;
  /// Extrapolate along the dominant slow mode once successive change ratios agree.
  bool extrapolate = true;
  /// Use the trace Schur complement when the number of free trace nodes is at most this.
  std::size_t schur_limit = 3000;
};

struct SolveResult {
  std::vector<Field> fields;
  std::vector<double> residual_history;  // max-norm change per outer sweep
  int outer_iterations = 0;
  bool converged = false;
  /// Sweeps after the fifth whose change exceeded the previous one.
  int monotonicity_flags = 0;
};

/// Precomputed operators shared by solves on the same grid and Dirichlet set.
class SystemOperator {
 public:
  SystemOperator(const CompetitionProblem& prob, const SystemSolveOptions& opts = {});
  ~SystemOperator();
  SystemOperator(const SystemOperator&) = delete;
  SystemOperator& operator=(const SystemOperator&) = delete;

  const HalfSpaceGrid& grid() const;
  bool uses_schur() const;

  SolveResult solve(const CompetitionProblem& prob, const std::vector<Field>* warm_start = nullptr,
                    const SystemSolveOptions& opts = {}) const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// One-shot convenience wrapper. Without a warm start the outer sweeps begin at the
/// decoupled (beta = 0) solution.
SolveResult solve_system(const CompetitionProblem& prob, const std::vector<Field>* warm_start = nullptr,
                         const SystemSolveOptions& opts = {});

/// Trace overlap int u_1^2 u_2^2 dx summed over pairs i < j, using trace dual areas.
double trace_overlap(const HalfSpaceGrid& grid, const std::vector<Field>& fields);

struct BetaSweepEntry {
  double beta = 0.0;
  std::vector<double> sup_norms;
  double overlap = 0.0;
  double beta_times_overlap = 0.0;
  double holder_alpha = 0.0;
  double holder_seminorm = 0.0;  // max over components, inner half of the trace domain
  int outer_iters = 0;
  bool converged = false;
  double min_value = 0.0;
};

struct BetaSweep {
  std::vector<BetaSweepEntry> entries;
  std::vector<std::vector<Field>> fields;  // converged fields per beta when kept
};

struct SweepOptions {
  double holder_alpha = 0.05;
  bool warm_start = true;
  bool keep_fields = false;
  SystemSolveOptions solve;
};

BetaSweep sweep_beta(const CompetitionProblem& prob, const std::vector<double>& betas,
                     const SweepOptions& opts = {});

/// CSV with columns beta, sup_norm_1..k, overlap, beta_times_overlap, holder_alpha,
/// holder_seminorm, outer_iters.
std::string sweep_csv(const BetaSweep& sweep);

/// Two-component problem on d = 1 with mirror-image smooth steps as boundary data:
/// component 1 is (1 - tanh(x / width)) / 2 on top and lateral faces, component 2 its reflection.
CompetitionProblem mirror_bump_problem(const FracParams& p, const GridConfig& grid, double width = 0.3);

}  // namespace fraclab
