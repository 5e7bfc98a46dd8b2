#include "fraclab/system_solver.hpp"

#include <Eigen/Cholesky>
#include <algorithm>
#include <cmath>
#include <memory>

#include "fraclab/diagnostics.hpp"
#include "fraclab/errors.hpp"
#include "fraclab/io.hpp"

namespace fraclab {

double Reaction::operator()(double u) const {
  switch (kind) {
    case ReactionKind::zero: return 0.0;
    case ReactionKind::linear: return lambda * u;
    case ReactionKind::logistic: return lambda * u * (1.0 - u);
  }
  return 0.0;
}

double Reaction::rate(double u) const {
  switch (kind) {
    case ReactionKind::zero: return 0.0;
    case ReactionKind::linear: return lambda;
    case ReactionKind::logistic: return lambda * (1.0 - u);
  }
  return 0.0;
}

std::string to_string(ReactionKind kind) {
  switch (kind) {
    case ReactionKind::zero: return "zero";
    case ReactionKind::linear: return "linear";
    case ReactionKind::logistic: return "logistic";
  }
  return "zero";
}

ReactionKind reaction_kind_from_string(const std::string& name) {
  if (name == "zero") return ReactionKind::zero;
  if (name == "linear") return ReactionKind::linear;
  if (name == "logistic") return ReactionKind::logistic;
  throw ConfigError("unknown reaction '" + name + "'");
}

void CompetitionProblem::validate() const {
  if (k < 1) throw ConfigError("component count k must be >= 1");
  if (!(beta >= 0.0) || !std::isfinite(beta)) throw ConfigError("beta must be finite and >= 0");
  if (coupling.rows() != k || coupling.cols() != k) throw ConfigError("coupling must be k x k");
  for (int i = 0; i < k; ++i) {
    if (coupling(i, i) != 0.0) throw ConfigError("coupling diagonal must be zero");
    for (int j = 0; j < k; ++j) {
      if (i == j) continue;
      if (!(coupling(i, j) > 0.0) || !std::isfinite(coupling(i, j))) {
        throw ConfigError("coupling off-diagonal entries must be positive");
      }
      if (coupling(i, j) != coupling(j, i)) throw ConfigError("coupling must be symmetric");
    }
  }
  if (static_cast<int>(reactions.size()) != k) throw ConfigError("need one reaction per component");
  for (const auto& r : reactions) {
    if (!std::isfinite(r.lambda) || std::abs(r.lambda) > 1e3) throw ConfigError("reaction lambda must be bounded");
  }
  if (static_cast<int>(dirichlet.size()) != k) throw ConfigError("need Dirichlet data per component");
  HalfSpaceGrid g(grid, params);
  for (const auto& d : dirichlet) {
    if (d.size() != g.num_nodes()) throw ConfigError("Dirichlet data size does not match the grid");
    for (double v : d) {
      if (!std::isfinite(v)) throw ConfigError("Dirichlet data must be finite");
    }
  }
}

// ---------------------------------------------------------------------------

struct SystemOperator::Impl {
  HalfSpaceGrid grid;
  SparseMatrix A;
  std::vector<char> mask;
  std::vector<std::size_t> free_trace;  // trace-layer indices of unknown trace nodes
  std::vector<double> area;             // dual areas of free_trace
  std::unique_ptr<TraceReducedSystem> schur;
  std::vector<Eigen::VectorXd> lifts;   // one per component, Schur mode only
  int k = 0;

  Impl(const CompetitionProblem& prob) : grid(prob.grid, prob.params) {}
};

SystemOperator::SystemOperator(const CompetitionProblem& prob, const SystemSolveOptions& opts)
    : impl_(std::make_unique<Impl>(prob)) {
  prob.validate();
  auto& im = *impl_;
  im.k = prob.k;
  im.A = assemble_La(im.grid);
  BoundaryData bd;
  bd.dirichlet = prob.dirichlet[0];
  im.mask = bd.dirichlet_mask(im.grid);
  for (std::size_t t = 0; t < im.grid.layer_size(); ++t) {
    if (!im.mask[t]) {
      im.free_trace.push_back(t);
      im.area.push_back(im.grid.trace_area(t));
    }
  }
  if (im.free_trace.size() <= opts.schur_limit) {
    im.schur = std::make_unique<TraceReducedSystem>(im.grid, im.A, im.mask);
    for (int i = 0; i < prob.k; ++i) im.lifts.push_back(im.schur->lift(prob.dirichlet[i]));
  }
}

SystemOperator::~SystemOperator() = default;

const HalfSpaceGrid& SystemOperator::grid() const { return impl_->grid; }
bool SystemOperator::uses_schur() const { return impl_->schur != nullptr; }

SolveResult SystemOperator::solve(const CompetitionProblem& prob, const std::vector<Field>* warm_start,
                                  const SystemSolveOptions& opts) const {
  const auto& im = *impl_;
  if (prob.k != im.k) throw ConfigError("problem does not match the prepared operator");
  const int k = prob.k;
  const std::size_t nT = im.free_trace.size(), layer = im.grid.layer_size();
  if (warm_start && static_cast<int>(warm_start->size()) != k) throw ConfigError("warm start needs k fields");

  // full trace rows, Dirichlet trace nodes included
  std::vector<std::vector<double>> trace(k, std::vector<double>(layer, 0.0));
  std::vector<std::vector<double>> full(k);
  for (int i = 0; i < k; ++i) {
    if (warm_start) {
      const Field& w = (*warm_start)[i];
      if (w.size() != im.grid.num_nodes()) throw ConfigError("warm start does not match the grid");
      full[i] = w.values();
    } else if (im.schur) {
      // cold start from the decoupled solution
      const Eigen::VectorXd v0 = im.schur->schur().llt().solve(-im.lifts[i]);
      full[i] = im.schur->reconstruct(v0, prob.dirichlet[i]);
    } else {
      BoundaryData bd;
      bd.dirichlet = prob.dirichlet[i];
      full[i] = solve_linear(im.grid, im.A, bd).values();
    }
    for (std::size_t t = 0; t < layer; ++t) trace[i][t] = im.mask[t] ? prob.dirichlet[i][t] : full[i][t];
  }

  SolveResult res;
  std::vector<double> m(nT), g(nT);
  std::vector<double> ratios;  // change ratios since the last extrapolation
  std::vector<std::vector<double>> step(k, std::vector<double>(nT, 0.0));
  double prev_change = -1.0;
  bool extrapolated = false;
  for (int it = 1; it <= opts.max_outer; ++it) {
    double change = 0.0;
    for (int i = 0; i < k; ++i) {
      // absorption from frozen neighbours, reaction split by sign of its rate
      for (std::size_t e = 0; e < nT; ++e) {
        const std::size_t t = im.free_trace[e];
        double absorb = 0.0;
        for (int j = 0; j < k; ++j) {
          if (j != i) absorb += prob.coupling(i, j) * trace[j][t] * trace[j][t];
        }
        const double u = trace[i][t];
        const double r = prob.reactions[i].rate(u);
        m[e] = prob.beta * absorb + std::max(0.0, -r);
        g[e] = std::max(0.0, r) * u;
      }
      std::vector<double> updated(nT);
      if (im.schur) {
        Eigen::MatrixXd K = im.schur->schur();
        Eigen::VectorXd rhs = -im.lifts[i];
        for (std::size_t e = 0; e < nT; ++e) {
          K(e, e) += m[e] * im.area[e];
          rhs[e] += g[e] * im.area[e];
        }
        Eigen::LLT<Eigen::MatrixXd> llt(K);
        if (llt.info() != Eigen::Success) throw ConvergenceError("trace system is not positive definite", 0.0, it);
        const Eigen::VectorXd v = llt.solve(rhs);
        for (std::size_t e = 0; e < nT; ++e) updated[e] = v[e];
      } else {
        BoundaryData bd;
        bd.dirichlet = prob.dirichlet[i];
        bd.m.assign(layer, 0.0);
        bd.g0.assign(layer, 0.0);
        for (std::size_t e = 0; e < nT; ++e) {
          bd.m[im.free_trace[e]] = m[e];
          bd.g0[im.free_trace[e]] = g[e];
        }
        LinearSolveOptions lo;
        lo.guess = &full[i];
        const Field f = solve_linear(im.grid, im.A, bd, lo);
        full[i] = f.values();
        for (std::size_t e = 0; e < nT; ++e) updated[e] = full[i][im.free_trace[e]];
      }
      for (std::size_t e = 0; e < nT; ++e) {
        const double v = updated[e];
        if (!std::isfinite(v)) throw ConvergenceError("non-finite iterate in outer sweep", change, it);
        const std::size_t t = im.free_trace[e];
        step[i][e] = v - trace[i][t];
        change = std::max(change, std::abs(step[i][e]));
        trace[i][t] = v;
      }
    }
    res.residual_history.push_back(change);
    res.outer_iterations = it;

    // a sweep right after an extrapolation carries its correction and starts a new ratio run
    if (!extrapolated && prev_change > 0.0 && change > 0.0) {
      ratios.push_back(change / prev_change);
      if (it > 5 && change > prev_change) ++res.monotonicity_flags;
    }
    const bool plain = !extrapolated;
    extrapolated = false;
    prev_change = change;

    const std::size_t nr = ratios.size();
    double rho = 0.0;
    for (std::size_t q = nr >= 3 ? nr - 3 : 0; q < nr; ++q) rho = std::max(rho, ratios[q]);
    bool done = plain && change <= opts.tol;
    if (done && opts.contraction_stop && change > 0.0) {
      done = nr > 0 && rho < 1.0 && rho / (1.0 - rho) * change <= opts.tol;
    }
    if (done) {
      res.converged = true;
      break;
    }

    // Lyusternik extrapolation once a single slow mode dominates: the remaining error is
    // about rho / (1 - rho) times the last step. Clipping at zero keeps the sign.
    if (opts.extrapolate && nr >= 3 && rho > 0.5 && rho < 0.999 && change > opts.tol) {
      const double r0 = ratios[nr - 3], r1 = ratios[nr - 2], r2 = ratios[nr - 1];
      if (std::abs(r2 - r1) <= 1e-3 * r2 && std::abs(r1 - r0) <= 1e-3 * r2) {
        const double c = r2 / (1.0 - r2);
        for (int i = 0; i < k; ++i) {
          for (std::size_t e = 0; e < nT; ++e) {
            const std::size_t t = im.free_trace[e];
            const double v = trace[i][t] + c * step[i][e];
            trace[i][t] = trace[i][t] >= 0.0 ? std::max(0.0, v) : v;
          }
        }
        ratios.clear();
        extrapolated = true;
      }
    }
  }
  if (!res.converged) {
    throw ConvergenceError("outer sweep cap reached (beta = " + format_double(prob.beta) + ")",
                           res.residual_history.empty() ? 0.0 : res.residual_history.back(),
                           res.outer_iterations);
  }

  for (int i = 0; i < k; ++i) {
    std::vector<double> values;
    if (im.schur) {
      Eigen::VectorXd vT(static_cast<Eigen::Index>(nT));
      for (std::size_t e = 0; e < nT; ++e) vT[e] = trace[i][im.free_trace[e]];
      values = im.schur->reconstruct(vT, prob.dirichlet[i]);
    } else {
      values = full[i];
    }
    res.fields.emplace_back(im.grid, std::move(values), i);
  }
  return res;
}

SolveResult solve_system(const CompetitionProblem& prob, const std::vector<Field>* warm_start,
                         const SystemSolveOptions& opts) {
  SystemOperator op(prob, opts);
  return op.solve(prob, warm_start, opts);
}

double trace_overlap(const HalfSpaceGrid& grid, const std::vector<Field>& fields) {
  double ov = 0.0;
  for (std::size_t t = 0; t < grid.layer_size(); ++t) {
    double pairs = 0.0;
    for (std::size_t i = 0; i < fields.size(); ++i) {
      for (std::size_t j = i + 1; j < fields.size(); ++j) {
        const double a = fields[i][t], b = fields[j][t];
        pairs += a * a * b * b;
      }
    }
    ov += pairs * grid.trace_area(t);
  }
  return ov;
}

// ---------------------------------------------------------------------------

BetaSweep sweep_beta(const CompetitionProblem& prob, const std::vector<double>& betas, const SweepOptions& opts) {
  if (betas.empty()) throw ConfigError("beta list is empty");
  for (std::size_t q = 0; q < betas.size(); ++q) {
    if (!(betas[q] >= 0.0) || !std::isfinite(betas[q])) throw ConfigError("betas must be finite and >= 0");
    if (q > 0 && !(betas[q] > betas[q - 1])) throw ConfigError("betas must be strictly increasing");
  }
  if (!(opts.holder_alpha > 0.0 && opts.holder_alpha < 1.0)) throw ConfigError("holder_alpha must lie in (0, 1)");

  CompetitionProblem p = prob;
  SystemOperator op(p, opts.solve);
  const auto& grid = op.grid();
  const std::vector<double> center(grid.d(), 0.0);

  BetaSweep out;
  std::vector<Field> prev;
  for (double b : betas) {
    p.beta = b;
    SolveResult r;
    try {
      r = op.solve(p, opts.warm_start && !prev.empty() ? &prev : nullptr, opts.solve);
    } catch (const ConvergenceError& e) {
      throw ConvergenceError("sweep failed at beta = " + format_double(b), e.residual(), e.iterations());
    }
    BetaSweepEntry e;
    e.beta = b;
    e.min_value = 1e300;
    for (const auto& f : r.fields) {
      double sup = 0.0;
      for (double v : f.values()) {
        sup = std::max(sup, std::abs(v));
        e.min_value = std::min(e.min_value, v);
      }
      e.sup_norms.push_back(sup);
    }
    e.overlap = trace_overlap(grid, r.fields);
    e.beta_times_overlap = b * e.overlap;
    e.holder_alpha = opts.holder_alpha;
    for (const auto& f : r.fields) {
      e.holder_seminorm = std::max(e.holder_seminorm,
                                   trace_holder_seminorm(grid, f, opts.holder_alpha, center, 0.5 * grid.L()));
    }
    e.outer_iters = r.outer_iterations;
    e.converged = r.converged;
    out.entries.push_back(e);
    if (opts.keep_fields) out.fields.push_back(r.fields);
    prev = std::move(r.fields);
  }
  return out;
}

std::string sweep_csv(const BetaSweep& sweep) {
  std::string out = "beta";
  const std::size_t k = sweep.entries.empty() ? 0 : sweep.entries.front().sup_norms.size();
  for (std::size_t i = 0; i < k; ++i) out += ",sup_norm_" + std::to_string(i + 1);
  out += ",overlap,beta_times_overlap,holder_alpha,holder_seminorm,outer_iters\n";
  for (const auto& e : sweep.entries) {
    out += format_double(e.beta);
    for (double v : e.sup_norms) out += "," + format_double(v);
    out += "," + format_double(e.overlap) + "," + format_double(e.beta_times_overlap) + "," +
           format_double(e.holder_alpha) + "," + format_double(e.holder_seminorm) + "," +
           std::to_string(e.outer_iters) + "\n";
  }
  return out;
}

CompetitionProblem mirror_bump_problem(const FracParams& p, const GridConfig& grid, double width) {
  if (grid.d != 1) throw ConfigError("mirror bump problem is one-dimensional");
  if (!(width > 0.0)) throw ConfigError("bump width must be positive");
  CompetitionProblem prob;
  prob.params = p;
  prob.grid = grid;
  prob.k = 2;
  prob.coupling = Eigen::MatrixXd::Zero(2, 2);
  prob.coupling(0, 1) = prob.coupling(1, 0) = 1.0;
  prob.reactions.assign(2, Reaction{});
  HalfSpaceGrid g(grid, p);
  prob.dirichlet.assign(2, std::vector<double>(g.num_nodes()));
  for (std::size_t n = 0; n < g.num_nodes(); ++n) {
    const double x = g.coords(n)[0];
    prob.dirichlet[0][n] = 0.5 * (1.0 - std::tanh(x / width));
    prob.dirichlet[1][n] = 0.5 * (1.0 - std::tanh(-x / width));
  }
  return prob;
}

}  // namespace fraclab
