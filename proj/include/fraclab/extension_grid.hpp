#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <array>
#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "fraclab/fraccore.hpp"

namespace fraclab {

struct GridConfig {
  int d = 1;                  // trace dimension, 1 or 2
  double L = 1.0;             // horizontal half-width: x in [-L, L]^d
  double Y = 1.0;             // height of the truncated half-space
  int nx = 64;                // nodes per horizontal axis
  int ny = 32;                // vertical layers (ny + 1 node rows including y = 0)
  std::optional<double> grading_p;  // defaults to max(1, 2 / (1 + a))
};

/// Vertex-centred tensor grid on [-L, L]^d x [0, Y] with graded rows y_j = Y (j / ny)^p.
///
/// Node (i1, i2, j) has flat index (j * nx + i2) * nx + i1, or j * nx + i1 when d = 1.
/// Row j = 0 is the trace y = 0.
class HalfSpaceGrid {
 public:
  HalfSpaceGrid(const GridConfig& config, const FracParams& params);

  const GridConfig& config() const { return cfg_; }
  const FracParams& params() const { return p_; }
  int d() const { return cfg_.d; }
  int nx() const { return cfg_.nx; }
  int ny() const { return cfg_.ny; }
  double L() const { return cfg_.L; }
  double Y() const { return cfg_.Y; }
  double grading() const { return grading_; }
  double hx() const { return hx_; }

  const std::vector<double>& x() const { return x_; }
  const std::vector<double>& y() const { return y_; }

  /// Nodes per horizontal layer, nx^d.
  std::size_t layer_size() const { return layer_; }
  std::size_t num_nodes() const { return layer_ * static_cast<std::size_t>(cfg_.ny + 1); }
  std::size_t index(int i1, int i2, int j) const {
    const std::size_t nx = cfg_.nx;
    if (cfg_.d == 1) return static_cast<std::size_t>(j) * nx + i1;
    return (static_cast<std::size_t>(j) * nx + i2) * nx + i1;
  }
  /// Inverse of index(): {i1, i2, j}.
  std::array<int, 3> unpack(std::size_t n) const;
  /// Physical coordinates (x_1, ..., x_d, y) of node n.
  std::vector<double> coords(std::size_t n) const;

  /// Arithmetic cell average of y^a over [y_j, y_{j+1}].
  double face_weight(int j) const { return face_w_[j]; }
  /// Harmonic average of y^a over [y_j, y_{j+1}]; used for vertical fluxes.
  double vertical_weight(int j) const { return vert_w_[j]; }
  /// Integral of y^a over the dual interval of row j.
  double layer_weight(int j) const { return layer_w_[j]; }
  /// Dual length of horizontal node index i (hx, or hx / 2 at the ends).
  double dual_width(int i) const { return (i == 0 || i == cfg_.nx - 1) ? 0.5 * hx_ : hx_; }
  /// Dual measure of a trace node (product of dual widths).
  double trace_area(std::size_t t) const;

  bool on_lateral(std::size_t n) const;
  bool on_top(std::size_t n) const { return unpack(n)[2] == cfg_.ny; }

 private:
  GridConfig cfg_;
  FracParams p_;
  double grading_;
  double hx_;
  std::size_t layer_;
  std::vector<double> x_, y_;
  std::vector<double> face_w_, vert_w_, layer_w_;
};

/// Nodal values on a grid, trace row included.
class Field {
 public:
  Field() = default;
  Field(const HalfSpaceGrid& grid, std::vector<double> values, int component = 0);

  static Field zeros(const HalfSpaceGrid& grid, int component = 0);
  static Field sample(const HalfSpaceGrid& grid,
                      const std::function<double(std::span<const double>)>& f,
                      int component = 0);

  const std::vector<double>& values() const { return v_; }
  std::vector<double>& mutable_values() { return v_; }
  double operator[](std::size_t n) const { return v_[n]; }
  std::size_t size() const { return v_.size(); }
  int component() const { return component_; }

  /// Trace row copy (y = 0).
  std::vector<double> trace(const HalfSpaceGrid& grid) const;

 private:
  std::vector<double> v_;
  int component_ = 0;
};

/// Dirichlet data on top and lateral faces, and a Neumann law
/// d_nu^a v = g0(x) - m(x) v on y = 0.
struct BoundaryData {
  /// Values at every node; only Dirichlet nodes are read.
  std::vector<double> dirichlet;
  /// Per-trace-node source g0 and absorption m >= 0 (empty means zero).
  std::vector<double> g0;
  std::vector<double> m;
  /// Impose Dirichlet values on the trace row instead of the Neumann law.
  bool dirichlet_trace = false;
  /// Optional extra Dirichlet nodes (size num_nodes when present).
  std::vector<char> extra_dirichlet;

  static BoundaryData constant(const HalfSpaceGrid& grid, double value);
  static BoundaryData from_function(const HalfSpaceGrid& grid,
                                    const std::function<double(std::span<const double>)>& f);
  void validate(const HalfSpaceGrid& grid) const;
  bool is_dirichlet(const HalfSpaceGrid& grid, std::size_t n) const;
  /// One flag per node.
  std::vector<char> dirichlet_mask(const HalfSpaceGrid& grid) const;
};

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

/// Pure-Neumann flux-form stiffness matrix of L_a over all nodes.
SparseMatrix assemble_La(const HalfSpaceGrid& grid);

/// Weighted conormal derivative -lim y^a d_y v, matched to v = v0 + c y^{2s}.
std::vector<double> dtn_trace(const HalfSpaceGrid& grid, const Field& field);

enum class LinearMethod { automatic, direct, pcg };

struct LinearSolveOptions {
  /// automatic: sparse LDLT for small systems, incomplete-Cholesky PCG otherwise.
  LinearMethod method = LinearMethod::automatic;
  double tol = 1e-10;
  int max_iter = 0;  // 0 means 20 * sqrt(unknowns)
  const std::vector<double>* guess = nullptr;  // full-size initial iterate
};

struct LinearSolveInfo {
  int iterations = 0;
  double residual = 0.0;
};

/// Solves L_a v = 0 with the given boundary data.
Field solve_linear(const HalfSpaceGrid& grid, const SparseMatrix& A, const BoundaryData& bdata,
                   const LinearSolveOptions& opts = {}, LinearSolveInfo* info = nullptr);

/// Schur complement of the free trace unknowns for a fixed Dirichlet set.
///
/// The bottom equations reduce to (S + diag(m * area)) v_T = g0 * area - lift.
class TraceReducedSystem {
 public:
  TraceReducedSystem(const HalfSpaceGrid& grid, const SparseMatrix& A,
                     const std::vector<char>& dirichlet_mask);
  ~TraceReducedSystem();
  TraceReducedSystem(const TraceReducedSystem&) = delete;
  TraceReducedSystem& operator=(const TraceReducedSystem&) = delete;

  /// Trace nodes (indices into the trace layer) that are unknowns.
  const std::vector<std::size_t>& trace_nodes() const { return trace_; }
  const Eigen::MatrixXd& schur() const { return S_; }

  /// Right-hand side contribution of Dirichlet values, per free trace node.
  Eigen::VectorXd lift(const std::vector<double>& dirichlet) const;
  /// Full field from trace unknowns and Dirichlet values.
  std::vector<double> reconstruct(const Eigen::VectorXd& vT,
                                  const std::vector<double>& dirichlet) const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  std::vector<std::size_t> trace_;
  Eigen::MatrixXd S_;
};

}  // namespace fraclab
