#include "fraclab/extension_grid.hpp"

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseCholesky>
#include <algorithm>
#include <cmath>

#include "fraclab/errors.hpp"

namespace fraclab {

namespace {

// int_{lo}^{hi} y^a dy
double weight_integral(double lo, double hi, double a) {
  return (std::pow(hi, 1.0 + a) - std::pow(lo, 1.0 + a)) / (1.0 + a);
}

}  // namespace

HalfSpaceGrid::HalfSpaceGrid(const GridConfig& config, const FracParams& params)
    : cfg_(config), p_(params) {
  if (cfg_.d != 1 && cfg_.d != 2) throw ConfigError("grid dimension d must be 1 or 2");
  if (cfg_.nx < 4 || cfg_.ny < 4) throw ConfigError("grid needs nx, ny >= 4");
  if (!(cfg_.L > 0.0) || !(cfg_.Y > 0.0)) throw ConfigError("grid extents L, Y must be positive");
  const double a = p_.a();
  grading_ = cfg_.grading_p.value_or(std::max(1.0, 2.0 / (1.0 + a)));
  if (!(grading_ >= 1.0)) throw ConfigError("grading exponent must be >= 1");

  const int nx = cfg_.nx, ny = cfg_.ny;
  hx_ = 2.0 * cfg_.L / (nx - 1);
  layer_ = cfg_.d == 1 ? nx : static_cast<std::size_t>(nx) * nx;
  x_.resize(nx);
  for (int i = 0; i < nx; ++i) x_[i] = -cfg_.L + hx_ * i;
  x_[nx - 1] = cfg_.L;
  y_.resize(ny + 1);
  for (int j = 0; j <= ny; ++j) y_[j] = cfg_.Y * std::pow(static_cast<double>(j) / ny, grading_);
  for (int j = 0; j < ny; ++j) {
    if (!(y_[j + 1] > y_[j])) throw ConfigError("grid rows collapse; reduce grading or ny");
  }

  face_w_.resize(ny);
  vert_w_.resize(ny);
  for (int j = 0; j < ny; ++j) {
    const double lo = y_[j], hi = y_[j + 1], dy = hi - lo;
    face_w_[j] = weight_integral(lo, hi, a) / dy;
    // harmonic mean: dy / int dy / y^a, exact flux for y^{1-a}
    vert_w_[j] = (1.0 - a) * dy / (std::pow(hi, 1.0 - a) - std::pow(lo, 1.0 - a));
  }
  layer_w_.resize(ny + 1);
  for (int j = 0; j <= ny; ++j) {
    const double lo = j == 0 ? 0.0 : 0.5 * (y_[j - 1] + y_[j]);
    const double hi = j == ny ? y_[ny] : 0.5 * (y_[j] + y_[j + 1]);
    layer_w_[j] = weight_integral(lo, hi, a);
  }
}

std::array<int, 3> HalfSpaceGrid::unpack(std::size_t n) const {
  const std::size_t nx = cfg_.nx;
  const int i1 = static_cast<int>(n % nx);
  if (cfg_.d == 1) return {i1, 0, static_cast<int>(n / nx)};
  const std::size_t rest = n / nx;
  return {i1, static_cast<int>(rest % nx), static_cast<int>(rest / nx)};
}

std::vector<double> HalfSpaceGrid::coords(std::size_t n) const {
  const auto [i1, i2, j] = unpack(n);
  if (cfg_.d == 1) return {x_[i1], y_[j]};
  return {x_[i1], x_[i2], y_[j]};
}

double HalfSpaceGrid::trace_area(std::size_t t) const {
  const auto [i1, i2, j] = unpack(t);
  (void)j;
  return cfg_.d == 1 ? dual_width(i1) : dual_width(i1) * dual_width(i2);
}

bool HalfSpaceGrid::on_lateral(std::size_t n) const {
  const auto [i1, i2, j] = unpack(n);
  (void)j;
  const int last = cfg_.nx - 1;
  if (i1 == 0 || i1 == last) return true;
  return cfg_.d == 2 && (i2 == 0 || i2 == last);
}

// ---------------------------------------------------------------------------

Field::Field(const HalfSpaceGrid& grid, std::vector<double> values, int component)
    : v_(std::move(values)), component_(component) {
  if (v_.size() != grid.num_nodes()) throw ConfigError("field size does not match the grid");
  for (double v : v_) {
    if (!std::isfinite(v)) throw DomainError("field contains non-finite values");
  }
}

Field Field::zeros(const HalfSpaceGrid& grid, int component) {
  return Field(grid, std::vector<double>(grid.num_nodes(), 0.0), component);
}

Field Field::sample(const HalfSpaceGrid& grid,
                    const std::function<double(std::span<const double>)>& f, int component) {
  std::vector<double> v(grid.num_nodes());
  for (std::size_t n = 0; n < v.size(); ++n) {
    const auto X = grid.coords(n);
    v[n] = f(X);
  }
  return Field(grid, std::move(v), component);
}

std::vector<double> Field::trace(const HalfSpaceGrid& grid) const {
  return {v_.begin(), v_.begin() + static_cast<std::ptrdiff_t>(grid.layer_size())};
}

// ---------------------------------------------------------------------------

BoundaryData BoundaryData::constant(const HalfSpaceGrid& grid, double value) {
  BoundaryData b;
  b.dirichlet.assign(grid.num_nodes(), value);
  return b;
}

BoundaryData BoundaryData::from_function(const HalfSpaceGrid& grid,
                                         const std::function<double(std::span<const double>)>& f) {
  BoundaryData b;
  b.dirichlet.resize(grid.num_nodes());
  for (std::size_t n = 0; n < grid.num_nodes(); ++n) {
    const auto X = grid.coords(n);
    b.dirichlet[n] = f(X);
  }
  return b;
}

void BoundaryData::validate(const HalfSpaceGrid& grid) const {
  if (dirichlet.size() != grid.num_nodes()) {
    throw ConfigError("Dirichlet data must hold one value per node");
  }
  const std::size_t nt = grid.layer_size();
  if (!g0.empty() && g0.size() != nt) throw ConfigError("g0 must hold one value per trace node");
  if (!m.empty() && m.size() != nt) throw ConfigError("m must hold one value per trace node");
  for (double v : m) {
    if (!(v >= 0.0)) throw DomainError("absorption m must be nonnegative");
  }
  if (!extra_dirichlet.empty() && extra_dirichlet.size() != grid.num_nodes()) {
    throw ConfigError("extra Dirichlet mask must hold one flag per node");
  }
}

bool BoundaryData::is_dirichlet(const HalfSpaceGrid& grid, std::size_t n) const {
  if (!extra_dirichlet.empty() && extra_dirichlet[n]) return true;
  if (grid.on_lateral(n) || grid.on_top(n)) return true;
  return dirichlet_trace && n < grid.layer_size();
}

std::vector<char> BoundaryData::dirichlet_mask(const HalfSpaceGrid& grid) const {
  std::vector<char> mask(grid.num_nodes());
  for (std::size_t n = 0; n < mask.size(); ++n) mask[n] = is_dirichlet(grid, n) ? 1 : 0;
  return mask;
}

// ---------------------------------------------------------------------------

SparseMatrix assemble_La(const HalfSpaceGrid& grid) {
  const int nx = grid.nx(), ny = grid.ny(), d = grid.d();
  const double hx = grid.hx();
  const int n2 = d == 2 ? nx : 1;
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(grid.num_nodes() * (d == 1 ? 5 : 7));
  auto edge = [&](std::size_t p, std::size_t q, double c) {
    trip.emplace_back(p, p, c);
    trip.emplace_back(q, q, c);
    trip.emplace_back(p, q, -c);
    trip.emplace_back(q, p, -c);
  };
  for (int j = 0; j <= ny; ++j) {
    const double lw = grid.layer_weight(j);
    for (int i2 = 0; i2 < n2; ++i2) {
      const double w2 = d == 2 ? grid.dual_width(i2) : 1.0;
      for (int i1 = 0; i1 < nx; ++i1) {
        const std::size_t n = grid.index(i1, i2, j);
        const double w1 = grid.dual_width(i1);
        if (i1 + 1 < nx) edge(n, grid.index(i1 + 1, i2, j), lw * w2 / hx);
        if (d == 2 && i2 + 1 < nx) edge(n, grid.index(i1, i2 + 1, j), lw * w1 / hx);
        if (j < ny) {
          const double dy = grid.y()[j + 1] - grid.y()[j];
          edge(n, grid.index(i1, i2, j + 1), grid.vertical_weight(j) * w1 * w2 / dy);
        }
      }
    }
  }
  SparseMatrix A(grid.num_nodes(), grid.num_nodes());
  A.setFromTriplets(trip.begin(), trip.end());
  return A;
}

std::vector<double> dtn_trace(const HalfSpaceGrid& grid, const Field& field) {
  const std::size_t nt = grid.layer_size();
  const double s = grid.params().s();
  const double scale = 2.0 * s / std::pow(grid.y()[1], 2.0 * s);
  std::vector<double> out(nt);
  for (std::size_t t = 0; t < nt; ++t) out[t] = -scale * (field[t + nt] - field[t]);
  return out;
}

// ---------------------------------------------------------------------------

namespace {

using ColMatrix = Eigen::SparseMatrix<double>;

// Unknown counts up to which the automatic method factorizes directly.
constexpr std::size_t kDirectLimit1 = 400000;
constexpr std::size_t kDirectLimit2 = 60000;

// Maps node -> position in the free list, or -1.
std::vector<long> free_numbering(const std::vector<char>& mask, std::size_t* count) {
  std::vector<long> map(mask.size(), -1);
  long k = 0;
  for (std::size_t n = 0; n < mask.size(); ++n) {
    if (!mask[n]) map[n] = k++;
  }
  *count = static_cast<std::size_t>(k);
  return map;
}

}  // namespace

Field solve_linear(const HalfSpaceGrid& grid, const SparseMatrix& A, const BoundaryData& bdata,
                   const LinearSolveOptions& opts, LinearSolveInfo* info) {
  bdata.validate(grid);
  const auto mask = bdata.dirichlet_mask(grid);
  std::size_t nf = 0;
  const auto map = free_numbering(mask, &nf);
  std::vector<double> v = bdata.dirichlet;
  for (std::size_t n = 0; n < v.size(); ++n) {
    if (!mask[n]) v[n] = 0.0;
  }
  if (nf == 0) {
    if (info) *info = {};
    return Field(grid, std::move(v));
  }

  const std::size_t nt = grid.layer_size();
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(A.nonZeros());
  Eigen::VectorXd b = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(nf));
  for (Eigen::Index r = 0; r < A.outerSize(); ++r) {
    const long fr = map[r];
    if (fr < 0) continue;
    for (SparseMatrix::InnerIterator it(A, r); it; ++it) {
      const long fc = map[it.col()];
      if (fc >= 0) {
        trip.emplace_back(fr, fc, it.value());
      } else {
        b[fr] -= it.value() * bdata.dirichlet[it.col()];
      }
    }
    if (static_cast<std::size_t>(r) < nt) {
      const double area = grid.trace_area(r);
      if (!bdata.m.empty()) trip.emplace_back(fr, fr, bdata.m[r] * area);
      if (!bdata.g0.empty()) b[fr] += bdata.g0[r] * area;
    }
  }
  ColMatrix K(static_cast<Eigen::Index>(nf), static_cast<Eigen::Index>(nf));
  K.setFromTriplets(trip.begin(), trip.end());

  const bool direct =
      opts.method == LinearMethod::direct ||
      (opts.method == LinearMethod::automatic && nf <= (grid.d() == 1 ? kDirectLimit1 : kDirectLimit2));
  Eigen::VectorXd x;
  const double bnorm = b.norm();
  if (direct) {
    Eigen::SimplicialLDLT<ColMatrix> ldlt(K);
    if (ldlt.info() != Eigen::Success) throw ConvergenceError("sparse factorization failed", 1.0, 0);
    x = ldlt.solve(b);
    // one step of iterative refinement
    x += ldlt.solve(b - K * x);
    const double res = bnorm > 0.0 ? (K * x - b).norm() / bnorm : (K * x).norm();
    if (info) *info = {0, res};
  } else {
    // symmetric Jacobi scaling; residuals are measured on the scaled system
    const Eigen::VectorXd dinv = K.diagonal().cwiseSqrt().cwiseInverse();
    const ColMatrix Ks = dinv.asDiagonal() * K * dinv.asDiagonal();
    const Eigen::VectorXd bs = dinv.cwiseProduct(b);
    const double bsnorm = bs.norm();
    auto scaled_residual = [&](const Eigen::VectorXd& z) {
      const double r = (Ks * z - bs).norm();
      return bsnorm > 0.0 ? r / bsnorm : r;
    };
    Eigen::ConjugateGradient<ColMatrix, Eigen::Lower | Eigen::Upper,
                             Eigen::IncompleteCholesky<double, Eigen::Lower, Eigen::AMDOrdering<int>>>
        cg;
    const int cap = opts.max_iter > 0
                        ? opts.max_iter
                        : static_cast<int>(std::ceil(20.0 * std::sqrt(static_cast<double>(nf))));
    cg.setTolerance(opts.tol);
    cg.setMaxIterations(cap);
    cg.compute(Ks);
    if (cg.info() != Eigen::Success) throw ConvergenceError("incomplete Cholesky failed", 1.0, 0);
    Eigen::VectorXd z;
    if (opts.guess) {
      Eigen::VectorXd z0(static_cast<Eigen::Index>(nf));
      for (std::size_t n = 0; n < mask.size(); ++n) {
        if (map[n] >= 0) z0[map[n]] = (*opts.guess)[n] / dinv[map[n]];
      }
      z = cg.solveWithGuess(bs, z0);
    } else {
      z = cg.solve(bs);
    }
    int iters = static_cast<int>(cg.iterations());
    double res = scaled_residual(z);
    // the recursive residual can drift from the true one; restart from the current iterate
    for (int restart = 0; restart < 3 && res > opts.tol && iters < cap; ++restart) {
      cg.setMaxIterations(cap - iters);
      z = cg.solveWithGuess(bs, z);
      iters += static_cast<int>(cg.iterations());
      res = scaled_residual(z);
    }
    if (info) *info = {iters, res};
    if (!(res <= opts.tol)) throw ConvergenceError("linear solve did not converge", res, iters);
    x = dinv.cwiseProduct(z);
  }
  for (std::size_t n = 0; n < mask.size(); ++n) {
    if (map[n] >= 0) v[n] = x[map[n]];
  }
  return Field(grid, std::move(v));
}

// ---------------------------------------------------------------------------

struct TraceReducedSystem::Impl {
  std::vector<long> tmap;  // node -> trace unknown index or -1
  std::vector<long> imap;  // node -> interior unknown index or -1
  std::vector<std::size_t> interior;
  ColMatrix A_II, A_IT, A_TI;
  SparseMatrix A_full;
  Eigen::SimplicialLDLT<ColMatrix> ldlt;
  std::vector<char> mask;
};

TraceReducedSystem::TraceReducedSystem(const HalfSpaceGrid& grid, const SparseMatrix& A,
                                       const std::vector<char>& dirichlet_mask)
    : impl_(std::make_unique<Impl>()) {
  if (dirichlet_mask.size() != grid.num_nodes()) throw ConfigError("mask size mismatch");
  auto& im = *impl_;
  im.mask = dirichlet_mask;
  im.A_full = A;
  const std::size_t nt = grid.layer_size(), nn = grid.num_nodes();
  im.tmap.assign(nn, -1);
  im.imap.assign(nn, -1);
  for (std::size_t n = 0; n < nn; ++n) {
    if (dirichlet_mask[n]) continue;
    if (n < nt) {
      im.tmap[n] = static_cast<long>(trace_.size());
      trace_.push_back(n);
    } else {
      im.imap[n] = static_cast<long>(im.interior.size());
      im.interior.push_back(n);
    }
  }
  const auto nT = static_cast<Eigen::Index>(trace_.size());
  const auto nI = static_cast<Eigen::Index>(im.interior.size());
  std::vector<Eigen::Triplet<double>> tII, tIT, tTI;
  Eigen::MatrixXd A_TT = Eigen::MatrixXd::Zero(nT, nT);
  for (Eigen::Index r = 0; r < A.outerSize(); ++r) {
    if (dirichlet_mask[r]) continue;
    for (SparseMatrix::InnerIterator it(A, r); it; ++it) {
      const auto c = static_cast<std::size_t>(it.col());
      if (dirichlet_mask[c]) continue;
      const bool rt = im.tmap[r] >= 0, ct = im.tmap[c] >= 0;
      if (rt && ct) A_TT(im.tmap[r], im.tmap[c]) += it.value();
      else if (rt) tTI.emplace_back(im.tmap[r], im.imap[c], it.value());
      else if (ct) tIT.emplace_back(im.imap[r], im.tmap[c], it.value());
      else tII.emplace_back(im.imap[r], im.imap[c], it.value());
    }
  }
  im.A_II.resize(nI, nI);
  im.A_II.setFromTriplets(tII.begin(), tII.end());
  im.A_IT.resize(nI, nT);
  im.A_IT.setFromTriplets(tIT.begin(), tIT.end());
  im.A_TI.resize(nT, nI);
  im.A_TI.setFromTriplets(tTI.begin(), tTI.end());

  S_ = A_TT;
  if (nI == 0) return;
  im.ldlt.compute(im.A_II);
  if (im.ldlt.info() != Eigen::Success) throw ConvergenceError("interior factorization failed", 1.0, 0);
  // S = A_TT - A_TI A_II^{-1} A_IT, a block of columns at a time
  constexpr Eigen::Index kBlock = 64;
  for (Eigen::Index c0 = 0; c0 < nT; c0 += kBlock) {
    const Eigen::Index w = std::min(kBlock, nT - c0);
    const Eigen::MatrixXd block = Eigen::MatrixXd(im.A_IT.middleCols(c0, w));
    const Eigen::MatrixXd X = im.ldlt.solve(block);
    S_.middleCols(c0, w) -= im.A_TI * X;
  }
  S_ = 0.5 * (S_ + S_.transpose()).eval();
}

TraceReducedSystem::~TraceReducedSystem() = default;

Eigen::VectorXd TraceReducedSystem::lift(const std::vector<double>& dirichlet) const {
  const auto& im = *impl_;
  const auto nT = static_cast<Eigen::Index>(trace_.size());
  const auto nI = static_cast<Eigen::Index>(im.interior.size());
  Eigen::VectorXd cT = Eigen::VectorXd::Zero(nT);
  Eigen::VectorXd cI = Eigen::VectorXd::Zero(nI);
  for (Eigen::Index r = 0; r < im.A_full.outerSize(); ++r) {
    if (im.mask[r]) continue;
    double acc = 0.0;
    for (SparseMatrix::InnerIterator it(im.A_full, r); it; ++it) {
      if (im.mask[it.col()]) acc += it.value() * dirichlet[it.col()];
    }
    if (im.tmap[r] >= 0) cT[im.tmap[r]] = acc;
    else cI[im.imap[r]] = acc;
  }
  if (nI > 0) cT -= im.A_TI * im.ldlt.solve(cI);
  return cT;
}

std::vector<double> TraceReducedSystem::reconstruct(const Eigen::VectorXd& vT,
                                                    const std::vector<double>& dirichlet) const {
  const auto& im = *impl_;
  std::vector<double> v(im.mask.size(), 0.0);
  const auto nI = static_cast<Eigen::Index>(im.interior.size());
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(nI);
  for (std::size_t n = 0; n < v.size(); ++n) {
    if (im.mask[n]) v[n] = dirichlet[n];
  }
  for (std::size_t k = 0; k < trace_.size(); ++k) v[trace_[k]] = vT[static_cast<Eigen::Index>(k)];
  if (nI == 0) return v;
  for (Eigen::Index k = 0; k < nI; ++k) {
    const std::size_t r = im.interior[k];
    double acc = 0.0;
    for (SparseMatrix::InnerIterator it(im.A_full, r); it; ++it) {
      if (im.mask[it.col()]) acc += it.value() * dirichlet[it.col()];
    }
    rhs[k] = -acc;
  }
  rhs -= im.A_IT * vT;
  const Eigen::VectorXd vI = im.ldlt.solve(rhs);
  for (Eigen::Index k = 0; k < nI; ++k) v[im.interior[k]] = vI[k];
  return v;
}

}  // namespace fraclab
