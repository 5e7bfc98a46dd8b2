#include "fraclab/diagnostics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "fraclab/errors.hpp"
#include "fraclab/io.hpp"

namespace fraclab {

std::string to_string(Quantity q) {
  switch (q) {
    case Quantity::acf_vanish: return "acf_vanish";
    case Quantity::acf_halfspace: return "acf_halfspace";
    case Quantity::acf_codim1: return "acf_codim1";
    case Quantity::acf_two_phase: return "acf_two_phase";
    case Quantity::acf_perturbed: return "acf_perturbed";
    case Quantity::E: return "E";
    case Quantity::H: return "H";
    case Quantity::Nfreq: return "Nfreq";
  }
  return "E";
}

namespace {

// 4-point Gauss-Legendre on [0, 1]
constexpr std::array<double, 4> kGx = {0.0694318442029737, 0.3300094782075719, 0.6699905217924281,
                                       0.9305681557970263};
constexpr std::array<double, 4> kGw = {0.1739274225687269, 0.3260725774312731, 0.3260725774312731,
                                       0.1739274225687269};

// Kernel |X|^{2s-N}, regularized below eps when it is singular.
struct Kernel {
  double expo;
  std::optional<RegularizedKernel> reg;
  Kernel(const FracParams& p, double eps) : expo(p.fundamental_exponent()) {
    if (p.N() > 2.0 * p.s()) reg.emplace(eps, p);
  }
  double operator()(double r) const { return reg ? reg->radial(r) : std::pow(r, expo); }
};

struct Sample {
  double rho;   // distance to the centre
  double wdv;   // y^a dV
  std::vector<double> val;
  std::vector<std::array<double, 3>> grad;
  std::array<double, 3> dir;  // unit vector from the centre (y last)
};

void check_center(const HalfSpaceGrid& g, std::span<const double> center) {
  if (static_cast<int>(center.size()) != g.d()) throw ConfigError("centre needs d coordinates");
}

void check_radii(const HalfSpaceGrid& g, std::span<const double> center, std::span<const double> radii) {
  check_center(g, center);
  if (radii.empty()) throw ConfigError("radius list is empty");
  double room = g.Y();
  for (double c : center) room = std::min(room, g.L() - std::abs(c));
  room -= g.hx();
  for (std::size_t k = 0; k < radii.size(); ++k) {
    if (!(radii[k] > 0.0)) throw ConfigError("radii must be positive");
    if (k > 0 && !(radii[k] > radii[k - 1])) throw ConfigError("radii must be increasing");
    if (radii[k] + g.hx() > room + 1e-12) throw RangeError("radius does not fit inside the grid");
  }
}

// Visits 4^{d+1} Gauss points per cell in the box around the centre with multilinear
// interpolation of every field.
template <typename F>
void visit(const HalfSpaceGrid& g, const std::vector<const Field*>& fs, std::span<const double> center,
           double R, F&& f) {
  const int d = g.d(), nx = g.nx();
  const double hx = g.hx(), a = g.params().a(), twos = 2.0 * g.params().s();
  const auto& X = g.x();
  const auto& Yv = g.y();
  const std::size_t nf = fs.size();
  auto lo_idx = [&](double c) { return std::max(0, static_cast<int>(std::floor((c - R - X[0]) / hx)) - 1); };
  auto hi_idx = [&](double c) { return std::min(nx - 2, static_cast<int>(std::ceil((c + R - X[0]) / hx)) + 1); };
  const int i1a = lo_idx(center[0]), i1b = hi_idx(center[0]);
  const int i2a = d == 2 ? lo_idx(center[1]) : 0, i2b = d == 2 ? hi_idx(center[1]) : 0;
  const double first_m = std::max(2.0, std::ceil(1.0 / g.params().s()));
  int jb = 0;
  while (jb < g.ny() - 1 && Yv[jb + 1] < R) ++jb;

  Sample smp;
  smp.val.resize(nf);
  smp.grad.resize(nf);
  const int nc = d == 1 ? 4 : 8;
  std::array<std::size_t, 8> node{};
  std::array<std::array<int, 3>, 8> bits{};
  for (int c = 0; c < nc; ++c) bits[c] = {c & 1, d == 2 ? (c >> 1) & 1 : 0, d == 2 ? (c >> 2) & 1 : (c >> 1) & 1};
  std::vector<std::array<double, 8>> cv(nf);
  std::vector<char> power_y(nf, 0);
  std::vector<double> scale(nf, 0.0);
  for (std::size_t q = 0; q < nf; ++q) {
    for (double v : fs[q]->values()) scale[q] = std::max(scale[q], std::abs(v));
  }

  for (int j = 0; j <= jb; ++j) {
    const double hy = Yv[j + 1] - Yv[j];
    for (int i2 = i2a; i2 <= i2b; ++i2) {
      for (int i1 = i1a; i1 <= i1b; ++i1) {
        for (int c = 0; c < nc; ++c) {
          node[c] = g.index(i1 + bits[c][0], i2 + bits[c][1], j + bits[c][2]);
          for (std::size_t q = 0; q < nf; ++q) cv[q][c] = (*fs[q])[node[c]];
        }
        const int nq2 = d == 2 ? 4 : 1;
        // Above a vanishing trace the field behaves like c y^{2s}; there the vertical
        // interpolation is linear in y^{2s}, elsewhere linear in y.
        for (std::size_t q = 0; q < nf; ++q) {
          double bottom = 0.0;
          for (int c = 0; c < nc; ++c) bottom = std::max(bottom, std::abs((*fs[q])[g.index(i1 + bits[c][0], i2 + bits[c][1], 0)]));
          power_y[q] = bottom <= 1e-13 * scale[q];
        }
        const double e0 = std::pow(Yv[j], twos), de = std::pow(Yv[j + 1], twos) - e0;
        for (int qy = 0; qy < 4; ++qy) {
          // the first row is graded once more, y = y1 u^m, to absorb the y^{2s - 1} singularity
          const double u = kGx[qy];
          const double y = j == 0 ? hy * std::pow(u, first_m) : Yv[j] + u * hy;
          const double wy = j == 0 ? kGw[qy] * hy * first_m * std::pow(u, first_m - 1.0) : kGw[qy] * hy;
          const double ya = std::pow(y, a);
          const double ty_p = (std::pow(y, twos) - e0) / de;
          const double dty_p = twos * std::pow(y, twos - 1.0) / de;
          const double ty_l = (y - Yv[j]) / hy, dty_l = 1.0 / hy;
          for (int q2 = 0; q2 < nq2; ++q2) {
            const double t2 = d == 2 ? kGx[q2] : 0.0;
            for (int q1 = 0; q1 < 4; ++q1) {
              const double t1 = kGx[q1];
              const double x1 = X[i1] + t1 * hx;
              const double x2 = d == 2 ? X[i2] + t2 * hx : 0.0;
              const double dx1 = x1 - center[0], dx2 = d == 2 ? x2 - center[1] : 0.0;
              const double rho = std::sqrt(dx1 * dx1 + dx2 * dx2 + y * y);
              if (rho > R) continue;
              double w = wy * kGw[q1] * hx;
              if (d == 2) w *= kGw[q2] * hx;
              smp.rho = rho;
              smp.wdv = ya * w;
              smp.dir = d == 1 ? std::array<double, 3>{dx1 / rho, y / rho, 0.0}
                               : std::array<double, 3>{dx1 / rho, dx2 / rho, y / rho};
              const int dims = d + 1;
              for (std::size_t q = 0; q < nf; ++q) {
                const double ty = power_y[q] ? ty_p : ty_l, dty = power_y[q] ? dty_p : dty_l;
                const std::array<double, 3> t{t1, d == 2 ? t2 : ty, ty};
                const std::array<double, 3> dt{1.0 / hx, d == 2 ? 1.0 / hx : dty, dty};
                double v = 0.0;
                std::array<double, 3> gr{0.0, 0.0, 0.0};
                // bit k of the corner index is local axis k: x1, (x2), y
                auto basis = [&](int c, int skip) {
                  double prod = 1.0;
                  for (int k = 0; k < dims; ++k) {
                    if (k != skip) prod *= ((c >> k) & 1) ? t[k] : 1.0 - t[k];
                  }
                  return prod;
                };
                for (int c = 0; c < nc; ++c) {
                  v += cv[q][c] * basis(c, -1);
                  // edge differences, so that equal corner values give an exactly zero gradient
                  for (int k = 0; k < dims; ++k) {
                    if ((c >> k) & 1) continue;
                    gr[k] += (cv[q][c | (1 << k)] - cv[q][c]) * dt[k] * basis(c, k);
                  }
                }
                smp.val[q] = v;
                smp.grad[q] = gr;
              }
              f(smp);
            }
          }
        }
      }
    }
  }
}

// cos^2 window on [-1, 1] with unit integral, and its primitive
double smooth_window(double z) {
  if (std::abs(z) >= 1.0) return 0.0;
  const double c = std::cos(0.5 * std::numbers::pi * z);
  return c * c;
}

double smooth_step(double z) {
  if (z <= -1.0) return 0.0;
  if (z >= 1.0) return 1.0;
  return 0.5 + 0.5 * z + std::sin(std::numbers::pi * z) / (2.0 * std::numbers::pi);
}

// Ball and shell integrals, smoothed over one cell on either side of |X - X0| = r.
struct RadialSums {
  std::vector<double> ball, shell;
};

template <typename Ball, typename Shell>
RadialSums radial_sums(const HalfSpaceGrid& g, const std::vector<const Field*>& fs, std::span<const double> center,
                       std::span<const double> radii, Ball&& ball_fn, Shell&& shell_fn) {
  const double w = g.hx();
  RadialSums out{std::vector<double>(radii.size(), 0.0), std::vector<double>(radii.size(), 0.0)};
  const double R = radii.back() + w;
  visit(g, fs, center, R, [&](const Sample& s) {
    double bv = std::numeric_limits<double>::quiet_NaN(), sv = bv;
    for (std::size_t k = 0; k < radii.size(); ++k) {
      const double r = radii[k];
      const double bw = smooth_step((r - s.rho) / w);
      if (bw > 0.0) {
        if (std::isnan(bv)) bv = ball_fn(s);
        out.ball[k] += bw * bv;
      }
      const double sw = smooth_window((s.rho - r) / w) / w;
      if (sw > 0.0) {
        if (std::isnan(sv)) sv = shell_fn(s);
        out.shell[k] += sw * sv;
      }
    }
  });
  return out;
}

double grad2(const Sample& s, std::size_t q) {
  const auto& gr = s.grad[q];
  return gr[0] * gr[0] + gr[1] * gr[1] + gr[2] * gr[2];
}

double radial_derivative(const Sample& s, std::size_t q) {
  const auto& gr = s.grad[q];
  return gr[0] * s.dir[0] + gr[1] * s.dir[1] + gr[2] * s.dir[2];
}

double cell_diameter(const HalfSpaceGrid& g) { return g.hx() * std::sqrt(g.d() + 1.0); }

// Weighted Dirichlet energy against the kernel, one value per radius.
std::vector<double> kernel_energy(const HalfSpaceGrid& g, const Field& v, std::span<const double> center,
                                  std::span<const double> radii, const Kernel& K) {
  std::vector<const Field*> fs{&v};
  return radial_sums(
             g, fs, center, radii, [&](const Sample& s) { return s.wdv * grad2(s, 0) * K(s.rho); },
             [](const Sample&) { return 0.0; })
      .ball;
}

// Trace integral of v1^2 v2^2 K over |x - x0| < r with the same ramp.
std::vector<double> trace_coupling(const HalfSpaceGrid& g, const Field& v1, const Field& v2,
                                   std::span<const double> center, std::span<const double> radii, const Kernel& K) {
  const double w = g.hx();
  std::vector<double> out(radii.size(), 0.0);
  for (std::size_t t = 0; t < g.layer_size(); ++t) {
    const auto c = g.coords(t);
    double r2 = 0.0;
    for (int k = 0; k < g.d(); ++k) r2 += (c[k] - center[k]) * (c[k] - center[k]);
    const double rho = std::sqrt(r2);
    const double val = v1[t] * v1[t] * v2[t] * v2[t] * g.trace_area(t) * K(std::max(rho, 1e-300));
    for (std::size_t k = 0; k < radii.size(); ++k) {
      out[k] += smooth_step((radii[k] - rho) / w) * val;
    }
  }
  return out;
}

double trace_max_abs(const HalfSpaceGrid& g, const Field& v, std::span<const double> center, double R,
                     bool only_negative_x1) {
  double m = 0.0;
  for (std::size_t t = 0; t < g.layer_size(); ++t) {
    const auto c = g.coords(t);
    double r2 = 0.0;
    for (int k = 0; k < g.d(); ++k) r2 += (c[k] - center[k]) * (c[k] - center[k]);
    if (r2 > R * R) continue;
    if (only_negative_x1 && c[0] - center[0] > 0.0) continue;
    m = std::max(m, std::abs(v[t]));
  }
  return m;
}

}  // namespace

// ---------------------------------------------------------------------------

RadialProfile acf_one_phase(const HalfSpaceGrid& grid, const Field& field, std::span<const double> center,
                            std::span<const double> radii, AcfVariant variant) {
  check_radii(grid, center, radii);
  const auto& p = grid.params();
  const double s = p.s();
  double e = 0.0;
  RadialProfile prof;
  switch (variant) {
    case AcfVariant::vanish:
      e = 4.0 * s;
      prof.quantity = Quantity::acf_vanish;
      prof.hypothesis_residual = trace_max_abs(grid, field, center, radii.back(), false);
      break;
    case AcfVariant::halfspace:
      e = 2.0 * s;
      prof.quantity = Quantity::acf_halfspace;
      prof.hypothesis_residual = trace_max_abs(grid, field, center, radii.back(), true);
      break;
    case AcfVariant::codim1:
      if (!(s > 0.5)) throw ConfigError("codim-1 ACF needs s > 1/2");
      e = 4.0 * s - 2.0;
      prof.quantity = Quantity::acf_codim1;
      prof.hypothesis_residual = trace_max_abs(grid, field, center, grid.hx(), false);
      break;
  }
  const Kernel K(p, cell_diameter(grid));
  const auto J = kernel_energy(grid, field, center, radii, K);
  prof.center.assign(center.begin(), center.end());
  prof.radii.assign(radii.begin(), radii.end());
  for (std::size_t k = 0; k < radii.size(); ++k) prof.values.push_back(J[k] * std::pow(radii[k], -e));
  return prof;
}

RadialProfile acf_two_phase(const HalfSpaceGrid& grid, const Field& v1, const Field& v2,
                            std::span<const double> center, std::span<const double> radii, double nu,
                            double kernel_eps) {
  check_radii(grid, center, radii);
  if (!(nu > 0.0)) throw ConfigError("nu must be positive");
  const Kernel K(grid.params(), kernel_eps > 0.0 ? kernel_eps : cell_diameter(grid));
  const auto J1 = kernel_energy(grid, v1, center, radii, K);
  const auto J2 = kernel_energy(grid, v2, center, radii, K);
  RadialProfile prof;
  prof.quantity = Quantity::acf_two_phase;
  prof.center.assign(center.begin(), center.end());
  prof.radii.assign(radii.begin(), radii.end());
  for (std::size_t t = 0; t < grid.layer_size(); ++t) {
    prof.hypothesis_residual = std::max(prof.hypothesis_residual, std::abs(v1[t] * v2[t]));
  }
  for (std::size_t k = 0; k < radii.size(); ++k) {
    const double sc = std::pow(radii[k], -2.0 * nu);
    prof.values.push_back(sc * J1[k] * sc * J2[k]);
  }
  return prof;
}

RadialProfile acf_perturbed(const HalfSpaceGrid& grid, const Field& v1, const Field& v2,
                            std::span<const double> center, std::span<const double> radii, double nu_prime,
                            double a12) {
  check_radii(grid, center, radii);
  if (!(nu_prime > 0.0)) throw ConfigError("nu' must be positive");
  if (!(a12 >= 0.0)) throw ConfigError("coupling must be nonnegative");
  const Kernel K(grid.params(), 1.0);
  const auto J1 = kernel_energy(grid, v1, center, radii, K);
  const auto J2 = kernel_energy(grid, v2, center, radii, K);
  const auto C = trace_coupling(grid, v1, v2, center, radii, K);
  RadialProfile prof;
  prof.quantity = Quantity::acf_perturbed;
  prof.center.assign(center.begin(), center.end());
  prof.radii.assign(radii.begin(), radii.end());
  for (std::size_t k = 0; k < radii.size(); ++k) {
    const double sc = std::pow(radii[k], -2.0 * nu_prime);
    prof.values.push_back(sc * (J1[k] + a12 * C[k]) * sc * (J2[k] + a12 * C[k]));
  }
  return prof;
}

AlmgrenProfiles almgren(const HalfSpaceGrid& grid, const std::vector<Field>& fields, std::span<const double> center,
                        std::span<const double> radii) {
  check_radii(grid, center, radii);
  if (fields.empty()) throw ConfigError("almgren needs at least one field");
  std::vector<const Field*> fs;
  for (const auto& f : fields) fs.push_back(&f);
  const double s = grid.params().s(), N = grid.params().N();
  const auto sums = radial_sums(
      grid, fs, center, radii,
      [&](const Sample& smp) {
        double e = 0.0;
        for (std::size_t q = 0; q < fs.size(); ++q) e += grad2(smp, q);
        return smp.wdv * e;
      },
      [&](const Sample& smp) {
        double h = 0.0;
        for (std::size_t q = 0; q < fs.size(); ++q) h += smp.val[q] * smp.val[q];
        return smp.wdv * h;
      });
  AlmgrenProfiles out;
  for (RadialProfile* p : {&out.E, &out.H, &out.Nfreq}) {
    p->center.assign(center.begin(), center.end());
    p->radii.assign(radii.begin(), radii.end());
  }
  out.E.quantity = Quantity::E;
  out.H.quantity = Quantity::H;
  out.Nfreq.quantity = Quantity::Nfreq;
  for (std::size_t k = 0; k < radii.size(); ++k) {
    const double r = radii[k];
    const double E = std::pow(r, 2.0 * s - N) * sums.ball[k];
    const double H = std::pow(r, 2.0 * s - N - 1.0) * sums.shell[k];
    if (!(H > 0.0)) {
      throw DomainError("frequency undefined: H vanishes at r = " + format_double(r));
    }
    out.E.values.push_back(E);
    out.H.values.push_back(H);
    out.Nfreq.values.push_back(E / H);
  }
  return out;
}

double log_derivative_defect(const AlmgrenProfiles& a) {
  const auto& r = a.H.radii;
  const std::size_t n = r.size();
  if (n < 3) throw ConfigError("log-derivative check needs at least three radii");
  double worst = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    // quadratic through three neighbouring points in t = log r, differentiated at t_k
    const std::size_t c = std::clamp<std::size_t>(k, 1, n - 2);
    const double x0 = std::log(r[c - 1]), x1 = std::log(r[c]), x2 = std::log(r[c + 1]), x = std::log(r[k]);
    const double f0 = std::log(a.H.values[c - 1]), f1 = std::log(a.H.values[c]), f2 = std::log(a.H.values[c + 1]);
    const double d = f0 * ((x - x1) + (x - x2)) / ((x0 - x1) * (x0 - x2)) +
                     f1 * ((x - x0) + (x - x2)) / ((x1 - x0) * (x1 - x2)) +
                     f2 * ((x - x0) + (x - x1)) / ((x2 - x0) * (x2 - x1));
    const double target = 2.0 * a.Nfreq.values[k];
    worst = std::max(worst, std::abs(d - target) / std::abs(target));
  }
  return worst;
}

double pohozaev_residual(const HalfSpaceGrid& grid, const std::vector<Field>& fields, std::span<const double> center,
                         double r) {
  const std::array<double, 1> radii{r};
  check_radii(grid, center, radii);
  if (fields.empty()) throw ConfigError("pohozaev residual needs at least one field");
  std::vector<const Field*> fs;
  for (const auto& f : fields) fs.push_back(&f);
  const double s = grid.params().s(), N = grid.params().N();
  // ball: |grad v|^2; shell: |grad v|^2 - 2 (d_r v)^2 is split into two passes
  const auto full = radial_sums(
      grid, fs, center, radii,
      [&](const Sample& smp) {
        double e = 0.0;
        for (std::size_t q = 0; q < fs.size(); ++q) e += grad2(smp, q);
        return smp.wdv * e;
      },
      [&](const Sample& smp) {
        double e = 0.0;
        for (std::size_t q = 0; q < fs.size(); ++q) e += grad2(smp, q);
        return smp.wdv * e;
      });
  const auto rad = radial_sums(
      grid, fs, center, radii, [](const Sample&) { return 0.0; },
      [&](const Sample& smp) {
        double e = 0.0;
        for (std::size_t q = 0; q < fs.size(); ++q) {
          const double dr = radial_derivative(smp, q);
          e += dr * dr;
        }
        return smp.wdv * e;
      });
  const double middle = r * full.shell[0];
  const double value = (2.0 * s - N) * full.ball[0] + middle - 2.0 * r * rad.shell[0];
  if (middle == 0.0) return 0.0;
  return value / std::abs(middle);
}

// ---------------------------------------------------------------------------

double holder_seminorm(const std::vector<std::vector<double>>& points, std::span<const double> values, double alpha,
                       std::size_t pair_budget, std::uint64_t seed) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("alpha must lie in (0, 1)");
  if (points.size() != values.size()) throw ConfigError("points and values differ in size");
  const std::size_t n = points.size();
  if (n == 0) throw DomainError("empty region for the Holder seminorm");
  auto quotient = [&](std::size_t i, std::size_t j) {
    double d2 = 0.0;
    for (std::size_t k = 0; k < points[i].size(); ++k) d2 += (points[i][k] - points[j][k]) * (points[i][k] - points[j][k]);
    if (d2 == 0.0) return 0.0;
    return std::abs(values[i] - values[j]) / std::pow(d2, 0.5 * alpha);
  };
  double best = 0.0;
  if (n <= 4000) {
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) best = std::max(best, quotient(i, j));
    }
    return best;
  }
  // index gaps stratified in octaves, the same number of pairs per octave
  std::mt19937_64 rng(seed);
  int bands = 0;
  while ((std::size_t{1} << bands) < n) ++bands;
  const std::size_t per = std::max<std::size_t>(1, pair_budget / bands);
  for (int b = 0; b < bands; ++b) {
    const std::size_t g0 = std::size_t{1} << b, g1 = std::min(n - 1, (std::size_t{1} << (b + 1)) - 1);
    if (g0 > g1) continue;
    std::uniform_int_distribution<std::size_t> gap(g0, g1);
    for (std::size_t q = 0; q < per; ++q) {
      const std::size_t gp = gap(rng);
      std::uniform_int_distribution<std::size_t> first(0, n - 1 - gp);
      const std::size_t i = first(rng);
      best = std::max(best, quotient(i, i + gp));
    }
  }
  return best;
}

double trace_holder_seminorm(const HalfSpaceGrid& grid, const Field& field, double alpha,
                             std::span<const double> center, double radius) {
  check_center(grid, center);
  std::vector<std::vector<double>> pts;
  std::vector<double> vals;
  for (std::size_t t = 0; t < grid.layer_size(); ++t) {
    auto c = grid.coords(t);
    c.pop_back();
    bool inside = true;
    for (int k = 0; k < grid.d(); ++k) inside = inside && std::abs(c[k] - center[k]) <= radius + 1e-12;
    if (!inside) continue;
    pts.push_back(std::move(c));
    vals.push_back(field[t]);
  }
  return holder_seminorm(pts, vals, alpha);
}

MonotonicityReport monotonicity_check(const RadialProfile& profile, double tol) {
  if (profile.values.size() < 3) throw ConfigError("monotonicity check needs at least three radii");
  MonotonicityReport rep;
  rep.tolerance = tol;
  double scale = 0.0;
  for (double v : profile.values) scale = std::max(scale, std::abs(v));
  if (scale == 0.0) return rep;
  for (std::size_t k = 1; k < profile.values.size(); ++k) {
    const double drop = (profile.values[k - 1] - profile.values[k]) / scale;
    if (drop > 0.0) rep.max_violation = std::max(rep.max_violation, drop);
    if (drop > tol) ++rep.violations;
  }
  rep.pass = rep.max_violation <= tol;
  return rep;
}

double monotone_from(const RadialProfile& profile, double tol) {
  const auto& v = profile.values;
  if (v.empty()) return std::numeric_limits<double>::infinity();
  double scale = 0.0;
  for (double x : v) scale = std::max(scale, std::abs(x));
  std::size_t start = 0;
  for (std::size_t k = 1; k < v.size(); ++k) {
    if ((v[k - 1] - v[k]) > tol * scale) start = k;
  }
  return profile.radii[start];
}

std::string diagnostic_csv(const std::vector<RadialProfile>& profiles, double tol) {
  std::string out = "r,value,quantity,center_x,tolerance,violation_flag\n";
  for (const auto& p : profiles) {
    double scale = 0.0;
    for (double v : p.values) scale = std::max(scale, std::abs(v));
    for (std::size_t k = 0; k < p.values.size(); ++k) {
      const bool flag = k > 0 && scale > 0.0 && (p.values[k - 1] - p.values[k]) > tol * scale;
      out += format_double(p.radii[k]) + "," + format_double(p.values[k]) + "," + to_string(p.quantity) + "," +
             format_double(p.center.empty() ? 0.0 : p.center[0]) + "," + format_double(tol) + "," +
             (flag ? "1" : "0") + "\n";
    }
  }
  return out;
}

}  // namespace fraclab
