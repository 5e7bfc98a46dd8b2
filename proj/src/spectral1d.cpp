#include "fraclab/spectral1d.hpp"

#include <array>
#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss.hpp>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <unsupported/Eigen/FFT>

#include "fraclab/errors.hpp"

namespace fraclab {

namespace {

using Cell = std::array<double, 4>;

void require_order(double s) {
  if (!(s > 0.0 && s < 1.0)) throw ConfigError("fractional order s must lie in (0, 1)");
}

// Weights of int_m^{m+1} p(z) z^{-1-2s} dz, p the cubic through nodes j0..j0+3 (unit spacing).
Cell cell_weights(int m, int j0, double s) {
  using boost::math::quadrature::gauss;
  Cell w{};
  for (int k = 0; k < 4; ++k) {
    auto integrand = [&](double z) {
      double l = 1.0;
      for (int q = 0; q < 4; ++q) {
        if (q != k) l *= (z - (j0 + q)) / static_cast<double>(k - q);
      }
      return l * std::pow(z, -1.0 - 2.0 * s);
    };
    w[k] = gauss<double, 10>::integrate(integrand, static_cast<double>(m), m + 1.0);
  }
  return w;
}

// int_0^1 D(z) z^{-1-2s} dz for even D = c2 z^2 + c4 z^4 fitted through D(1), D(2).
std::array<double, 2> near_weights(double s) {
  const double e2 = 1.0 / (2.0 - 2.0 * s), e4 = 1.0 / (4.0 - 2.0 * s);
  return {(16.0 * e2 - 4.0 * e4) / 12.0, (-e2 + e4) / 12.0};
}

// Coefficients omega_m of D_m = 2u(x) - u(x + m h) - u(x - m h), m = 1..M+1, for the
// symmetric integral over [h, M h] plus the near cell, in units h = 1.
std::vector<double> symmetric_weights(int M, double s) {
  std::vector<double> om(static_cast<std::size_t>(M) + 2, 0.0);
  const auto nw = near_weights(s);
  om[1] += nw[0];
  om[2] += nw[1];
  for (int m = 1; m < M; ++m) {
    const Cell w = cell_weights(m, m - 1, s);
    for (int k = 0; k < 4; ++k) om[m - 1 + k] += w[k];
  }
  om[0] = 0.0;  // D_0 = 0
  return om;
}

bool discontinuity_at(std::span<const double> u, int i, bool periodic) {
  const int n = static_cast<int>(u.size());
  auto at = [&](int j) {
    if (periodic) return u[((j % n) + n) % n];
    return u[std::clamp(j, 0, n - 1)];
  };
  const double dl = std::abs(at(i) - at(i - 1));
  const double dr = std::abs(at(i + 1) - at(i));
  double bg = 0.0;
  int cnt = 0;
  for (int j = i - 5; j <= i + 4; ++j) {
    if (j == i - 1 || j == i) continue;
    if (!periodic && (j < 0 || j + 1 >= n)) continue;
    bg += std::abs(at(j + 1) - at(j));
    ++cnt;
  }
  if (cnt > 0) bg /= cnt;
  double scale = 0.0;
  for (double v : u) scale = std::max(scale, std::abs(v));
  const double jump = std::max(dl, dr);
  return jump > 1e-12 * scale && jump > 10.0 * bg;
}

}  // namespace

// ---------------------------------------------------------------------------

PeriodicGrid1D::PeriodicGrid1D(int n, double L) : n_(n), L_(L) {
  if (n < 16 || (n & (n - 1)) != 0) throw ConfigError("periodic grid needs n a power of two >= 16");
  if (!(L > 0.0)) throw ConfigError("periodic grid needs L > 0");
}

double PeriodicGrid1D::period() const { return 2.0 * std::numbers::pi * L_; }
double PeriodicGrid1D::h() const { return period() / n_; }
double PeriodicGrid1D::x(int i) const { return -std::numbers::pi * L_ + h() * i; }

std::vector<double> PeriodicGrid1D::nodes() const {
  std::vector<double> v(n_);
  for (int i = 0; i < n_; ++i) v[i] = x(i);
  return v;
}

double PeriodicGrid1D::wavenumber(int m) const {
  const int mm = m <= n_ / 2 ? m : m - n_;
  return mm / L_;
}

namespace {

// Real periodic samples times a real even multiplier given at modes 0..n/2.
std::vector<double> apply_multiplier(std::span<const double> u, const std::vector<double>& mult) {
  const int n = static_cast<int>(u.size());
  Eigen::FFT<double> fft;
  std::vector<double> in(u.begin(), u.end());
  std::vector<std::complex<double>> spec;
  fft.fwd(spec, in);
  for (int m = 0; m < n; ++m) spec[m] *= mult[m <= n / 2 ? m : n - m];
  std::vector<double> out;
  fft.inv(out, spec);
  return out;
}

}  // namespace

std::vector<double> frac_lap_symbol(const PeriodicGrid1D& grid, std::span<const double> u, double s) {
  require_order(s);
  if (static_cast<int>(u.size()) != grid.n()) throw ConfigError("sample count does not match grid");
  std::vector<double> mult(grid.n() / 2 + 1);
  for (int m = 0; m <= grid.n() / 2; ++m) mult[m] = std::pow(std::abs(grid.wavenumber(m)), 2.0 * s);
  mult[0] = 0.0;
  return apply_multiplier(u, mult);
}

std::vector<double> pv_raw_symbol(const PeriodicGrid1D& grid, double s, const PvOptions& opts) {
  require_order(s);
  if (opts.oversample < 1 || opts.image_periods < 1) throw ConfigError("invalid PV options");
  const int nf = grid.n() * opts.oversample;
  const double hf = grid.period() / nf;
  const int M = nf * opts.image_periods;
  const auto om = symmetric_weights(M, s);

  // fold offsets modulo the fine period
  std::vector<double> folded(nf, 0.0);
  double total = 0.0;
  for (std::size_t m = 1; m < om.size(); ++m) {
    folded[m % nf] += om[m];
    total += om[m];
  }
  const double scale = std::pow(hf, -2.0 * s);
  const double tail = std::pow(M * hf, -2.0 * s) / s;  // (u(x) - mean) times both far tails
  std::vector<double> lam(grid.n() / 2 + 1);
  for (int j = 0; j <= grid.n() / 2; ++j) {
    double c = 0.0;
    for (int r = 0; r < nf; ++r) {
      if (folded[r] == 0.0) continue;
      const long long idx = (static_cast<long long>(j) * r) % nf;
      c += folded[r] * std::cos(2.0 * std::numbers::pi * static_cast<double>(idx) / nf);
    }
    lam[j] = scale * (2.0 * total - 2.0 * c) + (j == 0 ? 0.0 : tail);
  }
  lam[0] = 0.0;
  return lam;
}

double pv_calibration(const PeriodicGrid1D& grid, double s, const PvOptions& opts) {
  const auto lam = pv_raw_symbol(grid, s, opts);
  return std::pow(std::abs(grid.wavenumber(1)), 2.0 * s) / lam[1];
}

PvResult frac_lap_pv(const PeriodicGrid1D& grid, std::span<const double> u, double s,
                     const PvOptions& opts) {
  if (static_cast<int>(u.size()) != grid.n()) throw ConfigError("sample count does not match grid");
  for (double v : u) {
    if (!std::isfinite(v)) throw DomainError("PV input contains non-finite samples");
  }
  auto lam = pv_raw_symbol(grid, s, opts);
  PvResult r;
  r.constant = opts.calibrate ? std::pow(std::abs(grid.wavenumber(1)), 2.0 * s) / lam[1] : 1.0;
  for (double& l : lam) l *= r.constant;
  r.values = apply_multiplier(u, lam);
  r.warnings.resize(u.size());
  for (int i = 0; i < grid.n(); ++i) {
    r.warnings[i] = discontinuity_at(u, i, true) ? 1 : 0;
    r.any_warning = r.any_warning || r.warnings[i];
  }
  return r;
}

double standard_pv_constant(double s) {
  require_order(s);
  return std::pow(4.0, s) * std::tgamma(0.5 + s) / (std::sqrt(std::numbers::pi) * std::abs(std::tgamma(-s)));
}

// ---------------------------------------------------------------------------

int WindowedFunction::nearest(double xv) const {
  const long i = std::lround((xv - x0) / h);
  if (i < 0 || i >= static_cast<long>(u.size())) throw RangeError("point outside the sample window");
  return static_cast<int>(i);
}

WindowedFunction WindowedFunction::sample(const std::function<double(double)>& f, double lo,
                                          double hi, double h, std::function<double(double)> far_left,
                                          std::function<double(double)> far_right) {
  if (!(h > 0.0) || !(hi > lo)) throw ConfigError("invalid sample window");
  WindowedFunction w;
  w.x0 = lo;
  w.h = h;
  const long n = std::lround((hi - lo) / h) + 1;
  w.u.resize(n);
  for (long i = 0; i < n; ++i) w.u[i] = f(lo + h * i);
  w.far_left = std::move(far_left);
  w.far_right = std::move(far_right);
  return w;
}

PvResult frac_lap_pv_window(const WindowedFunction& w, double s, std::span<const int> nodes,
                            double constant) {
  require_order(s);
  using boost::math::quadrature::exp_sinh;
  const int n = static_cast<int>(w.u.size());
  if (!w.far_left || !w.far_right) throw ConfigError("windowed PV needs far-field models");
  const double h = w.h;
  const double hs = std::pow(h, -2.0 * s);
  const auto nw = near_weights(s);

  // centred cell weights, reused for every evaluation point
  std::vector<Cell> centred(static_cast<std::size_t>(n) + 1);
  for (int m = 1; m <= n; ++m) centred[m] = cell_weights(m, m - 1, s);

  PvResult r;
  r.constant = constant;
  r.values.resize(nodes.size());
  r.warnings.resize(nodes.size());
  exp_sinh<double> tail_q;

  for (std::size_t e = 0; e < nodes.size(); ++e) {
    const int i = nodes[e];
    if (i < 0 || i >= n) throw RangeError("evaluation node outside the window");
    const int left = i, right = n - 1 - i;
    const int M = std::min(left, right);
    if (M < 4) throw RangeError("evaluation node too close to the window edge");
    const double ui = w.u[i];
    auto D = [&](int m) { return 2.0 * ui - w.u[i + m] - w.u[i - m]; };

    double acc = nw[0] * D(1) + nw[1] * D(2);
    for (int m = 1; m < M; ++m) {
      const int j0 = std::min(m - 1, M - 3);
      const Cell c = j0 == m - 1 ? centred[m] : cell_weights(m, j0, s);
      for (int k = 0; k < 4; ++k) acc += c[k] * D(j0 + k);
    }
    // one-sided remainder on the longer side
    const int sign = right > left ? 1 : -1;
    const int R = std::max(left, right);
    auto E = [&](int m) { return ui - w.u[i + sign * m]; };
    for (int m = M; m < R; ++m) {
      const int j0 = std::clamp(m - 1, 0, R - 3);
      const Cell c = j0 == m - 1 ? centred[m] : cell_weights(m, j0, s);
      for (int k = 0; k < 4; ++k) acc += c[k] * E(j0 + k);
    }
    acc *= hs;

    // analytic far fields beyond the window on both sides
    const double xi = w.x(i);
    const double p = -1.0 - 2.0 * s;
    auto left_tail = [&](double z0) {
      return tail_q.integrate([&](double t) {
        const double z = z0 + t;
        return (ui - w.far_left(xi - z)) * std::pow(z, p);
      });
    };
    auto right_tail = [&](double z0) {
      return tail_q.integrate([&](double t) {
        const double z = z0 + t;
        return (ui - w.far_right(xi + z)) * std::pow(z, p);
      });
    };
    acc += left_tail(left * h) + right_tail(right * h);

    r.values[e] = constant * acc;
    r.warnings[e] = discontinuity_at(w.u, i, false) ? 1 : 0;
    r.any_warning = r.any_warning || r.warnings[e];
  }
  return r;
}

}  // namespace fraclab
