#pragma once

#include <functional>
#include <span>
#include <vector>

namespace fraclab {

/// Uniform periodic grid of n nodes on [-pi L, pi L).
class PeriodicGrid1D {
 public:
  PeriodicGrid1D(int n, double L = 1.0);

  int n() const { return n_; }
  double L() const { return L_; }
  double period() const;
  double h() const;
  double x(int i) const;
  std::vector<double> nodes() const;
  /// Wavenumber of transform index m (m / L with the usual wrap-around).
  double wavenumber(int m) const;

 private:
  int n_;
  double L_;
};

/// Applies the multiplier |k|^{2s} by FFT.
std::vector<double> frac_lap_symbol(const PeriodicGrid1D& grid, std::span<const double> u, double s);

struct PvOptions {
  int oversample = 8;    // trigonometric refinement factor before quadrature
  int image_periods = 32;  // images summed exactly before the far tail model
  bool calibrate = true;   // scale by c_{1,s} fitted on the first Fourier mode
};

struct PvResult {
  std::vector<double> values;
  std::vector<char> warnings;  // per output point: sample discontinuity detected
  bool any_warning = false;
  double constant = 1.0;       // multiplicative constant applied (c_{1,s} when calibrated)
};

/// Principal-value quadrature of pv int (u(x) - u(xi)) / |x - xi|^{1+2s} d xi on periodic samples.
PvResult frac_lap_pv(const PeriodicGrid1D& grid, std::span<const double> u, double s,
                     const PvOptions& opts = {});

/// c_{1,s} such that the PV quadrature reproduces |k|^{2s} on the first mode of the grid.
double pv_calibration(const PeriodicGrid1D& grid, double s, const PvOptions& opts = {});

/// Raw (unscaled) quadrature symbol at the grid's Fourier modes 0..n/2.
std::vector<double> pv_raw_symbol(const PeriodicGrid1D& grid, double s, const PvOptions& opts = {});

/// Closed-form normalization 4^s Gamma(1/2 + s) / (sqrt(pi) |Gamma(-s)|), for reporting.
double standard_pv_constant(double s);

/// Samples of a non-periodic function on x0 + h i, i = 0..n-1, with analytic far fields
/// used beyond the window.
struct WindowedFunction {
  double x0 = 0.0;
  double h = 1.0;
  std::vector<double> u;
  std::function<double(double)> far_left;   // u(xi) for xi < x0
  std::function<double(double)> far_right;  // u(xi) for xi > x0 + (n - 1) h

  double x(int i) const { return x0 + h * i; }
  int nearest(double xv) const;

  static WindowedFunction sample(const std::function<double(double)>& f, double lo, double hi,
                                 double h, std::function<double(double)> far_left,
                                 std::function<double(double)> far_right);
};

/// PV quadrature at window nodes, multiplied by the given constant.
PvResult frac_lap_pv_window(const WindowedFunction& w, double s, std::span<const int> nodes,
                            double constant);

}  // namespace fraclab
