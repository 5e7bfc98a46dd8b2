#pragma once

#include <span>
#include <string>

namespace fraclab {

/// Fractional order s, weight exponent a = 1 - 2s and trace dimension N.
class FracParams {
 public:
  FracParams(double s, int N);

  double s() const { return s_; }
  double a() const { return a_; }
  int N() const { return N_; }

  /// Exponent 2s - N of the fundamental solution.
  double fundamental_exponent() const { return 2.0 * s_ - N_; }

  /// Throws ConfigError unless N > 2s.
  void require_kernel_admissible() const;

 private:
  double s_;
  double a_;
  int N_;
};

/// Homogeneity degree attached to an eigenvalue t of the weighted hemisphere problem.
double gamma_map(double t, const FracParams& p);

/// Algebraic inverse of gamma_map: g^2 + (N - 2s) g.
double gamma_inverse(double g, const FracParams& p);

/// Regularized fundamental solution Gamma_eps (C^1, radial, L_a-superharmonic).
class RegularizedKernel {
 public:
  RegularizedKernel(double eps, const FracParams& p);

  double eps() const { return eps_; }
  const FracParams& params() const { return p_; }

  /// Value at distance r = |X| from the pole.
  double radial(double r) const;
  /// Radial derivative d/dr.
  double radial_derivative(double r) const;
  /// X = (x_1, ..., x_N, y).
  double operator()(std::span<const double> X) const;

 private:
  double eps_;
  FracParams p_;
  double scale_;  // eps^(2s - N)
};

enum class SolutionTag { vanish_trace, halfspace, codim1, fundamental };

std::string to_string(SolutionTag tag);
SolutionTag solution_tag_from_string(const std::string& name);

/// Closed-form L_a-harmonic profiles on the upper half-space.
///
///   vanish_trace   y^{2s}                          degree 2s
///   halfspace      ((sqrt(x1^2 + y^2) + x1) / 2)^s  degree s
///   codim1         (x1^2 + y^2)^{(2s - 1)/2}        degree 2s - 1, s > 1/2
///   fundamental    |X|^{2s - N}                     degree 2s - N, N > 2s
class NamedSolution {
 public:
  NamedSolution(SolutionTag tag, const FracParams& p);

  SolutionTag tag() const { return tag_; }
  const FracParams& params() const { return p_; }
  double degree() const;

  /// X = (x_1, ..., x_N, y) with y >= 0.
  double eval(std::span<const double> X) const;

  /// Exact weighted conormal derivative -lim y^a d_y v at a trace point x.
  /// Only vanish_trace and halfspace (x1 != 0) are available.
  double dtn_exact(std::span<const double> x) const;

 private:
  SolutionTag tag_;
  FracParams p_;
};

/// Normalized antiderivative f(x) = C int_{-inf}^x (1 + t^2)^{a/2 - 1} dt, f(+inf) = 1.
class ComparisonFunction {
 public:
  explicit ComparisonFunction(const FracParams& p);

  double operator()(double x) const;
  double derivative(double x) const;
  /// C, so that C times the full-line integral equals one.
  double normalization() const { return C_; }

 private:
  /// int_u^inf (1 + t^2)^{a/2 - 1} dt for u >= 0.
  double upper_tail(double u) const;

  double a_;
  double C_;
};

double comparison_f(double x, const FracParams& p);

/// Poisson kernel of L_a on the half-plane, unit mass in xi:
/// P(xi, y) = c_a y^{1-a} / (xi^2 + y^2)^{1 - a/2}.
double poisson_kernel(double xi, double y, const FracParams& p);

}  // namespace fraclab
