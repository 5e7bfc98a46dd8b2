#include "fraclab/fraccore.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <numbers>

#include "fraclab/errors.hpp"

namespace fraclab {

namespace {

// Beyond this point the integrand (1 + t^2)^{a/2-1} is replaced by t^{a-2}.
constexpr double kTailCut = 1e6;
constexpr double kQuadTol = 1e-10;

double beta_half(double a) {
  // int_R (1 + t^2)^{a/2 - 1} dt = B(1/2, (1 - a)/2)
  return std::sqrt(std::numbers::pi) * std::tgamma(0.5 * (1.0 - a)) / std::tgamma(1.0 - 0.5 * a);
}

}  // namespace

FracParams::FracParams(double s, int N) : s_(s), a_(1.0 - 2.0 * s), N_(N) {
  if (!(s > 0.0 && s < 1.0)) throw ConfigError("fractional order s must lie in (0, 1)");
  if (N < 1) throw ConfigError("trace dimension N must be at least 1");
}

void FracParams::require_kernel_admissible() const {
  if (!(N_ > 2.0 * s_)) {
    throw ConfigError("fundamental-solution kernels need N > 2s (N = " + std::to_string(N_) +
                      ", s = " + std::to_string(s_) + ")");
  }
}

double gamma_map(double t, const FracParams& p) {
  if (t < 0.0 || std::isnan(t)) throw DomainError("gamma_map: t must be nonnegative");
  const double half = 0.5 * (p.N() - 2.0 * p.s());
  const double disc = std::max(0.0, half * half + t);
  // sqrt(h^2 + t) - h, rewritten to avoid cancellation when t << h^2
  const double root = std::sqrt(disc);
  if (half > 0.0) return t / (root + half);
  return root - half;
}

double gamma_inverse(double g, const FracParams& p) {
  if (g < 0.0 || std::isnan(g)) throw DomainError("gamma_inverse: g must be nonnegative");
  return g * g + (p.N() - 2.0 * p.s()) * g;
}

// ---------------------------------------------------------------------------

RegularizedKernel::RegularizedKernel(double eps, const FracParams& p) : eps_(eps), p_(p) {
  if (!(eps > 0.0)) throw ConfigError("kernel regularization eps must be positive");
  p.require_kernel_admissible();
  scale_ = std::pow(eps, p.fundamental_exponent());
}

double RegularizedKernel::radial(double r) const {
  const double N = p_.N();
  const double s = p_.s();
  if (r >= eps_) return std::pow(r, 2.0 * s - N);
  const double q = r / eps_;
  return scale_ * (0.5 * (N + 2.0 * (1.0 - s)) - 0.5 * (N - 2.0 * s) * q * q);
}

double RegularizedKernel::radial_derivative(double r) const {
  const double N = p_.N();
  const double s = p_.s();
  if (r >= eps_) return (2.0 * s - N) * std::pow(r, 2.0 * s - N - 1.0);
  return -scale_ * (N - 2.0 * s) * r / (eps_ * eps_);
}

double RegularizedKernel::operator()(std::span<const double> X) const {
  double r2 = 0.0;
  for (double c : X) r2 += c * c;
  return radial(std::sqrt(r2));
}

// ---------------------------------------------------------------------------

std::string to_string(SolutionTag tag) {
  switch (tag) {
    case SolutionTag::vanish_trace: return "vanish_trace";
    case SolutionTag::halfspace: return "halfspace";
    case SolutionTag::codim1: return "codim1";
    case SolutionTag::fundamental: return "fundamental";
  }
  return "unknown";
}

SolutionTag solution_tag_from_string(const std::string& name) {
  if (name == "vanish_trace") return SolutionTag::vanish_trace;
  if (name == "halfspace") return SolutionTag::halfspace;
  if (name == "codim1") return SolutionTag::codim1;
  if (name == "fundamental") return SolutionTag::fundamental;
  throw ConfigError("unknown solution tag '" + name + "'");
}

NamedSolution::NamedSolution(SolutionTag tag, const FracParams& p) : tag_(tag), p_(p) {
  if (tag == SolutionTag::codim1 && !(p.s() > 0.5)) {
    throw ConfigError("codim1 profile requires s > 1/2");
  }
  if (tag == SolutionTag::fundamental) p.require_kernel_admissible();
}

double NamedSolution::degree() const {
  const double s = p_.s();
  switch (tag_) {
    case SolutionTag::vanish_trace: return 2.0 * s;
    case SolutionTag::halfspace: return s;
    case SolutionTag::codim1: return 2.0 * s - 1.0;
    case SolutionTag::fundamental: return 2.0 * s - p_.N();
  }
  return 0.0;
}

double NamedSolution::eval(std::span<const double> X) const {
  if (X.size() != static_cast<std::size_t>(p_.N() + 1)) {
    throw DomainError("eval_solution: point must have N + 1 coordinates");
  }
  const double s = p_.s();
  const double y = X.back();
  if (y < 0.0) throw DomainError("eval_solution: point below the trace hyperplane");
  const double x1 = X.front();
  switch (tag_) {
    case SolutionTag::vanish_trace:
      return std::pow(y, 2.0 * s);
    case SolutionTag::halfspace: {
      const double rho = std::hypot(x1, y);
      // for x1 < 0 use (rho + x1) = y^2 / (rho - x1) to keep accuracy near the trace
      const double sum = x1 >= 0.0 ? rho + x1 : (rho > 0.0 ? y * y / (rho - x1) : 0.0);
      return std::pow(0.5 * sum, s);
    }
    case SolutionTag::codim1:
      return std::pow(x1 * x1 + y * y, s - 0.5);
    case SolutionTag::fundamental: {
      double r2 = 0.0;
      for (double c : X) r2 += c * c;
      if (r2 == 0.0) throw SingularityError("fundamental solution is singular at the origin");
      return std::pow(r2, 0.5 * (2.0 * s - p_.N()));
    }
  }
  return 0.0;
}

double NamedSolution::dtn_exact(std::span<const double> x) const {
  const double s = p_.s();
  switch (tag_) {
    case SolutionTag::vanish_trace:
      return -2.0 * s;
    case SolutionTag::halfspace: {
      if (x.empty()) throw DomainError("dtn_exact: empty trace point");
      const double x1 = x.front();
      if (x1 == 0.0) throw DomainError("dtn_exact: halfspace profile is singular at x1 = 0");
      if (x1 > 0.0) return 0.0;
      // v ~ y^{2s} / (4|x1|)^s near the zero set
      return -2.0 * s * std::pow(4.0 * std::abs(x1), -s);
    }
    default:
      throw NotAvailableError("dtn_exact is not available for " + to_string(tag_));
  }
}

// ---------------------------------------------------------------------------

ComparisonFunction::ComparisonFunction(const FracParams& p) : a_(p.a()), C_(0.0) {
  const double half_line = upper_tail(0.0);
  C_ = 0.5 / half_line;
}

double ComparisonFunction::upper_tail(double u) const {
  using boost::math::quadrature::gauss_kronrod;
  const double a = a_;
  auto g = [a](double t) { return std::pow(1.0 + t * t, 0.5 * a - 1.0); };
  if (u >= kTailCut) return std::pow(u, a - 1.0) / (1.0 - a);

  double total = std::pow(kTailCut, a - 1.0) / (1.0 - a);
  // split into decades so each panel sees a mildly varying integrand
  double lo = u;
  double hi = std::max(1.0, 10.0 * u);
  while (lo < kTailCut) {
    hi = std::min(hi, kTailCut);
    if (hi > lo) total += gauss_kronrod<double, 15>::integrate(g, lo, hi, 15, kQuadTol * 1e-2);
    lo = hi;
    hi *= 10.0;
  }
  return total;
}

double ComparisonFunction::operator()(double x) const {
  if (std::isnan(x)) throw DomainError("comparison_f: NaN argument");
  if (x == std::numeric_limits<double>::infinity()) return 1.0;
  if (x == -std::numeric_limits<double>::infinity()) return 0.0;
  if (x <= 0.0) return C_ * upper_tail(-x);
  return 1.0 - C_ * upper_tail(x);
}

double ComparisonFunction::derivative(double x) const {
  return C_ * std::pow(1.0 + x * x, 0.5 * a_ - 1.0);
}

double comparison_f(double x, const FracParams& p) { return ComparisonFunction(p)(x); }

double poisson_kernel(double xi, double y, const FracParams& p) {
  if (!(y > 0.0)) throw DomainError("poisson_kernel: y must be positive");
  const double a = p.a();
  return std::pow(y, 1.0 - a) * std::pow(xi * xi + y * y, 0.5 * a - 1.0) / beta_half(a);
}

}  // namespace fraclab
