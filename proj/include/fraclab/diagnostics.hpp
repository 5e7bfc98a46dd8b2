#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "fraclab/extension_grid.hpp"

namespace fraclab {

enum class Quantity { acf_vanish, acf_halfspace, acf_codim1, acf_two_phase, acf_perturbed, E, H, Nfreq };

std::string to_string(Quantity q);

/// One-phase ACF variants; each fixes the scaling exponent 4s, 2s or 4s - 2.
enum class AcfVariant { vanish, halfspace, codim1 };

/// Values of a radial quantity centred at a trace point (x0, 0).
struct RadialProfile {
  Quantity quantity = Quantity::E;
  std::vector<double> center;  // trace coordinates, size d
  std::vector<double> radii;
  std::vector<double> values;
  /// How far the input is from the variant's hypothesis (max |trace| on the set where it
  /// should vanish, or max trace product for two phases). Reported, not enforced.
  double hypothesis_residual = 0.0;
};

struct MonotonicityReport {
  int violations = 0;
  double max_violation = 0.0;  // largest relative decrease
  double tolerance = 0.0;
  bool pass = true;
};

/// Phi(r) = r^{-e} int_{B_r^+} y^a |grad v|^2 Gamma(X - X0) dX with e = 4s, 2s, 4s - 2.
RadialProfile acf_one_phase(const HalfSpaceGrid& grid, const Field& field, std::span<const double> center,
                            std::span<const double> radii, AcfVariant variant);

/// Product of the two one-phase integrals, each scaled by r^{-2 nu}.
/// kernel_eps <= 0 regularizes the kernel over one cell diameter.
RadialProfile acf_two_phase(const HalfSpaceGrid& grid, const Field& v1, const Field& v2,
                            std::span<const double> center, std::span<const double> radii, double nu,
                            double kernel_eps = 0.0);

/// Two-phase product with kernel Gamma_1 whose factors also carry the trace coupling
/// a12 int v_i^2 v_j^2 Gamma_1.
RadialProfile acf_perturbed(const HalfSpaceGrid& grid, const Field& v1, const Field& v2,
                            std::span<const double> center, std::span<const double> radii, double nu_prime,
                            double a12);

struct AlmgrenProfiles {
  RadialProfile E, H, Nfreq;
};

/// E(r) = r^{2s-N} int y^a sum |grad v_i|^2, H(r) = r^{2s-N-1} int_{shell} y^a sum v_i^2, N = E / H.
AlmgrenProfiles almgren(const HalfSpaceGrid& grid, const std::vector<Field>& fields,
                        std::span<const double> center, std::span<const double> radii);

/// max over radii of |d/dr log H - 2 N / r| / (2 N / r), with the derivative taken from local quadratics in log r.
double log_derivative_defect(const AlmgrenProfiles& a);

/// (2s - N) int_{B_r^+} y^a |grad v|^2 + r int_{shell} y^a |grad v|^2 - 2 r int_{shell} y^a |d_r v|^2,
/// normalized by the middle term.
double pohozaev_residual(const HalfSpaceGrid& grid, const std::vector<Field>& fields,
                         std::span<const double> center, double r);

/// sup |v(X) - v(X')| / |X - X'|^alpha over node pairs; exact for at most 4000 points,
/// otherwise pair_budget pairs stratified by index gap with a fixed seed.
double holder_seminorm(const std::vector<std::vector<double>>& points, std::span<const double> values,
                       double alpha, std::size_t pair_budget = 4'000'000, std::uint64_t seed = 20240601);

/// Trace seminorm over trace nodes with max_i |x_i - center_i| <= radius.
double trace_holder_seminorm(const HalfSpaceGrid& grid, const Field& field, double alpha,
                             std::span<const double> center, double radius);

/// Counts successive decreases larger than tol * max |value|.
MonotonicityReport monotonicity_check(const RadialProfile& profile, double tol);

/// Smallest radius from which the profile is nondecreasing within tol (+inf for an empty profile).
double monotone_from(const RadialProfile& profile, double tol);

/// CSV rows r, value, quantity, center_x, tolerance, violation_flag.
std::string diagnostic_csv(const std::vector<RadialProfile>& profiles, double tol);

}  // namespace fraclab
