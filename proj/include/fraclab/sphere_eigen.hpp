#pragma once

#include <Eigen/Sparse>
#include <vector>

#include "fraclab/fraccore.hpp"

namespace fraclab {

/// Lumped finite-volume discretization of the weighted hemisphere S^N_+, weight cos^a(theta).
///
/// N = 2: nodes on a (theta, phi) tensor grid, theta in [0, pi/2] from the pole (one shared
/// pole node), phi periodic; the ring theta = pi/2 is the equator.
/// N = 1: half circle theta in [-pi/2, pi/2]; the two endpoints form the equator, labelled by
/// the angles 0 (theta = pi/2, x1 > 0) and pi (theta = -pi/2, x1 < 0).
class HemisphereMesh {
 public:
  HemisphereMesh(const FracParams& params, int ntheta, int nphi = 0);

  const FracParams& params() const { return p_; }
  int N() const { return p_.N(); }
  int ntheta() const { return ntheta_; }
  int nphi() const { return nphi_; }
  std::size_t num_nodes() const { return mass_.size(); }

  const Eigen::SparseMatrix<double>& stiffness() const { return K_; }
  const std::vector<double>& mass() const { return mass_; }
  /// Node indices on the equator and their angles in [0, 2 pi).
  const std::vector<std::size_t>& equator_nodes() const { return eq_nodes_; }
  const std::vector<double>& equator_angles() const { return eq_angles_; }

 private:
  void build_circle();
  void build_sphere();

  FracParams p_;
  int ntheta_;
  int nphi_;
  Eigen::SparseMatrix<double> K_;
  std::vector<double> mass_;
  std::vector<std::size_t> eq_nodes_;
  std::vector<double> eq_angles_;
};

/// Union of open arcs on the equator circle. A point belongs to an arc when its angular
/// distance to the arc centre is strictly below the half-width; a half-width >= pi is the
/// whole circle and 0 is empty.
class EquatorRegion {
 public:
  struct Arc {
    double center;
    double half_width;
  };

  EquatorRegion() = default;
  static EquatorRegion empty() { return {}; }
  static EquatorRegion full();
  static EquatorRegion arc(double center, double half_width);
  /// N = 1 helper: the endpoint at angle 0 and/or the endpoint at angle pi.
  static EquatorRegion endpoints(bool plus, bool minus);

  /// Adds an arc; arcs must stay disjoint.
  EquatorRegion& add(double center, double half_width);
  EquatorRegion rotated(double delta) const;

  bool contains(double angle) const;
  double measure() const;
  const std::vector<Arc>& arcs() const { return arcs_; }

 private:
  std::vector<Arc> arcs_;
};

struct EigenResult {
  double lambda = 0.0;
  std::vector<double> eigenfunction;  // mass-normalized, first nonzero entry positive
  int iterations = 0;
  bool sign_definite = true;
};

struct EigenOptions {
  double tol = 1e-9;        // relative change of the Rayleigh quotient
  int max_iter = 20000;
};

/// First eigenvalue with Dirichlet condition on the equator outside omega.
EigenResult lambda1(const HemisphereMesh& mesh, const EquatorRegion& omega,
                    const EigenOptions& opts = {});

/// Same with an explicit per-equator-node Dirichlet flag.
EigenResult lambda1_masked(const HemisphereMesh& mesh, const std::vector<char>& equator_dirichlet,
                           const EigenOptions& opts = {});

/// Dirichlet at the equator nodes nearest to the given angles only.
EigenResult lambda1_points(const HemisphereMesh& mesh, const std::vector<double>& angles,
                           const EigenOptions& opts = {});

/// Codimension-one region: Dirichlet only at the two equator nodes nearest {x1 = 0}. Needs s > 1/2.
EigenResult lambda1_codim1(const HemisphereMesh& mesh, const EigenOptions& opts = {});

/// Two antipodal caps: omega_1 centred at angle 0 with radius t1, omega_2 at pi with radius t2.
struct CapPair {
  double t1 = 0.0;
  double t2 = 0.0;
  CapPair() = default;
  CapPair(double a, double b);
  EquatorRegion omega1() const;
  EquatorRegion omega2() const;
};

struct NuAcfRow {
  double t1, t2;
  double lambda1_omega1, lambda1_omega2;
  double gamma1, gamma2, mean_gamma;
};

struct NuAcfResult {
  double s = 0.0;
  double nu_hat = 0.0;
  CapPair argmin;
  std::vector<NuAcfRow> table;
  /// Mass-weighted overlap sum M u1 u2 of the two normalized eigenfunctions at the argmin.
  double eigenfunction_overlap = 0.0;
};

/// Scans all pairs (t1, t2) from the radii list with t1 + t2 <= pi.
NuAcfResult nu_acf_caps(const HemisphereMesh& mesh, const std::vector<double>& radii,
                        const EigenOptions& opts = {});

/// Evaluates one cap pair.
NuAcfRow evaluate_caps(const HemisphereMesh& mesh, const CapPair& caps, const EigenOptions& opts = {});

}  // namespace fraclab
