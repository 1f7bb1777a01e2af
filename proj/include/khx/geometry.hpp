#pragma once

// Spherical-coordinate Hessian calculus, curvature of star-shaped
// axisymmetric boundaries, and the g = r/rho subsolution machinery.

#include "khx/symfun.hpp"

#include <string>
#include <vector>

namespace khx {

/// Axisymmetric star-shaped boundary: radial graph
///   rho(theta) = a_0 + sum_{m>=1} a_m cos(m theta),  theta in [0, pi],
/// over the unit sphere of R^n, theta the polar angle from the symmetry
/// axis. The cosine basis makes rho smooth with rho'(0) = rho'(pi) = 0.
/// Construction rejects profiles that are not strictly positive.
/// Immutable after construction; safe to share across threads.
class RadialSurface {
 public:
  RadialSurface(int n, std::vector<double> cosine_coeffs);

  int ambient_dim() const { return n_; }
  const std::vector<double>& coeffs() const { return coeffs_; }

  double rho(double theta) const;
  double drho(double theta) const;
  double d2rho(double theta) const;

  /// Extremes over a dense sample (cached at construction).
  double min_rho() const { return min_rho_; }
  double max_rho() const { return max_rho_; }

  bool is_ball() const;  // single nonzero coefficient a_0

 private:
  int n_;
  std::vector<double> coeffs_;
  double min_rho_ = 0.0;
  double max_rho_ = 0.0;
};

/// Second fundamental form and curvature data of the boundary at one
/// angle, in the frame adapted to the point: e_1 along the theta-direction
/// (where the surface gradient of rho lives), e_2..e_{n-1} azimuthal.
/// For axisymmetric surfaces the n-2 azimuthal curvatures coincide.
struct BoundaryPointData {
  double theta = 0.0;
  double rho = 0.0;
  double w = 0.0;          // sqrt(1 + (rho'/rho)^2)
  SymMatrix h;             // second fundamental form, (n-1)x(n-1)
  SymMatrix a;             // curvature matrix gamma^{ik} h_kl gamma^{lj}
  Spectrum kappa;          // principal curvatures (eigenvalues of a)
  double sigma_km1 = 0.0;  // S_{k-1}(kappa)

  BoundaryPointData(int n) : h(n - 1), a(n - 1) {}
};

/// Assembles the boundary metric/curvature data at theta:
///   h_ij = (rho/w) (delta_ij + 2 rho_i rho_j / rho^2 - rho_{ij}/rho)
/// with covariant sphere derivatives of rho, a = gamma h gamma where
/// gamma^{ij} is the inverse square root of g_ij = rho^2 delta_ij +
/// rho_i rho_j. k enters only through the reported sigma_km1 = S_{k-1}(kappa).
/// Throws std::domain_error for theta outside [0, pi].
BoundaryPointData boundary_curvature(const RadialSurface& surface, double theta,
                                     int k);

/// Certificate that the sampled principal curvatures lie strictly in the
/// cone of degree k-1 ((k-1)-convexity). The sample count doubles until two
/// consecutive verdicts agree. min_margins[m-1] = min over theta of
/// S_m(kappa), m = 1..k-1; worst_theta locates the minimizing angle of the
/// binding degree. For k = 1 the cone condition is vacuous and the
/// certificate passes with no margins.
struct AdmissibilityCertificate {
  bool pass = false;
  int k = 0;
  int samples_used = 0;
  std::vector<double> min_margins;
  double worst_theta = 0.0;
  std::string message;  // structured rejection text when !pass
};

/// Throws std::invalid_argument when samples < 64.
AdmissibilityCertificate check_admissible_domain(const RadialSurface& surface,
                                                 int k, int samples = 512);

/// Derivatives of a scalar field in an orthonormal sphere frame at radius
/// r: value, first/second tangential (f_a, f_ab), radial (f_r, f_rr) and
/// mixed (f_ar) derivatives. Sizes fix the ambient dimension n = len(f_a)+1.
struct SphereJet {
  double f = 0.0;
  Eigen::VectorXd f_a;   // length n-1
  SymMatrix f_ab;        // (n-1)x(n-1), covariant sphere Hessian
  double f_r = 0.0;
  Eigen::VectorXd f_ar;  // length n-1
  double f_rr = 0.0;

  SphereJet(int n) : f_a(Eigen::VectorXd::Zero(n - 1)), f_ab(n - 1),
                     f_ar(Eigen::VectorXd::Zero(n - 1)) {}
};

/// Full n x n Hessian from sphere-frame derivatives (frame order: sphere
/// directions first, radial last):
///   D2_ab = f_ab / r^2 + f_r delta_ab / r,
///   D2_ar = f_ar / r - f_a / r^2,
///   D2_rr = f_rr.
/// Throws std::domain_error for r <= 0.
SymMatrix spherical_hessian(const SphereJet& jet, double r);

/// Hessian of g = r / rho(theta) at (theta, r) in the adapted frame
/// (e_1 theta-direction, azimuthal, radial last): sphere block
/// w^3 a_11 / r, w^2 a_{1 alpha} / r, w a_{alpha beta} / r; the radial row
/// and column vanish identically. Throws std::domain_error for r <= 0.
SymMatrix hessian_of_g(const RadialSurface& surface, double theta, double r);

/// Gradient of g in the same frame (helper for the subsolution assembly):
/// theta-component -g rho' / (rho r), radial component g / r.
Eigen::VectorXd gradient_of_g(const RadialSurface& surface, double theta, double r);

/// sigma_k of the exact Hessian of phi(g) = g^N at (theta, r), assembled as
/// A * D2g + B * (Dg x Dg) with A = N g^{N-1}, B = N(N-1) g^{N-2}.
/// Precondition g = r/rho(theta) >= 1 (point outside the domain);
/// throws std::domain_error otherwise.
double subsolution_sigma_k(const RadialSurface& surface, int N, double theta,
                           double r, int k);

struct SubsolutionParams {
  int N = 0;      // exponent in phi(g) = g^N
  double c1 = 0;  // min over the boundary of sigma_{k-1}(kappa)
  double c0 = 0;  // empirical curvature constant: max |kappa| observed
};

/// Doubling search (N = 2, 4, 8, ...) for the smallest candidate N with
/// subsolution_sigma_k * r^k >= 1 on a dense sample of {1 <= g <= 10};
/// the winning certificate is re-verified on a 10x denser grid. Throws
/// std::runtime_error past the cap N = 2^16 (surface likely inadmissible).
SubsolutionParams select_subsolution_N(const RadialSurface& surface, int k);

/// Hessian eigenvalues of an axisymmetric field u(r, theta) from its
/// first/second derivatives: the two eigenvalues of the (r, theta) block
///   [[u_rr,                u_rtheta/r - u_theta/r^2],
///    [ .  ,                u_thetatheta/r^2 + u_r/r]]
/// followed by the azimuthal eigenvalue u_r/r + cot(theta) u_theta / r^2
/// with multiplicity n-2. On the axis (theta in {0, pi}) the azimuthal
/// entry is replaced by its limit u_thetatheta/r^2 + u_r/r, and u_theta
/// must vanish (otherwise std::domain_error). Throws for r <= 0 or theta
/// outside [0, pi].
Spectrum axisym_hessian_eigs(double u_r, double u_theta, double u_rr,
                             double u_rtheta, double u_thetatheta, double r,
                             double theta, int n);

/// Area of the unit sphere S^{m-1} in R^m: 2 pi^{m/2} / Gamma(m/2).
double sphere_area(int m);

}  // namespace khx
