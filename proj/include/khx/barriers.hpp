#pragma once

// Closed-form radial model solutions, the power barrier family phi(x, C) =
// -C (|x| + eps)^(-alpha0), its exact k-Hessian source term f_eps, and the
// pointwise sandwich data for the approximate exterior Dirichlet problem.

#include "khx/geometry.hpp"
#include "khx/symfun.hpp"

namespace khx {

/// Radial power barrier phi(x) = -C (|x| + eps)^(-alpha0) with
/// alpha0 = n/k - 2. Construction requires n > 2k: at n = 2k the decaying
/// power degenerates and the radial equation S_{n/2}(D^2 u) = 0 is solved
/// by u = C log|x| - 1 for every C > 0 instead, so no barrier of this form
/// exists (see log_solution_check). Also requires eps >= 0 and C > 0.
/// Immutable value type.
struct BarrierFamily {
  BarrierFamily(int n, int k, double eps, double C = 1.0);

  int n = 0;
  int k = 0;
  double alpha0 = 0.0;  // n/k - 2
  double eps = 0.0;
  double C = 1.0;

  /// phi(r) = -C (r + eps)^(-alpha0) for r = |x| > 0.
  double value(double r) const;
  /// d phi / dr = C alpha0 (r + eps)^(-alpha0 - 1).
  double radial_derivative(double r) const;
  /// Hessian eigenvalues at |x| = r, radial eigenvalue first:
  ///   common factor c = C alpha0 (r + eps)^(-n/k),
  ///   radial (1 - n/k) c, tangential (1 + eps/r) c with multiplicity n-1.
  Spectrum hessian_eigenvalues(double r) const;
};

/// Barrier jet at a point: value, full gradient (radially outward), and
/// Hessian eigenvalues with the radial eigenvalue listed first.
struct BarrierPoint {
  double value = 0.0;
  Eigen::VectorXd gradient;
  Spectrum hess_eigs;
};

/// Evaluates the barrier at x != 0 (throws std::domain_error at x = 0).
/// The gradient is phi'(|x|) x/|x|; phi < 0 everywhere and increases to 0
/// outward.
BarrierPoint phi_barrier(const BarrierFamily& family, const Eigen::VectorXd& x);

/// Exact source term of the unit barrier: f_eps(r) = sigma_k(D^2 phi(., 1))
///   = (1 + eps/r)^(k-1) C(n-1, k) (eps/r) (r + eps)^(-n) alpha0^k.
/// For a general amplitude, sigma_k(D^2 phi(., C)) = C^k f_eps(r).
/// Zero when eps = 0 (the exact degenerate equation), strictly positive for
/// eps > 0. Preconditions r > 0, eps >= 0; throws std::domain_error when
/// n <= 2k (no decaying power solution exists there).
double f_eps(int n, int k, double eps, double r);

/// The exact radial solution mu(r) = -r^(-alpha0) of S_k(D^2 u) = 0 with
/// derivatives: value, mu' = alpha0 r^(-alpha0-1), and
/// mu'' = -alpha0 (alpha0 + 1) r^(-alpha0-2).
struct MuValue {
  double value = 0.0;
  double dr = 0.0;
  double d2r = 0.0;
};

/// Throws std::domain_error for r <= 0 or n <= 2k.
MuValue mu_exact(int n, int k, double r);

/// Exterior solution for the unit-data ball problem on R^n minus B_rho0:
/// u(r) = -(rho0 / r)^{alpha0}, which satisfies S_k(D^2 u) = 0, u(rho0) = -1
/// and decays at infinity. Throws std::domain_error for r < rho0 or
/// rho0 <= 0 or n <= 2k.
double radial_ball_solution(int n, int k, double rho0, double r);

/// The exact asymptotic constant for the ball: u -> -gamma r^(-alpha0)
/// with gamma = rho0^{alpha0}.
double ball_gamma(int n, int k, double rho0);

/// The borderline identity blocking k = n/2: returns
/// S_{n/2}(D^2 (C log r - 1)) computed from the eigenvalues
/// (-C/r^2, C/r^2 x (n-1)); the value is 0 for every C > 0, which is why
/// the exterior problem has no solution decaying to 0 in that case.
/// Throws std::domain_error for odd n, C <= 0, or r <= 0.
double log_solution_check(int n_even, double C, double r);

/// The approximate Dirichlet problem on B_R minus the closed domain:
/// S_k(D^2 u) = f_eps with u = -1 on the inner boundary and u = b_R =
/// phi(R, C0) = -C0 (R + eps)^(-alpha0) on the sphere |x| = R. C0 and C1
/// are barrier amplitudes with 0 < C0 < 1 < C1 chosen so that
/// phi(x, C0) > -1 > phi(x, C1) on the inner boundary.
struct ApproxProblem {
  int n = 0;
  int k = 0;
  double R = 0.0;
  double eps = 0.0;
  RadialSurface surface;
  double C0 = 0.0;
  double C1 = 0.0;
  double b_R = 0.0;

  double alpha0() const { return static_cast<double>(n) / k - 2.0; }
};

/// Builds the problem data with the default amplitude recipe
///   C0 = min((1 - delta) (min rho + eps)^{alpha0}, 1 - 1e-6),
///   C1 = max((1 + delta) (max rho + eps)^{alpha0}, 1 + 1e-6),
/// the tightest symmetric choice honoring the strict boundary inequalities.
/// Validates n > 2k, 0 <= eps < eps_max (default 1e-2), R > 10 max rho,
/// and re-checks the two boundary inequalities on 512 samples.
/// Throws std::domain_error / std::invalid_argument on violations.
ApproxProblem make_approx_problem(const RadialSurface& surface, int k, double R,
                                  double eps, double delta = 0.05,
                                  double eps_max = 1e-2);

/// Pointwise sandwich from the comparison principle.
struct SandwichBounds {
  double lower = 0.0;
  double upper = 0.0;
};

/// Bounds the solution of the approximate problem at radius r, angle theta:
///   lower = max(phi(r, C1), phi(r, C1) + (C1 - C0)(R + eps)^(-alpha0)),
///   upper = phi(r, C0).
/// The shifted subsolution matches the outer boundary data exactly, so
/// upper - lower -> 0 at |x| = R. Throws std::domain_error when (r, theta)
/// lies outside the closed annulus rho(theta) <= r <= R.
SandwichBounds sandwich_bounds(const ApproxProblem& problem, double r,
                               double theta);

/// Cartesian overload; the symmetry axis is the last coordinate.
SandwichBounds sandwich_bounds(const ApproxProblem& problem,
                               const Eigen::VectorXd& x);

}  // namespace khx
