#pragma once

// Internal solver helpers shared between the radial and axisymmetric Newton
// drivers, continuation, and report assembly. Not installed.

#include "khx/barriers.hpp"
#include "khx/field.hpp"
#include "khx/solver.hpp"
#include "khx/stencil.hpp"
#include "khx/symfun.hpp"

#include <Eigen/Sparse>

namespace khx {
namespace detail {

/// x^e for small non-negative integer e (x^0 = 1, e < 0 yields 0; such terms
/// only arise with a zero binomial coefficient in front).
inline double ipow(double x, int e) {
  if (e < 0) return 0.0;
  double y = 1.0;
  for (int i = 0; i < e; ++i) y *= x;
  return y;
}

/// Value and partial derivatives of S_k of the axisymmetric Hessian spectrum
/// written through its meridian 2x2 block B = [[b11, b12], [b12, b22]] and
/// the azimuthal eigenvalue laz with multiplicity n-2:
///   S_k = sum_{j=0}^{min(2,k)} S_j(B) C(n-2, k-j) laz^(k-j).
struct SkEval {
  double value = 0.0;
  double d11 = 0.0;
  double d22 = 0.0;
  double d12 = 0.0;
  double dlaz = 0.0;
};

SkEval sk_blocks(double b11, double b22, double b12, double laz, int n, int k);

/// Full n-point spectrum: the two eigenvalues of B then laz repeated n-2
/// times (closed-form 2x2 eigenvalues, mean -/+ discriminant).
Eigen::VectorXd spectrum_from_blocks(double b11, double b22, double b12,
                                     double laz, int n);

/// min over m = 1..k of S_m(lambda) / max(1, |lambda|_inf)^m; the closed-cone
/// guard accepts a node when this is >= -admissibility_tol.
double node_margin(const Eigen::VectorXd& lambda, int k);

/// Initial guess alpha(theta) + beta(theta) phi(r; C) with per-column
/// coefficients fitted so both Dirichlet values are met exactly.
Eigen::VectorXd barrier_guess(const AnnulusGrid& grid, double C);

/// Post-solve diagnostics: residual recomputed from the field's own
/// reconstruction through the eigenvalue route, admissibility margin,
/// sandwich violation, outer gradient band, asymptotics.
SolveReport make_solve_report(const SolutionField& field,
                              std::vector<double> residual_history,
                              int newton_iterations, const SolverConfig& config);

/// Radial solve on an explicit problem/grid (ball surface required by the
/// caller); optional warm start. eps = 0 takes the closed form.
std::pair<SolutionField, SolveReport> solve_radial_impl(
    const ApproxProblem& problem, const AnnulusGrid& grid,
    const SolverConfig& config, const SolutionField* init);

/// Warm-start transfer: cubic interpolation in l = log r along each column,
/// switching to the column's affine fit u ~ A + B mu beyond the old outer
/// radius. Boundary rows are left to the receiving solver to reset.
SolutionField interp_to_grid(const SolutionField& prev, const AnnulusGrid& grid);

}  // namespace detail
}  // namespace khx
