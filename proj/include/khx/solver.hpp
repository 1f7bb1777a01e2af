#pragma once

// Numerical solution of the approximate exterior Dirichlet problem
// S_k(D^2 u) = f_eps on B_R minus the domain, u = -1 on the inner boundary,
// u = -C0 (R+eps)^(-alpha0) on |x| = R: exact closed form in the radial
// eps = 0 case, damped Newton with an admissibility guard otherwise, plus
// decay/asymptotics diagnostics and schedule-driven continuation.

#include "khx/field.hpp"

#include <stdexcept>
#include <utility>
#include <vector>

namespace khx {

struct SolverConfig {
  /// Residual gate: converged when max |F| <= tol_res_factor * scale with
  /// scale = max(1, max_node max|lambda|)^k.
  double tol_res_factor = 1e-8;
  int max_newton = 60;
  /// Damping floor 2^-max_halvings for the admissibility-guarded line search.
  int max_halvings = 40;
  /// Closure slack: S_m(lambda) >= -admissibility_tol * max(1,|lambda|_max)^m.
  double admissibility_tol = 1e-8;
};

/// Thrown when Newton fails to converge, the guard exhausts its halvings,
/// the Jacobian factorization breaks down, or no admissible initial guess
/// exists. Carries the residual trace up to the failure.
struct SolveFailure : std::runtime_error {
  SolveFailure(const std::string& what, std::vector<double> residuals)
      : std::runtime_error(what), residual_history(std::move(residuals)) {}
  std::vector<double> residual_history;
};

/// Asymptotic diagnostics over the fit window r in [R/4, R/2].
struct AsymptoticsReport {
  /// Primary estimate: slope of the least-squares affine fit u ~ A + B mu
  /// over the window. The affine term absorbs the finite-R boundary offset,
  /// which is exactly affine in mu for the radial solution family; the raw
  /// ratio median below is biased by that offset.
  double gamma = 0.0;
  double gamma_median = 0.0;  // median of u/mu over the window (diagnostic)
  double gamma_spread = 0.0;  // (p90 - p10)/|median| of u/mu
  bool low_confidence = false;  // spread > 10%
  /// Log-log regression exponents of |u|, |Du|, |D^2 u| against r over the
  /// window (positive decay rates). Contract for uncontaminated fields:
  /// within 0.1 of alpha0, alpha0+1, alpha0+2.
  double decay_u = 0.0;
  double decay_du = 0.0;
  double decay_d2u = 0.0;
  bool decay_ok = false;
  double window_r_min = 0.0;
  double window_r_max = 0.0;
  int window_nodes = 0;
};

/// Computes the window diagnostics from a field (no solve required).
/// Throws std::domain_error when the window contains no grid nodes.
AsymptoticsReport asymptotics_report(const SolutionField& field);

struct SolveReport {
  std::vector<double> residual_history;  // max |F| per Newton iteration
  double final_residual = 0.0;
  double residual_scale = 1.0;
  int newton_iterations = 0;
  /// min over interior nodes and degrees m = 1..k of
  /// S_m(lambda) / max(1, |lambda|_max)^m.
  double admissibility_margin = 0.0;
  /// max over nodes of (lower - u) and (u - upper) against sandwich_bounds;
  /// <= 1e-6 for accepted solves.
  double sandwich_violation = 0.0;
  bool sandwich_ok = false;
  /// Outer-boundary gradient band [alpha0 C0 (R+eps)^(-alpha0-1),
  /// alpha0 C1 (R+eps)^(-alpha0-1)]; the observed |grad u| range on |x| = R
  /// must lie inside it up to 5% slack.
  double band_low = 0.0;
  double band_high = 0.0;
  double grad_outer_min = 0.0;
  double grad_outer_max = 0.0;
  bool band_ok = false;
  /// Largest |grad u| observed on the inner boundary (no predicted
  /// constant; recorded for reference).
  double grad_inner_max = 0.0;
  AsymptoticsReport asym;
};

/// Radial solve for a ball domain B_rho0: the two-point problem on a
/// log-graded 1D grid with ns >= 256 nodes, broadcast to an axisymmetric
/// field (ntheta columns) so downstream consumers see a SolutionField.
/// eps = 0 returns the exact closed form A - B r^(-alpha0) fitted to both
/// boundary values (residual identically zero up to roundoff); eps > 0 runs
/// damped Newton on the radial residual
///   C(n-1,k-1) (u'/r)^(k-1) u'' + C(n-1,k) (u'/r)^k - f_eps(r).
/// Throws SolveFailure on non-convergence, std::invalid_argument on bad
/// sizes, std::domain_error on n <= 2k.
std::pair<SolutionField, SolveReport> solve_radial(
    int n, int k, double rho0, double R, double eps, int ns,
    double delta = 0.05, int ntheta = 33, double grading = 2.0,
    const SolverConfig& config = {});

/// Damped Newton for the axisymmetric problem on the given grid. The
/// residual is assembled from 4th-order stencils through the grid chain
/// rule; the Jacobian is analytic and solved with SparseLU. Line search
/// halves the step until the iterate stays in the closed cone (closure
/// slack admissibility_tol) and the residual drops by the Armijo factor
/// (1 - t/4). Initialization blends the two boundary values along the
/// barrier profile phi(., C_mid), C_mid = sqrt(C0 C1), re-blended toward
/// C1 when the guard rejects it; when every blend leaves the cone (typical
/// for non-spherical boundaries, whose angular curvature eats the barrier's
/// thin margin at the inner rim) the start falls back to the certified
/// subsolution shape g^N - 2 fitted to the boundary data, whose cone margin
/// is O(1). eps = 0 is rejected here: the degenerate
/// problem is reached by continuation, never solved directly.
/// Requires an admissible surface (certificate checked; failure message
/// quotes it). init, when given, must live on the same grid and replaces
/// the blended initial guess (its boundary rows are reset exactly).
std::pair<SolutionField, SolveReport> solve_axisym(
    const ApproxProblem& problem, const AnnulusGrid& grid,
    const SolverConfig& config = {}, const SolutionField* init = nullptr);

struct ContinuationStage {
  double eps = 0.0;
  double R = 0.0;
  double gamma = 0.0;          // per-stage affine-fit estimate
  double final_residual = 0.0;
  int newton_iterations = 0;
};

struct ContinuationResult {
  SolutionField field;   // final stage solution, overrides attached
  SolveReport report;    // final stage report
  std::vector<ContinuationStage> stages;
  /// Set when >= 3 distinct R stages exist: quadratic extrapolation of
  /// gamma in x = R^(-alpha0) to x = 0 (also stored on the field as
  /// gamma_override, with the matching boundary-gradient profile).
  std::optional<double> gamma_richardson;
  /// Set when >= 2 distinct eps stages exist at the final R: linear
  /// extrapolation of gamma to eps = 0 (diagnostic only).
  std::optional<double> gamma_eps_linear;
};

/// Re-solves along the paired schedules (shorter schedule repeats its last
/// entry; eps strictly decreasing, R strictly increasing where they vary),
/// warm-starting each stage from the previous solution interpolated onto
/// the new grid with an affine-in-mu tail extension beyond the old R.
/// Length-1 schedules reduce to a single solve. radial_path = true demands
/// a ball surface and uses the 1D radial solver per stage.
/// Any stage failure rethrows SolveFailure tagged with the stage index.
ContinuationResult continuation_solve(
    const RadialSurface& surface, int k, std::vector<double> eps_schedule,
    std::vector<double> R_schedule, int ns, int ntheta, double grading = 2.0,
    double delta = 0.05, const SolverConfig& config = {},
    bool radial_path = false);

}  // namespace khx
