#pragma once

// Weighted curvature integrals over level sets of an exterior solution:
//   Phi(tau) = int_{u = 1/tau} (1/|Du|) S_k^{ij} u_i u_j
//              (|Du| / (-u)^l)^beta dA,   l = (n-k)/(n-2k),
// their tau-series with the monotonicity verdict, and the boundary
// identity report comparing int_{dOmega} |Du|^{k+beta} sigma_{k-1} dA with
// the limit value Phi(-infinity) determined by the asymptotic constant.

#include "khx/field.hpp"
#include "khx/geometry.hpp"
#include "khx/solver.hpp"

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace khx {

/// Thrown by extract_level_set when a theta-column crosses the level more
/// than once: the level set is not a radial graph and the quadrature
/// below does not apply.
struct IrregularLevel : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// One quadrature point of an extracted level set (one per theta node).
struct LevelPoint {
  double theta = 0.0;
  double r = 0.0;          // radius of the crossing
  double grad = 0.0;       // |grad u|
  double drdtheta = 0.0;   // r'(theta) = -U_theta / U_r along the level
  /// Newton-tensor quadratic S_k^{ij} u_i u_j evaluated spectrally
  /// (route a): sum over the two meridian eigenpairs (lambda_e, q_e) of
  /// S_{k-1}(spectrum omitting e) (q_e . v)^2, v = (U_r, U_theta/r).
  double newton_quad = 0.0;
  /// sigma_{k-1} of the level-set principal curvatures (route b):
  /// kappa_meridian = t^T B t / |grad u| with t the in-plane unit tangent,
  /// kappa_azimuthal = lambda_az / |grad u| with multiplicity n-2.
  double sigma_level = 0.0;
};

struct LevelSet {
  double level = 0.0;       // the value u0 = 1/tau
  bool at_boundary = false; // u0 matched the inner Dirichlet value
  bool regular = false;     // min |grad u| >= 1e-3 max |grad u| on the set
  double min_grad = 0.0;
  double max_grad = 0.0;
  std::vector<LevelPoint> points;  // one per theta column
};

/// Locates the radial crossing u = level on every theta column (cubic
/// interpolation in l = log r polished by 60 bisection steps), then
/// evaluates the point data by cubic interpolation of the reconstructed
/// derivatives. level must lie in [-1, 0). Levels within 1e-12 of -1 are
/// read off the inner boundary row directly. Throws IrregularLevel on a
/// multiple crossing and std::domain_error when the level set is missing
/// or touches the outer quadrature margin (last four rows).
LevelSet extract_level_set(const SolutionField& field, double level);

/// One evaluation of Phi. Route (a) is the reported value; route (b)
/// integrates |Du|^{k+1} sigma_{k-1}(level curvatures) instead of the
/// Newton quadratic, and the two must agree to 1% for routes_agree.
struct PhiValue {
  double tau = 0.0;
  double level = 0.0;
  double phi = 0.0;       // composite Simpson (3/8 tail on odd intervals)
  double phi_alt = 0.0;   // route (b)
  double quad_err = 0.0;  // |Simpson - trapezoid| of the route (a) integrand
  bool routes_agree = false;
  bool regular = false;
  double min_grad = 0.0;
};

/// Requires tau <= -1 (so the level 1/tau lies in [-1, 0)) and
/// beta >= (n-2k)/(n-k) (the hypothesis under which the weight exponent
/// l beta keeps the integral finite toward infinity).
PhiValue phi_of_tau(const SolutionField& field, double tau, double beta);

struct PhiSeries {
  std::vector<PhiValue> rows;       // tau ascending
  std::vector<std::string> notes;   // skipped levels, clamps
  bool clamped = false;             // default tau range hit the outer margin
  /// Phi(-infinity) = |S^{n-1}| C(n-1,k-1) alpha0^{k+beta}
  /// gamma^{k - beta/alpha0}, from gamma_override or the window fit.
  std::optional<double> phi_infinity;
  /// Non-decreasing in tau within mono_tol = 1e-3 median |Phi|.
  bool monotone = false;
  double mono_tol = 0.0;
};

/// Evaluates Phi over the given tau grid (ascending), or over the default
/// grid of 20 levels log-spaced in -u between -1 and
/// u_hi = min(-0.05, 1.02 max_j u(ns-4, j)) when taus is empty. Irregular
/// or out-of-range levels are skipped with a note, never fatal.
PhiSeries phi_series(const SolutionField& field, double beta,
                     std::vector<double> taus = {});

/// Boundary identity: lhs = int_{dOmega} |Du|^{k+beta} sigma_{k-1}(kappa)
/// dA against rhs = Phi(-infinity). When the gamma exponent k - beta/alpha0
/// vanishes (beta = n-2k) the rhs is gamma-free and gamma_used stays empty.
struct MinkowskiReport {
  double beta = 0.0;
  double l_exponent = 0.0;       // (n-k)/(n-2k)
  double lhs = 0.0;
  double rhs = 0.0;
  double ratio = 0.0;            // lhs / rhs
  bool equality = false;         // |ratio - 1| <= 1.5e-2
  double gamma_exponent = 0.0;   // k - beta/alpha0
  std::optional<double> gamma_used;
};

/// The surface must match the one the field was solved on (coefficient
/// check). |Du| on the boundary prefers boundary_gradient_override; gamma
/// prefers gamma_override, falling back to the asymptotics window fit.
MinkowskiReport minkowski_report(const SolutionField& field,
                                 const RadialSurface& surface, double beta);

}  // namespace khx
