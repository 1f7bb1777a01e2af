#include "khx/barriers.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace khx {

namespace {

constexpr double kPi = std::numbers::pi;

void require_exterior_exponent(int n, int k, const char* who) {
  if (k < 1) {
    throw std::domain_error(std::string(who) + ": k must be >= 1");
  }
  if (n <= 2 * k) {
    std::ostringstream msg;
    msg << who << ": n = " << n << ", k = " << k
        << " has n <= 2k, where no decaying power barrier exists: at n = 2k "
           "the radial equation S_{n/2}(D^2 u) = 0 is solved by "
           "u = C log|x| - 1 for every C > 0 (see log_solution_check), so "
           "the exterior problem admits no solution tending to 0";
    throw std::domain_error(msg.str());
  }
}

}  // namespace

BarrierFamily::BarrierFamily(int n_in, int k_in, double eps_in, double C_in)
    : n(n_in), k(k_in), eps(eps_in), C(C_in) {
  require_exterior_exponent(n, k, "BarrierFamily");
  if (!(eps >= 0.0)) {
    throw std::domain_error("BarrierFamily: eps must be >= 0");
  }
  if (!(C > 0.0)) {
    throw std::domain_error("BarrierFamily: amplitude C must be positive");
  }
  alpha0 = static_cast<double>(n) / k - 2.0;
}

double BarrierFamily::value(double r) const {
  if (!(r > 0.0)) {
    throw std::domain_error("BarrierFamily::value: r must be positive");
  }
  return -C * std::pow(r + eps, -alpha0);
}

double BarrierFamily::radial_derivative(double r) const {
  if (!(r > 0.0)) {
    throw std::domain_error("BarrierFamily::radial_derivative: r must be positive");
  }
  return C * alpha0 * std::pow(r + eps, -alpha0 - 1.0);
}

Spectrum BarrierFamily::hessian_eigenvalues(double r) const {
  if (!(r > 0.0)) {
    throw std::domain_error("BarrierFamily::hessian_eigenvalues: r must be positive");
  }
  const double nk = static_cast<double>(n) / k;
  const double common = C * alpha0 * std::pow(r + eps, -nk);
  Spectrum eigs(n);
  eigs[0] = (1.0 - nk) * common;
  for (int i = 1; i < n; ++i) {
    eigs[i] = (1.0 + eps / r) * common;
  }
  return eigs;
}

BarrierPoint phi_barrier(const BarrierFamily& family, const Eigen::VectorXd& x) {
  if (x.size() != family.n) {
    throw std::invalid_argument("phi_barrier: point dimension mismatch");
  }
  const double r = x.norm();
  if (!(r > 0.0)) {
    throw std::domain_error("phi_barrier: x = 0 is a singular point of the barrier");
  }
  BarrierPoint p;
  p.value = family.value(r);
  p.gradient = family.radial_derivative(r) / r * x;
  p.hess_eigs = family.hessian_eigenvalues(r);
  return p;
}

double f_eps(int n, int k, double eps, double r) {
  require_exterior_exponent(n, k, "f_eps");
  if (!(r > 0.0)) {
    throw std::domain_error("f_eps: r must be positive");
  }
  if (!(eps >= 0.0)) {
    throw std::domain_error("f_eps: eps must be >= 0");
  }
  if (eps == 0.0) return 0.0;
  const double alpha0 = static_cast<double>(n) / k - 2.0;
  return std::pow(1.0 + eps / r, k - 1) * binomial(n - 1, k) * (eps / r) *
         std::pow(r + eps, -n) * std::pow(alpha0, k);
}

MuValue mu_exact(int n, int k, double r) {
  require_exterior_exponent(n, k, "mu_exact");
  if (!(r > 0.0)) {
    throw std::domain_error("mu_exact: r must be positive");
  }
  const double alpha0 = static_cast<double>(n) / k - 2.0;
  MuValue m;
  m.value = -std::pow(r, -alpha0);
  m.dr = alpha0 * std::pow(r, -alpha0 - 1.0);
  m.d2r = -alpha0 * (alpha0 + 1.0) * std::pow(r, -alpha0 - 2.0);
  return m;
}

double radial_ball_solution(int n, int k, double rho0, double r) {
  require_exterior_exponent(n, k, "radial_ball_solution");
  if (!(rho0 > 0.0)) {
    throw std::domain_error("radial_ball_solution: rho0 must be positive");
  }
  if (r < rho0) {
    throw std::domain_error("radial_ball_solution: r < rho0 lies inside the ball");
  }
  const double alpha0 = static_cast<double>(n) / k - 2.0;
  return -std::pow(rho0 / r, alpha0);
}

double ball_gamma(int n, int k, double rho0) {
  require_exterior_exponent(n, k, "ball_gamma");
  if (!(rho0 > 0.0)) {
    throw std::domain_error("ball_gamma: rho0 must be positive");
  }
  return std::pow(rho0, static_cast<double>(n) / k - 2.0);
}

double log_solution_check(int n_even, double C, double r) {
  if (n_even < 2 || n_even % 2 != 0) {
    throw std::domain_error(
        "log_solution_check: requires even n (the k = n/2 borderline case)");
  }
  if (!(C > 0.0)) {
    throw std::domain_error("log_solution_check: C must be positive");
  }
  if (!(r > 0.0)) {
    throw std::domain_error("log_solution_check: r must be positive");
  }
  // u = C log r - 1: u' = C/r, u'' = -C/r^2; eigenvalues (-C/r^2, C/r^2
  // repeated n-1 times). S_{n/2} of that spectrum vanishes identically.
  Spectrum eigs(n_even);
  eigs[0] = -C / (r * r);
  for (int i = 1; i < n_even; ++i) {
    eigs[i] = C / (r * r);
  }
  return elem_sym(eigs, n_even / 2);
}

ApproxProblem make_approx_problem(const RadialSurface& surface, int k, double R,
                                  double eps, double delta, double eps_max) {
  const int n = surface.ambient_dim();
  require_exterior_exponent(n, k, "make_approx_problem");
  if (!(eps >= 0.0 && eps < eps_max)) {
    throw std::invalid_argument("make_approx_problem: requires 0 <= eps < " +
                                std::to_string(eps_max));
  }
  if (!(delta > 0.0)) {
    throw std::invalid_argument("make_approx_problem: delta must be positive");
  }
  if (!(R > 10.0 * surface.max_rho())) {
    throw std::invalid_argument(
        "make_approx_problem: R must exceed 10 * max rho = " +
        std::to_string(10.0 * surface.max_rho()));
  }

  const double alpha0 = static_cast<double>(n) / k - 2.0;
  const double C0 =
      std::min((1.0 - delta) * std::pow(surface.min_rho() + eps, alpha0),
               1.0 - 1e-6);
  const double C1 =
      std::max((1.0 + delta) * std::pow(surface.max_rho() + eps, alpha0),
               1.0 + 1e-6);
  if (!(C0 > 0.0 && C0 < 1.0 && C1 > 1.0)) {
    throw std::invalid_argument(
        "make_approx_problem: amplitude recipe failed to give 0 < C0 < 1 < C1");
  }

  // Re-verify the strict selection inequalities on boundary samples:
  // phi(x, C0) > -1 > phi(x, C1) for x on the inner boundary.
  const int samples = 512;
  for (int j = 0; j <= samples; ++j) {
    const double rho = surface.rho(kPi * j / samples);
    const double pw = std::pow(rho + eps, -alpha0);
    if (!(-C0 * pw > -1.0 && -C1 * pw < -1.0)) {
      std::ostringstream msg;
      msg << "make_approx_problem: barrier selection inequalities fail at "
             "theta = "
          << kPi * j / samples << " (rho = " << rho << ", C0 = " << C0
          << ", C1 = " << C1 << ")";
      throw std::invalid_argument(msg.str());
    }
  }

  ApproxProblem p{n,  k,  R,  eps, surface,
                  C0, C1, -C0 * std::pow(R + eps, -alpha0)};
  return p;
}

SandwichBounds sandwich_bounds(const ApproxProblem& problem, double r,
                               double theta) {
  // uniform theta grids can overshoot pi by an ulp when forming j * h
  if (!(theta >= -1e-12 && theta <= kPi + 1e-12)) {
    throw std::domain_error("sandwich_bounds: theta outside [0, pi]");
  }
  theta = std::min(std::max(theta, 0.0), kPi);
  const double rho = problem.surface.rho(theta);
  if (r < rho * (1.0 - 1e-9) || r > problem.R * (1.0 + 1e-9)) {
    throw std::domain_error(
        "sandwich_bounds: point outside the annulus rho(theta) <= r <= R");
  }
  const double alpha0 = problem.alpha0();
  const double pw = std::pow(r + problem.eps, -alpha0);
  const double upper = -problem.C0 * pw;
  const double lower_raw = -problem.C1 * pw;
  const double shift =
      (problem.C1 - problem.C0) * std::pow(problem.R + problem.eps, -alpha0);
  SandwichBounds b;
  b.upper = upper;
  b.lower = std::max(lower_raw, lower_raw + shift);
  return b;
}

SandwichBounds sandwich_bounds(const ApproxProblem& problem,
                               const Eigen::VectorXd& x) {
  if (x.size() != problem.n) {
    throw std::invalid_argument("sandwich_bounds: point dimension mismatch");
  }
  const double r = x.norm();
  if (!(r > 0.0)) {
    throw std::domain_error("sandwich_bounds: x = 0 is not in the annulus");
  }
  const double c = std::clamp(x[x.size() - 1] / r, -1.0, 1.0);
  return sandwich_bounds(problem, r, std::acos(c));
}

}  // namespace khx
