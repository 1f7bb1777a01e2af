#include "solver_detail.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace khx {

namespace {

/// Least-squares slope of y against x (centered normal equations).
double ls_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t m = x.size();
  double xm = 0.0, ym = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    xm += x[i];
    ym += y[i];
  }
  xm /= static_cast<double>(m);
  ym /= static_cast<double>(m);
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    sxy += (x[i] - xm) * (y[i] - ym);
    sxx += (x[i] - xm) * (x[i] - xm);
  }
  return sxy / sxx;
}

double percentile(std::vector<double> v, double p) {
  std::sort(v.begin(), v.end());
  const double pos = p * static_cast<double>(v.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(pos);
  const std::size_t hi = std::min(lo + 1, v.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return v[lo] * (1.0 - frac) + v[hi] * frac;
}

}  // namespace

AsymptoticsReport asymptotics_report(const SolutionField& field) {
  const AnnulusGrid& grid = field.grid();
  const ApproxProblem& pb = grid.problem();
  const double a0 = pb.alpha0();
  const double lo = pb.R / 4.0, hi = pb.R / 2.0;

  std::vector<double> mus, us, ratios, logr;
  std::vector<double> log_u, log_du, log_d2u;
  AsymptoticsReport rep;
  rep.window_r_min = std::numeric_limits<double>::infinity();
  rep.window_r_max = 0.0;

  for (int i = 0; i < grid.ns(); ++i) {
    for (int j = 0; j < grid.ntheta(); ++j) {
      const double r = grid.r(i, j);
      if (r < lo || r > hi) continue;
      const double mu = -std::pow(r, -a0);
      const double u = field.value(i, j);
      mus.push_back(mu);
      us.push_back(u);
      ratios.push_back(u / mu);
      const double au = std::abs(u);
      const double adu = field.gradient_norm(i, j);
      const double ad2u =
          field.hessian_eigenvalues(i, j).cwiseAbs().maxCoeff();
      logr.push_back(std::log(r));
      log_u.push_back(au > 0.0 ? std::log(au) : -750.0);
      log_du.push_back(adu > 0.0 ? std::log(adu) : -750.0);
      log_d2u.push_back(ad2u > 0.0 ? std::log(ad2u) : -750.0);
      rep.window_r_min = std::min(rep.window_r_min, r);
      rep.window_r_max = std::max(rep.window_r_max, r);
    }
  }
  rep.window_nodes = static_cast<int>(us.size());
  if (rep.window_nodes < 8) {
    throw std::domain_error(
        "asymptotics_report: the window r in [R/4, R/2] holds fewer than 8 "
        "grid nodes; increase ns");
  }

  rep.gamma = ls_slope(mus, us);
  rep.gamma_median = percentile(ratios, 0.5);
  const double p10 = percentile(ratios, 0.10);
  const double p90 = percentile(ratios, 0.90);
  rep.gamma_spread = (p90 - p10) / std::max(std::abs(rep.gamma_median), 1e-300);
  rep.low_confidence = rep.gamma_spread > 0.10;

  rep.decay_u = -ls_slope(logr, log_u);
  rep.decay_du = -ls_slope(logr, log_du);
  rep.decay_d2u = -ls_slope(logr, log_d2u);
  rep.decay_ok = std::abs(rep.decay_u - a0) <= 0.1 &&
                 std::abs(rep.decay_du - (a0 + 1.0)) <= 0.1 &&
                 std::abs(rep.decay_d2u - (a0 + 2.0)) <= 0.1;
  return rep;
}

namespace detail {

SolveReport make_solve_report(const SolutionField& field,
                              std::vector<double> residual_history,
                              int newton_iterations,
                              const SolverConfig& config) {
  (void)config;
  const AnnulusGrid& grid = field.grid();
  const ApproxProblem& pb = grid.problem();
  const int ns = grid.ns(), nt = grid.ntheta(), k = pb.k;
  const double a0 = pb.alpha0();

  SolveReport rep;
  rep.residual_history = std::move(residual_history);
  rep.newton_iterations = newton_iterations;

  // Residual and cone margin recomputed from the field's own reconstruction
  // through the eigenvalue route (independent of the assembly formulas).
  double final_res = 0.0, max_lam = 0.0;
  double margin = std::numeric_limits<double>::infinity();
  for (int i = 1; i < ns - 1; ++i) {
    for (int j = 0; j < nt; ++j) {
      const Spectrum lam = field.hessian_eigenvalues(i, j);
      margin = std::min(margin, node_margin(lam, k));
      max_lam = std::max(max_lam, lam.cwiseAbs().maxCoeff());
      const double f = f_eps(pb.n, pb.k, pb.eps, grid.r(i, j));
      final_res = std::max(final_res, std::abs(elem_sym(lam, k) - f));
    }
  }
  rep.final_residual = final_res;
  rep.residual_scale = std::pow(std::max(1.0, max_lam), k);
  rep.admissibility_margin = margin;

  double viol = 0.0;
  for (int i = 0; i < ns; ++i) {
    for (int j = 0; j < nt; ++j) {
      const SandwichBounds b = sandwich_bounds(pb, grid.r(i, j), grid.theta(j));
      const double u = field.value(i, j);
      viol = std::max({viol, b.lower - u, u - b.upper});
    }
  }
  rep.sandwich_violation = viol;
  rep.sandwich_ok = viol <= 1e-6;

  rep.band_low = a0 * pb.C0 * std::pow(pb.R + pb.eps, -a0 - 1.0);
  rep.band_high = a0 * pb.C1 * std::pow(pb.R + pb.eps, -a0 - 1.0);
  double gmin = std::numeric_limits<double>::infinity(), gmax = 0.0;
  for (int j = 0; j < nt; ++j) {
    const double g = std::abs(field.reconstruct(ns - 1, j).ur);
    gmin = std::min(gmin, g);
    gmax = std::max(gmax, g);
  }
  rep.grad_outer_min = gmin;
  rep.grad_outer_max = gmax;
  rep.band_ok = gmin >= 0.95 * rep.band_low && gmax <= 1.05 * rep.band_high;

  double gin = 0.0;
  for (int j = 0; j < nt; ++j)
    gin = std::max(gin, field.gradient_norm(0, j));
  rep.grad_inner_max = gin;

  rep.asym = asymptotics_report(field);
  return rep;
}

}  // namespace detail
}  // namespace khx
