#include "solver_detail.hpp"

#include "khx/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace khx {
namespace detail {

namespace {

/// Affine fit u ~ A + B mu over one old column, restricted to the window
/// r in [R/4, R/2] (falls back to the outer half of the column when the
/// window is too thin). Returns (A, B).
std::pair<double, double> column_tail_fit(const SolutionField& prev, int j,
                                          double a0) {
  const AnnulusGrid& g = prev.grid();
  const double R = g.problem().R;
  for (int attempt = 0; attempt < 2; ++attempt) {
    const double lo = (attempt == 0) ? R / 4.0 : 0.0;
    const double hi = (attempt == 0) ? R / 2.0 : R;
    int i0 = (attempt == 0) ? 0 : g.ns() / 2;
    double smu = 0.0, su = 0.0, n = 0.0;
    std::vector<std::pair<double, double>> pts;
    for (int i = i0; i < g.ns(); ++i) {
      const double r = g.r(i, j);
      if (r < lo || r > hi) continue;
      pts.emplace_back(-std::pow(r, -a0), prev.value(i, j));
    }
    if (pts.size() < 4 && attempt == 0) continue;
    for (const auto& p : pts) {
      smu += p.first;
      su += p.second;
      n += 1.0;
    }
    const double mum = smu / n, um = su / n;
    double sxy = 0.0, sxx = 0.0;
    for (const auto& p : pts) {
      sxy += (p.first - mum) * (p.second - um);
      sxx += (p.first - mum) * (p.first - mum);
    }
    const double B = sxy / sxx;
    return {um - B * mum, B};
  }
  throw std::domain_error("interp_to_grid: old column too short for a tail fit");
}

/// Cubic Lagrange interpolation of the old column at l = log r.
double interp_column(const SolutionField& prev, int j,
                     const std::vector<double>& lold, double l) {
  const int ons = static_cast<int>(lold.size());
  const auto it = std::upper_bound(lold.begin(), lold.end(), l);
  int base = static_cast<int>(it - lold.begin()) - 2;
  base = std::max(0, std::min(base, ons - 4));
  double acc = 0.0;
  for (int a = 0; a < 4; ++a) {
    double w = 1.0;
    for (int b = 0; b < 4; ++b) {
      if (a == b) continue;
      w *= (l - lold[base + b]) / (lold[base + a] - lold[base + b]);
    }
    acc += w * prev.value(base + a, j);
  }
  return acc;
}

}  // namespace

SolutionField interp_to_grid(const SolutionField& prev,
                             const AnnulusGrid& grid) {
  const AnnulusGrid& og = prev.grid();
  if (og.ntheta() != grid.ntheta()) {
    throw std::invalid_argument(
        "interp_to_grid: continuation keeps ntheta fixed across stages");
  }
  if (og.ns() < 4) {
    throw std::invalid_argument("interp_to_grid: old grid too small");
  }
  const double a0 = og.problem().alpha0();
  SolutionField out(grid);
  std::vector<double> lold(og.ns());
  for (int j = 0; j < grid.ntheta(); ++j) {
    for (int i = 0; i < og.ns(); ++i) lold[i] = std::log(og.r(i, j));
    bool have_tail = false;
    double A = 0.0, B = 0.0;
    for (int i = 0; i < grid.ns(); ++i) {
      const double l = std::log(grid.r(i, j));
      if (l <= lold.back() + 1e-12) {
        out.values()(i, j) = interp_column(prev, j, lold, l);
      } else {
        if (!have_tail) {
          std::tie(A, B) = column_tail_fit(prev, j, a0);
          have_tail = true;
        }
        out.values()(i, j) = A + B * (-std::exp(-a0 * l));
      }
    }
  }
  return out;
}

}  // namespace detail

ContinuationResult continuation_solve(const RadialSurface& surface, int k,
                                      std::vector<double> eps_schedule,
                                      std::vector<double> R_schedule,
                                      int ns, int ntheta, double grading,
                                      double delta, const SolverConfig& config,
                                      bool radial_path) {
  if (eps_schedule.empty() || R_schedule.empty()) {
    throw std::invalid_argument(
        "continuation_solve: both schedules must hold at least one entry");
  }
  for (std::size_t t = 1; t < eps_schedule.size(); ++t) {
    if (eps_schedule[t] > eps_schedule[t - 1]) {
      throw std::invalid_argument(
          "continuation_solve: eps_schedule must be non-increasing");
    }
  }
  for (std::size_t t = 1; t < R_schedule.size(); ++t) {
    if (R_schedule[t] < R_schedule[t - 1]) {
      throw std::invalid_argument(
          "continuation_solve: R_schedule must be non-decreasing");
    }
  }
  if (radial_path && !surface.is_ball()) {
    throw std::invalid_argument(
        "continuation_solve: the radial path requires a ball domain");
  }

  struct Snap {
    double R = 0.0;
    double eps = 0.0;
    double gamma = 0.0;
    Eigen::VectorXd g_inner;
  };

  const std::size_t nstages = std::max(eps_schedule.size(), R_schedule.size());
  std::optional<SolutionField> field;
  SolveReport report;
  std::vector<ContinuationStage> stages;
  std::vector<Snap> snaps;

  for (std::size_t t = 0; t < nstages; ++t) {
    const double eps = eps_schedule[std::min(t, eps_schedule.size() - 1)];
    const double R = R_schedule[std::min(t, R_schedule.size() - 1)];
    if (!radial_path && eps <= 0.0) {
      throw std::invalid_argument(
          "continuation_solve: axisymmetric stages require eps > 0; only "
          "the radial path admits the exact eps = 0 endpoint");
    }
    const ApproxProblem problem = make_approx_problem(surface, k, R, eps, delta);
    AnnulusGrid grid(problem, ns, ntheta, grading);
    std::optional<SolutionField> init;
    if (field) init = detail::interp_to_grid(*field, grid);
    std::pair<SolutionField, SolveReport> sol = [&] {
      try {
        const SolutionField* ip = init ? &*init : nullptr;
        return radial_path ? detail::solve_radial_impl(problem, grid, config, ip)
                           : solve_axisym(problem, grid, config, ip);
      } catch (const SolveFailure& e) {
        std::ostringstream os;
        os << "continuation stage " << t << " (eps = " << eps << ", R = " << R
           << "): " << e.what();
        throw SolveFailure(os.str(), e.residual_history);
      }
    }();
    field = std::move(sol.first);
    report = std::move(sol.second);

    stages.push_back({eps, R, report.asym.gamma, report.final_residual,
                      report.newton_iterations});
    Snap snap;
    snap.R = R;
    snap.eps = eps;
    snap.gamma = report.asym.gamma;
    snap.g_inner.resize(ntheta);
    for (int j = 0; j < ntheta; ++j)
      snap.g_inner(j) = field->gradient_norm(0, j);
    snaps.push_back(std::move(snap));
  }

  // Richardson extrapolation in x = R^(-alpha0): keep the last snapshot per
  // distinct R (the most eps-converged one), fit the last <= 3 through a
  // polynomial and evaluate at x = 0 via Lagrange weights.
  const double a0 = static_cast<double>(surface.ambient_dim()) / k - 2.0;
  std::vector<Snap> by_r;
  for (const Snap& s : snaps) {
    if (!by_r.empty() && by_r.back().R == s.R) {
      by_r.back() = s;
    } else {
      by_r.push_back(s);
    }
  }
  std::optional<double> gamma_richardson;
  if (by_r.size() >= 2) {
    const std::size_t m = std::min<std::size_t>(3, by_r.size());
    const std::size_t off = by_r.size() - m;
    std::vector<double> x(m);
    for (std::size_t a = 0; a < m; ++a)
      x[a] = std::pow(by_r[off + a].R, -a0);
    double gamma_rich = 0.0;
    Eigen::VectorXd prof = Eigen::VectorXd::Zero(ntheta);
    for (std::size_t a = 0; a < m; ++a) {
      double w = 1.0;
      for (std::size_t b = 0; b < m; ++b) {
        if (a == b) continue;
        w *= (0.0 - x[b]) / (x[a] - x[b]);
      }
      gamma_rich += w * by_r[off + a].gamma;
      prof += w * by_r[off + a].g_inner;
    }
    gamma_richardson = gamma_rich;
    field->gamma_override = gamma_rich;
    field->boundary_gradient_override = prof;
  }

  // Linear eps -> 0 diagnostic at the final R.
  const double R_final = snaps.back().R;
  std::vector<Snap> by_eps;
  for (const Snap& s : snaps) {
    if (s.R != R_final) continue;
    if (!by_eps.empty() && by_eps.back().eps == s.eps) {
      by_eps.back() = s;
    } else {
      by_eps.push_back(s);
    }
  }
  std::optional<double> gamma_eps_linear;
  if (by_eps.size() >= 2) {
    const Snap& sa = by_eps[by_eps.size() - 2];
    const Snap& sb = by_eps.back();
    gamma_eps_linear =
        sb.gamma + (sb.gamma - sa.gamma) * (0.0 - sb.eps) / (sb.eps - sa.eps);
  }

  return ContinuationResult{std::move(*field), std::move(report),
                            std::move(stages), gamma_richardson,
                            gamma_eps_linear};
}

}  // namespace khx
