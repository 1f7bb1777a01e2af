#include "solver_detail.hpp"

#include "khx/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace khx {
namespace detail {
namespace {

/// Radial residual at one interior node from the 1D profile v(s) along a
/// ball column:
///   F = C(n-1,k-1) q^(k-1) u_rr + C(n-1,k) q^k - f_eps(r),  q = u_r / r.
struct RadialWork {
  const AnnulusGrid& grid;
  int n, k, ns;
  std::vector<StencilRow> srows;
  Eigen::VectorXd fvals;  // f_eps along column 0
  double ckm1, ck;

  explicit RadialWork(const AnnulusGrid& g)
      : grid(g), n(g.problem().n), k(g.problem().k), ns(g.ns()) {
    srows.reserve(ns);
    for (int i = 0; i < ns; ++i)
      srows.push_back(uniform_stencil_row(ns, g.hs(), i));
    const ApproxProblem& pb = g.problem();
    fvals.resize(ns);
    for (int i = 0; i < ns; ++i)
      fvals(i) = f_eps(pb.n, pb.k, pb.eps, g.r(i, 0));
    ckm1 = binomial(n - 1, k - 1);
    ck = binomial(n - 1, k);
  }
};

struct REval {
  Eigen::VectorXd F;
  double res_inf = 0.0;
  double margin = std::numeric_limits<double>::infinity();
  double max_lam = 0.0;
};

REval eval_radial(const RadialWork& w, const Eigen::VectorXd& v) {
  REval out;
  out.F.setZero(w.ns);
  const ApproxProblem& pb = w.grid.problem();
  out.F(0) = v(0) + 1.0;
  out.F(w.ns - 1) = v(w.ns - 1) - pb.b_R;
  Eigen::VectorXd lam(w.n);
  for (int i = 1; i < w.ns - 1; ++i) {
    const StencilRow& sr = w.srows[i];
    double vs = 0.0, vss = 0.0;
    for (std::size_t m = 0; m < sr.nodes.size(); ++m) {
      vs += sr.w1(m) * v(sr.nodes[m]);
      vss += sr.w2(m) * v(sr.nodes[m]);
    }
    const auto ch = w.grid.chain(i, 0);
    const double r = ch.r;
    const double ur = vs / (r * ch.p);
    const double urr = (vss - vs * (ch.p + ch.ps / ch.p)) / (r * r * ch.p * ch.p);
    const double q = ur / r;
    out.F(i) = w.ckm1 * ipow(q, w.k - 1) * urr + w.ck * ipow(q, w.k) - w.fvals(i);
    lam(0) = urr;
    for (int a = 1; a < w.n; ++a) lam(a) = q;
    out.margin = std::min(out.margin, node_margin(lam, w.k));
    out.max_lam = std::max(out.max_lam, lam.cwiseAbs().maxCoeff());
  }
  out.res_inf = out.F.cwiseAbs().maxCoeff();
  return out;
}

void assemble_radial(const RadialWork& w, const Eigen::VectorXd& v,
                     std::vector<Eigen::Triplet<double>>& trips) {
  trips.clear();
  trips.emplace_back(0, 0, 1.0);
  trips.emplace_back(w.ns - 1, w.ns - 1, 1.0);
  for (int i = 1; i < w.ns - 1; ++i) {
    const StencilRow& sr = w.srows[i];
    double vs = 0.0, vss = 0.0;
    for (std::size_t m = 0; m < sr.nodes.size(); ++m) {
      vs += sr.w1(m) * v(sr.nodes[m]);
      vss += sr.w2(m) * v(sr.nodes[m]);
    }
    const auto ch = w.grid.chain(i, 0);
    const double r = ch.r;
    const double r2p2 = r * r * ch.p * ch.p;
    const double sfac = ch.p + ch.ps / ch.p;
    const double ur = vs / (r * ch.p);
    const double urr = (vss - vs * sfac) / r2p2;
    const double q = ur / r;
    const double dFdurr = w.ckm1 * ipow(q, w.k - 1);
    const double dFdq = w.ckm1 * (w.k - 1) * ipow(q, w.k - 2) * urr +
                        w.ck * w.k * ipow(q, w.k - 1);
    for (std::size_t m = 0; m < sr.nodes.size(); ++m) {
      // durr/dv = (w2 - w1 * sfac) / (r^2 p^2), dq/dv = w1 / (r^2 p)
      const double d = dFdurr * (sr.w2(m) - sr.w1(m) * sfac) / r2p2 +
                       dFdq * sr.w1(m) / (r * r * ch.p);
      trips.emplace_back(i, sr.nodes[m], d);
    }
  }
}

void broadcast_profile(const Eigen::VectorXd& v, SolutionField& field) {
  const AnnulusGrid& g = field.grid();
  for (int i = 0; i < g.ns(); ++i)
    for (int j = 0; j < g.ntheta(); ++j) field.values()(i, j) = v(i);
}

}  // namespace

std::pair<SolutionField, SolveReport> solve_radial_impl(
    const ApproxProblem& problem, const AnnulusGrid& grid,
    const SolverConfig& config, const SolutionField* init) {
  if (!problem.surface.is_ball()) {
    throw std::invalid_argument(
        "solve_radial: the surface must be a ball (single cosine "
        "coefficient)");
  }
  const int ns = grid.ns();
  const double a0 = problem.alpha0();

  if (problem.eps == 0.0) {
    // Exact degenerate solution A - B r^(-alpha0) through both boundary
    // values; S_k(D^2 u) vanishes identically for this profile.
    const double rho0 = problem.surface.rho(0.0);
    const double B = (problem.b_R + 1.0) /
                     (std::pow(rho0, -a0) - std::pow(problem.R, -a0));
    const double A = -1.0 + B * std::pow(rho0, -a0);
    SolutionField field(grid);
    for (int i = 0; i < ns; ++i) {
      const double val = A - B * std::pow(grid.r(i, 0), -a0);
      for (int j = 0; j < grid.ntheta(); ++j) field.values()(i, j) = val;
    }
    for (int j = 0; j < grid.ntheta(); ++j) {
      field.values()(0, j) = -1.0;
      field.values()(ns - 1, j) = problem.b_R;
    }
    SolveReport report = make_solve_report(field, {}, 0, config);
    return {std::move(field), std::move(report)};
  }

  RadialWork work(grid);
  std::vector<double> hist;

  Eigen::VectorXd v;
  REval ev;
  bool have_v = false;
  if (init != nullptr) {
    if (init->grid().ns() != ns)
      throw std::invalid_argument("solve_radial: init field has a different ns");
    v.resize(ns);
    for (int i = 0; i < ns; ++i) v(i) = init->value(i, 0);
    v(0) = -1.0;
    v(ns - 1) = problem.b_R;
    ev = eval_radial(work, v);
    have_v = ev.margin >= -config.admissibility_tol;
  }
  if (!have_v) {
    const double cmid = std::sqrt(problem.C0 * problem.C1);
    for (double wblend : {0.0, 0.3, 0.6, 0.9}) {
      const double C =
          std::pow(cmid, 1.0 - wblend) * std::pow(problem.C1, wblend);
      const Eigen::VectorXd full = barrier_guess(grid, C);
      v.resize(ns);
      for (int i = 0; i < ns; ++i) v(i) = full(grid.idx(i, 0));
      ev = eval_radial(work, v);
      if (ev.margin >= -config.admissibility_tol) {
        have_v = true;
        break;
      }
    }
  }
  if (!have_v) {
    throw SolveFailure(
        "solve_radial: no admissible initial guess; the barrier blend left "
        "the cone for every re-blend weight",
        {});
  }

  Eigen::SparseMatrix<double> A(ns, ns);
  Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu;
  std::vector<Eigen::Triplet<double>> trips;
  bool analyzed = false;
  int iters = 0;

  for (int iter = 0;; ++iter) {
    hist.push_back(ev.res_inf);
    const double scale = std::pow(std::max(1.0, ev.max_lam), problem.k);
    if (ev.res_inf <= config.tol_res_factor * scale &&
        ev.margin >= -config.admissibility_tol) {
      iters = iter;
      break;
    }
    if (iter >= config.max_newton) {
      std::ostringstream os;
      os << "solve_radial: Newton did not converge within " << config.max_newton
         << " iterations (residual " << ev.res_inf << ")";
      throw SolveFailure(os.str(), hist);
    }
    assemble_radial(work, v, trips);
    A.setFromTriplets(trips.begin(), trips.end());
    if (!analyzed) {
      lu.analyzePattern(A);
      analyzed = true;
    }
    lu.factorize(A);
    if (lu.info() != Eigen::Success) {
      throw SolveFailure(
          "solve_radial: Jacobian factorization failed; increase ns or take "
          "a gentler eps schedule",
          hist);
    }
    const Eigen::VectorXd d = lu.solve(-ev.F);
    bool accepted = false;
    double t = 1.0;
    for (int h = 0; h <= config.max_halvings; ++h) {
      const Eigen::VectorXd vt = v + t * d;
      REval evt = eval_radial(work, vt);
      const double scale_t = std::pow(std::max(1.0, evt.max_lam), problem.k);
      const bool ok_margin = evt.margin >= -config.admissibility_tol;
      const bool decreased = evt.res_inf <= (1.0 - 0.25 * t) * ev.res_inf;
      const bool at_floor = evt.res_inf <= config.tol_res_factor * scale_t;
      if (ok_margin && (decreased || at_floor)) {
        v = vt;
        ev = std::move(evt);
        accepted = true;
        break;
      }
      t *= 0.5;
    }
    if (!accepted) {
      std::ostringstream os;
      os << "solve_radial: line search exhausted " << config.max_halvings
         << " halvings without an admissible decreasing step (residual "
         << ev.res_inf << ")";
      throw SolveFailure(os.str(), hist);
    }
  }

  SolutionField field(grid);
  broadcast_profile(v, field);
  SolveReport report = make_solve_report(field, std::move(hist), iters, config);
  return {std::move(field), std::move(report)};
}

}  // namespace detail

std::pair<SolutionField, SolveReport> solve_radial(int n, int k, double rho0,
                                                   double R, double eps, int ns,
                                                   double delta, int ntheta,
                                                   double grading,
                                                   const SolverConfig& config) {
  if (ns < 256) {
    throw std::invalid_argument(
        "solve_radial: ns must be at least 256 to resolve the boundary "
        "layer at 4th order");
  }
  if (!(rho0 > 0.0)) {
    throw std::invalid_argument("solve_radial: rho0 must be positive");
  }
  RadialSurface ball(n, {rho0});
  const ApproxProblem problem = make_approx_problem(ball, k, R, eps, delta);
  AnnulusGrid grid(problem, ns, ntheta, grading);
  return detail::solve_radial_impl(problem, grid, config, nullptr);
}

}  // namespace khx
