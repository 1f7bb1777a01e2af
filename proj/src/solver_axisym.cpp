#include "solver_detail.hpp"

#include "khx/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace khx {
namespace detail {

SkEval sk_blocks(double b11, double b22, double b12, double laz, int n,
                 int k) {
  const double s1 = b11 + b22;
  const double s2 = b11 * b22 - b12 * b12;
  const double c0 = binomial(n - 2, k);
  const double c1 = binomial(n - 2, k - 1);
  const double c2 = binomial(n - 2, k - 2);
  SkEval e;
  e.value = c0 * ipow(laz, k) + s1 * c1 * ipow(laz, k - 1) +
            s2 * c2 * ipow(laz, k - 2);
  e.d11 = c1 * ipow(laz, k - 1) + b22 * c2 * ipow(laz, k - 2);
  e.d22 = c1 * ipow(laz, k - 1) + b11 * c2 * ipow(laz, k - 2);
  e.d12 = -2.0 * b12 * c2 * ipow(laz, k - 2);
  e.dlaz = k * c0 * ipow(laz, k - 1) +
           (k - 1) * s1 * c1 * ipow(laz, k - 2) +
           (k - 2) * s2 * c2 * ipow(laz, k - 3);
  return e;
}

Eigen::VectorXd spectrum_from_blocks(double b11, double b22, double b12,
                                     double laz, int n) {
  Eigen::VectorXd lam(n);
  const double mean = 0.5 * (b11 + b22);
  const double disc = std::hypot(0.5 * (b11 - b22), b12);
  lam(0) = mean - disc;
  lam(1) = mean + disc;
  for (int i = 2; i < n; ++i) lam(i) = laz;
  return lam;
}

double node_margin(const Eigen::VectorXd& lambda, int k) {
  const double s = std::max(1.0, lambda.cwiseAbs().maxCoeff());
  double worst = std::numeric_limits<double>::infinity();
  double scale_m = 1.0;
  for (int m = 1; m <= k; ++m) {
    scale_m *= s;
    worst = std::min(worst, elem_sym(lambda, m) / scale_m);
  }
  return worst;
}

Eigen::VectorXd barrier_guess(const AnnulusGrid& grid, double C) {
  const ApproxProblem& pb = grid.problem();
  const double a0 = pb.alpha0();
  const int ns = grid.ns(), nt = grid.ntheta();
  Eigen::VectorXd u(grid.size());
  for (int j = 0; j < nt; ++j) {
    const double phi0 = -C * std::pow(grid.r(0, j) + pb.eps, -a0);
    const double phi1 = -C * std::pow(grid.r(ns - 1, j) + pb.eps, -a0);
    const double beta = (pb.b_R + 1.0) / (phi1 - phi0);
    const double alpha = -1.0 - beta * phi0;
    for (int i = 0; i < ns; ++i) {
      u(grid.idx(i, j)) =
          alpha + beta * (-C * std::pow(grid.r(i, j) + pb.eps, -a0));
    }
    u(grid.idx(0, j)) = -1.0;
    u(grid.idx(ns - 1, j)) = pb.b_R;
  }
  return u;
}

/// Fallback initial iterate: the certified subsolution shape g^N - 2
/// (g = r/rho(theta)) fitted per column to the boundary data,
///   u(i,j) = -1 + (b_R + 1) (g^N - 1) / (g_R^N - 1),  g_R = R/rho(theta).
/// Unlike the barrier blend, this profile concentrates its variation at the
/// outer rim, so the angular curvature of a non-spherical boundary perturbs
/// its Hessian by a factor (rho/R)^N instead of O(1), and its cone margin
/// is O(1) rather than O(f_eps). The ratio is evaluated in log form so it
/// stays finite for any exponent N.
Eigen::VectorXd subsolution_guess(const AnnulusGrid& grid, int N) {
  const ApproxProblem& pb = grid.problem();
  const int ns = grid.ns(), nt = grid.ntheta();
  Eigen::VectorXd u(grid.size());
  for (int j = 0; j < nt; ++j) {
    const double rho = pb.surface.rho(grid.theta(j));
    const double lgR = std::log(pb.R / rho);
    for (int i = 0; i < ns; ++i) {
      const double lg = std::log(grid.r(i, j) / rho);
      const double ratio = std::exp(N * (lg - lgR)) * std::expm1(-N * lg) /
                           std::expm1(-N * lgR);
      u(grid.idx(i, j)) = -1.0 + (pb.b_R + 1.0) * ratio;
    }
    u(grid.idx(0, j)) = -1.0;
    u(grid.idx(ns - 1, j)) = pb.b_R;
  }
  return u;
}

namespace {

/// Per-solve caches: stencils, folded theta columns, f_eps values, cot.
struct AxisymWork {
  const AnnulusGrid& grid;
  int n, k, ns, nt;
  std::vector<StencilRow> srows;                // per s-row
  Eigen::VectorXd w1t, w2t;                     // centered 5-point theta
  std::vector<std::array<int, 5>> cols;         // folded columns per j
  Eigen::MatrixXd fvals;                        // f_eps(r(i,j))
  Eigen::VectorXd cot;                          // cot(theta_j), poles unused

  explicit AxisymWork(const AnnulusGrid& g)
      : grid(g),
        n(g.problem().n),
        k(g.problem().k),
        ns(g.ns()),
        nt(g.ntheta()) {
    srows.reserve(ns);
    for (int i = 0; i < ns; ++i)
      srows.push_back(uniform_stencil_row(ns, g.hs(), i));
    const double ht = g.htheta();
    Eigen::VectorXd xs(5);
    for (int q = 0; q < 5; ++q) xs(q) = (q - 2) * ht;
    const Eigen::MatrixXd w = fd_weights(xs, 0.0, 2);
    w1t = w.col(1);
    w2t = w.col(2);
    cols.resize(nt);
    for (int j = 0; j < nt; ++j)
      for (int q = 0; q < 5; ++q) cols[j][q] = fold_index(j - 2 + q, nt);
    const ApproxProblem& pb = g.problem();
    fvals.resize(ns, nt);
    for (int i = 0; i < ns; ++i)
      for (int j = 0; j < nt; ++j)
        fvals(i, j) = f_eps(pb.n, pb.k, pb.eps, g.r(i, j));
    cot.resize(nt);
    for (int j = 0; j < nt; ++j)
      cot(j) = (j == 0 || j == nt - 1)
                   ? 0.0
                   : std::cos(g.theta(j)) / std::sin(g.theta(j));
  }
};

struct EvalOut {
  Eigen::VectorXd F;
  double res_inf = 0.0;
  double margin = std::numeric_limits<double>::infinity();
  double max_lam = 0.0;
};

struct NodeState {
  double us, uss, ut, ust, utt;
  double b11, b22, b12, laz;
  bool pole;
};

NodeState node_state(const AxisymWork& w, const Eigen::VectorXd& u, int i,
                     int j) {
  const StencilRow& sr = w.srows[i];
  NodeState st{};
  st.us = st.uss = 0.0;
  for (std::size_t m = 0; m < sr.nodes.size(); ++m) {
    const double v = u(w.grid.idx(sr.nodes[m], j));
    st.us += sr.w1(m) * v;
    st.uss += sr.w2(m) * v;
  }
  st.ut = st.ust = st.utt = 0.0;
  for (int q = 0; q < 5; ++q) {
    const int col = w.cols[j][q];
    st.ut += w.w1t(q) * u(w.grid.idx(i, col));
    st.utt += w.w2t(q) * u(w.grid.idx(i, col));
    double us_col = 0.0;
    for (std::size_t m = 0; m < sr.nodes.size(); ++m)
      us_col += sr.w1(m) * u(w.grid.idx(sr.nodes[m], col));
    st.ust += w.w1t(q) * us_col;
  }
  const auto ph = w.grid.to_physical(i, j, st.us, st.uss, st.ut, st.ust,
                                     st.utt);
  const double r = w.grid.r(i, j);
  st.b11 = ph.urr;
  st.b12 = ph.urtheta / r - ph.utheta / (r * r);
  st.b22 = ph.uthetatheta / (r * r) + ph.ur / r;
  st.pole = (j == 0 || j == w.nt - 1);
  st.laz = st.pole ? st.b22
                   : ph.ur / r + w.cot(j) * ph.utheta / (r * r);
  return st;
}

EvalOut eval_residual(const AxisymWork& w, const Eigen::VectorXd& u) {
  EvalOut out;
  out.F.setZero(w.grid.size());
  const ApproxProblem& pb = w.grid.problem();
  for (int j = 0; j < w.nt; ++j) {
    out.F(w.grid.idx(0, j)) = u(w.grid.idx(0, j)) + 1.0;
    out.F(w.grid.idx(w.ns - 1, j)) = u(w.grid.idx(w.ns - 1, j)) - pb.b_R;
  }
  for (int i = 1; i < w.ns - 1; ++i) {
    for (int j = 0; j < w.nt; ++j) {
      const NodeState st = node_state(w, u, i, j);
      const SkEval sk = sk_blocks(st.b11, st.b22, st.b12, st.laz, w.n, w.k);
      out.F(w.grid.idx(i, j)) = sk.value - w.fvals(i, j);
      const Eigen::VectorXd lam =
          spectrum_from_blocks(st.b11, st.b22, st.b12, st.laz, w.n);
      out.margin = std::min(out.margin, node_margin(lam, w.k));
      out.max_lam = std::max(out.max_lam, lam.cwiseAbs().maxCoeff());
    }
  }
  out.res_inf = out.F.cwiseAbs().maxCoeff();
  return out;
}

void assemble_jacobian(const AxisymWork& w, const Eigen::VectorXd& u,
                       std::vector<Eigen::Triplet<double>>& trips) {
  trips.clear();
  for (int j = 0; j < w.nt; ++j) {
    trips.emplace_back(w.grid.idx(0, j), w.grid.idx(0, j), 1.0);
    trips.emplace_back(w.grid.idx(w.ns - 1, j), w.grid.idx(w.ns - 1, j), 1.0);
  }
  for (int i = 1; i < w.ns - 1; ++i) {
    const StencilRow& sr = w.srows[i];
    const int rows = static_cast<int>(sr.nodes.size());
    for (int j = 0; j < w.nt; ++j) {
      const NodeState st = node_state(w, u, i, j);
      const SkEval sk = sk_blocks(st.b11, st.b22, st.b12, st.laz, w.n, w.k);
      const auto ch = w.grid.chain(i, j);
      const double r = ch.r, p = ch.p, c = ch.c;
      const double rp = r * p;
      const double r2p2 = rp * rp;
      const double sfac = p + ch.ps / p;
      const double r2cp = r * r * c * p;
      const double rcp_pt = r * (c * p + ch.ptheta);
      const double two_rc = 2.0 * r * c;
      const double r2c2 = r * r * c * c;
      const double rc2_ct = r * (c * c + ch.ctheta);
      const int row = w.grid.idx(i, j);
      for (int m = 0; m < rows; ++m) {
        const double w1s = sr.w1(m), w2s = sr.w2(m);
        const bool on_i = (sr.nodes[m] == i);
        for (int q = 0; q < 5; ++q) {
          const bool on_j = (q == 2);
          const double cus = on_j ? w1s : 0.0;
          const double cuss = on_j ? w2s : 0.0;
          const double cut = on_i ? w.w1t(q) : 0.0;
          const double cutt = on_i ? w.w2t(q) : 0.0;
          const double cust = w1s * w.w1t(q);
          // chain rule, same order as AnnulusGrid::to_physical
          const double cur = cus / rp;
          const double curr = (cuss - cus * sfac) / r2p2;
          const double curt = (cust - curr * r2cp - cur * rcp_pt) / rp;
          const double cut2 = cut - (c / p) * cus;
          const double cutt2 =
              cutt - curt * two_rc - curr * r2c2 - cur * rc2_ct;
          const double cb11 = curr;
          const double cb12 = curt / r - cut2 / (r * r);
          const double cb22 = cutt2 / (r * r) + cur / r;
          double d = sk.d11 * cb11 + sk.d22 * cb22 + sk.d12 * cb12;
          if (st.pole) {
            d += sk.dlaz * cb22;
          } else {
            d += sk.dlaz * (cur / r + w.cot(j) * cut2 / (r * r));
          }
          trips.emplace_back(row, w.grid.idx(sr.nodes[m], w.cols[j][q]), d);
        }
      }
    }
  }
}

}  // namespace

}  // namespace detail

std::pair<SolutionField, SolveReport> solve_axisym(const ApproxProblem& problem,
                                                   const AnnulusGrid& grid,
                                                   const SolverConfig& config,
                                                   const SolutionField* init) {
  const ApproxProblem& gp = grid.problem();
  const auto close = [](double a, double b) {
    return std::abs(a - b) <= 1e-12 * std::max({1.0, std::abs(a), std::abs(b)});
  };
  if (problem.n != gp.n || problem.k != gp.k || !close(problem.R, gp.R) ||
      !close(problem.eps, gp.eps) || !close(problem.C0, gp.C0) ||
      !close(problem.C1, gp.C1)) {
    throw std::invalid_argument(
        "solve_axisym: problem does not match the problem the grid was built "
        "from");
  }
  if (problem.eps <= 0.0) {
    throw std::invalid_argument(
        "solve_axisym: eps must be positive; the degenerate equation is "
        "approached through a continuation schedule, never solved directly");
  }
  const auto cert = check_admissible_domain(problem.surface, problem.k);
  if (!cert.pass) {
    throw std::domain_error("solve_axisym: domain rejected: " + cert.message);
  }

  detail::AxisymWork work(grid);
  const int size = grid.size();
  std::vector<double> hist;

  // Initial guess: warm start when provided (boundary rows reset), else the
  // barrier blend with C_mid = sqrt(C0 C1) re-blended toward C1 until the
  // cone guard accepts it.
  Eigen::VectorXd u;
  detail::EvalOut ev;
  bool have_u = false;
  if (init != nullptr) {
    if (init->grid().ns() != grid.ns() || init->grid().ntheta() != grid.ntheta())
      throw std::invalid_argument("solve_axisym: init field lives on a different grid");
    u.resize(size);
    for (int i = 0; i < grid.ns(); ++i)
      for (int j = 0; j < grid.ntheta(); ++j)
        u(grid.idx(i, j)) = init->value(i, j);
    for (int j = 0; j < grid.ntheta(); ++j) {
      u(grid.idx(0, j)) = -1.0;
      u(grid.idx(grid.ns() - 1, j)) = problem.b_R;
    }
    ev = detail::eval_residual(work, u);
    // A warm start interpolated from a neighboring converged solve rides the
    // cone boundary, so interpolation noise leaves it slightly outside.
    // Accept it with a bounded slack; the line search only ever improves an
    // out-of-cone margin, so the slack heals instead of accumulating.
    have_u = ev.margin >= -std::max(config.admissibility_tol, 1e-3);
  }
  if (!have_u) {
    const double cmid = std::sqrt(problem.C0 * problem.C1);
    for (double wblend : {0.0, 0.3, 0.6, 0.9}) {
      const double C =
          std::pow(cmid, 1.0 - wblend) * std::pow(problem.C1, wblend);
      u = detail::barrier_guess(grid, C);
      ev = detail::eval_residual(work, u);
      if (ev.margin >= -config.admissibility_tol) {
        have_u = true;
        break;
      }
    }
  }
  if (!have_u) {
    // The barrier blend concentrates its variation at the inner rim, where
    // the angular curvature of a non-spherical boundary can push a meridian
    // block negative while the barrier's own margin is only O(f_eps). The
    // subsolution profile keeps an O(1) margin there and survives.
    const SubsolutionParams sub =
        select_subsolution_N(problem.surface, problem.k);
    u = detail::subsolution_guess(grid, sub.N);
    ev = detail::eval_residual(work, u);
    have_u = ev.margin >= -config.admissibility_tol;
  }
  if (!have_u) {
    throw SolveFailure(
        "solve_axisym: no admissible initial guess; the barrier blend left "
        "the cone for every re-blend weight and so did the subsolution "
        "profile",
        {});
  }

  Eigen::SparseMatrix<double> A(size, size);
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
      os << "solve_axisym: Newton did not converge within " << config.max_newton
         << " iterations (residual " << ev.res_inf << ", tolerance "
         << config.tol_res_factor * scale << ")";
      throw SolveFailure(os.str(), hist);
    }
    detail::assemble_jacobian(work, u, trips);
    A.setFromTriplets(trips.begin(), trips.end());
    if (!analyzed) {
      lu.analyzePattern(A);
      analyzed = true;
    }
    lu.factorize(A);
    if (lu.info() != Eigen::Success) {
      throw SolveFailure(
          "solve_axisym: Jacobian factorization failed; the grid is too "
          "coarse for this surface/eps: increase ns and ntheta or take a "
          "gentler eps schedule",
          hist);
    }
    const Eigen::VectorXd d = lu.solve(-ev.F);
    bool accepted = false;
    double t = 1.0;
    for (int h = 0; h <= config.max_halvings; ++h) {
      const Eigen::VectorXd ut = u + t * d;
      detail::EvalOut evt = detail::eval_residual(work, ut);
      const double scale_t = std::pow(std::max(1.0, evt.max_lam), problem.k);
      // Inside the closed cone (slack admissibility_tol), or at least no
      // further outside than the current iterate: a warm start that enters
      // slightly outside must be allowed to step back in.
      const bool ok_margin = evt.margin >= -config.admissibility_tol ||
                             evt.margin >= ev.margin;
      const bool decreased = evt.res_inf <= (1.0 - 0.25 * t) * ev.res_inf;
      const bool at_floor = evt.res_inf <= config.tol_res_factor * scale_t;
      if (ok_margin && (decreased || at_floor)) {
        u = ut;
        ev = std::move(evt);
        accepted = true;
        break;
      }
      t *= 0.5;
    }
    if (!accepted) {
      std::ostringstream os;
      os << "solve_axisym: line search exhausted " << config.max_halvings
         << " halvings without an admissible decreasing step (residual "
         << ev.res_inf << ")";
      throw SolveFailure(os.str(), hist);
    }
  }

  SolutionField field(grid);
  for (int i = 0; i < grid.ns(); ++i)
    for (int j = 0; j < grid.ntheta(); ++j)
      field.values()(i, j) = u(grid.idx(i, j));
  SolveReport report = detail::make_solve_report(field, std::move(hist), iters,
                                                 config);
  return {std::move(field), std::move(report)};
}

}  // namespace khx
