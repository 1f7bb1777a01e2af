#include "khx/minkowski.hpp"

#include "khx/barriers.hpp"
#include "khx/symfun.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace khx {

namespace {

constexpr double kPi = std::numbers::pi;

/// beta >= (n-2k)/(n-k): below this the weight grows too fast along the
/// decaying tail and the limit functional diverges.
void check_beta(int n, int k, double beta) {
  const double threshold =
      static_cast<double>(n - 2 * k) / static_cast<double>(n - k);
  if (beta < threshold - 1e-12) {
    std::ostringstream os;
    os << "beta = " << beta << " violates the hypothesis beta >= (n-2k)/(n-k) "
       << "= " << threshold << " for n = " << n << ", k = " << k;
    throw std::domain_error(os.str());
  }
}

/// Composite Simpson weights on nnodes uniform nodes (spacing h); an odd
/// interval count closes with the 3/8 rule on the last three intervals.
Eigen::VectorXd simpson_weights(int nnodes, double h) {
  const int N = nnodes - 1;
  if (N < 3) throw std::invalid_argument("simpson_weights: need >= 4 nodes");
  Eigen::VectorXd w = Eigen::VectorXd::Zero(nnodes);
  const int neven = (N % 2 == 0) ? N : N - 3;
  if (neven > 0) {
    w(0) += h / 3.0;
    w(neven) += h / 3.0;
    for (int m = 1; m < neven; ++m)
      w(m) += (m % 2 == 1) ? 4.0 * h / 3.0 : 2.0 * h / 3.0;
  }
  if (N % 2 == 1) {
    w(neven) += 3.0 * h / 8.0;
    w(neven + 1) += 9.0 * h / 8.0;
    w(neven + 2) += 9.0 * h / 8.0;
    w(neven + 3) += 3.0 * h / 8.0;
  }
  return w;
}

Eigen::VectorXd trapezoid_weights(int nnodes, double h) {
  Eigen::VectorXd w = Eigen::VectorXd::Constant(nnodes, h);
  w(0) = 0.5 * h;
  w(nnodes - 1) = 0.5 * h;
  return w;
}

/// Level-point data from interpolated physical derivatives at (r, theta_j).
LevelPoint make_point(const ApproxProblem& pb, double theta, bool pole,
                      double r, const SolutionField::Derivs& d) {
  const int n = pb.n, k = pb.k;
  LevelPoint pt;
  pt.theta = theta;
  pt.r = r;
  const double b11 = d.urr;
  const double b12 = d.urtheta / r - d.utheta / (r * r);
  const double b22 = d.uthetatheta / (r * r) + d.ur / r;
  const double laz =
      pole ? b22
           : d.ur / r + (std::cos(theta) / std::sin(theta)) * d.utheta / (r * r);
  const double vr = d.ur;
  const double vt = d.utheta / r;
  const double grad = std::hypot(vr, vt);
  pt.grad = grad;
  pt.drdtheta = (d.ur != 0.0) ? -d.utheta / d.ur : 0.0;
  if (grad <= 0.0) return pt;  // degenerate point: zero contributions

  // meridian eigenpairs of B = [[b11, b12], [b12, b22]]
  const double mean = 0.5 * (b11 + b22);
  const double disc = std::hypot(0.5 * (b11 - b22), b12);
  const double lm = mean - disc, lp = mean + disc;
  double qm[2], qp[2];
  if (disc <= 1e-300) {
    qm[0] = 1.0; qm[1] = 0.0;
    qp[0] = 0.0; qp[1] = 1.0;
  } else {
    // eigenvector rows of (B - lambda I): pick the better-conditioned one
    auto evec = [&](double lam, double* q) {
      const double ax = b12, ay = lam - b11;       // from row 1
      const double bx = lam - b22, by = b12;       // from row 2
      if (ax * ax + ay * ay >= bx * bx + by * by) {
        const double s = std::hypot(ax, ay);
        q[0] = ax / s; q[1] = ay / s;
      } else {
        const double s = std::hypot(bx, by);
        q[0] = bx / s; q[1] = by / s;
      }
    };
    evec(lm, qm);
    evec(lp, qp);
  }

  Eigen::VectorXd lam(n);
  lam(0) = lm;
  lam(1) = lp;
  for (int a = 2; a < n; ++a) lam(a) = laz;
  const double sm = elem_sym_omit(lam, k - 1, {0});
  const double sp = elem_sym_omit(lam, k - 1, {1});
  const double prm = qm[0] * vr + qm[1] * vt;
  const double prp = qp[0] * vr + qp[1] * vt;
  pt.newton_quad = sm * prm * prm + sp * prp * prp;

  // level-set curvatures: in-plane tangent t = (-vt, vr)/grad
  const double t0 = -vt / grad, t1 = vr / grad;
  const double km =
      (t0 * (b11 * t0 + b12 * t1) + t1 * (b12 * t0 + b22 * t1)) / grad;
  Eigen::VectorXd kappa(n - 1);
  kappa(0) = km;
  for (int a = 1; a < n - 1; ++a) kappa(a) = laz / grad;
  pt.sigma_level = elem_sym(kappa, k - 1);
  return pt;
}

/// Cubic Lagrange basis at x over 4 nodes.
void lagrange4(const double xs[4], double x, double w[4]) {
  for (int a = 0; a < 4; ++a) {
    double acc = 1.0;
    for (int b = 0; b < 4; ++b) {
      if (a == b) continue;
      acc *= (x - xs[b]) / (xs[a] - xs[b]);
    }
    w[a] = acc;
  }
}

}  // namespace

LevelSet extract_level_set(const SolutionField& field, double level) {
  const AnnulusGrid& grid = field.grid();
  const ApproxProblem& pb = grid.problem();
  const int ns = grid.ns(), nt = grid.ntheta();
  if (!(level >= -1.0 && level < 0.0)) {
    throw std::invalid_argument(
        "extract_level_set: the level must lie in [-1, 0)");
  }
  LevelSet ls;
  ls.level = level;
  ls.points.resize(nt);

  if (level <= -1.0 + 1e-12) {
    ls.at_boundary = true;
    for (int j = 0; j < nt; ++j) {
      const auto d = field.reconstruct(0, j);
      ls.points[j] = make_point(pb, grid.theta(j), j == 0 || j == nt - 1,
                                grid.r(0, j), d);
    }
  } else {
    for (int j = 0; j < nt; ++j) {
      int cross = -1, count = 0;
      for (int i = 0; i + 1 < ns; ++i) {
        if (field.value(i, j) - level <= 0.0 &&
            field.value(i + 1, j) - level > 0.0) {
          ++count;
          cross = i;
        }
      }
      if (count == 0) {
        std::ostringstream os;
        os << "extract_level_set: level u = " << level
           << " not found on column theta = " << grid.theta(j)
           << "; the level set touches the outer boundary: shrink the tau "
              "range or increase R";
        throw std::domain_error(os.str());
      }
      if (count > 1) {
        std::ostringstream os;
        os << "extract_level_set: level u = " << level
           << " crosses the column theta = " << grid.theta(j) << " " << count
           << " times; the level set is not a radial graph";
        throw IrregularLevel(os.str());
      }
      if (cross > ns - 5) {
        std::ostringstream os;
        os << "extract_level_set: level u = " << level
           << " sits in the last grid cells at theta = " << grid.theta(j)
           << "; the level set touches the outer boundary: shrink the tau "
              "range or increase R";
        throw std::domain_error(os.str());
      }
      const int base = std::max(0, std::min(cross - 1, ns - 4));
      double lx[4], uy[4], w[4];
      for (int a = 0; a < 4; ++a) {
        lx[a] = std::log(grid.r(base + a, j));
        uy[a] = field.value(base + a, j);
      }
      const auto interp_u = [&](double l) {
        lagrange4(lx, l, w);
        return w[0] * uy[0] + w[1] * uy[1] + w[2] * uy[2] + w[3] * uy[3];
      };
      double la = std::log(grid.r(cross, j));
      double lb = std::log(grid.r(cross + 1, j));
      // bisection on the interpolant; endpoint signs are inherited from the
      // nodal values because the interpolant matches them exactly
      for (int it = 0; it < 60; ++it) {
        const double lmid = 0.5 * (la + lb);
        if (interp_u(lmid) - level <= 0.0) {
          la = lmid;
        } else {
          lb = lmid;
        }
      }
      const double lstar = 0.5 * (la + lb);
      const double rstar = std::exp(lstar);
      // interpolate the reconstructed derivatives with the same basis
      lagrange4(lx, lstar, w);
      SolutionField::Derivs d;
      for (int a = 0; a < 4; ++a) {
        const auto da = field.reconstruct(base + a, j);
        d.u += w[a] * da.u;
        d.ur += w[a] * da.ur;
        d.utheta += w[a] * da.utheta;
        d.urr += w[a] * da.urr;
        d.urtheta += w[a] * da.urtheta;
        d.uthetatheta += w[a] * da.uthetatheta;
      }
      ls.points[j] = make_point(pb, grid.theta(j), j == 0 || j == nt - 1,
                                rstar, d);
    }
  }

  double gmin = std::numeric_limits<double>::infinity(), gmax = 0.0;
  for (const LevelPoint& pt : ls.points) {
    gmin = std::min(gmin, pt.grad);
    gmax = std::max(gmax, pt.grad);
  }
  ls.min_grad = gmin;
  ls.max_grad = gmax;
  ls.regular = gmin >= 1e-3 * gmax;
  return ls;
}

PhiValue phi_of_tau(const SolutionField& field, double tau, double beta) {
  const ApproxProblem& pb = field.grid().problem();
  const int n = pb.n, k = pb.k, nt = field.grid().ntheta();
  check_beta(n, k, beta);
  if (!(tau <= -1.0)) {
    throw std::invalid_argument(
        "phi_of_tau: tau must be <= -1 so the level 1/tau lies in [-1, 0)");
  }
  const double level = 1.0 / tau;
  const LevelSet ls = extract_level_set(field, level);

  const double l = static_cast<double>(n - k) / static_cast<double>(n - 2 * k);
  const double denom = std::pow(-level, l * beta);
  const double shell = sphere_area(n - 1);
  const double ht = field.grid().htheta();

  Eigen::VectorXd fa(nt), fb(nt);
  for (int j = 0; j < nt; ++j) {
    const LevelPoint& pt = ls.points[j];
    if (pt.grad <= 0.0) {
      fa(j) = fb(j) = 0.0;
      continue;
    }
    const double area = shell *
                        std::pow(pt.r * std::sin(pt.theta), n - 2) *
                        std::hypot(pt.drdtheta, pt.r);
    const double weight = std::pow(pt.grad, beta) / denom;
    fa(j) = pt.newton_quad / pt.grad * weight * area;
    fb(j) = std::pow(pt.grad, k + 1) * pt.sigma_level / pt.grad * weight * area;
  }
  const Eigen::VectorXd ws = simpson_weights(nt, ht);
  const Eigen::VectorXd wt = trapezoid_weights(nt, ht);

  PhiValue out;
  out.tau = tau;
  out.level = level;
  out.phi = ws.dot(fa);
  out.phi_alt = ws.dot(fb);
  out.quad_err = std::abs(out.phi - wt.dot(fa));
  out.routes_agree =
      std::abs(out.phi_alt - out.phi) <= 0.01 * std::max(std::abs(out.phi), 1e-300);
  out.regular = ls.regular;
  out.min_grad = ls.min_grad;
  return out;
}

PhiSeries phi_series(const SolutionField& field, double beta,
                     std::vector<double> taus) {
  const ApproxProblem& pb = field.grid().problem();
  const int n = pb.n, k = pb.k;
  check_beta(n, k, beta);
  const double a0 = pb.alpha0();

  PhiSeries out;
  if (taus.empty()) {
    const AnnulusGrid& grid = field.grid();
    double u_margin = -std::numeric_limits<double>::infinity();
    for (int j = 0; j < grid.ntheta(); ++j)
      u_margin = std::max(u_margin, field.value(grid.ns() - 4, j));
    double u_hi = std::min(-0.05, 1.02 * u_margin);
    if (u_hi < -0.05) {
      out.clamped = true;
      std::ostringstream os;
      os << "default tau range clamped: outermost usable level u = " << u_hi
         << " (the grid ends before u reaches -0.05)";
      out.notes.push_back(os.str());
    }
    if (u_hi <= -1.0) {
      throw std::domain_error(
          "phi_series: no level in [-1, 0) clears the outer quadrature "
          "margin; increase R or ns");
    }
    const int count = 20;
    for (int m = count - 1; m >= 0; --m) {
      const double lg = std::log(-u_hi) * static_cast<double>(m) /
                        static_cast<double>(count - 1);
      taus.push_back(1.0 / (-std::exp(lg)));
    }
  }
  std::sort(taus.begin(), taus.end());

  for (double tau : taus) {
    try {
      out.rows.push_back(phi_of_tau(field, tau, beta));
    } catch (const IrregularLevel& e) {
      std::ostringstream os;
      os << "tau = " << tau << " skipped: " << e.what();
      out.notes.push_back(os.str());
    } catch (const std::domain_error& e) {
      std::ostringstream os;
      os << "tau = " << tau << " skipped: " << e.what();
      out.notes.push_back(os.str());
    }
  }

  std::optional<double> gamma;
  if (field.gamma_override) {
    gamma = *field.gamma_override;
  } else {
    try {
      gamma = asymptotics_report(field).gamma;
    } catch (const std::domain_error&) {
      gamma.reset();
    }
  }
  if (gamma) {
    out.phi_infinity = sphere_area(n) * binomial(n - 1, k - 1) *
                       std::pow(a0, k + beta) *
                       std::pow(*gamma, k - beta / a0);
  }

  if (out.rows.size() >= 2) {
    std::vector<double> mags;
    mags.reserve(out.rows.size());
    for (const PhiValue& r : out.rows) mags.push_back(std::abs(r.phi));
    std::sort(mags.begin(), mags.end());
    const double median = mags[mags.size() / 2];
    out.mono_tol = 1e-3 * median;
    out.monotone = true;
    for (std::size_t i = 0; i + 1 < out.rows.size(); ++i) {
      if (out.rows[i + 1].phi < out.rows[i].phi - out.mono_tol) {
        out.monotone = false;
        break;
      }
    }
  } else {
    out.monotone = true;
  }
  return out;
}

MinkowskiReport minkowski_report(const SolutionField& field,
                                 const RadialSurface& surface, double beta) {
  const AnnulusGrid& grid = field.grid();
  const ApproxProblem& pb = grid.problem();
  const int n = pb.n, k = pb.k, nt = grid.ntheta();
  check_beta(n, k, beta);
  if (surface.ambient_dim() != n) {
    throw std::invalid_argument(
        "minkowski_report: surface dimension does not match the field");
  }
  const auto& fc = pb.surface.coeffs();
  const auto& sc = surface.coeffs();
  bool same = fc.size() == sc.size();
  for (std::size_t m = 0; same && m < fc.size(); ++m) {
    same = std::abs(fc[m] - sc[m]) <= 1e-12 * std::max(1.0, std::abs(fc[m]));
  }
  if (!same) {
    throw std::invalid_argument(
        "minkowski_report: surface does not match the domain the field was "
        "solved on");
  }

  const double a0 = pb.alpha0();
  const double shell = sphere_area(n - 1);
  const Eigen::VectorXd ws = simpson_weights(nt, grid.htheta());
  double lhs = 0.0;
  for (int j = 0; j < nt; ++j) {
    const double theta = grid.theta(j);
    const double g = field.boundary_gradient_override
                         ? (*field.boundary_gradient_override)(j)
                         : field.gradient_norm(0, j);
    const auto bd = boundary_curvature(surface, std::min(theta, kPi), k);
    const double area = shell *
                        std::pow(bd.rho * std::sin(std::min(theta, kPi)), n - 2) *
                        std::hypot(surface.drho(theta), bd.rho);
    lhs += ws(j) * std::pow(g, k + beta) * bd.sigma_km1 * area;
  }

  MinkowskiReport rep;
  rep.beta = beta;
  rep.l_exponent = static_cast<double>(n - k) / static_cast<double>(n - 2 * k);
  rep.gamma_exponent = k - beta / a0;
  double rhs = sphere_area(n) * binomial(n - 1, k - 1) * std::pow(a0, k + beta);
  if (std::abs(rep.gamma_exponent) >= 1e-14) {
    const double gamma =
        field.gamma_override ? *field.gamma_override
                             : asymptotics_report(field).gamma;
    rep.gamma_used = gamma;
    rhs *= std::pow(gamma, rep.gamma_exponent);
  }
  rep.lhs = lhs;
  rep.rhs = rhs;
  rep.ratio = lhs / rhs;
  rep.equality = std::abs(rep.ratio - 1.0) <= 1.5e-2;
  return rep;
}

}  // namespace khx
