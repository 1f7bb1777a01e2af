#include "khx/verify.hpp"

#include "khx/barriers.hpp"
#include "khx/geometry.hpp"
#include "khx/sampling.hpp"
#include "khx/symfun.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace khx {
namespace {

const double kPiRef = std::acos(-1.0);

std::string d2s(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return std::string(buf);
}

std::string vec2s(const Eigen::VectorXd& v) {
  std::string s = "[";
  for (int i = 0; i < v.size(); ++i) {
    s += d2s(v[i]);
    if (i + 1 < v.size()) s += ", ";
  }
  s += "]";
  return s;
}

/// Running worst-margin tracker. offer() returns true when the sample is
/// the new worst, so callers build the (possibly expensive) description
/// string only then.
struct Tracker {
  double min_margin = std::numeric_limits<double>::infinity();
  std::string worst;
  int count = 0;
  bool offer(double m) {
    ++count;
    if (m < min_margin) {
      min_margin = m;
      return true;
    }
    return false;
  }
};

SuiteResult finish(const std::string& name, const Tracker& t, double tol) {
  SuiteResult r;
  r.name = name;
  r.samples = t.count;
  r.min_margin = t.count ? t.min_margin : 0.0;
  r.tol = tol;
  r.pass = t.count > 0 && r.min_margin >= -tol;
  if (!r.pass) r.failing_sample = t.count ? t.worst : "no samples evaluated";
  return r;
}

/// Reference S_k by explicit subset enumeration (n <= 12 only; the
/// production routine never does this).
double brute_elem_sym(const Spectrum& lambda, int k) {
  const int n = static_cast<int>(lambda.size());
  if (k == 0) return 1.0;
  if (k > n) return 0.0;
  std::vector<int> idx(k);
  std::iota(idx.begin(), idx.end(), 0);
  double sum = 0.0;
  while (true) {
    double p = 1.0;
    for (int i : idx) p *= lambda[i];
    sum += p;
    int j = k - 1;
    while (j >= 0 && idx[j] == n - k + j) --j;
    if (j < 0) break;
    ++idx[j];
    for (int m = j + 1; m < k; ++m) idx[m] = idx[m - 1] + 1;
  }
  return sum;
}

Spectrum random_spectrum(Rng& rng, int n) {
  Spectrum l(n);
  for (int i = 0; i < n; ++i) l[i] = rng.normal();
  return l;
}

Spectrum drop_entries(const Spectrum& l, const std::vector<int>& omit) {
  Spectrum out(l.size() - static_cast<int>(omit.size()));
  int w = 0;
  for (int i = 0; i < l.size(); ++i) {
    if (std::find(omit.begin(), omit.end(), i) == omit.end()) out[w++] = l[i];
  }
  return out;
}

// ---------------------------------------------------------------------------
// Finite-difference reference operators (Richardson-extrapolated central
// differences, truncation O(h^4)).

template <class F>
Eigen::MatrixXd fd_hessian_step(const F& f, const Eigen::VectorXd& x,
                                double h) {
  const int n = static_cast<int>(x.size());
  Eigen::MatrixXd H(n, n);
  const double f0 = f(x);
  Eigen::VectorXd y;
  for (int i = 0; i < n; ++i) {
    y = x;
    y[i] = x[i] + h;
    const double fp = f(y);
    y[i] = x[i] - h;
    const double fm = f(y);
    H(i, i) = (fp - 2.0 * f0 + fm) / (h * h);
    for (int j = i + 1; j < n; ++j) {
      y = x;
      y[i] = x[i] + h;
      y[j] = x[j] + h;
      const double fpp = f(y);
      y[j] = x[j] - h;
      const double fpm = f(y);
      y[i] = x[i] - h;
      const double fmm = f(y);
      y[j] = x[j] + h;
      const double fmp = f(y);
      H(i, j) = (fpp - fpm - fmp + fmm) / (4.0 * h * h);
      H(j, i) = H(i, j);
    }
  }
  return H;
}

template <class F>
Eigen::MatrixXd fd_hessian(const F& f, const Eigen::VectorXd& x, double h) {
  return (4.0 * fd_hessian_step(f, x, h / 2) - fd_hessian_step(f, x, h)) / 3.0;
}

template <class F>
Eigen::VectorXd fd_gradient_step(const F& f, const Eigen::VectorXd& x,
                                 double h) {
  const int n = static_cast<int>(x.size());
  Eigen::VectorXd g(n);
  Eigen::VectorXd y;
  for (int i = 0; i < n; ++i) {
    y = x;
    y[i] = x[i] + h;
    const double fp = f(y);
    y[i] = x[i] - h;
    const double fm = f(y);
    g[i] = (fp - fm) / (2.0 * h);
  }
  return g;
}

template <class F>
Eigen::VectorXd fd_gradient(const F& f, const Eigen::VectorXd& x, double h) {
  return (4.0 * fd_gradient_step(f, x, h / 2) - fd_gradient_step(f, x, h)) /
         3.0;
}

double max_abs(const Eigen::MatrixXd& M) {
  return M.cwiseAbs().maxCoeff();
}

/// Random point on the unit sphere of R^n.
Eigen::VectorXd random_direction(Rng& rng, int n) {
  Eigen::VectorXd u(n);
  double norm = 0.0;
  do {
    for (int i = 0; i < n; ++i) u[i] = rng.normal();
    norm = u.norm();
  } while (norm < 1e-8);
  return u / norm;
}

/// Orthonormal completion of u: columns 0..n-2 span the orthogonal
/// complement, column n-1 is u itself (Householder QR of u).
Eigen::MatrixXd tangent_frame(const Eigen::VectorXd& u) {
  const int n = static_cast<int>(u.size());
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(u);
  Eigen::MatrixXd Q = qr.householderQ();
  // Q.col(0) = +-u; move the normal to the last column and fix its sign.
  Eigen::MatrixXd F(n, n);
  F.leftCols(n - 1) = Q.rightCols(n - 1);
  F.col(n - 1) = (Q.col(0).dot(u) > 0 ? 1.0 : -1.0) * Q.col(0);
  return F;
}

// ---------------------------------------------------------------------------
// Suites. Each takes the seeded generator and the sample budget.

SuiteResult suite_elem_sym(Rng& rng, int samples) {
  Tracker t;
  for (int s = 0; s < samples; ++s) {
    const int n = 3 + static_cast<int>(rng.integer(6));  // 3..8
    const int k = static_cast<int>(rng.integer(n + 1));  // 0..n
    const Spectrum l = random_spectrum(rng, n);
    const double ref = brute_elem_sym(l, k);
    const double got = elem_sym(l, k);
    const double err = std::abs(got - ref) / std::max(1.0, std::abs(ref));
    if (t.offer(-err))
      t.worst = "n=" + std::to_string(n) + " k=" + std::to_string(k) +
                " lambda=" + vec2s(l);
  }
  return finish("elem-sym", t, 1e-12);
}

SuiteResult suite_expansion(Rng& rng, int samples) {
  Tracker t;
  for (int s = 0; s < samples; ++s) {
    const int n = 3 + static_cast<int>(rng.integer(6));
    const int k = 1 + static_cast<int>(rng.integer(n - 1));  // 1..n-1
    const int i = static_cast<int>(rng.integer(n));
    const Spectrum l = random_spectrum(rng, n);
    const double lhs = elem_sym(l, k);
    const double rhs =
        elem_sym_omit(l, k, {i}) + l[i] * elem_sym_omit(l, k - 1, {i});
    const double err = std::abs(lhs - rhs) / std::max(1.0, std::abs(lhs));
    if (t.offer(-err))
      t.worst = "n=" + std::to_string(n) + " k=" + std::to_string(k) +
                " i=" + std::to_string(i) + " lambda=" + vec2s(l);
  }
  return finish("expansion", t, 1e-12);
}

SuiteResult suite_omit(Rng& rng, int samples) {
  Tracker t;
  for (int s = 0; s < samples; ++s) {
    const int n = 3 + static_cast<int>(rng.integer(6));
    const int k = static_cast<int>(rng.integer(n - 1));  // 0..n-2
    const int i = static_cast<int>(rng.integer(n));
    int j = static_cast<int>(rng.integer(n - 1));
    if (j >= i) ++j;  // distinct second index
    const Spectrum l = random_spectrum(rng, n);
    const double one = elem_sym_omit(l, k, {i});
    const double one_ref = elem_sym(drop_entries(l, {i}), k);
    const double two = elem_sym_omit(l, k, {i, j});
    const double two_ref = elem_sym(drop_entries(l, {i, j}), k);
    const double err =
        std::max(std::abs(one - one_ref) / std::max(1.0, std::abs(one_ref)),
                 std::abs(two - two_ref) / std::max(1.0, std::abs(two_ref)));
    if (t.offer(-err))
      t.worst = "n=" + std::to_string(n) + " k=" + std::to_string(k) +
                " i=" + std::to_string(i) + " j=" + std::to_string(j) +
                " lambda=" + vec2s(l);
  }
  return finish("omit", t, 1e-12);
}

SuiteResult suite_euler(Rng& rng, int samples) {
  Tracker t;
  for (int s = 0; s < samples; ++s) {
    const int n = 3 + static_cast<int>(rng.integer(6));
    const int k = 1 + static_cast<int>(rng.integer(n));
    const Spectrum l = random_spectrum(rng, n);
    double lhs = 0.0;
    for (int i = 0; i < n; ++i) lhs += l[i] * elem_sym_omit(l, k - 1, {i});
    const double rhs = k * elem_sym(l, k);
    const double err = std::abs(lhs - rhs) / std::max(1.0, std::abs(rhs));
    if (t.offer(-err))
      t.worst = "n=" + std::to_string(n) + " k=" + std::to_string(k) +
                " lambda=" + vec2s(l);
  }
  return finish("euler", t, 1e-12);
}

SuiteResult suite_newton_frame(Rng& rng, int samples) {
  Tracker t;
  const int cap = std::min(samples, 1000);
  for (int s = 0; s < cap; ++s) {
    const int n = 3 + static_cast<int>(rng.integer(5));  // 3..7
    const int k = 1 + static_cast<int>(rng.integer(n));
    Eigen::MatrixXd G(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) G(i, j) = rng.normal();
    const SymMatrix A = SymMatrix::symmetrized(G);
    const SymMatrix T = newton_tensor(A, k);

    // Frame identity: T = Q diag(S_{k-1}(lambda|i)) Q^T in A's eigenbasis.
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A.mat());
    const Spectrum lam = es.eigenvalues();
    Eigen::VectorXd d(n);
    for (int i = 0; i < n; ++i) d[i] = elem_sym_omit(lam, k - 1, {i});
    const Eigen::MatrixXd M =
        es.eigenvectors() * d.asDiagonal() * es.eigenvectors().transpose();
    const double scale = std::max(1.0, d.cwiseAbs().maxCoeff());
    double err = max_abs(T.mat() - M) / scale;

    // Derivative characterization: T_ij = dS_k/dA_ij through an
    // independent finite difference of sigma_k (symmetric perturbation
    // E_ij + E_ji carries 2 T_ij off the diagonal).
    const double h = 1e-3 * std::max(1.0, max_abs(A.mat()));
    for (int i = 0; i < n; ++i) {
      for (int j = i; j < n; ++j) {
        auto dsigma = [&](double step) {
          Eigen::MatrixXd P = A.mat();
          P(i, j) += step;
          if (i != j) P(j, i) += step;
          const double fp = sigma_k_of_matrix(SymMatrix::from_matrix(P), k);
          P(i, j) -= 2.0 * step;
          if (i != j) P(j, i) -= 2.0 * step;
          const double fm = sigma_k_of_matrix(SymMatrix::from_matrix(P), k);
          return (fp - fm) / (2.0 * step);
        };
        const double fd = (4.0 * dsigma(h / 2) - dsigma(h)) / 3.0;
        const double expect = (i == j ? 1.0 : 2.0) * T(i, j);
        err = std::max(err, std::abs(fd - expect) / scale);
      }
    }
    if (t.offer(-err))
      t.worst = "n=" + std::to_string(n) + " k=" + std::to_string(k) +
                " eigs=" + vec2s(lam);
  }
  return finish("newton-frame", t, 1e-8);
}

SuiteResult suite_newton_div(Rng& rng, int samples) {
  Tracker t;
  const int per_pair = std::min(samples, 200);
  const int pairs[2][2] = {{5, 2}, {7, 3}};
  for (const auto& nk : pairs) {
    const int n = nk[0];
    const int k = nk[1];
    for (int s = 0; s < per_pair; ++s) {
      // u(x) = sum_t c_t (w_t . x + b_t)^6: degree high enough that the
      // centered differences of the Newton-tensor entries keep a genuine
      // h^2 truncation term.
      const int terms = 4;
      Eigen::MatrixXd W(terms, n);
      Eigen::VectorXd b(terms), c(terms);
      for (int q = 0; q < terms; ++q) {
        for (int i = 0; i < n; ++i) W(q, i) = rng.normal() / std::sqrt(n);
        b[q] = rng.normal();
        c[q] = (rng.integer(2) ? 1.0 : -1.0) * rng.uniform(0.5, 1.5);
      }
      auto hess = [&](const Eigen::VectorXd& x) {
        Eigen::MatrixXd H = Eigen::MatrixXd::Zero(n, n);
        for (int q = 0; q < terms; ++q) {
          const double z = W.row(q).dot(x) + b[q];
          const double w2 = 30.0 * c[q] * z * z * z * z;
          H += w2 * (W.row(q).transpose() * W.row(q));
        }
        return SymMatrix::symmetrized(H);
      };
      Eigen::VectorXd x0(n);
      for (int i = 0; i < n; ++i) x0[i] = rng.normal();

      const SymMatrix T0 = newton_tensor(hess(x0), k);
      const double tscale = std::max(1.0, max_abs(T0.mat()));
      auto div_err = [&](double h) {
        double worst = 0.0;
        // div_i = sum_j d_j T_ij, identically zero for Hessian arguments.
        Eigen::VectorXd div = Eigen::VectorXd::Zero(n);
        Eigen::VectorXd y;
        for (int j = 0; j < n; ++j) {
          y = x0;
          y[j] = x0[j] + h;
          const SymMatrix Tp = newton_tensor(hess(y), k);
          y[j] = x0[j] - h;
          const SymMatrix Tm = newton_tensor(hess(y), k);
          for (int i = 0; i < n; ++i)
            div[i] += (Tp(i, j) - Tm(i, j)) / (2.0 * h);
        }
        for (int i = 0; i < n; ++i) worst = std::max(worst, std::abs(div[i]));
        return worst;
      };
      const double h = 0.05;
      const double e1 = div_err(h);
      const double e2 = div_err(h / 2);
      double margin;
      if (e2 < 1e-10 * tscale) {
        // Both divergences at roundoff level: the identity holds exactly.
        margin = 0.2;
      } else {
        const double ratio = e1 / e2;
        margin = 0.2 - std::abs(ratio / 4.0 - 1.0);
      }
      if (t.offer(margin))
        t.worst = "n=" + std::to_string(n) + " k=" + std::to_string(k) +
                  " x0=" + vec2s(x0) + " e(h)=" + d2s(e1) +
                  " e(h/2)=" + d2s(e2);
    }
  }
  return finish("newton-div", t, 1e-12);
}

SuiteResult suite_cone(Rng& rng, int samples) {
  Tracker t;
  for (int s = 0; s < samples; ++s) {
    const int n = 3 + static_cast<int>(rng.integer(6));
    const int k = 1 + static_cast<int>(rng.integer(n));
    const bool biased = (s % 2) == 1;
    const Spectrum l = sample_gamma_k(rng, n, k, biased);
    double margin = std::numeric_limits<double>::infinity();
    const double top = std::max(1.0, l.cwiseAbs().maxCoeff());
    double scale = 1.0;
    for (int m = 1; m <= k; ++m) {
      scale *= top;
      margin = std::min(margin, elem_sym(l, m) / scale);
    }
    if (!in_gamma_k(l, k, false)) margin = -1.0;
    if (t.offer(margin))
      t.worst = "n=" + std::to_string(n) + " k=" + std::to_string(k) +
                (biased ? " biased" : "") + " lambda=" + vec2s(l);
  }
  return finish("cone", t, 1e-12);
}

SuiteResult suite_kato(Rng& rng, int samples) {
  Tracker t;
  const int pairs[4][2] = {{5, 2}, {6, 2}, {7, 2}, {3, 1}};
  for (const auto& nk : pairs) {
    const int n = nk[0];
    const int k = nk[1];
    for (int s = 0; s < samples; ++s) {
      const KatoConfig cfg = sample_kato(rng, n, k);
      const double gap = kato_gap(cfg);
      if (t.offer(gap))
        t.worst = "n=" + std::to_string(n) + " k=" + std::to_string(k) +
                  " lambda'=" + vec2s(cfg.lambda_prime) +
                  " mixed=" + vec2s(cfg.mixed) +
                  " u_nn=" + d2s(cfg.u_nn ? *cfg.u_nn : kato_unn(cfg));
    }
  }
  return finish("kato", t, 1e-10);
}

SuiteResult suite_kato_equality(Rng& rng, int samples) {
  Tracker t;
  const int pairs[4][2] = {{5, 2}, {6, 2}, {7, 2}, {3, 1}};
  for (int s = 0; s < samples; ++s) {
    const auto& nk = pairs[rng.integer(4)];
    const int n = nk[0];
    const int k = nk[1];
    const double alpha0 = static_cast<double>(n) / k - 2.0;
    const double C = rng.uniform(0.5, 2.0);
    const double r = rng.uniform(0.5, 3.0);
    // Radial solution -C r^{-alpha0}: gradient is radial, so the adapted
    // frame is (tangential..., radial); tangential eigenvalues C alpha0
    // r^{-alpha0-2}, corner u_nn is the radial second derivative.
    const double lt = C * alpha0 * std::pow(r, -alpha0 - 2.0);
    const double unn = -C * alpha0 * (alpha0 + 1.0) * std::pow(r, -alpha0 - 2.0);
    KatoConfig cfg;
    cfg.n = n;
    cfg.k = k;
    cfg.lambda_prime = Spectrum::Constant(n - 1, lt);
    cfg.mixed = Eigen::VectorXd::Zero(n - 1);
    const double scale = std::max(1.0, std::max(std::abs(unn), lt));
    const double resolved = kato_unn(cfg);
    double err = std::abs(resolved - unn) / scale;
    cfg.u_nn = unn;
    double gscale = 1.0;
    for (int m = 0; m < k + 1; ++m) gscale *= scale;
    err = std::max(err, std::abs(kato_gap(cfg)) / gscale);
    if (t.offer(-err))
      t.worst = "n=" + std::to_string(n) + " k=" + std::to_string(k) +
                " C=" + d2s(C) + " r=" + d2s(r);
  }
  return finish("kato-equality", t, 1e-12);
}

SuiteResult suite_maclaurin(Rng& rng, int samples) {
  Tracker t;
  for (int s = 0; s < samples; ++s) {
    const int len = 3 + static_cast<int>(rng.integer(5));  // lambda' length 3..7
    const int k = 2 + static_cast<int>(rng.integer(len - 2));  // 2..len-1
    const bool biased = (s % 2) == 1;
    const Spectrum lp = sample_gamma_k(rng, len, k - 1, biased);
    const MaclaurinGaps g = maclaurin_gaps(lp, k);
    double margin = g.gap9;
    for (double v : g.gap10) margin = std::min(margin, v);
    if (t.offer(margin))
      t.worst = "len=" + std::to_string(len) + " k=" + std::to_string(k) +
                " lambda'=" + vec2s(lp);
  }
  return finish("maclaurin", t, 1e-12);
}

SuiteResult suite_spherical_hessian(Rng& rng, int samples) {
  Tracker t;
  const int cap = std::min(samples, 2000);
  for (int s = 0; s < cap; ++s) {
    const int n = 3 + static_cast<int>(rng.integer(4));  // 3..6
    const double r = rng.uniform(0.5, 3.0);
    const double sc = rng.uniform(-0.5, 0.5);
    const double c0 = rng.normal();
    Eigen::VectorXd a(n);
    for (int i = 0; i < n; ++i) a[i] = rng.normal();
    Eigen::MatrixXd Qm(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) Qm(i, j) = rng.normal();
    const Eigen::MatrixXd Q = 0.5 * (Qm + Qm.transpose());
    const Eigen::VectorXd u0 = random_direction(rng, n);
    const Eigen::MatrixXd F = tangent_frame(u0);  // tangents, then u0

    // f(x) = exp(s |x|) (c0 + a.u + u^T Q u), u = x/|x|. Sphere-frame jet
    // at (u0, r): ambient Hessian of the angular factor is 2Q, its normal
    // derivative a.u0 + 2 u0^T Q u0 feeds the covariant correction.
    const double g = std::exp(sc * r);
    const double gp = sc * g;
    const double gpp = sc * sc * g;
    const double hval = c0 + a.dot(u0) + u0.dot(Q * u0);
    const double hnu = a.dot(u0) + 2.0 * u0.dot(Q * u0);
    SphereJet jet(n);
    jet.f = g * hval;
    jet.f_r = gp * hval;
    jet.f_rr = gpp * hval;
    for (int p = 0; p < n - 1; ++p) {
      const Eigen::VectorXd ea = F.col(p);
      const double ha = a.dot(ea) + 2.0 * u0.dot(Q * ea);
      jet.f_a[p] = g * ha;
      jet.f_ar[p] = gp * ha;
      for (int q = p; q < n - 1; ++q) {
        const Eigen::VectorXd eb = F.col(q);
        const double hab = 2.0 * ea.dot(Q * eb) - (p == q ? hnu : 0.0);
        jet.f_ab.set(p, q, g * hab);
      }
    }
    const SymMatrix H = spherical_hessian(jet, r);
    const Eigen::MatrixXd assembled = F * H.mat() * F.transpose();

    auto field = [&](const Eigen::VectorXd& x) {
      const double rr = x.norm();
      const Eigen::VectorXd u = x / rr;
      return std::exp(sc * rr) * (c0 + a.dot(u) + u.dot(Q * u));
    };
    const Eigen::VectorXd x0 = r * u0;
    const Eigen::MatrixXd Hfd = fd_hessian(field, x0, 5e-3 * std::max(1.0, r));
    const double scale = std::max(1.0, max_abs(assembled));
    const double err = max_abs(assembled - Hfd) / scale;
    if (t.offer(-err))
      t.worst = "n=" + std::to_string(n) + " r=" + d2s(r) + " s=" + d2s(sc) +
                " u0=" + vec2s(u0);
  }
  return finish("spherical-hessian", t, 1e-6);
}

SuiteResult suite_hessian_g(Rng& rng, int samples) {
  Tracker t;
  const int cap = std::min(samples, 2000);
  for (int s = 0; s < cap; ++s) {
    const int n = 3 + static_cast<int>(rng.integer(4));  // 3..6
    std::vector<double> coeffs{rng.uniform(0.8, 1.2), rng.uniform(-0.05, 0.05),
                               rng.uniform(-0.05, 0.05),
                               rng.uniform(-0.05, 0.05)};
    const RadialSurface surface(n, coeffs);
    const double theta = rng.uniform(0.1, kPiRef - 0.1);
    const double r = rng.uniform(0.5, 3.0);

    // Point in the e_1/e_n meridian plane; adapted frame columns are the
    // theta direction, the untouched azimuthal axes, then the radius.
    Eigen::VectorXd u0 = Eigen::VectorXd::Zero(n);
    u0[0] = std::sin(theta);
    u0[n - 1] = std::cos(theta);
    Eigen::MatrixXd F = Eigen::MatrixXd::Zero(n, n);
    F(0, 0) = std::cos(theta);
    F(n - 1, 0) = -std::sin(theta);
    for (int m = 1; m < n - 1; ++m) F(m, m) = 1.0;
    F.col(n - 1) = u0;

    const SymMatrix Hg = hessian_of_g(surface, theta, r);
    const Eigen::VectorXd Gg = gradient_of_g(surface, theta, r);
    const Eigen::MatrixXd assembled = F * Hg.mat() * F.transpose();
    const Eigen::VectorXd grad_assembled = F * Gg;

    auto gfun = [&](const Eigen::VectorXd& x) {
      const double rr = x.norm();
      double ct = x[n - 1] / rr;
      ct = std::min(1.0, std::max(-1.0, ct));
      return rr / surface.rho(std::acos(ct));
    };
    const Eigen::VectorXd x0 = r * u0;
    const double h = 5e-3 * std::max(1.0, r);
    const Eigen::MatrixXd Hfd = fd_hessian(gfun, x0, h);
    const Eigen::VectorXd Gfd = fd_gradient(gfun, x0, h);
    const double scale = std::max(1.0, max_abs(assembled));
    const double gscale = std::max(1.0, grad_assembled.cwiseAbs().maxCoeff());
    const double err =
        std::max(max_abs(assembled - Hfd) / scale,
                 (grad_assembled - Gfd).cwiseAbs().maxCoeff() / gscale);
    if (t.offer(-err))
      t.worst = "n=" + std::to_string(n) + " theta=" + d2s(theta) +
                " r=" + d2s(r) + " coeffs=[" + d2s(coeffs[0]) + ", " +
                d2s(coeffs[1]) + ", " + d2s(coeffs[2]) + ", " +
                d2s(coeffs[3]) + "]";
  }
  return finish("hessian-g", t, 1e-6);
}

SuiteResult suite_barrier_fd(Rng& rng, int samples) {
  Tracker t;
  const int cap = std::min(samples, 2000);
  for (int s = 0; s < cap; ++s) {
    const int n = 3 + static_cast<int>(rng.integer(7));  // 3..9
    const int kmax = (n - 1) / 2;
    const int k = 1 + static_cast<int>(rng.integer(kmax));
    const double eps = (s % 3 == 0) ? 0.0 : rng.uniform(1e-4, 9e-3);
    const double C = rng.uniform(0.5, 2.0);
    const double r = rng.uniform(0.5, 3.0);
    const BarrierFamily family(n, k, eps, C);
    const Eigen::VectorXd x0 = r * random_direction(rng, n);
    const BarrierPoint bp = phi_barrier(family, x0);

    auto phi = [&](const Eigen::VectorXd& x) { return family.value(x.norm()); };
    const double h = 5e-3 * r;
    const Eigen::MatrixXd Hfd = fd_hessian(phi, x0, h);
    const Eigen::VectorXd Gfd = fd_gradient(phi, x0, h);

    Spectrum got = bp.hess_eigs;
    std::sort(got.data(), got.data() + got.size());
    const Spectrum ref = [&] {  // FD spectrum, ascending
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Hfd);
      return Spectrum(es.eigenvalues());
    }();
    const double scale = std::max(1.0, got.cwiseAbs().maxCoeff());
    double err = (got - ref).cwiseAbs().maxCoeff() / scale;
    const double gscale = std::max(1.0, bp.gradient.cwiseAbs().maxCoeff());
    err = std::max(err, (bp.gradient - Gfd).cwiseAbs().maxCoeff() / gscale);

    // sigma_k(D^2 phi(., C)) = C^k f_eps(r), the identity the source term
    // is built on.
    double cscale = 1.0;
    for (int m = 0; m < k; ++m) cscale *= scale;
    const double fe = std::pow(C, k) * f_eps(n, k, eps, r);
    err = std::max(err, std::abs(elem_sym(bp.hess_eigs, k) - fe) / cscale);
    if (t.offer(-err))
      t.worst = "n=" + std::to_string(n) + " k=" + std::to_string(k) +
                " eps=" + d2s(eps) + " C=" + d2s(C) + " r=" + d2s(r);
  }
  return finish("barrier-fd", t, 1e-6);
}

SuiteResult suite_f_eps_slope(Rng& rng, int samples) {
  Tracker t;
  const int cap = std::min(samples, 500);
  for (int s = 0; s < cap; ++s) {
    const int n = 3 + static_cast<int>(rng.integer(7));
    const int kmax = (n - 1) / 2;
    const int k = 1 + static_cast<int>(rng.integer(kmax));
    const double eps = rng.uniform(1e-4, 1e-2);
    // Far-field log-log slope of f_eps: the source decays like r^{-(n+1)}
    // (one power from eps/r on top of the (r+eps)^{-n} envelope).
    const int pts = 40;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (int i = 0; i < pts; ++i) {
      const double r = 1e3 * std::pow(100.0, i / double(pts - 1));
      const double x = std::log(r);
      const double y = std::log(f_eps(n, k, eps, r));
      sx += x;
      sy += y;
      sxx += x * x;
      sxy += x * y;
    }
    const double slope = (pts * sxy - sx * sy) / (pts * sxx - sx * sx);
    const double margin = 0.01 - std::abs(slope + (n + 1.0));
    if (t.offer(margin))
      t.worst = "n=" + std::to_string(n) + " k=" + std::to_string(k) +
                " eps=" + d2s(eps) + " slope=" + d2s(slope);
  }
  return finish("f-eps-slope", t, 1e-12);
}

SuiteResult suite_mu_residual(Rng& rng, int samples) {
  Tracker t;
  for (int s = 0; s < samples; ++s) {
    const int n = 3 + static_cast<int>(rng.integer(7));
    const int kmax = (n - 1) / 2;
    const int k = 1 + static_cast<int>(rng.integer(kmax));
    const double r = std::exp(rng.uniform(std::log(0.1), std::log(1e4)));
    const MuValue mu = mu_exact(n, k, r);
    Spectrum eigs(n);
    eigs[0] = mu.d2r;
    for (int i = 1; i < n; ++i) eigs[i] = mu.dr / r;
    double scale = std::max(1.0, eigs.cwiseAbs().maxCoeff());
    double cscale = 1.0;
    for (int m = 0; m < k; ++m) cscale *= scale;
    const double err = std::abs(elem_sym(eigs, k)) / cscale;
    if (t.offer(-err))
      t.worst = "n=" + std::to_string(n) + " k=" + std::to_string(k) +
                " r=" + d2s(r);
  }
  return finish("mu-residual", t, 1e-12);
}

SuiteResult suite_log_solution(Rng& rng, int samples) {
  Tracker t;
  for (int s = 0; s < samples; ++s) {
    const int n = (rng.integer(2) ? 4 : 6);
    const double C = rng.uniform(0.25, 4.0);
    const double r = rng.uniform(0.3, 30.0);
    const double v = log_solution_check(n, C, r);
    double scale = std::max(1.0, C / (r * r));
    double cscale = 1.0;
    for (int m = 0; m < n / 2; ++m) cscale *= scale;
    if (t.offer(-std::abs(v) / cscale))
      t.worst = "n=" + std::to_string(n) + " C=" + d2s(C) + " r=" + d2s(r);
  }
  return finish("log-solution", t, 1e-12);
}

SuiteResult suite_subsolution(Rng& rng, int samples) {
  Tracker t;
  struct Config {
    int n;
    int k;
    std::vector<double> coeffs;
  };
  const std::vector<Config> configs = {
      {5, 2, {1.0}},
      {5, 2, {1.0, 0.0, 0.1}},
      {7, 3, {1.0}},
  };
  for (const auto& cfg : configs) {
    const RadialSurface surface(cfg.n, cfg.coeffs);
    const SubsolutionParams params = select_subsolution_N(surface, cfg.k);
    for (int s = 0; s < samples; ++s) {
      const double theta = rng.uniform(0.0, kPiRef);
      const double g = rng.uniform(1.0, 10.0);
      const double r = g * surface.rho(theta);
      const double sk =
          subsolution_sigma_k(surface, params.N, theta, r, cfg.k);
      const double margin = sk * std::pow(r, cfg.k) - 1.0;
      if (t.offer(margin))
        t.worst = "n=" + std::to_string(cfg.n) + " k=" + std::to_string(cfg.k) +
                  " N=" + std::to_string(params.N) + " theta=" + d2s(theta) +
                  " r=" + d2s(r);
    }
  }
  return finish("subsolution", t, 0.0);
}

SuiteResult suite_sandwich(Rng& rng, int samples) {
  Tracker t;
  struct Config {
    int n;
    int k;
    double rho0;
    double R;
  };
  const std::vector<Config> configs = {
      {5, 2, 1.0, 100.0}, {5, 2, 2.0, 300.0}, {7, 2, 1.5, 200.0},
      {7, 3, 1.0, 100.0}, {3, 1, 1.0, 50.0},
  };
  const int radii = std::min(samples, 1000);
  for (const auto& cfg : configs) {
    const RadialSurface surface(cfg.n, {cfg.rho0});
    const ApproxProblem problem =
        make_approx_problem(surface, cfg.k, cfg.R, 0.0);
    const double alpha0 = problem.alpha0();
    // Exact two-point solution of the eps = 0 problem: A - B r^{-alpha0}
    // through u(rho0) = -1 and u(R) = b_R.
    const double x0 = std::pow(cfg.rho0, -alpha0);
    const double xR = std::pow(cfg.R, -alpha0);
    const double B = (problem.b_R + 1.0) / (x0 - xR);
    const double A = -1.0 + B * x0;
    for (int s = 0; s < radii; ++s) {
      const double r =
          cfg.rho0 * std::exp(rng.uniform(0.0, std::log(cfg.R / cfg.rho0)));
      const double theta = rng.uniform(0.0, kPiRef);
      const double u = A - B * std::pow(r, -alpha0);
      const SandwichBounds sb = sandwich_bounds(problem, r, theta);
      const double margin = std::min(u - sb.lower, sb.upper - u);
      if (t.offer(margin))
        t.worst = "n=" + std::to_string(cfg.n) + " k=" + std::to_string(cfg.k) +
                  " rho0=" + d2s(cfg.rho0) + " R=" + d2s(cfg.R) +
                  " r=" + d2s(r);
    }
  }
  return finish("sandwich", t, 1e-9);
}

using SuiteFn = SuiteResult (*)(Rng&, int);

struct SuiteEntry {
  const char* name;
  SuiteFn fn;
};

constexpr SuiteEntry kSuites[] = {
    {"elem-sym", suite_elem_sym},
    {"expansion", suite_expansion},
    {"omit", suite_omit},
    {"euler", suite_euler},
    {"newton-frame", suite_newton_frame},
    {"newton-div", suite_newton_div},
    {"cone", suite_cone},
    {"kato", suite_kato},
    {"kato-equality", suite_kato_equality},
    {"maclaurin", suite_maclaurin},
    {"spherical-hessian", suite_spherical_hessian},
    {"hessian-g", suite_hessian_g},
    {"barrier-fd", suite_barrier_fd},
    {"f-eps-slope", suite_f_eps_slope},
    {"mu-residual", suite_mu_residual},
    {"log-solution", suite_log_solution},
    {"subsolution", suite_subsolution},
    {"sandwich", suite_sandwich},
};

}  // namespace

std::vector<std::string> suite_names() {
  std::vector<std::string> names;
  for (const auto& entry : kSuites) names.emplace_back(entry.name);
  return names;
}

SuiteResult run_suite(const std::string& name, std::uint64_t seed,
                      int samples) {
  if (samples <= 0) throw std::invalid_argument("samples must be positive");
  for (std::size_t i = 0; i < std::size(kSuites); ++i) {
    if (name == kSuites[i].name) {
      Rng rng(seed ^ (0x9e3779b97f4a7c15ull * (i + 1)));
      return kSuites[i].fn(rng, samples);
    }
  }
  std::string known;
  for (const auto& entry : kSuites) {
    if (!known.empty()) known += ", ";
    known += entry.name;
  }
  throw std::invalid_argument("unknown suite '" + name + "' (known: " + known +
                              ")");
}

std::vector<SuiteResult> run_all_suites(std::uint64_t seed, int samples) {
  std::vector<SuiteResult> results;
  for (const auto& entry : kSuites)
    results.push_back(run_suite(entry.name, seed, samples));
  return results;
}

}  // namespace khx
