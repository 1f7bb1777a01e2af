#include "khx/symfun.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace khx {

namespace {

void require_finite(const Spectrum& lambda) {
  for (int i = 0; i < lambda.size(); ++i) {
    if (!std::isfinite(lambda[i])) {
      throw std::domain_error("spectrum has a non-finite entry");
    }
  }
}

}  // namespace

SymMatrix SymMatrix::from_matrix(const Eigen::MatrixXd& A) {
  if (A.rows() != A.cols()) {
    throw std::invalid_argument("SymMatrix: matrix is not square");
  }
  for (int i = 0; i < A.rows(); ++i) {
    for (int j = i + 1; j < A.cols(); ++j) {
      if (A(i, j) != A(j, i)) {
        throw std::invalid_argument("SymMatrix: input is not exactly symmetric");
      }
    }
  }
  SymMatrix s(static_cast<int>(A.rows()));
  s.m_ = A;
  return s;
}

SymMatrix SymMatrix::symmetrized(const Eigen::MatrixXd& A) {
  if (A.rows() != A.cols()) {
    throw std::invalid_argument("SymMatrix: matrix is not square");
  }
  SymMatrix s(static_cast<int>(A.rows()));
  s.m_ = 0.5 * (A + A.transpose());
  // Mirror exactly: averaging can still differ in the last bit.
  for (int i = 0; i < A.rows(); ++i) {
    for (int j = i + 1; j < A.cols(); ++j) {
      s.m_(j, i) = s.m_(i, j);
    }
  }
  return s;
}

Spectrum SymMatrix::eigenvalues() const {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m_, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) {
    throw std::domain_error("SymMatrix: eigensolver failed");
  }
  return es.eigenvalues();
}

double binomial(int m, int j) {
  if (m < 0) {
    throw std::domain_error("binomial: m must be non-negative");
  }
  if (j < 0 || j > m) return 0.0;
  j = std::min(j, m - j);
  double c = 1.0;
  for (int i = 1; i <= j; ++i) {
    c = c * (m - j + i) / i;
  }
  return c;
}

double elem_sym(const Spectrum& lambda, int k) {
  const int n = static_cast<int>(lambda.size());
  if (k < 0 || k > n) {
    throw std::domain_error("elem_sym: k = " + std::to_string(k) +
                            " outside 0.." + std::to_string(n));
  }
  require_finite(lambda);
  if (k == 0) return 1.0;
  // Coefficients e_0..e_k of prod (1 + t*lambda_i), updated per entry.
  std::vector<double> e(static_cast<size_t>(k) + 1, 0.0);
  e[0] = 1.0;
  for (int i = 0; i < n; ++i) {
    const double x = lambda[i];
    for (int j = std::min(i + 1, k); j >= 1; --j) {
      e[j] += x * e[j - 1];
    }
  }
  return e[k];
}

std::vector<double> elem_sym_all(const Spectrum& lambda) {
  const int n = static_cast<int>(lambda.size());
  require_finite(lambda);
  std::vector<double> e(static_cast<size_t>(n) + 1, 0.0);
  e[0] = 1.0;
  for (int i = 0; i < n; ++i) {
    const double x = lambda[i];
    for (int j = i + 1; j >= 1; --j) {
      e[j] += x * e[j - 1];
    }
  }
  return e;
}

double elem_sym_omit(const Spectrum& lambda, int k, const std::vector<int>& omit) {
  const int n = static_cast<int>(lambda.size());
  if (omit.empty() || omit.size() > 2) {
    throw std::domain_error("elem_sym_omit: omit set must have 1 or 2 indices");
  }
  for (int idx : omit) {
    if (idx < 0 || idx >= n) {
      throw std::domain_error("elem_sym_omit: index out of range");
    }
  }
  if (omit.size() == 2 && omit[0] == omit[1]) {
    throw std::domain_error("elem_sym_omit: repeated index");
  }
  const int m = n - static_cast<int>(omit.size());
  if (k < 0 || k > m) {
    throw std::domain_error("elem_sym_omit: k outside 0..n-|omit|");
  }
  Spectrum reduced(m);
  int p = 0;
  for (int i = 0; i < n; ++i) {
    if (std::find(omit.begin(), omit.end(), i) == omit.end()) {
      reduced[p++] = lambda[i];
    }
  }
  return elem_sym(reduced, k);
}

double sigma_k_of_matrix(const SymMatrix& A, int k) {
  if (!A.mat().allFinite()) {
    throw std::domain_error("sigma_k_of_matrix: non-finite entries");
  }
  return elem_sym(A.eigenvalues(), k);
}

SymMatrix newton_tensor(const SymMatrix& A, int k) {
  if (!A.mat().allFinite()) {
    throw std::domain_error("newton_tensor: non-finite entries");
  }
  const int n = A.dim();
  if (k < 1 || k > n) {
    throw std::domain_error("newton_tensor: k outside 1..n");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A.mat());
  if (es.info() != Eigen::Success) {
    throw std::domain_error("newton_tensor: eigensolver failed");
  }
  const Spectrum lam = es.eigenvalues();
  Eigen::VectorXd d(n);
  for (int i = 0; i < n; ++i) {
    d[i] = elem_sym_omit(lam, k - 1, {i});
  }
  const Eigen::MatrixXd Q = es.eigenvectors();
  return SymMatrix::symmetrized(Q * d.asDiagonal() * Q.transpose());
}

bool in_gamma_k(const Spectrum& lambda, int k, bool strict, double tol) {
  const int n = static_cast<int>(lambda.size());
  if (k < 1 || k > n) {
    throw std::domain_error("in_gamma_k: k outside 1..n");
  }
  require_finite(lambda);
  const double big = lambda.cwiseAbs().maxCoeff();
  double scale = 1.0;
  for (int m = 1; m <= k; ++m) {
    scale = std::max(1.0, scale * big);  // max(1, big^m) without overflow drama
    const double sm = elem_sym(lambda, m);
    if (strict ? (sm <= 0.0) : (sm < -tol * scale)) {
      return false;
    }
  }
  return true;
}

MaclaurinGaps maclaurin_gaps(const Spectrum& lambda_prime, int k) {
  const int nm1 = static_cast<int>(lambda_prime.size());
  const int n = nm1 + 1;
  if (k < 1 || k + 1 > nm1) {
    throw std::domain_error("maclaurin_gaps: need 1 <= k and k+1 <= n-1");
  }
  const double skm1 = elem_sym(lambda_prime, k - 1);
  if (!(skm1 > 0.0)) {
    throw std::domain_error("maclaurin_gaps: S_{k-1}(lambda') must be positive");
  }
  const double sk = elem_sym(lambda_prime, k);
  const double skp1 = elem_sym(lambda_prime, k + 1);

  MaclaurinGaps g;
  g.gap9 = static_cast<double>(k) * (n - k - 1) / (n - k) * sk * sk / skm1 -
           (k + 1) * skp1;
  g.gap10.resize(static_cast<size_t>(nm1));
  for (int a = 0; a < nm1; ++a) {
    const double skm1_a = elem_sym_omit(lambda_prime, k - 1, {a});
    const double skm2_a = (k >= 2) ? elem_sym_omit(lambda_prime, k - 2, {a}) : 0.0;
    g.gap10[static_cast<size_t>(a)] = skm1_a - sk * skm2_a / skm1;
  }
  return g;
}

namespace {

void validate_kato(const KatoConfig& cfg) {
  if (!(cfg.n > 2 * cfg.k && cfg.k >= 1)) {
    throw std::domain_error("kato: requires n > 2k >= 2");
  }
  if (cfg.lambda_prime.size() != cfg.n - 1 || cfg.mixed.size() != cfg.n - 1) {
    throw std::domain_error("kato: lambda_prime and mixed must have length n-1");
  }
  if (cfg.k >= 2 && !in_gamma_k(cfg.lambda_prime, cfg.k - 1, /*strict=*/false)) {
    throw std::domain_error("kato: lambda_prime outside the closed cone of degree k-1");
  }
}

}  // namespace

double kato_unn(const KatoConfig& cfg) {
  validate_kato(cfg);
  const double skm1 = elem_sym(cfg.lambda_prime, cfg.k - 1);
  if (!(skm1 > 0.0)) {
    throw std::domain_error("kato_unn: S_{k-1}(lambda') must be positive");
  }
  double mixed_sum = 0.0;
  for (int a = 0; a < cfg.n - 1; ++a) {
    const double skm2_a =
        (cfg.k >= 2) ? elem_sym_omit(cfg.lambda_prime, cfg.k - 2, {a}) : 0.0;
    mixed_sum += skm2_a * cfg.mixed[a] * cfg.mixed[a];
  }
  return (mixed_sum - elem_sym(cfg.lambda_prime, cfg.k)) / skm1;
}

SymMatrix kato_matrix(const KatoConfig& cfg) {
  validate_kato(cfg);
  const int n = cfg.n;
  const double unn = cfg.u_nn ? *cfg.u_nn : kato_unn(cfg);
  SymMatrix M(n);
  for (int a = 0; a < n - 1; ++a) {
    M.set(a, a, cfg.lambda_prime[a]);
    M.set(a, n - 1, cfg.mixed[a]);
  }
  M.set(n - 1, n - 1, unn);
  return M;
}

double kato_gap(const KatoConfig& cfg) {
  validate_kato(cfg);
  const int n = cfg.n;
  const int k = cfg.k;
  const Spectrum& lp = cfg.lambda_prime;
  const Eigen::VectorXd& u = cfg.mixed;

  const double skm1 = elem_sym(lp, k - 1);
  double unn;
  const double scale = std::max(1.0, lp.cwiseAbs().maxCoeff());
  const double tol_degenerate = 1e-12 * std::pow(scale, k);
  if (skm1 > tol_degenerate) {
    unn = cfg.u_nn ? *cfg.u_nn : kato_unn(cfg);
  } else {
    // Degenerate branch: accept only configurations consistent with the
    // S_k = 0 frame relation at S_{k-1}(lambda') = 0.
    if (std::abs(elem_sym(lp, k)) > tol_degenerate) {
      throw std::domain_error(
          "kato_gap: S_{k-1}(lambda') = 0 with S_k(lambda') != 0 is inconsistent");
    }
    for (int a = 0; a < n - 1; ++a) {
      const double skm2_a = (k >= 2) ? elem_sym_omit(lp, k - 2, {a}) : 0.0;
      if (std::abs(skm2_a) * u[a] * u[a] > tol_degenerate) {
        throw std::domain_error(
            "kato_gap: mixed entries inconsistent with the degenerate frame relation");
      }
    }
    if (!cfg.u_nn) {
      throw std::domain_error(
          "kato_gap: u_nn must be supplied when S_{k-1}(lambda') = 0");
    }
    unn = *cfg.u_nn;
  }

  // Closed-form Newton-tensor entries in the adapted frame:
  //   S_k^{nn}          = S_{k-1}(l')
  //   S_k^{an}          = -S_{k-2}(l'|a) u_a
  //   S_k^{aa}          = S_{k-1}(l'|a) + S_{k-2}(l'|a) u_nn
  //                       - sum_{b != a} S_{k-3}(l'|ab) u_b^2
  //   S_k^{ab} (a != b) = S_{k-3}(l'|ab) u_a u_b
  SymMatrix nt(n);
  nt.set(n - 1, n - 1, skm1);
  for (int a = 0; a < n - 1; ++a) {
    const double skm2_a = (k >= 2) ? elem_sym_omit(lp, k - 2, {a}) : 0.0;
    nt.set(a, n - 1, -skm2_a * u[a]);
    double diag = elem_sym_omit(lp, k - 1, {a}) + skm2_a * unn;
    for (int b = 0; b < n - 1; ++b) {
      if (b == a) continue;
      const double skm3_ab =
          (k >= 3) ? elem_sym_omit(lp, k - 3, {a, b}) : 0.0;
      diag -= skm3_ab * u[b] * u[b];
      if (b > a) {
        nt.set(a, b, skm3_ab * u[a] * u[b]);
      }
    }
    nt.set(a, a, diag);
  }

  KatoConfig resolved = cfg;
  resolved.u_nn = unn;
  const Eigen::MatrixXd M = kato_matrix(resolved).mat();
  const Eigen::MatrixXd M2 = M * M;
  const double term1 = (nt.mat().array() * M2.array()).sum();
  const Eigen::VectorXd col = M.col(n - 1);
  const double term2 = col.dot(nt.mat() * col);
  return term1 - static_cast<double>(n) / (n - k) * term2;
}

}  // namespace khx
