#pragma once

// Elementary symmetric function calculus: S_k on spectra and symmetric
// matrices, Newton tensors, Garding-cone membership, and the inequality
// gaps (Newton-Maclaurin, Kato) used by the verification suites.

#include <Eigen/Dense>

#include <optional>
#include <vector>

namespace khx {

/// Eigenvalue vector (lambda_1, ..., lambda_n). No ordering is assumed;
/// every operation below is symmetric in the entries.
using Spectrum = Eigen::VectorXd;

/// Dense symmetric matrix whose storage enforces A_ij == A_ji exactly:
/// set() writes both mirror entries, and construction from a raw matrix
/// requires bitwise symmetry.
class SymMatrix {
 public:
  explicit SymMatrix(int n) : m_(Eigen::MatrixXd::Zero(n, n)) {}

  /// Wraps A. Throws std::invalid_argument unless A_ij == A_ji exactly.
  static SymMatrix from_matrix(const Eigen::MatrixXd& A);

  /// Wraps (A + A^T)/2, for inputs symmetric only up to roundoff
  /// (finite-difference Hessians, rotated eigenbasis products).
  static SymMatrix symmetrized(const Eigen::MatrixXd& A);

  int dim() const { return static_cast<int>(m_.rows()); }
  double operator()(int i, int j) const { return m_(i, j); }

  /// Writes entries (i,j) and (j,i).
  void set(int i, int j, double v) {
    m_(i, j) = v;
    m_(j, i) = v;
  }

  const Eigen::MatrixXd& mat() const { return m_; }

  /// Eigenvalues by a symmetric solver, ascending.
  Spectrum eigenvalues() const;

 private:
  Eigen::MatrixXd m_;
};

/// Binomial coefficient C(m, j) as a double (exact for the small orders
/// used here). C(m, j) = 0 for j < 0 or j > m; throws std::domain_error
/// for m < 0.
double binomial(int m, int j);

/// k-th elementary symmetric polynomial of the entries; S_0 = 1.
/// Computed by the coefficient recurrence of prod_i (1 + t*lambda_i)
/// (Horner updates), never by subset enumeration.
/// Throws std::domain_error for k < 0 or k > n, or non-finite entries.
double elem_sym(const Spectrum& lambda, int k);

/// All of S_0..S_n in one pass (same recurrence).
std::vector<double> elem_sym_all(const Spectrum& lambda);

/// S_k of the spectrum with the listed entries removed ("deleted"
/// polynomials S_k(lambda|i), S_k(lambda|ij)). omit holds 1 or 2 distinct
/// valid indices; throws std::domain_error otherwise. Implemented by
/// recomputing on the reduced vector (stable for dominant entries, unlike
/// dividing the full recurrence back out).
double elem_sym_omit(const Spectrum& lambda, int k, const std::vector<int>& omit);

/// S_k(A) = S_k(lambda[A]) via a symmetric eigensolver.
/// Throws std::domain_error on non-finite entries or k out of range.
double sigma_k_of_matrix(const SymMatrix& A, int k);

/// Newton tensor S_k^{ij} = dS_k/dA_ij: in the eigenbasis the diagonal
/// matrix of deleted polynomials S_{k-1}(lambda|i), rotated back.
SymMatrix newton_tensor(const SymMatrix& A, int k);

/// Garding-cone membership: S_m(lambda) > 0 for all m = 1..k (strict),
/// or S_m(lambda) >= -tol * max(1, max|lambda_i|^m) (closure). The
/// per-degree scaling keeps the slack policy meaningful for spectra far
/// from unit size. Throws std::domain_error for k outside 1..n.
bool in_gamma_k(const Spectrum& lambda, int k, bool strict, double tol = 1e-12);

struct MaclaurinGaps {
  double gap9 = 0.0;                // quotient-vs-successor gap, >= 0 on the cone
  std::vector<double> gap10;        // per-index deleted-polynomial gaps, >= 0
};

/// Newton-Maclaurin gaps for a length-(n-1) spectrum lambda' (n inferred):
///   gap9     = k(n-k-1)/(n-k) * S_k(l')^2 / S_{k-1}(l')  -  (k+1) S_{k+1}(l')
///   gap10[a] = S_{k-1}(l'|a)  -  S_k(l') S_{k-2}(l'|a) / S_{k-1}(l')
/// Both are >= 0 whenever lambda' lies in the closed cone with
/// S_{k-1}(lambda') > 0. Throws std::domain_error when S_{k-1}(lambda') <= 0.
MaclaurinGaps maclaurin_gaps(const Spectrum& lambda_prime, int k);

/// A Hessian in the frame adapted to a regular point of |Du|: the
/// tangential block is diagonal (lambda'), the distinguished direction n
/// carries the mixed entries u_{alpha n} and the corner u_nn. When u_nn is
/// absent it is resolved from the S_k = 0 frame relation
///   0 = S_{k-1}(l') u_nn + S_k(l') - sum_a S_{k-2}(l'|a) u_{an}^2,
/// which requires S_{k-1}(lambda') > 0.
struct KatoConfig {
  int n = 0;
  int k = 0;
  Spectrum lambda_prime;           // length n-1
  Eigen::VectorXd mixed;           // u_{alpha n}, length n-1
  std::optional<double> u_nn;      // resolved from the frame relation when absent
};

/// The u_nn value the S_k = 0 frame relation dictates for cfg.
/// Throws std::domain_error when S_{k-1}(lambda') is not positive.
double kato_unn(const KatoConfig& cfg);

/// Full arrow matrix diag(lambda') bordered by (mixed, u_nn), with u_nn
/// resolved if absent. Satisfies S_k = 0 by construction in that case.
SymMatrix kato_matrix(const KatoConfig& cfg);

/// Kato gap: sum_m S_k^{ij} u_im u_mj - n/(n-k) * S_k^{ij} u_in u_jn,
/// assembled from the closed-form Newton-tensor entries of the adapted
/// frame (deleted polynomials of lambda'), not from an eigensolver.
/// Contract: >= 0 up to roundoff whenever lambda[D2u] lies in the closed
/// cone Gamma_k and S_k = 0.
///
/// Degenerate branch: when S_{k-1}(lambda') = 0 the frame relation cannot
/// be solved; the configuration is accepted only if it is consistent
/// (S_k(lambda') = 0 and S_{k-2}(lambda'|a) u_{an}^2 = 0 for every a,
/// within tolerance) and u_nn was supplied. Otherwise std::domain_error.
double kato_gap(const KatoConfig& cfg);

}  // namespace khx
