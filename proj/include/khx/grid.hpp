#pragma once

// Boundary-fitted axisymmetric annulus grid for the approximate exterior
// problem: uniform computational coordinates (s, theta) in [0,1] x [0,pi]
// with log r = log rho(theta) + m(s) (log R - log rho(theta)) and the
// grading m(s) = expm1(q s) / expm1(q) concentrating layers at the inner
// boundary. Carries the chain-rule data turning (s, theta)-derivatives of
// a nodal field into (r, theta)-derivatives.

#include "khx/barriers.hpp"

namespace khx {

class AnnulusGrid {
 public:
  /// Validates ns >= 16, ntheta >= 8, grading >= 0, positive Jacobian
  /// (log R > log rho everywhere), and the boundary-resolution invariant:
  /// the first radial layer is no thicker than first_layer_max * rho(theta)
  /// at every angle (throws std::invalid_argument with a refinement hint).
  AnnulusGrid(ApproxProblem problem, int ns, int ntheta, double grading = 2.0,
              double first_layer_max = 1e-2);

  const ApproxProblem& problem() const { return problem_; }
  int ns() const { return ns_; }
  int ntheta() const { return ntheta_; }
  double grading() const { return grading_; }

  double hs() const { return hs_; }
  double htheta() const { return ht_; }
  double s(int i) const { return i * hs_; }
  double theta(int j) const { return j * ht_; }

  /// r(i, j) = exp(a(theta_j) + m(s_i) b(theta_j)).
  double r(int i, int j) const { return r_(i, j); }

  /// Flattened node index, theta fastest.
  int idx(int i, int j) const { return i * ntheta_ + j; }
  int size() const { return ns_ * ntheta_; }

  /// Chain-rule data at a node for l(s, theta) = a(theta) + m(s) b(theta):
  ///   p = dl/ds, ps = d2l/ds2, ptheta = d2l/ds dtheta,
  ///   c = dl/dtheta, ctheta = d2l/dtheta2.
  /// Given computational derivatives (us, uss, ut, ust, utt) of a nodal
  /// field, the physical derivatives follow in the order
  ///   U_r  = us / (r p)
  ///   U_rr = (uss - us (p + ps / p)) / (r^2 p^2)
  ///   U_rt = (ust - U_rr r^2 c p - U_r r (c p + ptheta)) / (r p)
  ///   U_t  = ut - (c / p) us
  ///   U_tt = utt - 2 U_rt r c - U_rr r^2 c^2 - U_r r (c^2 + ctheta).
  struct ChainRule {
    double r = 0.0;
    double p = 0.0;
    double ps = 0.0;
    double ptheta = 0.0;
    double c = 0.0;
    double ctheta = 0.0;
  };
  ChainRule chain(int i, int j) const;

  /// Physical second-derivative set from computational derivatives at a
  /// node, applying the documented order of solves.
  struct PhysicalDerivs {
    double ur = 0.0;
    double utheta = 0.0;
    double urr = 0.0;
    double urtheta = 0.0;
    double uthetatheta = 0.0;
  };
  PhysicalDerivs to_physical(int i, int j, double us, double uss, double ut,
                             double ust, double utt) const;

 private:
  ApproxProblem problem_;
  int ns_;
  int ntheta_;
  double grading_;
  double hs_;
  double ht_;
  // per-s grading values and derivatives
  Eigen::VectorXd m_, dm_, d2m_;
  // per-theta log-map values and derivatives: a = log rho, b = log R - a
  Eigen::VectorXd a_, da_, d2a_, b_;
  Eigen::MatrixXd r_;  // ns x ntheta
};

}  // namespace khx
