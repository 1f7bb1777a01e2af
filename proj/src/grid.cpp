#include "khx/grid.hpp"

#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace khx {

AnnulusGrid::AnnulusGrid(ApproxProblem problem, int ns, int ntheta,
                         double grading, double first_layer_max)
    : problem_(std::move(problem)), ns_(ns), ntheta_(ntheta), grading_(grading) {
  if (ns_ < 16) {
    throw std::invalid_argument("AnnulusGrid: ns must be >= 16");
  }
  if (ntheta_ < 8) {
    throw std::invalid_argument("AnnulusGrid: ntheta must be >= 8");
  }
  if (!(grading_ >= 0.0)) {
    throw std::invalid_argument("AnnulusGrid: grading must be >= 0");
  }
  hs_ = 1.0 / (ns_ - 1);
  ht_ = std::numbers::pi / (ntheta_ - 1);

  m_.resize(ns_);
  dm_.resize(ns_);
  d2m_.resize(ns_);
  const bool uniform = grading_ < 1e-12;
  const double denom = uniform ? 1.0 : std::expm1(grading_);
  for (int i = 0; i < ns_; ++i) {
    const double si = s(i);
    if (uniform) {
      m_[i] = si;
      dm_[i] = 1.0;
      d2m_[i] = 0.0;
    } else {
      const double e = std::exp(grading_ * si);
      m_[i] = std::expm1(grading_ * si) / denom;
      dm_[i] = grading_ * e / denom;
      d2m_[i] = grading_ * grading_ * e / denom;
    }
  }

  a_.resize(ntheta_);
  da_.resize(ntheta_);
  d2a_.resize(ntheta_);
  b_.resize(ntheta_);
  const double logR = std::log(problem_.R);
  for (int j = 0; j < ntheta_; ++j) {
    const double th = theta(j);
    const double rho = problem_.surface.rho(th);
    const double rp = problem_.surface.drho(th);
    const double rpp = problem_.surface.d2rho(th);
    a_[j] = std::log(rho);
    da_[j] = rp / rho;
    d2a_[j] = rpp / rho - (rp / rho) * (rp / rho);
    b_[j] = logR - a_[j];
    if (!(b_[j] > 0.0)) {
      throw std::invalid_argument(
          "AnnulusGrid: log R <= log rho(theta); the map is not monotone");
    }
  }

  r_.resize(ns_, ntheta_);
  for (int i = 0; i < ns_; ++i) {
    for (int j = 0; j < ntheta_; ++j) {
      r_(i, j) = std::exp(a_[j] + m_[i] * b_[j]);
    }
  }

  for (int j = 0; j < ntheta_; ++j) {
    const double layer = r_(1, j) - r_(0, j);
    if (layer > first_layer_max * r_(0, j)) {
      std::ostringstream msg;
      msg << "AnnulusGrid: first radial layer " << layer << " exceeds "
          << first_layer_max << " * rho at theta = " << theta(j)
          << "; increase ns (currently " << ns_
          << ") or the grading exponent (currently " << grading_ << ")";
      throw std::invalid_argument(msg.str());
    }
  }
}

AnnulusGrid::ChainRule AnnulusGrid::chain(int i, int j) const {
  ChainRule cr;
  cr.r = r_(i, j);
  cr.p = dm_[i] * b_[j];
  cr.ps = d2m_[i] * b_[j];
  cr.ptheta = dm_[i] * (-da_[j]);
  cr.c = da_[j] + m_[i] * (-da_[j]);
  cr.ctheta = d2a_[j] + m_[i] * (-d2a_[j]);
  return cr;
}

AnnulusGrid::PhysicalDerivs AnnulusGrid::to_physical(int i, int j, double us,
                                                     double uss, double ut,
                                                     double ust,
                                                     double utt) const {
  const ChainRule q = chain(i, j);
  PhysicalDerivs d;
  d.ur = us / (q.r * q.p);
  d.urr = (uss - us * (q.p + q.ps / q.p)) / (q.r * q.r * q.p * q.p);
  d.urtheta = (ust - d.urr * q.r * q.r * q.c * q.p -
               d.ur * q.r * (q.c * q.p + q.ptheta)) /
              (q.r * q.p);
  d.utheta = ut - (q.c / q.p) * us;
  d.uthetatheta = utt - 2.0 * d.urtheta * q.r * q.c - d.urr * q.r * q.r * q.c * q.c -
                  d.ur * q.r * (q.c * q.c + q.ctheta);
  return d;
}

}  // namespace khx
