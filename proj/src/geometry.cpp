#include "khx/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace khx {

namespace {

constexpr double kPi = std::numbers::pi;

bool near_pole(double theta) {
  return theta < 1e-12 || theta > kPi - 1e-12;
}

/// Uniform theta grids form their last node as (nt-1) * (pi / (nt-1)),
/// which can overshoot pi by an ulp; accept and clamp that.
constexpr double kThetaSlack = 1e-12;

double clamp_theta(double theta) {
  return std::min(std::max(theta, 0.0), kPi);
}

}  // namespace

RadialSurface::RadialSurface(int n, std::vector<double> cosine_coeffs)
    : n_(n), coeffs_(std::move(cosine_coeffs)) {
  if (n_ < 3) {
    throw std::invalid_argument("RadialSurface: ambient dimension must be >= 3");
  }
  if (coeffs_.empty()) {
    throw std::invalid_argument("RadialSurface: empty coefficient list");
  }
  min_rho_ = std::numeric_limits<double>::infinity();
  max_rho_ = 0.0;
  const int samples = 4096;
  for (int j = 0; j <= samples; ++j) {
    const double r = rho(kPi * j / samples);
    min_rho_ = std::min(min_rho_, r);
    max_rho_ = std::max(max_rho_, r);
  }
  if (!(min_rho_ > 0.0)) {
    throw std::invalid_argument("RadialSurface: rho(theta) must be strictly positive");
  }
}

double RadialSurface::rho(double theta) const {
  double v = coeffs_[0];
  for (size_t m = 1; m < coeffs_.size(); ++m) {
    v += coeffs_[m] * std::cos(static_cast<double>(m) * theta);
  }
  return v;
}

double RadialSurface::drho(double theta) const {
  double v = 0.0;
  for (size_t m = 1; m < coeffs_.size(); ++m) {
    v -= coeffs_[m] * static_cast<double>(m) * std::sin(static_cast<double>(m) * theta);
  }
  return v;
}

double RadialSurface::d2rho(double theta) const {
  double v = 0.0;
  for (size_t m = 1; m < coeffs_.size(); ++m) {
    const double mm = static_cast<double>(m);
    v -= coeffs_[m] * mm * mm * std::cos(mm * theta);
  }
  return v;
}

bool RadialSurface::is_ball() const {
  for (size_t m = 1; m < coeffs_.size(); ++m) {
    if (coeffs_[m] != 0.0) return false;
  }
  return true;
}

BoundaryPointData boundary_curvature(const RadialSurface& surface, double theta,
                                     int k) {
  if (!(theta >= -kThetaSlack && theta <= kPi + kThetaSlack)) {
    throw std::domain_error("boundary_curvature: theta outside [0, pi]");
  }
  theta = clamp_theta(theta);
  const int n = surface.ambient_dim();
  if (k < 1 || k > n) {
    throw std::domain_error("boundary_curvature: k outside 1..n");
  }
  const double rho = surface.rho(theta);
  const double rp = surface.drho(theta);
  const double rpp = surface.d2rho(theta);
  const double w = std::sqrt(1.0 + rp * rp / (rho * rho));

  // Covariant sphere Hessian of rho in the adapted frame: the theta-theta
  // entry is rho'', the azimuthal diagonal is cot(theta) rho' (limit rho''
  // on the axis, where rho' vanishes to first order).
  const double hess_theta = rpp;
  const double hess_az = near_pole(theta) ? rpp : rp * std::cos(theta) / std::sin(theta);

  BoundaryPointData out(n);
  out.theta = theta;
  out.rho = rho;
  out.w = w;

  const double h11 = (rho / w) * (1.0 + 2.0 * rp * rp / (rho * rho) - hess_theta / rho);
  const double haz = (rho / w) * (1.0 - hess_az / rho);
  out.h.set(0, 0, h11);
  for (int a = 1; a < n - 1; ++a) out.h.set(a, a, haz);

  // gamma = g^{-1/2} with g_11 = rho^2 w^2, g_azaz = rho^2, off-diagonals 0.
  const double a11 = h11 / (rho * rho * w * w);
  const double aaz = haz / (rho * rho);
  out.a.set(0, 0, a11);
  for (int a = 1; a < n - 1; ++a) out.a.set(a, a, aaz);

  out.kappa = Spectrum(n - 1);
  out.kappa[0] = a11;
  for (int a = 1; a < n - 1; ++a) out.kappa[a] = aaz;
  out.sigma_km1 = elem_sym(out.kappa, k - 1);
  return out;
}

AdmissibilityCertificate check_admissible_domain(const RadialSurface& surface,
                                                 int k, int samples) {
  if (samples < 64) {
    throw std::invalid_argument("check_admissible_domain: samples must be >= 64");
  }
  const int n = surface.ambient_dim();
  if (k < 1 || 2 * k >= n) {
    throw std::invalid_argument("check_admissible_domain: requires 1 <= k < n/2");
  }

  auto evaluate = [&](int count) {
    AdmissibilityCertificate cert;
    cert.k = k;
    cert.samples_used = count;
    cert.min_margins.assign(static_cast<size_t>(std::max(0, k - 1)),
                            std::numeric_limits<double>::infinity());
    cert.pass = true;
    double worst_value = std::numeric_limits<double>::infinity();
    int worst_degree = 0;
    for (int j = 0; j <= count; ++j) {
      const double theta = kPi * j / count;
      const BoundaryPointData bp = boundary_curvature(surface, theta, k);
      for (int m = 1; m <= k - 1; ++m) {
        const double sm = elem_sym(bp.kappa, m);
        auto& margin = cert.min_margins[static_cast<size_t>(m - 1)];
        if (sm < margin) margin = sm;
        if (sm < worst_value) {
          worst_value = sm;
          cert.worst_theta = theta;
          worst_degree = m;
        }
        if (!(sm > 0.0)) cert.pass = false;
      }
    }
    if (!cert.pass) {
      std::ostringstream msg;
      msg << "(k-1)-convexity violated: S_" << worst_degree
          << "(kappa) = " << worst_value << " at theta = " << cert.worst_theta
          << " (" << count << " samples)";
      cert.message = msg.str();
    }
    return cert;
  };

  // k = 1 needs no curvature condition beyond rho > 0 (checked at
  // construction); report a trivially passing certificate.
  if (k == 1) {
    AdmissibilityCertificate cert;
    cert.k = 1;
    cert.samples_used = samples;
    cert.pass = true;
    return cert;
  }

  AdmissibilityCertificate prev = evaluate(samples);
  for (int count = samples * 2; count <= (1 << 20); count *= 2) {
    AdmissibilityCertificate next = evaluate(count);
    if (next.pass == prev.pass) return next;
    prev = next;
  }
  return prev;
}

SymMatrix spherical_hessian(const SphereJet& jet, double r) {
  if (!(r > 0.0)) {
    throw std::domain_error("spherical_hessian: r must be positive");
  }
  const int n = static_cast<int>(jet.f_a.size()) + 1;
  if (jet.f_ab.dim() != n - 1 || jet.f_ar.size() != n - 1) {
    throw std::invalid_argument("spherical_hessian: inconsistent jet sizes");
  }
  SymMatrix H(n);
  for (int a = 0; a < n - 1; ++a) {
    for (int b = a; b < n - 1; ++b) {
      double v = jet.f_ab(a, b) / (r * r);
      if (a == b) v += jet.f_r / r;
      H.set(a, b, v);
    }
    H.set(a, n - 1, jet.f_ar[a] / r - jet.f_a[a] / (r * r));
  }
  H.set(n - 1, n - 1, jet.f_rr);
  return H;
}

SymMatrix hessian_of_g(const RadialSurface& surface, double theta, double r) {
  if (!(r > 0.0)) {
    throw std::domain_error("hessian_of_g: r must be positive");
  }
  const int n = surface.ambient_dim();
  const BoundaryPointData bp = boundary_curvature(surface, theta, /*k=*/1);
  SymMatrix H(n);
  H.set(0, 0, bp.w * bp.w * bp.w * bp.a(0, 0) / r);
  for (int a = 1; a < n - 1; ++a) {
    H.set(0, a, bp.w * bp.w * bp.a(0, a) / r);
    H.set(a, a, bp.w * bp.a(a, a) / r);
  }
  // Radial row and column are identically zero: g is 1-homogeneous in r.
  return H;
}

Eigen::VectorXd gradient_of_g(const RadialSurface& surface, double theta, double r) {
  const int n = surface.ambient_dim();
  const double rho = surface.rho(theta);
  const double g = r / rho;
  Eigen::VectorXd v = Eigen::VectorXd::Zero(n);
  v[0] = -g * surface.drho(theta) / (rho * r);
  v[n - 1] = g / r;
  return v;
}

double subsolution_sigma_k(const RadialSurface& surface, int N, double theta,
                           double r, int k) {
  if (N < 2) {
    throw std::domain_error("subsolution_sigma_k: N must be >= 2");
  }
  const double g = r / surface.rho(theta);
  if (g < 1.0 - 1e-12) {
    throw std::domain_error("subsolution_sigma_k: point lies inside the domain (g < 1)");
  }
  const double A = N * std::pow(g, N - 1);
  const double B = static_cast<double>(N) * (N - 1) * std::pow(g, N - 2);
  const Eigen::VectorXd v = gradient_of_g(surface, theta, r);
  const Eigen::MatrixXd M =
      A * hessian_of_g(surface, theta, r).mat() + B * (v * v.transpose());
  return sigma_k_of_matrix(SymMatrix::symmetrized(M), k);
}

SubsolutionParams select_subsolution_N(const RadialSurface& surface, int k) {
  const AdmissibilityCertificate cert = check_admissible_domain(surface, k);
  if (!cert.pass) {
    throw std::runtime_error("select_subsolution_N: " + cert.message);
  }

  SubsolutionParams params;
  params.c1 = std::numeric_limits<double>::infinity();
  params.c0 = 0.0;
  const int ntheta_c = 512;
  for (int j = 0; j <= ntheta_c; ++j) {
    const BoundaryPointData bp =
        boundary_curvature(surface, kPi * j / ntheta_c, k);
    params.c1 = std::min(params.c1, bp.sigma_km1);
    params.c0 = std::max(params.c0, bp.kappa.cwiseAbs().maxCoeff());
  }

  auto min_over_shell = [&](int N, int ntheta, int ng) {
    double worst = std::numeric_limits<double>::infinity();
    for (int j = 0; j <= ntheta; ++j) {
      const double theta = kPi * j / ntheta;
      const double rho = surface.rho(theta);
      for (int i = 0; i <= ng; ++i) {
        const double g = 1.0 + 9.0 * i / ng;
        const double r = g * rho;
        const double sk = subsolution_sigma_k(surface, N, theta, r, k);
        worst = std::min(worst, sk * std::pow(r, k));
      }
    }
    return worst;
  };

  for (int N = 2; N <= (1 << 16); N *= 2) {
    if (min_over_shell(N, 128, 48) >= 1.0 && min_over_shell(N, 1280, 480) >= 1.0) {
      params.N = N;
      return params;
    }
  }
  throw std::runtime_error(
      "select_subsolution_N: no exponent up to 2^16 certifies "
      "sigma_k * r^k >= 1 on {1 <= g <= 10}; surface likely inadmissible");
}

Spectrum axisym_hessian_eigs(double u_r, double u_theta, double u_rr,
                             double u_rtheta, double u_thetatheta, double r,
                             double theta, int n) {
  if (!(r > 0.0)) {
    throw std::domain_error("axisym_hessian_eigs: r must be positive");
  }
  if (!(theta >= -kThetaSlack && theta <= kPi + kThetaSlack)) {
    throw std::domain_error("axisym_hessian_eigs: theta outside [0, pi]");
  }
  theta = clamp_theta(theta);
  if (n < 3) {
    throw std::domain_error("axisym_hessian_eigs: n must be >= 3");
  }
  const bool pole = near_pole(theta);
  const double scale = std::max({1.0, std::abs(u_r), std::abs(u_theta)});
  if (pole && std::abs(u_theta) > 1e-10 * scale) {
    throw std::domain_error(
        "axisym_hessian_eigs: u_theta must vanish on the symmetry axis");
  }
  const double b11 = u_rr;
  const double b12 = u_rtheta / r - u_theta / (r * r);
  const double b22 = u_thetatheta / (r * r) + u_r / r;
  const double az =
      pole ? b22 : u_r / r + std::cos(theta) / std::sin(theta) * u_theta / (r * r);

  const double mean = 0.5 * (b11 + b22);
  const double disc = std::sqrt(0.25 * (b11 - b22) * (b11 - b22) + b12 * b12);
  Spectrum lam(n);
  lam[0] = mean - disc;
  lam[1] = mean + disc;
  for (int i = 2; i < n; ++i) lam[i] = az;
  return lam;
}

double sphere_area(int m) {
  if (m < 1) throw std::domain_error("sphere_area: dimension must be >= 1");
  return 2.0 * std::pow(kPi, 0.5 * m) / std::tgamma(0.5 * m);
}

}  // namespace khx
