#include "doctest.h"
#include "khx/barriers.hpp"
#include "khx/geometry.hpp"
#include "oracles.hpp"

#include <cmath>

using namespace khx;

namespace {

const double kPi = std::acos(-1.0);

/// g(x) = |x| / rho(theta(x)) with theta = acos(x_n / |x|), as a plain
/// Cartesian callable for finite differencing.
std::function<double(const Eigen::VectorXd&)> g_callable(
    const RadialSurface& surface) {
  return [&surface](const Eigen::VectorXd& x) {
    const double r = x.norm();
    const double c = std::clamp(x[x.size() - 1] / r, -1.0, 1.0);
    return r / surface.rho(std::acos(c));
  };
}

/// Meridian-plane point and the adapted frame (theta-direction, azimuthal
/// Cartesian directions, radial last) used by hessian_of_g.
struct MeridianPoint {
  Eigen::VectorXd x;
  Eigen::MatrixXd frame;  // columns are the frame vectors
};

MeridianPoint meridian_point(int n, double theta, double r) {
  MeridianPoint p;
  p.x = Eigen::VectorXd::Zero(n);
  p.x[0] = r * std::sin(theta);
  p.x[n - 1] = r * std::cos(theta);
  p.frame = Eigen::MatrixXd::Zero(n, n);
  p.frame(0, 0) = std::cos(theta);
  p.frame(n - 1, 0) = -std::sin(theta);
  for (int a = 1; a <= n - 2; ++a) p.frame(a, a) = 1.0;
  p.frame(0, n - 1) = std::sin(theta);
  p.frame(n - 1, n - 1) = std::cos(theta);
  return p;
}

}  // namespace

TEST_CASE("RadialSurface: profile derivatives and extremes") {
  RadialSurface s(5, {1.0, 0.0, 0.2});  // rho = 1 + 0.2 cos(2 theta)
  CHECK_FALSE(s.is_ball());
  CHECK(s.ambient_dim() == 5);
  for (double t : {0.0, 0.7, kPi / 2, 2.5, kPi}) {
    CHECK(s.rho(t) == doctest::Approx(1.0 + 0.2 * std::cos(2 * t)).epsilon(1e-14));
    CHECK(s.drho(t) == doctest::Approx(-0.4 * std::sin(2 * t)).epsilon(1e-14));
    CHECK(s.d2rho(t) == doctest::Approx(-0.8 * std::cos(2 * t)).epsilon(1e-14));
  }
  CHECK(s.min_rho() == doctest::Approx(0.8).epsilon(1e-6));
  CHECK(s.max_rho() == doctest::Approx(1.2).epsilon(1e-6));
  RadialSurface ball(5, {2.0});
  CHECK(ball.is_ball());
  CHECK(ball.rho(1.0) == 2.0);
  CHECK_THROWS_AS(RadialSurface(5, {1.0, 0.0, 1.5}), std::invalid_argument);
  CHECK_THROWS_AS(RadialSurface(5, {}), std::invalid_argument);
}

TEST_CASE("boundary_curvature: sphere of radius 2 has all curvatures 1/2") {
  RadialSurface ball(5, {2.0});
  for (double t : {0.0, 0.3, kPi / 2, kPi}) {
    const BoundaryPointData d = boundary_curvature(ball, t, 2);
    CHECK(d.w == doctest::Approx(1.0));
    for (int i = 0; i < 4; ++i) {
      CHECK(d.kappa[i] == doctest::Approx(0.5).epsilon(1e-12));
    }
    // sigma_{k-1} for k=2 on kappa = (1/2,...,1/2): S_1 = 4 * 1/2 = 2
    CHECK(d.sigma_km1 == doctest::Approx(2.0).epsilon(1e-12));
  }
  CHECK_THROWS_AS(boundary_curvature(ball, -0.1, 2), std::domain_error);
  CHECK_THROWS_AS(boundary_curvature(ball, kPi + 0.1, 2), std::domain_error);
}

TEST_CASE("boundary_curvature: cosine profile matches the embedding values") {
  // Independent reference: principal curvatures of the surface of
  // revolution r = rho(theta) in R^5, evaluated by an arbitrary-precision
  // embedding computation (frozen): at theta = pi/4, rho = 1 + 0.2 cos(2t),
  // meridian curvature 1.05654244135, azimuthal curvature 1.29986736724.
  RadialSurface s(5, {1.0, 0.0, 0.2});
  const BoundaryPointData d = boundary_curvature(s, kPi / 4, 2);
  // a is diagonal in this frame: a_11 meridian, a_22.. azimuthal
  CHECK(d.a(0, 0) == doctest::Approx(1.05654244135).epsilon(1e-9));
  CHECK(d.a(1, 1) == doctest::Approx(1.29986736724).epsilon(1e-9));
  CHECK(d.a(2, 2) == doctest::Approx(d.a(1, 1)).epsilon(1e-13));
  CHECK(d.a(3, 3) == doctest::Approx(d.a(1, 1)).epsilon(1e-13));
  // kappa holds the same numbers (eigenvalues of a diagonal-ish matrix)
  Eigen::VectorXd sorted = d.kappa;
  std::sort(sorted.data(), sorted.data() + sorted.size());
  CHECK(sorted[0] == doctest::Approx(1.05654244135).epsilon(1e-9));
  CHECK(sorted[3] == doctest::Approx(1.29986736724).epsilon(1e-9));
  CHECK(d.w == doctest::Approx(std::sqrt(1.0 + std::pow(0.4 / 1.0, 2))));
}

TEST_CASE("check_admissible_domain: verdicts and sample validation") {
  RadialSurface ball(5, {1.0});
  const auto ok = check_admissible_domain(ball, 2);
  CHECK(ok.pass);
  REQUIRE(ok.min_margins.size() == 1);  // degrees m = 1..k-1
  CHECK(ok.min_margins[0] == doctest::Approx(4.0));  // S_1(1,1,1,1) = 4
  // strongly pinched profile: S_1(kappa) < 0 near the equator
  RadialSurface pinched(5, {1.0, 0.0, 0.9});
  const auto bad = check_admissible_domain(pinched, 2);
  CHECK_FALSE(bad.pass);
  CHECK(bad.message.find("S_1") != std::string::npos);
  CHECK(bad.worst_theta == doctest::Approx(kPi / 2).epsilon(0.05));
  // k = 1: nothing to check
  const auto trivial = check_admissible_domain(pinched, 1);
  CHECK(trivial.pass);
  CHECK(trivial.min_margins.empty());
  CHECK_THROWS_AS(check_admissible_domain(ball, 2, 32), std::invalid_argument);
}

TEST_CASE("spherical_hessian: radial power field against the closed form") {
  // f = r^p: sphere-frame jet has only radial entries; the assembled
  // Hessian must be diag(p r^(p-2) x (n-1), p(p-1) r^(p-2)).
  const int n = 5;
  const double p = 1.7;
  const double r = 2.3;
  SphereJet jet(n);
  jet.f = std::pow(r, p);
  jet.f_r = p * std::pow(r, p - 1.0);
  jet.f_rr = p * (p - 1.0) * std::pow(r, p - 2.0);
  const SymMatrix H = spherical_hessian(jet, r);
  for (int a = 0; a < n - 1; ++a) {
    CHECK(H(a, a) == doctest::Approx(p * std::pow(r, p - 2.0)).epsilon(1e-13));
  }
  CHECK(H(n - 1, n - 1) ==
        doctest::Approx(p * (p - 1.0) * std::pow(r, p - 2.0)).epsilon(1e-13));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (i != j) CHECK(H(i, j) == doctest::Approx(0.0).epsilon(1e-14));
  CHECK_THROWS_AS(spherical_hessian(jet, 0.0), std::domain_error);
}

TEST_CASE("spherical_hessian: eigenvalues of r^p match a Cartesian FD Hessian") {
  const int n = 5;
  const double p = 1.7;
  SphereJet jet(n);
  const double r = 1.6;
  jet.f_r = p * std::pow(r, p - 1.0);
  jet.f_rr = p * (p - 1.0) * std::pow(r, p - 2.0);
  const Spectrum lib = spherical_hessian(jet, r).eigenvalues();
  Eigen::VectorXd x(n);
  x << 0.3, -0.8, 0.5, 1.1, -0.4;
  x *= r / x.norm();
  const Eigen::MatrixXd Hfd = oracles::fd_hessian(
      [p](const Eigen::VectorXd& y) { return std::pow(y.norm(), p); }, x,
      5e-3);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (Hfd + Hfd.transpose()));
  for (int i = 0; i < n; ++i) {
    CHECK(lib[i] == doctest::Approx(es.eigenvalues()[i]).epsilon(1e-7));
  }
}

TEST_CASE("hessian_of_g and gradient_of_g: match finite differences") {
  const int n = 5;
  RadialSurface s(n, {1.0, 0.0, 0.2});
  auto g = g_callable(s);
  for (double theta : {0.4, kPi / 2, 2.3}) {
    for (double r : {1.5, 4.0}) {
      const MeridianPoint p = meridian_point(n, theta, r);
      const SymMatrix Hg = hessian_of_g(s, theta, r);
      const Eigen::MatrixXd cart = p.frame * Hg.mat() * p.frame.transpose();
      const Eigen::MatrixXd ref = oracles::fd_hessian(g, p.x, 2e-3);
      const double scale = std::max(1.0, ref.cwiseAbs().maxCoeff());
      CHECK((cart - ref).cwiseAbs().maxCoeff() / scale <= 1e-6);

      const Eigen::VectorXd grad_frame = gradient_of_g(s, theta, r);
      const Eigen::VectorXd grad_cart = p.frame * grad_frame;
      const Eigen::VectorXd gref = oracles::fd_gradient(g, p.x, 2e-3);
      CHECK((grad_cart - gref).cwiseAbs().maxCoeff() <= 1e-8);
    }
  }
  CHECK_THROWS_AS(hessian_of_g(s, 0.5, -1.0), std::domain_error);
}

TEST_CASE("subsolution_sigma_k: ball closed form and FD cross-check") {
  const int n = 5;
  const int k = 2;
  RadialSurface ball(n, {1.0});
  // phi = r^N on the unit ball: Hessian eigenvalues N r^(N-2) x (n-1)
  // and N(N-1) r^(N-2); for N = 2 all equal 2, sigma_2 = C(5,2) 4 = 40.
  CHECK(subsolution_sigma_k(ball, 2, 0.7, 1.0, k) == doctest::Approx(40.0));
  CHECK(subsolution_sigma_k(ball, 2, 0.7, 3.0, k) == doctest::Approx(40.0));
  // general point of the cosine profile vs sigma_k of the FD Hessian
  RadialSurface s(n, {1.0, 0.0, 0.1});
  auto g = g_callable(s);
  const int N = 4;
  for (double theta : {0.6, 1.9}) {
    const double r = 2.0;
    const MeridianPoint p = meridian_point(n, theta, r);
    auto phi = [&](const Eigen::VectorXd& y) { return std::pow(g(y), N); };
    const Eigen::MatrixXd Hfd = oracles::fd_hessian(phi, p.x, 2e-3);
    const double ref = sigma_k_of_matrix(SymMatrix::symmetrized(Hfd), k);
    CHECK(subsolution_sigma_k(s, N, theta, r, k) ==
          doctest::Approx(ref).epsilon(1e-6));
  }
  // inside the domain: g < 1 rejected
  CHECK_THROWS_AS(subsolution_sigma_k(s, 2, 0.0, 0.5, k), std::domain_error);
}

TEST_CASE("select_subsolution_N: certificates for ball and cosine profile") {
  RadialSurface ball(5, {1.0});
  const SubsolutionParams pb = select_subsolution_N(ball, 2);
  CHECK(pb.N == 2);  // min sigma_2 r^2 = 40 >= 1 already at N = 2
  CHECK(pb.c1 == doctest::Approx(4.0));  // unit ball: kappa = 1, S_1 = 4
  CHECK(pb.c0 >= 1.0);
  RadialSurface s(5, {1.0, 0.0, 0.1});
  const SubsolutionParams ps = select_subsolution_N(s, 2);
  CHECK(ps.N >= 2);
  CHECK(ps.c1 > 0.0);
  // re-verify the certificate independently on a coarse sample
  for (int i = 0; i <= 20; ++i) {
    const double theta = kPi * i / 20;
    for (double gval : {1.0, 1.7, 3.1, 9.5}) {
      const double r = gval * s.rho(theta);
      CHECK(subsolution_sigma_k(s, ps.N, theta, r, 2) * r * r >= 1.0);
    }
  }
}

TEST_CASE("axisym_hessian_eigs: meridian field against a Cartesian FD Hessian") {
  // u(x) = x_n |x|^(-3) = cos(theta) r^(-2) on R^5
  const int n = 5;
  const double r = 1.9;
  const double theta = 1.1;
  const double ur = -2.0 * std::pow(r, -3.0) * std::cos(theta);
  const double ut = -std::pow(r, -2.0) * std::sin(theta);
  const double urr = 6.0 * std::pow(r, -4.0) * std::cos(theta);
  const double urt = 2.0 * std::pow(r, -3.0) * std::sin(theta);
  const double utt = -std::pow(r, -2.0) * std::cos(theta);
  Spectrum lib = axisym_hessian_eigs(ur, ut, urr, urt, utt, r, theta, n);
  std::sort(lib.data(), lib.data() + lib.size());
  const MeridianPoint p = meridian_point(n, theta, r);
  const Eigen::MatrixXd Hfd = oracles::fd_hessian(
      [](const Eigen::VectorXd& y) {
        return y[y.size() - 1] * std::pow(y.norm(), -3.0);
      },
      p.x, 2e-3);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (Hfd + Hfd.transpose()));
  for (int i = 0; i < n; ++i) {
    CHECK(lib[i] == doctest::Approx(es.eigenvalues()[i]).epsilon(1e-6));
  }
}

TEST_CASE("axisym_hessian_eigs: pole limit and pole validation") {
  // same field at theta = 0: transverse eigenvalues -3 r^(-4), radial 6 r^(-4)
  const int n = 5;
  const double r = 1.3;
  const double ur = -2.0 * std::pow(r, -3.0);
  const double urr = 6.0 * std::pow(r, -4.0);
  const double utt = -std::pow(r, -2.0);
  Spectrum lib = axisym_hessian_eigs(ur, 0.0, urr, 0.0, utt, r, 0.0, n);
  std::sort(lib.data(), lib.data() + lib.size());
  for (int i = 0; i < n - 1; ++i) {
    CHECK(lib[i] == doctest::Approx(-3.0 * std::pow(r, -4.0)).epsilon(1e-12));
  }
  CHECK(lib[n - 1] == doctest::Approx(6.0 * std::pow(r, -4.0)).epsilon(1e-12));
  // nonzero u_theta on the axis is inconsistent with axisymmetry
  CHECK_THROWS_AS(axisym_hessian_eigs(ur, 0.1, urr, 0.0, utt, r, 0.0, n),
                  std::domain_error);
  CHECK_THROWS_AS(axisym_hessian_eigs(ur, 0.0, urr, 0.0, utt, -r, 0.5, n),
                  std::domain_error);
  CHECK_THROWS_AS(axisym_hessian_eigs(ur, 0.0, urr, 0.0, utt, r, 3.5, n),
                  std::domain_error);
}

TEST_CASE("sphere_area: closed-form values") {
  CHECK(sphere_area(2) == doctest::Approx(2.0 * kPi).epsilon(1e-14));
  CHECK(sphere_area(3) == doctest::Approx(4.0 * kPi).epsilon(1e-14));
  CHECK(sphere_area(4) == doctest::Approx(2.0 * kPi * kPi).epsilon(1e-14));
  CHECK(sphere_area(5) == doctest::Approx(26.318945069571622984).epsilon(1e-14));
}
