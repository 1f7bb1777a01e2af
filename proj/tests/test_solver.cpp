#include "doctest.h"
#include "khx/solver.hpp"
#include "oracles.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

using namespace khx;

namespace {

const double kPi = std::acos(-1.0);

ApproxProblem ball_problem(double rho0, double R, double eps,
                           double delta = 0.05) {
  return make_approx_problem(RadialSurface(5, {rho0}), 2, R, eps, delta);
}

/// Analytic test profile u(r, theta) = r^(-1/2) (1 + 0.05 cos 2 theta)
/// with every derivative needed below.
struct Profile {
  static double u(double r, double t) {
    return std::pow(r, -0.5) * (1.0 + 0.05 * std::cos(2 * t));
  }
  static double ur(double r, double t) {
    return -0.5 * std::pow(r, -1.5) * (1.0 + 0.05 * std::cos(2 * t));
  }
  static double urr(double r, double t) {
    return 0.75 * std::pow(r, -2.5) * (1.0 + 0.05 * std::cos(2 * t));
  }
  static double ut(double r, double t) {
    return std::pow(r, -0.5) * (-0.1 * std::sin(2 * t));
  }
  static double urt(double r, double t) {
    return -0.5 * std::pow(r, -1.5) * (-0.1 * std::sin(2 * t));
  }
  static double utt(double r, double t) {
    return std::pow(r, -0.5) * (-0.2 * std::cos(2 * t));
  }
};

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

}  // namespace

TEST_CASE("AnnulusGrid: size validation and the first-layer invariant") {
  const ApproxProblem pb = ball_problem(1.0, 100.0, 1e-3);
  CHECK_THROWS_AS(AnnulusGrid(pb, 8, 17), std::invalid_argument);
  CHECK_THROWS_AS(AnnulusGrid(pb, 256, 4), std::invalid_argument);
  // ns = 64 leaves a first radial layer thicker than 1e-2 rho at R = 100
  CHECK_THROWS_AS(AnnulusGrid(pb, 64, 17), std::invalid_argument);
  try {
    AnnulusGrid g(pb, 64, 17);
  } catch (const std::invalid_argument& e) {
    CHECK(std::string(e.what()).find("layer") != std::string::npos);
  }
  const AnnulusGrid g(pb, 256, 17);
  CHECK(g.ns() == 256);
  CHECK(g.ntheta() == 17);
  for (int j = 0; j < g.ntheta(); ++j) {
    CHECK(g.r(0, j) == doctest::Approx(1.0).epsilon(1e-13));
    CHECK(g.r(g.ns() - 1, j) == doctest::Approx(100.0).epsilon(1e-13));
  }
  CHECK(g.theta(0) == 0.0);
  CHECK(g.theta(g.ntheta() - 1) == doctest::Approx(kPi).epsilon(1e-15));
}

TEST_CASE("AnnulusGrid::chain: matches the closed-form coordinate map") {
  RadialSurface s(5, {1.0, 0.0, 0.2});
  const ApproxProblem pb = make_approx_problem(s, 2, 50.0, 1e-3);
  const double q = 2.0;
  const AnnulusGrid g(pb, 256, 33, q);
  const double eq = std::expm1(q);
  for (int i : {0, 1, 100, 254, 255}) {
    for (int j : {0, 5, 16, 31, 32}) {
      const double sv = g.s(i);
      const double tv = g.theta(j);
      const double rho = s.rho(tv);
      const double a = std::log(rho);
      const double ap = s.drho(tv) / rho;
      const double app =
          (s.d2rho(tv) * rho - s.drho(tv) * s.drho(tv)) / (rho * rho);
      const double b = std::log(50.0) - a;
      const double m = std::expm1(q * sv) / eq;
      const double mp = q * std::exp(q * sv) / eq;
      const double mpp = q * q * std::exp(q * sv) / eq;
      const auto ch = g.chain(i, j);
      CHECK(ch.r == doctest::Approx(std::exp(a + m * b)).epsilon(1e-13));
      CHECK(ch.p == doctest::Approx(mp * b).epsilon(1e-12));
      CHECK(ch.ps == doctest::Approx(mpp * b).epsilon(1e-12));
      CHECK(ch.ptheta == doctest::Approx(-mp * ap).epsilon(1e-12));
      CHECK(ch.c == doctest::Approx(ap * (1.0 - m)).epsilon(1e-12));
      CHECK(ch.ctheta == doctest::Approx(app * (1.0 - m)).epsilon(1e-12));
    }
  }
}

TEST_CASE("AnnulusGrid::to_physical: inverts the chain rule exactly") {
  RadialSurface s(5, {1.0, 0.0, 0.2});
  const ApproxProblem pb = make_approx_problem(s, 2, 50.0, 1e-3);
  const AnnulusGrid g(pb, 256, 33);
  for (int i : {3, 130, 250}) {
    for (int j : {1, 7, 29}) {
      const auto ch = g.chain(i, j);
      const double r = ch.r;
      const double t = g.theta(j);
      // computational derivatives of U(s,theta) = u(r(s,theta), theta) by
      // the forward chain rule
      const double rp = r * ch.p;  // dr/ds
      const double us = Profile::ur(r, t) * rp;
      const double uss = Profile::urr(r, t) * rp * rp +
                         Profile::ur(r, t) * (r * ch.p * ch.p + r * ch.ps);
      const double ut = Profile::ur(r, t) * r * ch.c + Profile::ut(r, t);
      const double ust = Profile::urr(r, t) * r * r * ch.p * ch.c +
                         Profile::ur(r, t) * r * (ch.p * ch.c + ch.ptheta) +
                         Profile::urt(r, t) * rp;
      const double utt = Profile::urr(r, t) * r * r * ch.c * ch.c +
                         2.0 * Profile::urt(r, t) * r * ch.c +
                         Profile::ur(r, t) * r * (ch.c * ch.c + ch.ctheta) +
                         Profile::utt(r, t);
      const auto d = g.to_physical(i, j, us, uss, ut, ust, utt);
      CHECK(d.ur == doctest::Approx(Profile::ur(r, t)).epsilon(1e-11));
      CHECK(d.utheta == doctest::Approx(Profile::ut(r, t)).epsilon(1e-11));
      CHECK(d.urr == doctest::Approx(Profile::urr(r, t)).epsilon(1e-10));
      CHECK(d.urtheta == doctest::Approx(Profile::urt(r, t)).epsilon(1e-10));
      CHECK(d.uthetatheta ==
            doctest::Approx(Profile::utt(r, t)).epsilon(1e-10));
    }
  }
}

TEST_CASE("SolutionField::reconstruct: 4th-order accuracy on an analytic field") {
  RadialSurface s(5, {1.0, 0.0, 0.2});
  const ApproxProblem pb = make_approx_problem(s, 2, 20.0, 1e-3);
  auto fill = [&](int ns, int nt) {
    AnnulusGrid g(pb, ns, nt, 2.0);
    SolutionField f(g);
    for (int i = 0; i < ns; ++i)
      for (int j = 0; j < nt; ++j)
        f.values()(i, j) = Profile::u(g.r(i, j), g.theta(j));
    return f;
  };
  const SolutionField f = fill(256, 33);
  const AnnulusGrid& g = f.grid();
  // interior, edge-biased rows, and pole columns
  for (int i : {0, 1, 128, 254, 255}) {
    for (int j : {0, 1, 16, 31, 32}) {
      const double r = g.r(i, j);
      const double t = g.theta(j);
      const auto d = f.reconstruct(i, j);
      CHECK(d.u == doctest::Approx(Profile::u(r, t)).epsilon(1e-14));
      CHECK(d.ur == doctest::Approx(Profile::ur(r, t)).epsilon(1e-7));
      CHECK(d.utheta == doctest::Approx(Profile::ut(r, t)).epsilon(1e-3));
      CHECK(d.urr == doctest::Approx(Profile::urr(r, t)).epsilon(1e-5));
      CHECK(d.uthetatheta ==
            doctest::Approx(Profile::utt(r, t)).epsilon(1e-4));
    }
  }
  // pole columns carry no first theta derivative by even reflection (the
  // folded stencil cancels to rounding, not symbolically)
  for (int i : {0, 100, 255}) {
    CHECK(std::abs(f.reconstruct(i, 0).utheta) <= 1e-13);
    CHECK(std::abs(f.reconstruct(i, 32).utheta) <= 1e-13);
  }
  // gradient norm and Hessian eigenvalues are wired through the same data
  const auto d = f.reconstruct(128, 16);
  const double r = g.r(128, 16);
  CHECK(f.gradient_norm(128, 16) ==
        doctest::Approx(std::hypot(d.ur, d.utheta / r)).epsilon(1e-13));
  const Spectrum eigs = f.hessian_eigenvalues(128, 16);
  CHECK(eigs.size() == 5);
  // refinement: interior u_rr error drops by ~2^4 when ns and ntheta double
  const SolutionField coarse = fill(128, 17);
  const SolutionField fine = fill(256, 33);
  auto max_err_urr = [](const SolutionField& fld) {
    double worst = 0.0;
    const AnnulusGrid& gg = fld.grid();
    for (int i = 4; i < gg.ns() - 4; i += 3) {
      for (int j = 2; j < gg.ntheta() - 2; ++j) {
        const double err = std::abs(fld.reconstruct(i, j).urr -
                                    Profile::urr(gg.r(i, j), gg.theta(j)));
        worst = std::max(worst, err);
      }
    }
    return worst;
  };
  const double e_coarse = max_err_urr(coarse);
  const double e_fine = max_err_urr(fine);
  CHECK(e_coarse / e_fine >= 8.0);
}

TEST_CASE("SolutionField: dump/load round trip is byte-stable") {
  const ApproxProblem pb = ball_problem(1.0, 40.0, 1e-3);
  AnnulusGrid g(pb, 256, 17);
  SolutionField f(g);
  for (int i = 0; i < g.ns(); ++i)
    for (int j = 0; j < g.ntheta(); ++j)
      f.values()(i, j) = radial_ball_solution(5, 2, 1.0, g.r(i, j));
  f.gamma_override = 1.0123456789012345;
  Eigen::VectorXd bg(g.ntheta());
  for (int j = 0; j < g.ntheta(); ++j) bg[j] = 0.5 + 1e-3 * j;
  f.boundary_gradient_override = bg;
  const std::string p1 = "khx_test_field_a.bin";
  const std::string p2 = "khx_test_field_b.bin";
  f.dump(p1);
  const SolutionField loaded = SolutionField::load(p1);
  CHECK(loaded.grid().ns() == 256);
  CHECK(loaded.grid().ntheta() == 17);
  CHECK((loaded.values() - f.values()).cwiseAbs().maxCoeff() == 0.0);
  REQUIRE(loaded.gamma_override.has_value());
  CHECK(*loaded.gamma_override == *f.gamma_override);
  REQUIRE(loaded.boundary_gradient_override.has_value());
  CHECK((*loaded.boundary_gradient_override - bg).cwiseAbs().maxCoeff() == 0.0);
  loaded.dump(p2);
  CHECK(slurp(p1) == slurp(p2));
  CHECK_THROWS_AS(SolutionField::load("no_such_khx_field.bin"),
                  std::runtime_error);
  std::remove(p1.c_str());
  std::remove(p2.c_str());
}

TEST_CASE("solve_radial: eps = 0 reproduces the exact two-point solution") {
  const int ns = 512;
  const auto [field, report] = solve_radial(5, 2, 1.0, 100.0, 0.0, ns, 1e-3);
  // the field is the closed form, but the reported residual is its 4th-order
  // discrete S_k evaluation, so it is truncation-small rather than zero
  CHECK(report.final_residual <= 1e-8);
  // closed form A - B r^(-1/2) through u(1) = -1, u(R) = b_R
  const ApproxProblem pb = ball_problem(1.0, 100.0, 0.0, 1e-3);
  const double B = (pb.b_R + 1.0) / (1.0 - std::pow(100.0, -0.5));
  const double A = -1.0 + B;
  const AnnulusGrid& g = field.grid();
  double worst = 0.0;
  for (int i = 0; i < g.ns(); ++i) {
    const double r = g.r(i, 0);
    const double exact = A - B * std::pow(r, -0.5);
    worst = std::max(worst, std::abs(field.value(i, 0) - exact));
  }
  CHECK(worst <= 1e-12);
  CHECK(report.asym.gamma == doctest::Approx(B).epsilon(1e-10));
  CHECK(report.asym.decay_ok);
  CHECK(report.sandwich_ok);
  CHECK(report.band_ok);
}

TEST_CASE("solve_radial: eps > 0 Newton run converges inside the sandwich") {
  const auto [field, report] = solve_radial(5, 2, 1.0, 100.0, 1e-3, 512, 0.05);
  CHECK(report.final_residual <=
        1e-8 * report.residual_scale + 1e-15);
  CHECK(report.newton_iterations >= 1);
  CHECK(report.sandwich_ok);
  CHECK(report.sandwich_violation <= 1e-6);
  CHECK(report.band_ok);
  CHECK(report.asym.decay_ok);
  // the affine fit absorbs the outer-boundary offset: gamma close to the
  // exact two-point slope
  const ApproxProblem pb = ball_problem(1.0, 100.0, 1e-3, 0.05);
  const double B = (pb.b_R + 1.0) / (1.0 - std::pow(100.0, -0.5));
  CHECK(report.asym.gamma == doctest::Approx(B).epsilon(5e-3));
  CHECK_FALSE(report.asym.low_confidence);
  // broadcast field is theta-constant
  const AnnulusGrid& g = field.grid();
  for (int i : {0, 200, 511}) {
    for (int j = 1; j < g.ntheta(); ++j) {
      CHECK(field.value(i, j) == field.value(i, 0));
    }
  }
  CHECK_THROWS_AS(solve_radial(5, 2, 1.0, 100.0, 1e-3, 128), std::invalid_argument);
  CHECK_THROWS_AS(solve_radial(4, 2, 1.0, 100.0, 1e-3, 512), std::domain_error);
}

TEST_CASE("solve_axisym: ball solve matches the radial solver") {
  const ApproxProblem pb = ball_problem(1.0, 40.0, 1e-3);
  const AnnulusGrid g(pb, 192, 17);
  SolverConfig cfg;
  const auto [field, report] = solve_axisym(pb, g, cfg);
  CHECK(report.final_residual <= cfg.tol_res_factor * report.residual_scale);
  CHECK(report.sandwich_ok);
  CHECK(report.band_ok);
  CHECK(report.admissibility_margin > 0.0);
  const auto [rfield, rreport] = solve_radial(5, 2, 1.0, 40.0, 1e-3, 2048);
  // compare on the axisym nodes through cubic interpolation in log r: the
  // radial grid is fine enough that its own error is negligible here
  double worst = 0.0;
  const AnnulusGrid& rg = rfield.grid();
  for (int i = 0; i < g.ns(); ++i) {
    const double l = std::log(g.r(i, 0));
    // locate the radial node bracket
    int lo = 0;
    int hi = rg.ns() - 1;
    while (hi - lo > 1) {
      const int mid = (lo + hi) / 2;
      (std::log(rg.r(mid, 0)) <= l ? lo : hi) = mid;
    }
    const int base = std::clamp(lo - 1, 0, rg.ns() - 4);
    double xs[4];
    double ys[4];
    for (int q = 0; q < 4; ++q) {
      xs[q] = std::log(rg.r(base + q, 0));
      ys[q] = rfield.value(base + q, 0);
    }
    double val = 0.0;
    for (int q = 0; q < 4; ++q) {
      double w = 1.0;
      for (int m = 0; m < 4; ++m)
        if (m != q) w *= (l - xs[m]) / (xs[q] - xs[m]);
      val += w * ys[q];
    }
    for (int j = 0; j < g.ntheta(); ++j) {
      worst = std::max(worst, std::abs(field.value(i, j) - val));
    }
  }
  CHECK(worst <= 5e-4);
  // the poles carry no spurious first theta derivative (to rounding)
  for (int i : {2, 100, 189}) {
    CHECK(std::abs(field.reconstruct(i, 0).utheta) <= 1e-13);
    CHECK(std::abs(field.reconstruct(i, 16).utheta) <= 1e-13);
  }
}

TEST_CASE("solve_axisym: guards") {
  const ApproxProblem pb0 = ball_problem(1.0, 40.0, 0.0);
  const AnnulusGrid g0(pb0, 192, 17);
  CHECK_THROWS_AS(solve_axisym(pb0, g0), std::invalid_argument);  // eps = 0
  RadialSurface pinched(5, {1.0, 0.0, 0.9});
  const ApproxProblem pbad = make_approx_problem(pinched, 2, 40.0, 1e-3);
  const AnnulusGrid gbad(pbad, 192, 17);
  CHECK_THROWS_AS(solve_axisym(pbad, gbad), std::domain_error);
  // failure carries the residual trace
  const ApproxProblem pb = make_approx_problem(RadialSurface(5, {1.0, 0.0, 0.1}),
                                               2, 40.0, 5e-3);
  const AnnulusGrid g(pb, 192, 17);
  SolverConfig strangled;
  strangled.max_newton = 1;
  strangled.tol_res_factor = 1e-14;
  try {
    solve_axisym(pb, g, strangled);
    FAIL("expected SolveFailure");
  } catch (const SolveFailure& e) {
    CHECK_FALSE(e.residual_history.empty());
  }
}

TEST_CASE("asymptotics_report: exact decaying field") {
  const ApproxProblem pb = ball_problem(2.0, 200.0, 0.0, 1e-6);
  AnnulusGrid g(pb, 384, 17);
  SolutionField f(g);
  for (int i = 0; i < g.ns(); ++i)
    for (int j = 0; j < g.ntheta(); ++j)
      f.values()(i, j) = radial_ball_solution(5, 2, 2.0, g.r(i, j));
  const AsymptoticsReport rep = asymptotics_report(f);
  const double gamma = ball_gamma(5, 2, 2.0);  // sqrt(2)
  CHECK(rep.gamma == doctest::Approx(gamma).epsilon(1e-9));
  CHECK(rep.gamma_median == doctest::Approx(gamma).epsilon(1e-9));
  CHECK(rep.gamma_spread <= 1e-8);
  CHECK_FALSE(rep.low_confidence);
  CHECK(rep.decay_u == doctest::Approx(0.5).epsilon(0.02));
  CHECK(rep.decay_du == doctest::Approx(1.5).epsilon(0.02));
  CHECK(rep.decay_d2u == doctest::Approx(2.5).epsilon(0.02));
  CHECK(rep.decay_ok);
  CHECK(rep.window_r_min >= 200.0 / 4 * 0.999);
  CHECK(rep.window_r_max <= 200.0 / 2 * 1.001);
  CHECK(rep.window_nodes > 10);
  // the override is preferred by consumers but does not change the fit
  f.gamma_override = 99.0;
  CHECK(asymptotics_report(f).gamma == doctest::Approx(gamma).epsilon(1e-9));
}

TEST_CASE("continuation_solve: radial path schedules and extrapolations") {
  RadialSurface ball(5, {1.0});
  SolverConfig cfg;
  // eps continuation at fixed R: linear eps extrapolation reported
  const ContinuationResult eps_run = continuation_solve(
      ball, 2, {1e-3, 1e-4}, {40.0}, 512, 17, 2.0, 1e-3, cfg, true);
  CHECK(eps_run.stages.size() == 2);
  CHECK(eps_run.stages[0].eps == 1e-3);
  CHECK(eps_run.stages[1].eps == 1e-4);
  CHECK(eps_run.stages[0].R == 40.0);
  CHECK(eps_run.stages[1].R == 40.0);
  CHECK(eps_run.gamma_eps_linear.has_value());
  CHECK_FALSE(eps_run.gamma_richardson.has_value());
  CHECK(eps_run.report.sandwich_ok);
  // R continuation: Richardson extrapolation lands on the exact gamma = 1
  const ContinuationResult r_run = continuation_solve(
      ball, 2, {1e-4}, {40.0, 160.0, 640.0}, 512, 17, 2.0, 1e-3, cfg, true);
  CHECK(r_run.stages.size() == 3);
  REQUIRE(r_run.gamma_richardson.has_value());
  CHECK(*r_run.gamma_richardson == doctest::Approx(1.0).epsilon(2e-3));
  REQUIRE(r_run.field.gamma_override.has_value());
  CHECK(*r_run.field.gamma_override == *r_run.gamma_richardson);
  CHECK(r_run.field.boundary_gradient_override.has_value());
  // raw per-stage gammas are monotone toward the exact value from above
  CHECK(r_run.stages[0].gamma >= r_run.stages[1].gamma);
  CHECK(r_run.stages[1].gamma >= r_run.stages[2].gamma);
  CHECK(r_run.stages[2].gamma >= 1.0 - 1e-9);
  // schedule validation
  CHECK_THROWS_AS(continuation_solve(ball, 2, {1e-4, 1e-3}, {40.0}, 512, 17,
                                     2.0, 1e-3, cfg, true),
                  std::invalid_argument);
  CHECK_THROWS_AS(continuation_solve(ball, 2, {1e-3}, {80.0, 40.0}, 512, 17,
                                     2.0, 1e-3, cfg, true),
                  std::invalid_argument);
  CHECK_THROWS_AS(continuation_solve(ball, 2, {}, {40.0}, 512, 17, 2.0, 1e-3,
                                     cfg, true),
                  std::invalid_argument);
}

TEST_CASE("continuation_solve: axisymmetric warm start across grids") {
  RadialSurface s(5, {1.0, 0.0, 0.1});
  SolverConfig cfg;
  const ContinuationResult run = continuation_solve(
      s, 2, {2e-3, 1e-3}, {20.0, 40.0}, 192, 17, 2.0, 0.05, cfg, false);
  CHECK(run.stages.size() == 2);
  CHECK(run.report.sandwich_ok);
  CHECK(run.report.band_ok);
  CHECK(run.report.final_residual <=
        cfg.tol_res_factor * run.report.residual_scale);
  CHECK(run.field.grid().problem().R == 40.0);
  // warm start keeps the second stage cheap
  CHECK(run.stages[1].newton_iterations <= run.stages[0].newton_iterations + 2);
}
