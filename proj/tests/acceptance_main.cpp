// Acceptance gate for the exterior k-Hessian laboratory: thirteen
// criteria, one printed verdict line each, nonzero exit when any fails.
// Tolerances are pinned in the criterion bodies, next to the quantities
// they gate.

#include "khx/barriers.hpp"
#include "khx/geometry.hpp"
#include "khx/minkowski.hpp"
#include "khx/solver.hpp"
#include "khx/verify.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <utility>
#include <vector>

using namespace khx;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

constexpr double kPhiBall = 13.159472534785811492;  // 4 pi^2 / 3
constexpr std::uint64_t kSeed = 20260816ull;

/// Every solve this binary accepts lands here; criterion 13 audits them.
std::vector<std::pair<std::string, SolveReport>> g_solves;

/// 4-point Lagrange interpolation of a radial solution in log r.
double radial_interp(const SolutionField& rf, double r) {
  const AnnulusGrid& g = rf.grid();
  const int ns = g.ns();
  int lo = 0, hi = ns - 1;
  while (hi - lo > 1) {
    const int mid = (lo + hi) / 2;
    (g.r(mid, 0) <= r ? lo : hi) = mid;
  }
  const int base = std::max(0, std::min(lo - 1, ns - 4));
  const double l = std::log(r);
  double val = 0.0;
  for (int q = 0; q < 4; ++q) {
    double w = 1.0;
    for (int m = 0; m < 4; ++m) {
      if (m == q) continue;
      w *= (l - std::log(g.r(base + m, 0))) /
           (std::log(g.r(base + q, 0)) - std::log(g.r(base + m, 0)));
    }
    val += w * rf.value(base + q, 0);
  }
  return val;
}

Outcome criterion_1_radial_exactness() {
  const auto t0 = Clock::now();
  const RadialSurface ball(5, {1.0});
  // continuation to eps = 1e-6 at R = 100 on the 2048-node radial grid;
  // delta = 1e-4 keeps the approximating problem itself inside the 1e-4
  // error budget (its exact solution differs from -r^(-1/2) by
  // ~ 0.1 (1 - C0) / 0.9)
  const ContinuationResult res = continuation_solve(
      ball, 2, {1e-4, 1e-6}, {100.0}, 2048, 9, 2.0, 1e-4, {}, true);
  const double dt = seconds_since(t0);
  g_solves.emplace_back("radial continuation eps->1e-6", res.report);

  const AnnulusGrid& g = res.field.grid();
  double err = 0.0;
  for (int i = 0; i < g.ns(); ++i)
    for (int j = 0; j < g.ntheta(); ++j)
      err = std::max(err, std::abs(res.field.value(i, j) +
                                   std::pow(g.r(i, j), -0.5)));
  const double gamma = res.report.asym.gamma;
  const bool pass = err <= 1e-4 && std::abs(gamma - 1.0) <= 1e-2 && dt <= 5.0;
  return {pass, "max|u - (-r^-1/2)| = " + num(err) + " (tol 1e-4), gamma = " +
                    num(gamma) + " (1 +- 1%), " + num(dt) + " s (limit 5)"};
}

Outcome criterion_2_axisym_vs_radial() {
  const auto t0 = Clock::now();
  const RadialSurface ball(5, {1.0});
  const double R = 40.0, eps = 5e-3;
  const ApproxProblem pb = make_approx_problem(ball, 2, R, eps);
  const AnnulusGrid grid(pb, 512, 64);
  const auto [f2, rep2] = solve_axisym(pb, grid);
  const auto [fr, repr] = solve_radial(5, 2, 1.0, R, eps, 2048);
  const double dt = seconds_since(t0);
  g_solves.emplace_back("axisymmetric ball 512x64", rep2);
  g_solves.emplace_back("radial ball reference 2048", repr);

  double diff = 0.0;
  for (int i = 0; i < grid.ns(); ++i) {
    const double ref = radial_interp(fr, grid.r(i, 0));
    for (int j = 0; j < grid.ntheta(); ++j)
      diff = std::max(diff, std::abs(f2.value(i, j) - ref));
  }
  const bool pass =
      diff <= 5e-4 && rep2.final_residual <= 1e-8 && dt <= 120.0;
  return {pass, "max discrepancy = " + num(diff) + " (tol 5e-4), residual = " +
                    num(rep2.final_residual) + " (tol 1e-8), " + num(dt) +
                    " s (limit 120)"};
}

Outcome criterion_3_phi_constancy() {
  const RadialSurface ball(5, {1.0});
  const ApproxProblem pb = make_approx_problem(ball, 2, 500.0, 0.0);
  AnnulusGrid g(pb, 768, 48);
  SolutionField f(g);
  for (int i = 0; i < g.ns(); ++i)
    for (int j = 0; j < g.ntheta(); ++j)
      f.values()(i, j) = -std::pow(g.r(i, j), -0.5);
  f.gamma_override = 1.0;

  std::vector<double> taus(25);
  for (int i = 0; i < 25; ++i) taus[i] = -20.0 + 19.0 * i / 24.0;
  const PhiSeries s = phi_series(f, 1.0, taus);
  if (s.rows.size() != taus.size())
    return {false, "only " + std::to_string(s.rows.size()) + " of 25 levels"};
  double dev = 0.0;
  bool regular = true;
  for (const PhiValue& v : s.rows) {
    dev = std::max(dev, std::abs(v.phi - kPhiBall) / kPhiBall);
    regular = regular && v.regular;
  }
  const bool pass = dev <= 5e-3 && regular;
  return {pass, "25 levels on tau in [-20, -1], max rel dev from 4 pi^2/3 = " +
                    num(dev) + " (tol 0.5%)"};
}

Outcome criterion_4_ball_equality() {
  std::string detail;
  bool pass = true;
  for (double rho0 : {1.0, 2.0}) {
    const RadialSurface ball(5, {rho0});
    // three R stages give the quadratic extrapolation in R^(-alpha0) that
    // removes the artificial-boundary bias from gamma and the boundary
    // gradient; beta = 1 makes the right-hand side gamma-free
    const ContinuationResult res = continuation_solve(
        ball, 2, {1e-5}, {100.0 * rho0, 400.0 * rho0, 1600.0 * rho0}, 2048, 9,
        2.0, 0.01, {}, true);
    g_solves.emplace_back("ball equality rho0 = " + num(rho0), res.report);
    const MinkowskiReport mr = minkowski_report(res.field, ball, 1.0);
    pass = pass && std::abs(mr.ratio - 1.0) <= 1.5e-2;
    if (!detail.empty()) detail += ", ";
    detail += "rho0 = " + num(rho0) + ": lhs/rhs = " + num(mr.ratio);
  }
  return {pass, detail + " (tol 1 +- 1.5%)"};
}

Outcome criterion_5_nonball_strictness() {
  const RadialSurface wob(5, {1.0, 0.0, 0.1});
  const ContinuationResult res =
      continuation_solve(wob, 2, {2e-3, 1e-3, 5e-4}, {200.0, 800.0, 3200.0},
                         384, 33);
  g_solves.emplace_back("perturbed domain continuation", res.report);

  // near-boundary tau window: the weighted integrals vary fastest where the
  // domain's asphericity lives, and the artificial-boundary artifact decays
  // like (r_tau / R)^(1/2)
  std::vector<double> taus(21);
  for (int i = 0; i < 21; ++i) taus[i] = -2.5 + 1.5 * i / 20.0;

  std::string detail;
  bool pass = true;
  for (double beta : {1.0 / 3.0, 1.0}) {
    const MinkowskiReport mr = minkowski_report(res.field, wob, beta);
    const double gap = mr.lhs - mr.rhs;
    const PhiSeries s = phi_series(res.field, beta, taus);
    int regular = 0;
    for (const PhiValue& v : s.rows) regular += v.regular ? 1 : 0;
    pass = pass && gap > 0.0 && regular >= 20 && s.monotone;
    if (!detail.empty()) detail += "; ";
    detail += "beta = " + num(beta) + ": gap = " + num(gap) + " (> 0), " +
              std::to_string(regular) + " regular levels, " +
              (s.monotone ? "non-decreasing" : "NOT monotone");
  }
  return {pass, detail};
}

Outcome criterion_6_kato_suite() {
  const auto t0 = Clock::now();
  const SuiteResult gap = run_suite("kato", kSeed, 100000);
  const SuiteResult eq = run_suite("kato-equality", kSeed, 100000);
  const double dt = seconds_since(t0);
  const bool pass = gap.pass && eq.pass && dt <= 30.0;
  return {pass, "min gap = " + num(gap.min_margin) +
                    " (tol -1e-10), radial equality dev = " +
                    num(-eq.min_margin) + " (tol 1e-12), " + num(dt) +
                    " s (limit 30)"};
}

Outcome criterion_7_maclaurin_suite() {
  const SuiteResult s = run_suite("maclaurin", kSeed, 100000);
  return {s.pass, "min gap = " + num(s.min_margin) + " (tol -1e-12), " +
                      std::to_string(s.samples) + " samples"};
}

Outcome criterion_8_barrier_fidelity() {
  const SuiteResult s = run_suite("barrier-fd", kSeed, 100);
  return {s.pass, "max rel err = " + num(-s.min_margin) + " (tol 1e-6), " +
                      std::to_string(s.samples) + " points"};
}

Outcome criterion_9_spherical_hessian() {
  const SuiteResult s = run_suite("spherical-hessian", kSeed, 20);
  return {s.pass, "max rel err = " + num(-s.min_margin) + " (tol 1e-6), " +
                      std::to_string(s.samples) + " fields"};
}

Outcome criterion_10_subsolution_certificate() {
  std::string detail;
  bool pass = true;
  for (const auto& surf :
       {RadialSurface(5, {1.0}), RadialSurface(5, {1.0, 0.0, 0.1})}) {
    const SubsolutionParams p = select_subsolution_N(surf, 2);
    std::mt19937_64 rng(kSeed);
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    double worst = std::numeric_limits<double>::infinity();
    for (int s = 0; s < 10000; ++s) {
      const double theta = M_PI * u01(rng);
      const double gval = 1.0 + 9.0 * u01(rng);
      const double r = gval * surf.rho(theta);
      const double v = subsolution_sigma_k(surf, p.N, theta, r, 2) * r * r;
      worst = std::min(worst, v);
    }
    pass = pass && worst >= 1.0;
    if (!detail.empty()) detail += ", ";
    detail += "N = " + std::to_string(p.N) +
              ": min sigma_k r^k = " + num(worst);
  }
  return {pass, detail + " (>= 1 over 1e4 samples each)"};
}

Outcome criterion_11_divergence_free() {
  const SuiteResult s = run_suite("newton-div", kSeed, 200);
  return {s.pass,
          "FD divergence ratio within 4 +- 20% on every sample (worst "
          "slack margin = " +
              num(s.min_margin) + ")"};
}

Outcome criterion_12_degenerate_rejection() {
  bool rejected = false;
  std::string msg;
  try {
    make_approx_problem(RadialSurface(4, {1.0}), 2, 40.0, 1e-3);
  } catch (const std::domain_error& e) {
    msg = e.what();
    rejected = msg.find("log") != std::string::npos;
  }
  double worst = 0.0;
  for (int n : {4, 6})
    for (double C : {0.5, 1.0, 2.0, 3.0})
      for (double r : {0.5, 1.0, 2.0, 10.0})
        worst = std::max(worst, std::abs(log_solution_check(n, C, r)));
  const bool pass = rejected && worst <= 1e-12;
  return {pass, std::string("n = 2k rejected citing the log obstruction: ") +
                    (rejected ? "yes" : "NO") +
                    ", max |S_{n/2}(log profile)| = " + num(worst) +
                    " (tol 1e-12)"};
}

Outcome criterion_13_sandwich_and_band() {
  bool pass = !g_solves.empty();
  double worst_violation = 0.0;
  std::string offender;
  for (const auto& [name, rep] : g_solves) {
    worst_violation = std::max(worst_violation, rep.sandwich_violation);
    const bool ok =
        rep.sandwich_ok && rep.sandwich_violation <= 1e-6 && rep.band_ok;
    if (!ok && offender.empty()) offender = name;
    pass = pass && ok;
  }
  std::string detail = std::to_string(g_solves.size()) +
                       " accepted solves audited, worst sandwich slack = " +
                       num(worst_violation) +
                       " (tol 1e-6), gradient bands within 5%";
  if (!offender.empty()) detail += "; FIRST OFFENDER: " + offender;
  return {pass, detail};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> table = {
      {"radial exactness", criterion_1_radial_exactness},
      {"axisymmetric vs radial oracle", criterion_2_axisym_vs_radial},
      {"weighted-integral constancy", criterion_3_phi_constancy},
      {"ball boundary equality", criterion_4_ball_equality},
      {"non-ball strictness + monotonicity", criterion_5_nonball_strictness},
      {"eigenvalue-gap suite", criterion_6_kato_suite},
      {"symmetric-mean inequality suite", criterion_7_maclaurin_suite},
      {"barrier formula fidelity", criterion_8_barrier_fidelity},
      {"spherical Hessian fidelity", criterion_9_spherical_hessian},
      {"subsolution certificate", criterion_10_subsolution_certificate},
      {"divergence-free Newton tensor", criterion_11_divergence_free},
      {"degenerate-case rejections", criterion_12_degenerate_rejection},
      {"sandwich and gradient band", criterion_13_sandwich_and_band},
  };

  int failures = 0;
  for (std::size_t i = 0; i < table.size(); ++i) {
    Outcome out;
    try {
      out = table[i].second();
    } catch (const std::exception& e) {
      out = {false, std::string("exception: ") + e.what()};
    }
    failures += out.pass ? 0 : 1;
    std::printf("criterion %2zu %s  %-36s %s\n", i + 1,
                out.pass ? "PASS" : "FAIL", table[i].first.c_str(),
                out.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("acceptance: %zu/%zu criteria passed\n", table.size() - failures,
              table.size());
  return failures == 0 ? 0 : 1;
}
