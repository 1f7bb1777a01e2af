#include "khx/report.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace khx {

std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : s) {
    h ^= static_cast<std::uint64_t>(c);
    h *= 0x100000001b3ull;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(v));
  return std::string(buf);
}

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return std::string(buf);
}

namespace {

Json optional_json(const std::optional<double>& v) {
  if (v) return Json(*v);
  return Json(nullptr);
}

}  // namespace

Json base_report(const RunConfig& cfg) {
  Json config;
  config["n"] = cfg.n ? Json(*cfg.n) : Json(nullptr);
  config["k"] = cfg.k ? Json(*cfg.k) : Json(nullptr);
  config["rho_coeffs"] = cfg.rho_coeffs;
  config["ns"] = cfg.ns;
  config["ntheta"] = cfg.ntheta;
  config["grading"] = cfg.grading;
  config["R"] = cfg.R;
  config["eps"] = cfg.eps;
  config["delta"] = cfg.delta;
  config["eps_schedule"] = cfg.eps_schedule;
  config["R_schedule"] = cfg.R_schedule;
  config["tol_res"] = cfg.tol_res;
  config["max_newton"] = cfg.max_newton;
  config["max_halvings"] = cfg.max_halvings;
  config["beta"] = cfg.beta;
  config["tau_min"] = cfg.tau_min;
  config["tau_count"] = cfg.tau_count;
  config["seed"] = cfg.seed;
  config["suite"] = cfg.suite;
  config["samples"] = cfg.samples;
  config["out"] = cfg.out;
  config["field"] = cfg.field;

  Json root;
  root["schema_version"] = 1;
  root["config_hash"] = hex64(fnv1a64(config_echo(cfg)));
  root["config"] = std::move(config);
  return root;
}

Json to_json(const AsymptoticsReport& a) {
  Json j;
  j["gamma"] = a.gamma;
  j["gamma_median"] = a.gamma_median;
  j["gamma_spread"] = a.gamma_spread;
  j["low_confidence"] = a.low_confidence;
  j["decay_u"] = a.decay_u;
  j["decay_du"] = a.decay_du;
  j["decay_d2u"] = a.decay_d2u;
  j["decay_ok"] = a.decay_ok;
  j["window_r_min"] = a.window_r_min;
  j["window_r_max"] = a.window_r_max;
  j["window_nodes"] = a.window_nodes;
  return j;
}

Json to_json(const SolveReport& r) {
  Json j;
  j["newton_iterations"] = r.newton_iterations;
  j["final_residual"] = r.final_residual;
  j["residual_scale"] = r.residual_scale;
  j["residual_history"] = r.residual_history;
  j["admissibility_margin"] = r.admissibility_margin;
  j["sandwich_violation"] = r.sandwich_violation;
  j["sandwich_ok"] = r.sandwich_ok;
  j["band_low"] = r.band_low;
  j["band_high"] = r.band_high;
  j["grad_outer_min"] = r.grad_outer_min;
  j["grad_outer_max"] = r.grad_outer_max;
  j["band_ok"] = r.band_ok;
  j["grad_inner_max"] = r.grad_inner_max;
  j["asymptotics"] = to_json(r.asym);
  return j;
}

Json to_json(const ContinuationStage& s) {
  Json j;
  j["eps"] = s.eps;
  j["R"] = s.R;
  j["gamma"] = s.gamma;
  j["final_residual"] = s.final_residual;
  j["newton_iterations"] = s.newton_iterations;
  return j;
}

Json to_json(const ContinuationResult& c) {
  Json stages = Json::array();
  for (const auto& s : c.stages) stages.push_back(to_json(s));
  Json j;
  j["stages"] = std::move(stages);
  j["gamma_richardson"] = optional_json(c.gamma_richardson);
  j["gamma_eps_linear"] = optional_json(c.gamma_eps_linear);
  j["final"] = to_json(c.report);
  return j;
}

Json to_json(const PhiValue& v) {
  Json j;
  j["tau"] = v.tau;
  j["level"] = v.level;
  j["phi"] = v.phi;
  j["phi_alt"] = v.phi_alt;
  j["quad_err"] = v.quad_err;
  j["routes_agree"] = v.routes_agree;
  j["regular"] = v.regular;
  j["min_grad"] = v.min_grad;
  return j;
}

Json to_json(const PhiSeries& s) {
  Json rows = Json::array();
  for (const auto& v : s.rows) rows.push_back(to_json(v));
  Json j;
  j["rows"] = std::move(rows);
  j["notes"] = s.notes;
  j["clamped"] = s.clamped;
  j["phi_infinity"] = optional_json(s.phi_infinity);
  j["monotone"] = s.monotone;
  j["mono_tol"] = s.mono_tol;
  return j;
}

Json to_json(const MinkowskiReport& m) {
  Json j;
  j["beta"] = m.beta;
  j["l_exponent"] = m.l_exponent;
  j["lhs"] = m.lhs;
  j["rhs"] = m.rhs;
  j["ratio"] = m.ratio;
  j["equality"] = m.equality;
  j["gamma_exponent"] = m.gamma_exponent;
  j["gamma_used"] = optional_json(m.gamma_used);
  return j;
}

Json field_summary_json(const SolutionField& field) {
  const AnnulusGrid& grid = field.grid();
  const ApproxProblem& problem = grid.problem();
  Json j;
  j["n"] = problem.n;
  j["k"] = problem.k;
  j["R"] = problem.R;
  j["eps"] = problem.eps;
  j["C0"] = problem.C0;
  j["C1"] = problem.C1;
  j["b_R"] = problem.b_R;
  j["rho_coeffs"] = problem.surface.coeffs();
  j["ns"] = grid.ns();
  j["ntheta"] = grid.ntheta();
  j["grading"] = grid.grading();
  j["gamma_override"] = optional_json(field.gamma_override);
  j["has_boundary_gradient_override"] =
      field.boundary_gradient_override.has_value();
  return j;
}

std::string phi_series_csv(const PhiSeries& series) {
  std::string out = "tau,level,phi,quad_err,regular_min_grad\n";
  for (const auto& v : series.rows) {
    out += fmt17(v.tau);
    out += ',';
    out += fmt17(v.level);
    out += ',';
    out += fmt17(v.phi);
    out += ',';
    out += fmt17(v.quad_err);
    out += ',';
    out += fmt17(v.min_grad);
    out += '\n';
  }
  return out;
}

std::string ray_csv(const SolutionField& field) {
  const AnnulusGrid& grid = field.grid();
  const int ns = grid.ns();
  const int nt = grid.ntheta();
  const double ht = grid.htheta();
  const double half_pi = std::acos(0.0);

  // Equator column position in theta index units; exact when (nt-1) is even.
  const double p = half_pi / ht;
  const int pj = static_cast<int>(std::lround(p));
  const bool exact = std::abs(p - pj) < 1e-9;
  int j0 = 0;
  double w[4] = {0, 0, 0, 0};
  if (!exact) {
    j0 = static_cast<int>(std::floor(p)) - 1;
    if (j0 < 0) j0 = 0;
    if (j0 > nt - 4) j0 = nt - 4;
    const double x = p - j0;
    for (int m = 0; m < 4; ++m) {
      double num = 1.0, den = 1.0;
      for (int l = 0; l < 4; ++l) {
        if (l == m) continue;
        num *= x - l;
        den *= m - l;
      }
      w[m] = num / den;
    }
  }

  std::string out = "r_theta0,u_theta0,r_half_pi,u_half_pi,r_pi,u_pi\n";
  const Eigen::MatrixXd& u = field.values();
  for (int i = 0; i < ns; ++i) {
    double r_eq, u_eq;
    if (exact) {
      r_eq = grid.r(i, pj);
      u_eq = u(i, pj);
    } else {
      r_eq = 0.0;
      u_eq = 0.0;
      for (int m = 0; m < 4; ++m) {
        r_eq += w[m] * grid.r(i, j0 + m);
        u_eq += w[m] * u(i, j0 + m);
      }
    }
    out += fmt17(grid.r(i, 0));
    out += ',';
    out += fmt17(u(i, 0));
    out += ',';
    out += fmt17(r_eq);
    out += ',';
    out += fmt17(u_eq);
    out += ',';
    out += fmt17(grid.r(i, nt - 1));
    out += ',';
    out += fmt17(u(i, nt - 1));
    out += '\n';
  }
  return out;
}

void write_text_file(const std::string& path, std::string_view content) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open for writing: " + path);
  f.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!f) throw std::runtime_error("write failed: " + path);
}

}  // namespace khx
