#include "khx/cli.hpp"

#include "khx/barriers.hpp"
#include "khx/config.hpp"
#include "khx/geometry.hpp"
#include "khx/minkowski.hpp"
#include "khx/report.hpp"
#include "khx/solver.hpp"
#include "khx/verify.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <stdexcept>
#include <string>
#include <vector>

namespace khx::cli {
namespace {

std::vector<double> parse_double_list(const std::string& text) {
  std::vector<double> out;
  std::string cur;
  auto flush = [&] {
    if (cur.empty()) return;
    std::size_t pos = 0;
    const double v = std::stod(cur, &pos);
    if (pos != cur.size())
      throw std::invalid_argument("malformed number in list: '" + cur + "'");
    out.push_back(v);
    cur.clear();
  };
  for (char c : text) {
    if (c == ',' || c == ' ' || c == '\t') {
      flush();
    } else {
      cur += c;
    }
  }
  flush();
  if (out.empty()) throw std::invalid_argument("empty number list");
  return out;
}

std::string out_path(const RunConfig& cfg, const std::string& name) {
  return (std::filesystem::path(cfg.out) / name).string();
}

void ensure_out_dir(const RunConfig& cfg) {
  std::filesystem::create_directories(cfg.out);
}

void write_json(const RunConfig& cfg, const std::string& name, const Json& j) {
  write_text_file(out_path(cfg, name), j.dump(2) + "\n");
}

Json suite_json(const SuiteResult& s) {
  Json j;
  j["name"] = s.name;
  j["samples"] = s.samples;
  j["min_margin"] = s.min_margin;
  j["tol"] = s.tol;
  j["pass"] = s.pass;
  if (!s.failing_sample.empty()) j["failing_sample"] = s.failing_sample;
  return j;
}

int cmd_verify_identities(const RunConfig& cfg) {
  std::vector<SuiteResult> results;
  if (cfg.suite == "all") {
    results = run_all_suites(cfg.seed, cfg.samples);
  } else {
    results.push_back(run_suite(cfg.suite, cfg.seed, cfg.samples));
  }

  Json root = base_report(cfg);
  Json suites = Json::array();
  bool all_pass = true;
  for (const auto& s : results) {
    suites.push_back(suite_json(s));
    all_pass = all_pass && s.pass;
    std::printf("%-18s %s  min_margin=%s  tol=%s  samples=%d\n",
                s.name.c_str(), s.pass ? "pass" : "FAIL",
                fmt17(s.min_margin).c_str(), fmt17(s.tol).c_str(), s.samples);
    if (!s.pass && !s.failing_sample.empty())
      std::printf("  worst sample: %s\n", s.failing_sample.c_str());
  }
  root["suites"] = std::move(suites);
  root["all_pass"] = all_pass;
  ensure_out_dir(cfg);
  write_json(cfg, "verify.json", root);
  std::printf("wrote %s\n", out_path(cfg, "verify.json").c_str());
  return all_pass ? 0 : 1;
}

/// Shared solve path for cmd_solve and the inline branch of cmd_minkowski:
/// admissibility gate, schedule assembly, continuation.
ContinuationResult run_solve(const RunConfig& cfg,
                             const RadialSurface& surface) {
  const int k = *cfg.k;
  const AdmissibilityCertificate cert = check_admissible_domain(surface, k);
  if (!cert.pass) {
    throw std::domain_error(
        "domain rejected by the admissibility certificate: " + cert.message);
  }
  SolverConfig solver;
  solver.tol_res_factor = cfg.tol_res;
  solver.max_newton = cfg.max_newton;
  solver.max_halvings = cfg.max_halvings;
  std::vector<double> eps_sched =
      cfg.eps_schedule.empty() ? std::vector<double>{cfg.eps}
                               : cfg.eps_schedule;
  std::vector<double> R_sched =
      cfg.R_schedule.empty() ? std::vector<double>{cfg.R} : cfg.R_schedule;
  return continuation_solve(surface, k, std::move(eps_sched),
                            std::move(R_sched), cfg.ns, cfg.ntheta,
                            cfg.grading, cfg.delta, solver);
}

int cmd_solve(const RunConfig& cfg) {
  const RadialSurface surface = surface_from_config(cfg);
  ContinuationResult result = run_solve(cfg, surface);

  ensure_out_dir(cfg);
  const std::string field_path = out_path(cfg, "field.bin");
  result.field.dump(field_path);
  write_text_file(out_path(cfg, "rays.csv"), ray_csv(result.field));

  Json root = base_report(cfg);
  root["field"] = field_summary_json(result.field);
  root["solve"] = to_json(result);
  write_json(cfg, "solve.json", root);

  const SolveReport& rep = result.report;
  std::printf("solve: %d Newton iterations, residual %s (scale %s)\n",
              rep.newton_iterations, fmt17(rep.final_residual).c_str(),
              fmt17(rep.residual_scale).c_str());
  std::printf("gamma: fit %s", fmt17(rep.asym.gamma).c_str());
  if (result.gamma_richardson)
    std::printf(", extrapolated %s", fmt17(*result.gamma_richardson).c_str());
  std::printf("\nsandwich_ok=%s band_ok=%s\n", rep.sandwich_ok ? "yes" : "NO",
              rep.band_ok ? "yes" : "NO");
  std::printf("wrote %s, %s, %s\n", field_path.c_str(),
              out_path(cfg, "solve.json").c_str(),
              out_path(cfg, "rays.csv").c_str());
  return 0;
}

int cmd_minkowski(const RunConfig& cfg) {
  // The field comes from a dump when `field` is set, otherwise from an
  // inline solve of the configured domain.
  std::optional<SolutionField> field;
  if (!cfg.field.empty()) {
    field = SolutionField::load(cfg.field);
  } else {
    const RadialSurface surface = surface_from_config(cfg);
    field = run_solve(cfg, surface).field;
  }
  const RadialSurface& surface = field->grid().problem().surface;

  std::vector<double> taus(cfg.tau_count);
  if (cfg.tau_count == 1) {
    taus[0] = cfg.tau_min;
  } else {
    for (int i = 0; i < cfg.tau_count; ++i) {
      taus[i] = cfg.tau_min +
                (-1.0 - cfg.tau_min) * i / static_cast<double>(cfg.tau_count - 1);
    }
  }

  ensure_out_dir(cfg);
  Json root = base_report(cfg);
  root["field"] = field_summary_json(*field);
  Json results = Json::array();
  for (std::size_t b = 0; b < cfg.beta.size(); ++b) {
    const double beta = cfg.beta[b];
    const PhiSeries series = phi_series(*field, beta, taus);
    const MinkowskiReport inequality = minkowski_report(*field, surface, beta);
    const std::string csv_name = "phi_series_" + std::to_string(b) + ".csv";
    write_text_file(out_path(cfg, csv_name), phi_series_csv(series));
    Json entry;
    entry["beta"] = beta;
    entry["csv"] = csv_name;
    entry["series"] = to_json(series);
    entry["inequality"] = to_json(inequality);
    results.push_back(std::move(entry));
    std::printf(
        "beta=%s: %zu levels, monotone=%s, lhs/rhs=%s, wrote %s\n",
        fmt17(beta).c_str(), series.rows.size(),
        series.monotone ? "yes" : "NO", fmt17(inequality.ratio).c_str(),
        out_path(cfg, csv_name).c_str());
  }
  root["results"] = std::move(results);
  write_json(cfg, "minkowski.json", root);
  std::printf("wrote %s\n", out_path(cfg, "minkowski.json").c_str());
  return 0;
}

int cmd_barriers_table(const RunConfig& cfg) {
  const RadialSurface surface = surface_from_config(cfg);
  const int n = surface.ambient_dim();
  const int k = *cfg.k;
  const ApproxProblem problem =
      make_approx_problem(surface, k, cfg.R, cfg.eps, cfg.delta);
  const BarrierFamily lower_family(n, k, cfg.eps, problem.C1);
  const BarrierFamily upper_family(n, k, cfg.eps, problem.C0);

  const double r0 = surface.min_rho();
  const int rows = std::max(2, cfg.ns);
  std::string csv =
      "r,phi_C0,phi_C1,f_eps_unit,mu,sandwich_lower,sandwich_upper\n";
  for (int i = 0; i < rows; ++i) {
    const double r =
        r0 * std::pow(cfg.R / r0, i / static_cast<double>(rows - 1));
    const SandwichBounds sb = sandwich_bounds(problem, r, 0.0);
    csv += fmt17(r);
    csv += ',';
    csv += fmt17(upper_family.value(r));
    csv += ',';
    csv += fmt17(lower_family.value(r));
    csv += ',';
    csv += fmt17(f_eps(n, k, cfg.eps, r));
    csv += ',';
    csv += fmt17(mu_exact(n, k, r).value);
    csv += ',';
    csv += fmt17(sb.lower);
    csv += ',';
    csv += fmt17(sb.upper);
    csv += '\n';
  }
  ensure_out_dir(cfg);
  write_text_file(out_path(cfg, "barriers.csv"), csv);

  Json root = base_report(cfg);
  Json prob;
  prob["n"] = problem.n;
  prob["k"] = problem.k;
  prob["alpha0"] = problem.alpha0();
  prob["R"] = problem.R;
  prob["eps"] = problem.eps;
  prob["C0"] = problem.C0;
  prob["C1"] = problem.C1;
  prob["b_R"] = problem.b_R;
  root["problem"] = std::move(prob);
  write_json(cfg, "barriers.json", root);
  std::printf("wrote %s and %s (C0=%s, C1=%s)\n",
              out_path(cfg, "barriers.csv").c_str(),
              out_path(cfg, "barriers.json").c_str(),
              fmt17(problem.C0).c_str(), fmt17(problem.C1).c_str());
  return 0;
}

}  // namespace

int run(std::vector<std::string> args) {
  CLI::App app{
      "Numerical laboratory for the degenerate k-Hessian equation on "
      "exterior domains"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path, out_dir, suite, beta_list;
  std::uint64_t seed = 0;
  int samples = 0;
  app.add_option("--config", config_path,
                 "line-oriented `key = value` config file");
  auto* out_opt =
      app.add_option("--out", out_dir, "output directory (overrides config)");
  auto* seed_opt =
      app.add_option("--seed", seed, "generator seed (overrides config)");
  auto* suite_opt = app.add_option(
      "--suite", suite, "verification suite name or 'all' (overrides config)");
  auto* samples_opt = app.add_option(
      "--samples", samples, "sample budget per suite (overrides config)");
  auto* beta_opt = app.add_option(
      "--beta", beta_list,
      "comma-separated weight exponents (overrides config)");

  CLI::App* verify_cmd = app.add_subcommand(
      "verify-identities",
      "run the randomized identity/inequality suites and report margins");
  CLI::App* solve_cmd = app.add_subcommand(
      "solve", "solve the configured exterior problem by continuation");
  CLI::App* minkowski_cmd = app.add_subcommand(
      "minkowski",
      "level-set curvature integrals and the boundary inequality report");
  CLI::App* barriers_cmd = app.add_subcommand(
      "barriers-table", "tabulate the barrier envelope and source term");

  std::reverse(args.begin(), args.end());
  try {
    app.parse(std::move(args));
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    RunConfig cfg;
    if (!config_path.empty()) cfg = parse_config_file(config_path);
    if (out_opt->count()) cfg.out = out_dir;
    if (seed_opt->count()) cfg.seed = seed;
    if (suite_opt->count()) cfg.suite = suite;
    if (samples_opt->count()) {
      if (samples <= 0)
        throw std::invalid_argument("--samples must be positive");
      cfg.samples = samples;
    }
    if (beta_opt->count()) cfg.beta = parse_double_list(beta_list);

    if (verify_cmd->parsed()) return cmd_verify_identities(cfg);
    if (solve_cmd->parsed()) return cmd_solve(cfg);
    if (minkowski_cmd->parsed()) return cmd_minkowski(cfg);
    if (barriers_cmd->parsed()) return cmd_barriers_table(cfg);
    return 2;  // unreachable: require_subcommand(1)
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
}

}  // namespace khx::cli
