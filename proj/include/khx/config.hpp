#pragma once

// Line-oriented `key = value` run configuration and the domain spec text
// format `n=<int> k=<int> rho=<cosine series>`. Unknown keys and
// non-positive tolerances are rejected before any computation.

#include "khx/geometry.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace khx {

struct RunConfig {
  // domain spec (text format: "n=5 k=2 rho=1+0.1*cos(2*theta)")
  std::optional<int> n;
  std::optional<int> k;
  std::vector<double> rho_coeffs;  // cosine coefficients a_0, a_1, ...

  // grid
  int ns = 384;
  int ntheta = 48;
  double grading = 2.0;

  // approximate problem
  double R = 100.0;
  double eps = 1e-4;
  double delta = 0.05;
  std::vector<double> eps_schedule;  // empty means {eps}
  std::vector<double> R_schedule;    // empty means {R}

  // solver
  double tol_res = 1e-8;
  int max_newton = 60;
  int max_halvings = 40;

  // level-set series
  std::vector<double> beta = {1.0};
  double tau_min = -20.0;
  int tau_count = 20;

  // randomized suites
  std::uint64_t seed = 20260816ull;
  std::string suite = "all";
  int samples = 100000;

  // io
  std::string out = ".";
  std::string field;  // path to an existing field dump (minkowski input)
};

/// Parses `key = value` lines ('#' starts a comment, blank lines ignored).
/// Splits on the first '=' so values may contain '=' themselves (the
/// domain spec does). Throws std::invalid_argument on unknown keys,
/// malformed numbers, or non-positive tolerances/grid sizes.
RunConfig parse_config_text(const std::string& text);

/// parse_config_text over a file's contents; std::runtime_error when the
/// file cannot be read.
RunConfig parse_config_file(const std::string& path);

/// Parses the domain spec text into cfg.n / cfg.k / cfg.rho_coeffs.
/// Format: `n=<int> k=<int> rho=<a0> [+|- <c>*cos(<m>*theta)]...`
/// (whitespace free-form, `cos(theta)` meaning m = 1 allowed). A missing
/// key is reported by name.
void parse_domain_spec(const std::string& text, RunConfig& cfg);

/// Surface from a parsed config; throws std::invalid_argument when the
/// domain spec was absent.
RadialSurface surface_from_config(const RunConfig& cfg);

/// Canonical one-line-per-key serialization of every field (17 significant
/// digits); the config hash is taken over this string, so it is stable
/// across parse round trips.
std::string config_echo(const RunConfig& cfg);

}  // namespace khx
