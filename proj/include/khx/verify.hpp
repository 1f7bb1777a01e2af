#pragma once

// Randomized verification suites for the algebraic, inequality, and
// barrier identities behind the solver: symmetric-function algebra,
// Newton-tensor properties, Garding-cone sampling, Kato and
// Newton-Maclaurin gaps, spherical Hessian assembly, barrier calculus,
// subsolution certificates, and the sandwich envelope. Each suite draws
// deterministic samples from a seeded generator, evaluates a margin that
// must stay >= -tol, and remembers the worst sample it saw.

#include <cstdint>
#include <string>
#include <vector>

namespace khx {

struct SuiteResult {
  std::string name;
  int samples = 0;          // margin evaluations performed
  double min_margin = 0.0;  // worst observed margin
  double tol = 0.0;         // pass iff min_margin >= -tol
  bool pass = false;
  /// Parameters of the worst sample, filled only on failure.
  std::string failing_sample;
};

/// The available suite names in execution order.
std::vector<std::string> suite_names();

/// Runs one suite with the given sample budget (each suite documents how
/// it spends the budget; finite-difference suites cap it to stay fast).
/// The generator is seeded from (seed, suite position) so a full run and
/// a single-suite run see identical streams. Identity suites use margin =
/// -relative_error; inequality suites use the inequality margin itself.
/// Throws std::invalid_argument for unknown names.
SuiteResult run_suite(const std::string& name, std::uint64_t seed,
                      int samples);

/// Every suite in order, same seed policy as run_suite.
std::vector<SuiteResult> run_all_suites(std::uint64_t seed, int samples);

}  // namespace khx
