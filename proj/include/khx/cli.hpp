#pragma once

// Command-line front end: verify-identities, solve, minkowski, and
// barriers-table subcommands over the line-oriented config format, writing
// deterministic JSON/CSV/field artifacts into the output directory.

#include <string>
#include <vector>

namespace khx::cli {

/// Runs the tool on argv[1..] (natural order, program name excluded) and
/// returns the process exit code: 0 on success, 1 when verification suites
/// fail, 2 on rejected inputs (bad config, inadmissible domain, violated
/// hypotheses), CLI11's own codes for usage errors.
int run(std::vector<std::string> args);

}  // namespace khx::cli
