#pragma once

// Deterministic run artifacts: FNV-1a config fingerprints, ordered JSON
// report builders (schema_version 1, no timestamps, insertion-ordered
// keys), and fixed-format CSV emitters. Every number written to CSV goes
// through fmt17 so identical inputs give byte-identical files.

#include "khx/config.hpp"
#include "khx/minkowski.hpp"
#include "khx/solver.hpp"

#include <json.hpp>

#include <cstdint>
#include <string>
#include <string_view>

namespace khx {

using Json = nlohmann::ordered_json;

/// 64-bit FNV-1a over the bytes of s.
std::uint64_t fnv1a64(std::string_view s);

/// Lower-case, zero-padded 16-digit hex of v.
std::string hex64(std::uint64_t v);

/// "%.17g" rendering (17 significant digits round-trip IEEE binary64).
std::string fmt17(double v);

/// Report skeleton shared by every command:
///   { "schema_version": 1, "config_hash": <hex64 of fnv1a64(config_echo)>,
///     "config": { ...every RunConfig field... } }.
/// Callers append command-specific sections; nothing here depends on the
/// clock or the environment.
Json base_report(const RunConfig& cfg);

Json to_json(const AsymptoticsReport& a);
Json to_json(const SolveReport& r);
Json to_json(const ContinuationStage& s);
Json to_json(const ContinuationResult& c);
Json to_json(const PhiValue& v);
Json to_json(const PhiSeries& s);
Json to_json(const MinkowskiReport& m);

/// Provenance block for a field: problem data (n, k, R, eps, amplitudes,
/// outer boundary value, surface coefficients), grid shape, and the
/// attached overrides.
Json field_summary_json(const SolutionField& field);

/// CSV with header "tau,level,phi,quad_err,regular_min_grad", one row per
/// series entry, ending in a newline.
std::string phi_series_csv(const PhiSeries& series);

/// CSV of the solution along the theta = 0, pi/2, pi rays, one row per
/// radial node: "r_theta0,u_theta0,r_half_pi,u_half_pi,r_pi,u_pi". The
/// radius columns differ per ray on non-ball domains (the grid is
/// boundary-fitted); pi/2 values are cubic Lagrange interpolants in theta
/// when the equator is not a grid column.
std::string ray_csv(const SolutionField& field);

/// Writes content to path byte-for-byte; throws std::runtime_error when
/// the file cannot be opened.
void write_text_file(const std::string& path, std::string_view content);

}  // namespace khx
