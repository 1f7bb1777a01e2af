#include "doctest.h"

#include "khx/cli.hpp"
#include "khx/config.hpp"
#include "khx/report.hpp"

#include <filesystem>
#include <fstream>
#include <cmath>
#include <sstream>
#include <string>

using namespace khx;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void spit(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  REQUIRE(out.good());
  out << content;
}

const char* kBallConfig =
    "# small exterior ball run\n"
    "domain = n=5 k=2 rho=1\n"
    "ns = 192\n"
    "ntheta = 17\n"
    "R = 20\n"
    "eps = 2e-3\n"
    "tau_min = -10\n"
    "tau_count = 8\n"
    "seed = 11\n";

struct Scratch {
  std::filesystem::path root;
  explicit Scratch(const std::string& name) : root(name) {
    std::filesystem::remove_all(root);
    std::filesystem::create_directories(root);
  }
  ~Scratch() { std::filesystem::remove_all(root); }
  std::string operator/(const std::string& leaf) const {
    return (root / leaf).string();
  }
};

}  // namespace

TEST_CASE("parse_domain_spec: grammar, coefficients, and named errors") {
  RunConfig cfg;
  parse_domain_spec("n=5 k=2 rho=1", cfg);
  CHECK(*cfg.n == 5);
  CHECK(*cfg.k == 2);
  REQUIRE(cfg.rho_coeffs.size() == 1);
  CHECK(cfg.rho_coeffs[0] == 1.0);

  RunConfig full;
  parse_domain_spec("n=7 k=3 rho=2 - 0.25*cos(theta) + 0.1*cos(4*theta)",
                    full);
  REQUIRE(full.rho_coeffs.size() == 5);
  CHECK(full.rho_coeffs[0] == 2.0);
  CHECK(full.rho_coeffs[1] == -0.25);  // cos(theta) means m = 1
  CHECK(full.rho_coeffs[2] == 0.0);
  CHECK(full.rho_coeffs[4] == 0.1);

  const RadialSurface surf = surface_from_config(full);
  CHECK(surf.ambient_dim() == 7);
  CHECK(surf.coeffs() == full.rho_coeffs);

  auto message_of = [](const std::string& spec) {
    RunConfig c;
    try {
      parse_domain_spec(spec, c);
      return std::string("(no throw)");
    } catch (const std::invalid_argument& e) {
      return std::string(e.what());
    }
  };
  // a missing key is reported by name
  CHECK(message_of("k=2 rho=1").find("missing key 'n'") != std::string::npos);
  CHECK(message_of("n=5 rho=1").find("missing key 'k'") != std::string::npos);
  CHECK(message_of("n=5 k=2").find("missing key 'rho'") != std::string::npos);
  // rho= consumes the rest of the spec, so the stray key sits before it
  CHECK(message_of("n=5 q=3 k=2 rho=1").find("unknown key 'q'") !=
        std::string::npos);
  CHECK(message_of("n=5 k=2 rho=1+cos(2*phi)").find("cos") !=
        std::string::npos);

  // a config with no domain cannot produce a surface
  RunConfig empty;
  CHECK_THROWS_AS(surface_from_config(empty), std::invalid_argument);
}

TEST_CASE("parse_config_text: values, validation, echo stability") {
  const RunConfig cfg = parse_config_text(kBallConfig);
  CHECK(*cfg.n == 5);
  CHECK(cfg.ns == 192);
  CHECK(cfg.ntheta == 17);
  CHECK(cfg.R == 20.0);
  CHECK(cfg.eps == 2e-3);
  CHECK(cfg.tau_min == -10.0);
  CHECK(cfg.tau_count == 8);
  CHECK(cfg.seed == 11);
  CHECK(cfg.tol_res == 1e-8);  // untouched default

  // the echo is canonical: different spellings of the same configuration
  // render identically, so the config hash is spelling-independent
  const RunConfig respelled = parse_config_text(
      "seed = 11\n"
      "tau_count = 8\n"
      "eps = 0.002  # same as 2e-3\n"
      "\n"
      "R = 2e1\n"
      "ntheta = 17\n"
      "ns = 192\n"
      "domain = n=5 k=2 rho=1\n"
      "tau_min = -1e1\n");
  CHECK(config_echo(respelled) == config_echo(cfg));
  CHECK(fnv1a64(config_echo(respelled)) == fnv1a64(config_echo(cfg)));

  auto rejects = [](const std::string& text, const std::string& needle) {
    try {
      parse_config_text(text);
      FAIL_CHECK("expected invalid_argument for: " << text);
    } catch (const std::invalid_argument& e) {
      CHECK(std::string(e.what()).find(needle) != std::string::npos);
    }
  };
  rejects("tolres = 1e-6\n", "unknown key 'tolres'");
  rejects("tol_res = -1\n", "tol_res must be > 0");
  rejects("tol_res = 0\n", "tol_res must be > 0");
  rejects("ns = 8\n", "ns must be >= 16");
  rejects("ntheta = 4\n", "ntheta must be >= 8");
  rejects("eps = -1e-3\n", "eps must be >= 0");
  rejects("R = 0\n", "R must be > 0");
  rejects("tau_min = -0.5\n", "tau_min must be <= -1");
  rejects("seed = -4\n", "seed");
  rejects("just a line without equals\n", "expected 'key = value'");
  rejects("eps_schedule = 1e-3, -1e-4\n", "eps_schedule entries");

  // comments and blank lines are ignored; '=' inside values survives
  const RunConfig c2 = parse_config_text(
      "\n# comment only\n\ndomain = n=5 k=2 rho=1  # trailing\n");
  CHECK(*c2.n == 5);
}

TEST_CASE("cli: verify-identities writes a report and signals failure modes") {
  Scratch tmp("khx_cli_scratch_verify");
  const int code = cli::run(
      {"--out", tmp / "v", "--samples", "200", "--seed", "7",
       "verify-identities"});
  CHECK(code == 0);
  const Json root = Json::parse(slurp(tmp / "v/verify.json"));
  CHECK(root.at("schema_version").get<int>() == 1);
  CHECK(root.at("all_pass").get<bool>());
  CHECK(root.at("suites").is_array());
  CHECK(root.at("suites").size() >= 10);
  for (const auto& s : root.at("suites"))
    CHECK(s.at("pass").get<bool>());
  CHECK(root.at("config_hash").get<std::string>().size() == 16);

  // unknown suite name is a rejected input
  CHECK(cli::run({"--out", tmp / "x", "--suite", "no-such-suite",
                  "verify-identities"}) == 2);
  // zero sample budget is a usage-level rejection
  CHECK(cli::run({"--out", tmp / "y", "--samples", "0",
                  "verify-identities"}) == 2);
  // a subcommand is required
  CHECK(cli::run({}) != 0);
}

TEST_CASE("cli: solve artifacts are byte-identical across reruns") {
  Scratch tmp("khx_cli_scratch_solve");
  spit(tmp / "run.cfg", kBallConfig);
  const std::string out = tmp / "out";

  REQUIRE(cli::run({"--config", tmp / "run.cfg", "--out", out, "solve"}) == 0);
  const std::string field1 = slurp(out + "/field.bin");
  const std::string json1 = slurp(out + "/solve.json");
  const std::string rays1 = slurp(out + "/rays.csv");

  std::filesystem::remove_all(out);
  REQUIRE(cli::run({"--config", tmp / "run.cfg", "--out", out, "solve"}) == 0);
  CHECK(slurp(out + "/field.bin") == field1);
  CHECK(slurp(out + "/solve.json") == json1);
  CHECK(slurp(out + "/rays.csv") == rays1);

  const Json root = Json::parse(json1);
  CHECK(root.at("schema_version").get<int>() == 1);
  CHECK(root.at("solve").at("final").at("sandwich_ok").get<bool>());
  CHECK(root.at("field").at("n").get<int>() == 5);
}

TEST_CASE("cli: minkowski on a reloaded dump matches the inline solve") {
  Scratch tmp("khx_cli_scratch_mink");
  spit(tmp / "run.cfg", kBallConfig);
  const std::string solve_out = tmp / "s";
  REQUIRE(cli::run({"--config", tmp / "run.cfg", "--out", solve_out,
                    "solve"}) == 0);

  // inline: solves again from the same config
  REQUIRE(cli::run({"--config", tmp / "run.cfg", "--out", tmp / "inline",
                    "minkowski"}) == 0);
  // reload: consumes the dumped field instead
  spit(tmp / "reload.cfg",
       std::string(kBallConfig) + "field = " + solve_out + "/field.bin\n");
  REQUIRE(cli::run({"--config", tmp / "reload.cfg", "--out", tmp / "reload",
                    "minkowski"}) == 0);

  const Json inline_root = Json::parse(slurp(tmp / "inline/minkowski.json"));
  const Json reload_root = Json::parse(slurp(tmp / "reload/minkowski.json"));
  // the configs differ (field key), the physics must not
  CHECK(inline_root.at("results") == reload_root.at("results"));
  CHECK(inline_root.at("field") == reload_root.at("field"));
  CHECK(slurp(tmp / "inline/phi_series_0.csv") ==
        slurp(tmp / "reload/phi_series_0.csv"));
  const auto& entry = inline_root.at("results").at(0);
  CHECK(entry.at("beta").get<double>() == 1.0);
  // at R = 20 the outermost default levels exit the grid and are skipped
  // with notes; the boundary identity carries the finite-R bias, so only
  // the flag's consistency with the ratio is checked here (the identity
  // itself converges under the continuation schedules)
  const auto& series = entry.at("series");
  CHECK(series.at("rows").size() >= 3);
  CHECK_FALSE(series.at("notes").empty());
  const auto& ineq = entry.at("inequality");
  const double ratio = ineq.at("ratio").get<double>();
  CHECK(ratio == doctest::Approx(1.0).epsilon(0.1));
  CHECK(ineq.at("equality").get<bool>() == (std::abs(ratio - 1.0) <= 1.5e-2));
}

TEST_CASE("cli: rejected inputs exit with code 2") {
  Scratch tmp("khx_cli_scratch_reject");
  // unreadable config
  CHECK(cli::run({"--config", tmp / "missing.cfg", "--out", tmp / "a",
                  "solve"}) == 2);
  // domain rejected by the admissibility certificate
  spit(tmp / "pinched.cfg",
       "domain = n=5 k=2 rho=1+0.9*cos(2*theta)\nns = 192\nntheta = 17\n"
       "R = 20\neps = 2e-3\n");
  CHECK(cli::run({"--config", tmp / "pinched.cfg", "--out", tmp / "b",
                  "solve"}) == 2);
  // outer radius too close to the body
  spit(tmp / "tight.cfg", "domain = n=5 k=2 rho=1\nR = 5\neps = 2e-3\n");
  CHECK(cli::run({"--config", tmp / "tight.cfg", "--out", tmp / "c",
                  "solve"}) == 2);
  // weight exponent below the admissible threshold (n-2k)/(n-k) = 1/3
  spit(tmp / "beta.cfg", kBallConfig);
  CHECK(cli::run({"--config", tmp / "beta.cfg", "--out", tmp / "d", "--beta",
                  "0.2", "minkowski"}) == 2);
}
