#include "khx/config.hpp"

#include <cctype>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace khx {

namespace {

std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

double to_double(const std::string& s, const std::string& key) {
  const std::string t = trim(s);
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(t, &used);
  } catch (const std::exception&) {
    throw std::invalid_argument("config key '" + key +
                                "': malformed number '" + t + "'");
  }
  if (used != t.size()) {
    throw std::invalid_argument("config key '" + key +
                                "': trailing characters in number '" + t + "'");
  }
  return v;
}

long long to_int(const std::string& s, const std::string& key) {
  const std::string t = trim(s);
  std::size_t used = 0;
  long long v = 0;
  try {
    v = std::stoll(t, &used);
  } catch (const std::exception&) {
    throw std::invalid_argument("config key '" + key +
                                "': malformed integer '" + t + "'");
  }
  if (used != t.size()) {
    throw std::invalid_argument("config key '" + key +
                                "': trailing characters in integer '" + t +
                                "'");
  }
  return v;
}

std::vector<double> to_list(const std::string& s, const std::string& key) {
  std::vector<double> out;
  std::string item;
  std::istringstream is(s);
  while (std::getline(is, item, ',')) {
    if (trim(item).empty()) continue;
    out.push_back(to_double(item, key));
  }
  if (out.empty()) {
    throw std::invalid_argument("config key '" + key + "': empty list");
  }
  return out;
}

/// Splits a sum into signed terms, treating '+'/'-' as separators except
/// when they follow an exponent marker ('e'/'E') or open the string.
std::vector<std::string> signed_terms(const std::string& expr) {
  std::vector<std::string> terms;
  std::string cur;
  for (std::size_t i = 0; i < expr.size(); ++i) {
    const char c = expr[i];
    if ((c == '+' || c == '-') && !cur.empty() &&
        !(cur.back() == 'e' || cur.back() == 'E')) {
      terms.push_back(cur);
      cur.clear();
    }
    cur.push_back(c);
  }
  if (!cur.empty()) terms.push_back(cur);
  return terms;
}

std::string fmt17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string fmt_list(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ",";
    s += fmt17(v[i]);
  }
  return s;
}

}  // namespace

void parse_domain_spec(const std::string& text, RunConfig& cfg) {
  // tokenize into key=value fragments; rho's value runs to the end of the
  // line so its series may contain spaces
  std::string compact;
  bool saw_n = false, saw_k = false, saw_rho = false;

  // locate "rho" assignment first: everything after it belongs to rho
  const std::size_t rho_pos = text.find("rho");
  std::string head = (rho_pos == std::string::npos) ? text : text.substr(0, rho_pos);
  std::string rho_part;
  if (rho_pos != std::string::npos) {
    rho_part = text.substr(rho_pos + 3);
    const std::size_t eq = rho_part.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument("domain spec: 'rho' needs '= <series>'");
    }
    rho_part = rho_part.substr(eq + 1);
    saw_rho = true;
  }

  std::istringstream is(head);
  std::string tok;
  while (is >> tok) {
    const std::size_t eq = tok.find('=');
    std::string key = (eq == std::string::npos) ? tok : tok.substr(0, eq);
    std::string val = (eq == std::string::npos) ? "" : tok.substr(eq + 1);
    if (val.empty()) {
      // allow "n = 5" with spaces: pull the next tokens
      std::string t2;
      if (eq == std::string::npos) {
        if (!(is >> t2) || t2[0] != '=') {
          throw std::invalid_argument("domain spec: expected '=' after '" +
                                      key + "'");
        }
        if (t2 == "=") {
          if (!(is >> val)) {
            throw std::invalid_argument("domain spec: missing value for '" +
                                        key + "'");
          }
        } else {
          val = t2.substr(1);
        }
      } else if (!(is >> val)) {
        throw std::invalid_argument("domain spec: missing value for '" + key +
                                    "'");
      }
    }
    if (key == "n") {
      cfg.n = static_cast<int>(to_int(val, "n"));
      saw_n = true;
    } else if (key == "k") {
      cfg.k = static_cast<int>(to_int(val, "k"));
      saw_k = true;
    } else {
      throw std::invalid_argument("domain spec: unknown key '" + key + "'");
    }
  }
  if (!saw_n) throw std::invalid_argument("domain spec: missing key 'n'");
  if (!saw_k) throw std::invalid_argument("domain spec: missing key 'k'");
  if (!saw_rho) throw std::invalid_argument("domain spec: missing key 'rho'");

  for (char c : rho_part)
    if (!std::isspace(static_cast<unsigned char>(c))) compact.push_back(c);
  if (compact.empty()) {
    throw std::invalid_argument("domain spec: empty rho series");
  }

  std::vector<double> coeffs(1, 0.0);
  for (const std::string& term : signed_terms(compact)) {
    const std::size_t cospos = term.find("cos(");
    if (cospos == std::string::npos) {
      coeffs[0] += to_double(term, "rho");
      continue;
    }
    // [coef*]cos(m*theta) or cos(theta)
    double coef = 1.0;
    std::string pre = term.substr(0, cospos);
    if (!pre.empty() && pre.back() == '*') pre.pop_back();
    if (pre == "-") {
      coef = -1.0;
    } else if (pre == "+" || pre.empty()) {
      coef = 1.0;
    } else {
      coef = to_double(pre, "rho");
    }
    std::string arg = term.substr(cospos + 4);
    if (arg.empty() || arg.back() != ')') {
      throw std::invalid_argument("domain spec: malformed cosine term '" +
                                  term + "'");
    }
    arg.pop_back();
    int m = 1;
    if (arg != "theta") {
      const std::size_t star = arg.find("*theta");
      if (star == std::string::npos || star + 6 != arg.size()) {
        throw std::invalid_argument("domain spec: cosine argument must be "
                                    "'theta' or '<m>*theta' in '" +
                                    term + "'");
      }
      m = static_cast<int>(to_int(arg.substr(0, star), "rho"));
      if (m < 1) {
        throw std::invalid_argument(
            "domain spec: cosine mode must be a positive integer");
      }
    }
    if (static_cast<std::size_t>(m) >= coeffs.size()) coeffs.resize(m + 1, 0.0);
    coeffs[m] += coef;
  }
  cfg.rho_coeffs = std::move(coeffs);
}

RunConfig parse_config_text(const std::string& text) {
  RunConfig cfg;
  std::istringstream is(text);
  std::string line;
  while (std::getline(is, line)) {
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument("config: expected 'key = value' in line '" +
                                  line + "'");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string val = trim(line.substr(eq + 1));
    if (key == "domain") {
      parse_domain_spec(val, cfg);
    } else if (key == "ns") {
      cfg.ns = static_cast<int>(to_int(val, key));
    } else if (key == "ntheta") {
      cfg.ntheta = static_cast<int>(to_int(val, key));
    } else if (key == "grading") {
      cfg.grading = to_double(val, key);
    } else if (key == "R") {
      cfg.R = to_double(val, key);
    } else if (key == "eps") {
      cfg.eps = to_double(val, key);
    } else if (key == "delta") {
      cfg.delta = to_double(val, key);
    } else if (key == "eps_schedule") {
      cfg.eps_schedule = to_list(val, key);
    } else if (key == "R_schedule") {
      cfg.R_schedule = to_list(val, key);
    } else if (key == "tol_res") {
      cfg.tol_res = to_double(val, key);
    } else if (key == "max_newton") {
      cfg.max_newton = static_cast<int>(to_int(val, key));
    } else if (key == "max_halvings") {
      cfg.max_halvings = static_cast<int>(to_int(val, key));
    } else if (key == "beta") {
      cfg.beta = to_list(val, key);
    } else if (key == "tau_min") {
      cfg.tau_min = to_double(val, key);
    } else if (key == "tau_count") {
      cfg.tau_count = static_cast<int>(to_int(val, key));
    } else if (key == "seed") {
      const long long v = to_int(val, key);
      if (v < 0) throw std::invalid_argument("config key 'seed': negative");
      cfg.seed = static_cast<std::uint64_t>(v);
    } else if (key == "suite") {
      cfg.suite = val;
    } else if (key == "samples") {
      cfg.samples = static_cast<int>(to_int(val, key));
    } else if (key == "out") {
      cfg.out = val;
    } else if (key == "field") {
      cfg.field = val;
    } else {
      throw std::invalid_argument("config: unknown key '" + key + "'");
    }
  }

  // hard validation before any computation
  if (cfg.ns < 16) throw std::invalid_argument("config: ns must be >= 16");
  if (cfg.ntheta < 8)
    throw std::invalid_argument("config: ntheta must be >= 8");
  if (!(cfg.grading >= 0.0))
    throw std::invalid_argument("config: grading must be >= 0");
  if (!(cfg.R > 0.0)) throw std::invalid_argument("config: R must be > 0");
  if (!(cfg.eps >= 0.0))
    throw std::invalid_argument("config: eps must be >= 0");
  if (!(cfg.delta > 0.0))
    throw std::invalid_argument("config: delta must be > 0");
  if (!(cfg.tol_res > 0.0))
    throw std::invalid_argument("config: tol_res must be > 0");
  if (cfg.max_newton < 1)
    throw std::invalid_argument("config: max_newton must be >= 1");
  if (cfg.max_halvings < 1)
    throw std::invalid_argument("config: max_halvings must be >= 1");
  if (!(cfg.tau_min <= -1.0))
    throw std::invalid_argument("config: tau_min must be <= -1");
  if (cfg.tau_count < 1)
    throw std::invalid_argument("config: tau_count must be >= 1");
  if (cfg.samples < 1)
    throw std::invalid_argument("config: samples must be >= 1");
  for (double e : cfg.eps_schedule)
    if (!(e >= 0.0))
      throw std::invalid_argument("config: eps_schedule entries must be >= 0");
  for (double r : cfg.R_schedule)
    if (!(r > 0.0))
      throw std::invalid_argument("config: R_schedule entries must be > 0");
  return cfg;
}

RunConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("config: cannot read '" + path + "'");
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

RadialSurface surface_from_config(const RunConfig& cfg) {
  if (!cfg.n || !cfg.k || cfg.rho_coeffs.empty()) {
    throw std::invalid_argument(
        "config: a domain spec 'domain = n=... k=... rho=...' is required");
  }
  return RadialSurface(*cfg.n, cfg.rho_coeffs);
}

std::string config_echo(const RunConfig& cfg) {
  std::ostringstream os;
  os << "n = " << (cfg.n ? std::to_string(*cfg.n) : "unset") << "\n";
  os << "k = " << (cfg.k ? std::to_string(*cfg.k) : "unset") << "\n";
  os << "rho_coeffs = " << fmt_list(cfg.rho_coeffs) << "\n";
  os << "ns = " << cfg.ns << "\n";
  os << "ntheta = " << cfg.ntheta << "\n";
  os << "grading = " << fmt17(cfg.grading) << "\n";
  os << "R = " << fmt17(cfg.R) << "\n";
  os << "eps = " << fmt17(cfg.eps) << "\n";
  os << "delta = " << fmt17(cfg.delta) << "\n";
  os << "eps_schedule = " << fmt_list(cfg.eps_schedule) << "\n";
  os << "R_schedule = " << fmt_list(cfg.R_schedule) << "\n";
  os << "tol_res = " << fmt17(cfg.tol_res) << "\n";
  os << "max_newton = " << cfg.max_newton << "\n";
  os << "max_halvings = " << cfg.max_halvings << "\n";
  os << "beta = " << fmt_list(cfg.beta) << "\n";
  os << "tau_min = " << fmt17(cfg.tau_min) << "\n";
  os << "tau_count = " << cfg.tau_count << "\n";
  os << "seed = " << cfg.seed << "\n";
  os << "suite = " << cfg.suite << "\n";
  os << "samples = " << cfg.samples << "\n";
  os << "out = " << cfg.out << "\n";
  os << "field = " << cfg.field << "\n";
  return os.str();
}

}  // namespace khx
