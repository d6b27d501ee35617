#include "run_config.hpp"

#include <cerrno>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "eigmg/error.hpp"

namespace eigmg::cli {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

[[noreturn]] void bad_value(std::string_view key, std::string_view value, std::string_view expected) {
  throw ConfigError(std::string(key) + ": expected " + std::string(expected) + ", got '" + std::string(value) + "'");
}

template <class Int>
Int parse_integer(std::string_view key, std::string_view value) {
  Int out{};
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc{} || ptr != value.data() + value.size()) bad_value(key, value, "an integer");
  return out;
}

double parse_double(std::string_view key, std::string_view value) {
  const std::string text(value);
  char* end = nullptr;
  errno = 0;
  const double out = std::strtod(text.c_str(), &end);
  if (text.empty() || end != text.c_str() + text.size() || errno == ERANGE || !std::isfinite(out)) {
    bad_value(key, value, "a finite number");
  }
  return out;
}

bool parse_bool(std::string_view key, std::string_view value) {
  if (value == "true" || value == "1" || value == "yes" || value == "on") return true;
  if (value == "false" || value == "0" || value == "no" || value == "off") return false;
  bad_value(key, value, "true or false");
}

}  // namespace

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys{
      "problem", "mesh-file", "n",      "levels",    "nev",  "shift-mode",        "sigma",     "inner-steps",
      "cg-tol",  "direct-cap", "correction", "out", "no-timing", "seed", "dump-eigenvectors"};
  return keys;
}

void apply_setting(RunConfig& c, std::string_view key, std::string_view raw) {
  const std::string_view value = trim(raw);
  if (key == "problem") {
    c.problem = value;
  } else if (key == "mesh-file") {
    c.mesh_file = value;
  } else if (key == "n") {
    c.n = parse_integer<int>(key, value);
  } else if (key == "levels") {
    c.levels = parse_integer<int>(key, value);
  } else if (key == "nev") {
    c.nev = parse_integer<int>(key, value);
  } else if (key == "shift-mode") {
    c.shift_mode = parse_shift_mode(std::string(value));
  } else if (key == "sigma") {
    c.sigma = parse_double(key, value);
  } else if (key == "inner-steps") {
    c.inner_steps = parse_integer<int>(key, value);
  } else if (key == "cg-tol") {
    c.cg_tol = parse_double(key, value);
  } else if (key == "direct-cap") {
    c.direct_cap = parse_integer<int>(key, value);
  } else if (key == "correction") {
    if (value == "rayleigh-ritz") {
      c.correction = MultiCorrection::rayleigh_ritz;
    } else if (value == "gram-schmidt") {
      c.correction = MultiCorrection::gram_schmidt;
    } else {
      bad_value(key, value, "rayleigh-ritz or gram-schmidt");
    }
  } else if (key == "out") {
    c.out = value;
  } else if (key == "no-timing") {
    c.timing = !parse_bool(key, value);
  } else if (key == "seed") {
    c.seed = parse_integer<std::uint64_t>(key, value);
  } else if (key == "dump-eigenvectors") {
    c.dump_eigenvectors = value;
  } else {
    throw ConfigError("unknown configuration key '" + std::string(key) + "'");
  }
}

void apply_config_text(RunConfig& config, std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view body = line;
    if (const auto hash = body.find('#'); hash != std::string_view::npos) body = body.substr(0, hash);
    body = trim(body);
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError("config line " + std::to_string(line_no) + ": expected key = value");
    }
    try {
      apply_setting(config, trim(body.substr(0, eq)), body.substr(eq + 1));
    } catch (const ConfigError& e) {
      throw ConfigError("config line " + std::to_string(line_no) + ": " + e.what());
    }
  }
}

void apply_config_file(RunConfig& config, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  apply_config_text(config, buf.str());
}

void RunConfig::validate() const {
  auto require = [](bool ok, const std::string& constraint, const auto& got) {
    if (!ok) {
      std::ostringstream os;
      os << "invalid configuration: " << constraint << " required (got " << got << ")";
      throw ConfigError(os.str());
    }
  };
  require(levels >= 1, "levels >= 1", levels);
  require(nev >= 1, "nev >= 1", nev);
  require(sigma > 1.0, "sigma > 1", sigma);
  require(cg_tol > 0.0 && cg_tol < 1.0, "0 < cg-tol < 1", cg_tol);
  require(inner_steps >= 1, "inner-steps >= 1", inner_steps);
  require(direct_cap >= 1, "direct-cap >= 1", direct_cap);
  if (mesh_file.empty()) require(n >= 1, "n >= 1", n);
  problem_by_name(problem);
}

ProblemDefinition RunConfig::problem_definition() const { return problem_by_name(problem); }

TriangleMesh RunConfig::initial_mesh() const {
  return mesh_file.empty() ? generate_unit_square(n) : load_mesh_file(mesh_file);
}

SchemeConfig RunConfig::scheme() const {
  SchemeConfig s;
  s.shift.sigma = sigma;
  s.shift.mode = shift_mode;
  s.shift.inner_steps = inner_steps;
  s.solver.cg_tol = cg_tol;
  s.multi = correction;
  return s;
}

StudyConfig RunConfig::study() const {
  StudyConfig s;
  s.levels = levels;
  s.nev = nev;
  s.scheme = scheme();
  s.direct.iterative_cap = direct_cap;
  s.direct.dense_cap = std::min(s.direct.dense_cap, direct_cap);
  s.seed = seed;
  return s;
}

}  // namespace eigmg::cli
