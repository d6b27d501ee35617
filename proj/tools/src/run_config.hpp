#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "eigmg/assembly.hpp"
#include "eigmg/mesh.hpp"
#include "eigmg/verify.hpp"

namespace eigmg::cli {

/// Everything one experiment needs. Defaults mirror the library defaults.
struct RunConfig {
  std::string problem = "laplace";
  std::string mesh_file;  ///< empty: built-in unit square with `n` cells per side
  int n = 8;
  int levels = 4;
  int nev = 1;
  ShiftMode shift_mode = ShiftMode::paper;
  double sigma = 8.0;
  int inner_steps = 1;
  double cg_tol = 1e-10;
  int direct_cap = 300'000;
  MultiCorrection correction = MultiCorrection::rayleigh_ritz;
  std::string out;  ///< empty: stdout
  std::string dump_eigenvectors;
  bool timing = true;
  std::uint64_t seed = 0;

  /// Throws ConfigError naming the violated constraint.
  void validate() const;

  ProblemDefinition problem_definition() const;
  TriangleMesh initial_mesh() const;
  SchemeConfig scheme() const;
  StudyConfig study() const;
};

/// Recognised keys, in the spelling used by both config files and flags.
const std::vector<std::string>& config_keys();

/// Set one key from its textual value. Throws ConfigError for unknown keys
/// and malformed values.
void apply_setting(RunConfig& config, std::string_view key, std::string_view value);

/// Flat `key = value` text; `#` starts a comment. Errors name the line.
void apply_config_text(RunConfig& config, std::string_view text);
void apply_config_file(RunConfig& config, const std::string& path);

}  // namespace eigmg::cli
