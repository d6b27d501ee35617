#include "app.hpp"

#include <chrono>
#include <fstream>
#include <functional>
#include <map>
#include <memory>

#include "CLI11.hpp"
#include "eigmg/error.hpp"
#include "eigmg/log.hpp"
#include "report.hpp"
#include "run_config.hpp"

namespace eigmg::cli {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

/// Destination stream for results: the named file, or `fallback`.
class Output {
public:
  Output(const std::string& path, std::ostream& fallback) : stream_(&fallback) {
    if (path.empty()) return;
    file_ = std::make_unique<std::ofstream>(path, std::ios::binary);
    if (!*file_) throw ConfigError("cannot open output file '" + path + "'");
    stream_ = file_.get();
  }
  std::ostream& get() { return *stream_; }

private:
  std::unique_ptr<std::ofstream> file_;
  std::ostream* stream_;
};

void ensure_written(std::ostream& os, const std::string& what) {
  os.flush();
  if (!os) throw ResourceError("failed writing " + what);
}

void cmd_solve(const RunConfig& c, std::ostream& out) {
  const auto start = Clock::now();
  const MeshHierarchy h = build_hierarchy(c.initial_mesh(), c.levels);
  const ProblemDefinition problem = c.problem_definition();
  EigenSet set;
  std::vector<LevelTrace> traces;
  double next = std::numeric_limits<double>::quiet_NaN();
  if (c.nev == 1) {
    MultigridResult r = eigen_multigrid(h, problem, c.scheme());
    set.lambdas = {r.pair.lambda};
    set.vectors = {std::move(r.pair.coeffs)};
    set.level = r.pair.level;
    traces = std::move(r.traces);
    next = r.lambda2_coarse;
  } else {
    MultiMultigridResult r = eigen_multigrid_multi(h, problem, c.nev, c.scheme());
    set = std::move(r.set);
    traces = std::move(r.traces);
    next = r.lambda_next_coarse;
  }
  const double elapsed = seconds_since(start);

  Output o(c.out, out);
  o.get() << solve_report(c, set, traces, next, elapsed).dump(2) << '\n';
  ensure_written(o.get(), "solve report");
  if (!c.dump_eigenvectors.empty()) {
    Output dump(c.dump_eigenvectors, out);
    write_eigenvector_dump(dump.get(), h.finest(), set);
    ensure_written(dump.get(), "eigenvector dump");
  }
  log::info("solve: ", c.levels, " levels, lambda_1 = ", set.lambdas.front(), " (", elapsed, " s)");
}

void cmd_study(const RunConfig& c, std::ostream& out) {
  const StudyResult r = convergence_study(c.problem_definition(), c.initial_mesh(), c.study());
  Output o(c.out, out);
  write_study_csv(o.get(), r.records, c.timing);
  ensure_written(o.get(), "study CSV");
  if (!c.out.empty()) {
    Output refs(c.out + ".reference.csv", out);
    write_reference_csv(refs.get(), r.references);
    ensure_written(refs.get(), "reference CSV");
  }
  for (const ReferenceValue& ref : r.references) {
    log::info("reference lambda_", ref.j, " = ", format_number(ref.lambda_ref), " (", ref.source, ")");
  }
}

void cmd_compare(const RunConfig& c, std::ostream& out) {
  const std::vector<CompareRecord> r = compare_study(c.problem_definition(), c.initial_mesh(), c.study());
  Output o(c.out, out);
  write_compare_csv(o.get(), r, c.timing);
  ensure_written(o.get(), "compare CSV");
}

struct Command {
  const char* name;
  const char* description;
  std::function<void(const RunConfig&, std::ostream&)> action;
};

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  const std::vector<Command> commands{
      {"solve", "Run the multigrid eigensolver and write a JSON report", cmd_solve},
      {"study", "Convergence study against direct references (CSV)", cmd_study},
      {"compare", "Per-level work of the multigrid scheme against a direct baseline (CSV)", cmd_compare},
  };

  CLI::App app{"Multigrid finite-element eigensolver", "eigmg"};
  app.require_subcommand(1);
  std::string config_file;
  // Raw flag values, applied after the config file so that flags win.
  std::map<std::string, std::string> overrides;
  bool no_timing = false;

  for (const Command& cmd : commands) {
    CLI::App* sub = app.add_subcommand(cmd.name, cmd.description);
    sub->add_option("--config", config_file, "Flat key = value configuration file");
    for (const std::string& key : config_keys()) {
      if (key == "no-timing") continue;
      sub->add_option_function<std::string>(
          "--" + key, [&overrides, key](const std::string& v) { overrides[key] = v; }, "See README");
    }
    sub->add_flag("--no-timing", no_timing, "Write timing columns as nan for byte-stable output");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kConfigError;
  }

  try {
    RunConfig config;
    if (!config_file.empty()) apply_config_file(config, config_file);
    for (const auto& [key, value] : overrides) apply_setting(config, key, value);
    if (no_timing) config.timing = false;
    config.validate();
    for (const Command& cmd : commands) {
      if (app.got_subcommand(cmd.name)) cmd.action(config, out);
    }
    return kSuccess;
  } catch (const ConfigError& e) {
    err << "eigmg: " << e.what() << '\n';
    return kConfigError;
  } catch (const ParseError& e) {
    err << "eigmg: mesh file: " << e.what() << '\n';
    return kConfigError;
  } catch (const ValidationError& e) {
    err << "eigmg: invalid input: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::exception& e) {
    err << "eigmg: failed: " << e.what() << '\n';
    return kNumericalFailure;
  }
}

}  // namespace eigmg::cli
