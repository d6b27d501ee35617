#include "report.hpp"

#include <cmath>
#include <cstdio>

namespace eigmg::cli {

std::string format_number(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.15g", value);
  return buf;
}

std::string format_seconds(double seconds, bool timing) {
  if (!timing) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", seconds);
  return buf;
}

void write_study_csv(std::ostream& os, std::span<const ConvergenceRecord> records, bool timing) {
  os << kStudyHeader << '\n';
  for (const ConvergenceRecord& r : records) {
    os << r.level << ',' << r.ndof << ',' << r.j << ',' << format_number(r.lambda_mg) << ','
       << format_number(r.lambda_dir) << ',' << format_number(r.err_lambda_exact) << ','
       << format_number(r.err_energy) << ',' << format_number(r.theta_measured) << ',' << format_number(r.alpha)
       << ',' << r.matvec_total << ',' << format_seconds(r.wall_seconds, timing) << '\n';
  }
}

void write_reference_csv(std::ostream& os, std::span<const ReferenceValue> references) {
  os << kReferenceHeader << '\n';
  for (const ReferenceValue& r : references) os << r.j << ',' << format_number(r.lambda_ref) << ',' << r.source << '\n';
}

void write_compare_csv(std::ostream& os, std::span<const CompareRecord> records, bool timing) {
  os << kCompareHeader << '\n';
  for (const CompareRecord& r : records) {
    os << r.level << ',' << r.ndof << ',' << r.mg_matvec_total << ',' << format_seconds(r.mg_wall_seconds, timing)
       << ',' << r.dir_matvec_total << ',' << format_seconds(r.dir_wall_seconds, timing) << ','
       << format_number(r.mg_growth) << '\n';
  }
}

namespace {

// JSON has no NaN or infinity; those become null.
nlohmann::json number(double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); }

nlohmann::json numbers(std::span<const double> v) {
  nlohmann::json out = nlohmann::json::array();
  for (double x : v) out.push_back(number(x));
  return out;
}

}  // namespace

nlohmann::json trace_json(const LevelTrace& t, bool timing) {
  nlohmann::json steps = nlohmann::json::array();
  for (const StepTrace& s : t.steps) {
    steps.push_back({{"alpha_requested", number(s.alpha_requested)},
                     {"alpha_used", number(s.alpha_used)},
                     {"shift_retries", s.shift_retries},
                     {"cg_iterations", s.report.iterations},
                     {"converged", s.report.converged},
                     {"lambda", number(s.lambda)}});
  }
  nlohmann::json j{{"level", t.level},
                   {"ndof", t.ndof},
                   {"alphas", numbers(t.alphas)},
                   {"theta_estimates", numbers(t.theta_estimates)},
                   {"lambdas", numbers(t.lambdas)},
                   {"inner_steps_used", t.inner_steps_used},
                   {"matvec_total", t.matvec_total},
                   {"work_total", t.work_total},
                   {"residual", number(t.residual)},
                   {"steps", std::move(steps)}};
  if (timing) j["wall_seconds"] = t.wall_seconds;
  return j;
}

nlohmann::json solve_report(const RunConfig& c, const EigenSet& result, std::span<const LevelTrace> traces,
                            double lambda_next_coarse, double wall_seconds) {
  nlohmann::json levels = nlohmann::json::array();
  std::int64_t matvecs = 0, work = 0;
  for (const LevelTrace& t : traces) {
    levels.push_back(trace_json(t, c.timing));
    matvecs += t.matvec_total;
    work += t.work_total;
  }
  nlohmann::json config{{"problem", c.problem},
                        {"levels", c.levels},
                        {"nev", c.nev},
                        {"shift_mode", to_string(c.shift_mode)},
                        {"sigma", c.sigma},
                        {"inner_steps", c.inner_steps},
                        {"cg_tol", c.cg_tol},
                        {"seed", c.seed}};
  if (c.mesh_file.empty()) {
    config["n"] = c.n;
  } else {
    config["mesh_file"] = c.mesh_file;
  }
  nlohmann::json report{{"config", std::move(config)},
                        {"ndof", traces.empty() ? 0 : traces.back().ndof},
                        {"eigenvalues", numbers(result.lambdas)},
                        {"coarse_eigenvalues", traces.empty() ? nlohmann::json::array() : numbers(traces.front().lambdas)},
                        {"lambda_next_coarse", number(lambda_next_coarse)},
                        {"matvec_total", matvecs},
                        {"work_total", work},
                        {"traces", std::move(levels)}};
  if (c.timing) report["wall_seconds"] = wall_seconds;
  return report;
}

void write_eigenvector_dump(std::ostream& os, const TriangleMesh& mesh, const EigenSet& set) {
  os << "x,y";
  for (std::size_t j = 0; j < set.vectors.size(); ++j) os << ",u" << j + 1;
  os << '\n';
  const std::vector<int> dof = mesh.free_dof_map();
  for (std::size_t v = 0; v < mesh.num_vertices(); ++v) {
    os << format_number(mesh.vertices[v].x) << ',' << format_number(mesh.vertices[v].y);
    for (const Vector& u : set.vectors) os << ',' << format_number(dof[v] < 0 ? 0.0 : u[static_cast<std::size_t>(dof[v])]);
    os << '\n';
  }
}

}  // namespace eigmg::cli
