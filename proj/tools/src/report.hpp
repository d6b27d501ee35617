#pragma once

#include "json.hpp"

#include <ostream>
#include <span>
#include <string>

#include "eigmg/eigensolve.hpp"
#include "eigmg/verify.hpp"
#include "run_config.hpp"

namespace eigmg::cli {

inline constexpr const char* kStudyHeader =
    "level,ndof,j,lambda_mg,lambda_dir,err_lambda_exact,err_energy,theta_measured,alpha,matvec_total,wall_seconds";
inline constexpr const char* kCompareHeader =
    "level,ndof,mg_matvec_total,mg_wall_seconds,dir_matvec_total,dir_wall_seconds,mg_growth";
inline constexpr const char* kReferenceHeader = "j,lambda_ref,source";

/// %.15g, with "nan" / "inf" / "-inf" spelled out.
std::string format_number(double value);
/// Seconds with three decimals, or "nan" when timing is disabled.
std::string format_seconds(double seconds, bool timing);

void write_study_csv(std::ostream& os, std::span<const ConvergenceRecord> records, bool timing);
void write_reference_csv(std::ostream& os, std::span<const ReferenceValue> references);
void write_compare_csv(std::ostream& os, std::span<const CompareRecord> records, bool timing);

nlohmann::json trace_json(const LevelTrace& trace, bool timing);
nlohmann::json solve_report(const RunConfig& config, const EigenSet& result, std::span<const LevelTrace> traces,
                            double lambda_next_coarse, double wall_seconds);

/// One row per mesh vertex: x, y, u_1..u_m (zero on Dirichlet vertices).
void write_eigenvector_dump(std::ostream& os, const TriangleMesh& mesh, const EigenSet& set);

}  // namespace eigmg::cli
