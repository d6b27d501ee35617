#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "eigmg/assembly.hpp"
#include "eigmg/eigensolve.hpp"
#include "eigmg/mesh.hpp"

namespace eigmg {

/// Reference discrete eigenpairs of one level: values ascending, vectors
/// b-orthonormal.
struct EigenBasis {
  int level = 1;
  std::vector<double> values;
  std::vector<Vector> vectors;

  std::size_t size() const noexcept { return values.size(); }
};

struct DirectOptions {
  /// Largest dimension solved by the dense generalized eigensolver.
  int dense_cap = 2000;
  /// Largest dimension solved by deflated sparse inverse iteration.
  int iterative_cap = 300'000;
  /// Relative residual target ||Av - lambda Mv||_2 <= tol * ||A||_inf * ||v||_2.
  double tol = 1e-12;
  int max_sweeps = 2000;
  /// Guard vectors carried beyond `count` in the iteration block.
  int guard = 4;
};

/// Reference solve: dense up to `dense_cap`, deflated block inverse iteration
/// up to `iterative_cap`, ResourceError beyond. `guess` (vectors on this
/// level) seeds the iteration.
EigenBasis direct_discrete_solve(const DiscreteForms& forms, int count, const DirectOptions& options = {},
                                 std::span<const Vector> guess = {});
EigenBasis dense_discrete_solve(const DiscreteForms& forms, int count);
EigenBasis iterative_discrete_solve(const DiscreteForms& forms, int count, const DirectOptions& options = {},
                                    std::span<const Vector> guess = {});

/// max_j ||A v_j - lambda_j M v_j||_2 / (||A||_inf ||v_j||_2)
double basis_residual(const DiscreteForms& forms, const EigenBasis& basis);

/// Groups of indices whose values differ by less than `rel_gap` relative.
std::vector<std::vector<int>> eigen_clusters(std::span<const double> values, double rel_gap = 0.1);

/// The cluster (from eigen_clusters) containing index j.
std::vector<int> cluster_of(std::span<const double> values, int j, double rel_gap = 0.1);

/// ||v - proj_a v||_a for a-normalized v, proj_a onto span{basis.vectors[i] : i in cluster}.
double eigenspace_distance(const EigenBasis& basis, std::span<const int> cluster, std::span<const double> v,
                           const DiscreteForms& forms);

/// Eigenvalues (p^2 + q^2) pi^2 of the Dirichlet Laplacian on the unit square,
/// ascending with multiplicity. Covers every eigenvalue up to 200 pi^2.
std::vector<double> laplace_exact_eigenvalues();

struct ExactErrors {
  double err_lambda = 0.0;
  double err_energy = 0.0;
};

/// Errors of a Laplace eigenpair on the unit square against analytic
/// eigenfunction index `index` (0-based). err_energy is the a-norm distance
/// to the sign-aligned, normalized projection onto the analytic eigenspace,
/// by degree-4 quadrature.
ExactErrors laplace_exact_errors(const EigenPair& pair, const TriangleMesh& mesh, const DiscreteForms& forms,
                                 int index);

/// (2^order lambda_fine - lambda_coarse) / (2^order - 1)
double richardson_reference(double lambda_coarse, double lambda_fine, int order = 2);

/// |(RQ(psi) - lambda) - [a(e,e) - lambda b(e,e)] / b(psi,psi)| / (|RQ(psi)| + |lambda|), e = u - psi.
double rayleigh_identity_residual(const DiscreteForms& forms, double lambda, std::span<const double> u,
                                  std::span<const double> psi);

/// One row of a convergence study (per level and eigenvalue index j, 1-based).
/// Absent quantities are NaN.
struct ConvergenceRecord {
  int level = 1;
  int ndof = 0;
  int j = 1;
  double lambda_mg = 0.0;
  double lambda_dir = 0.0;
  double err_lambda_exact = 0.0;
  double err_energy = 0.0;
  double theta_measured = 0.0;
  double alpha = 0.0;
  std::int64_t matvec_total = 0;
  double wall_seconds = 0.0;
  /// Distance of the multigrid vector to the direct eigencluster span.
  double eigenspace_dist = 0.0;
};

enum class ReferenceKind { automatic, laplace_exact, extrapolated };

struct StudyConfig {
  int levels = 4;
  int nev = 1;
  SchemeConfig scheme;
  DirectOptions direct;
  ReferenceKind reference = ReferenceKind::automatic;
  std::uint64_t seed = 0;
};

struct ReferenceValue {
  int j = 1;
  double lambda_ref = 0.0;
  std::string source;
};

struct StudyResult {
  std::vector<ConvergenceRecord> records;
  std::vector<ReferenceValue> references;
  std::vector<LevelTrace> traces;
};

/// True if the mesh domain is the unit square (bounding box and area).
bool is_unit_square(const TriangleMesh& mesh);

/// Runs the multigrid scheme and the per-level direct references and fills
/// every record field. The extrapolated reference uses one extra refinement
/// level solved directly.
StudyResult convergence_study(const ProblemDefinition& problem, const TriangleMesh& initial, const StudyConfig& config);

/// Per-level cost of the multigrid scheme against a counted baseline.
struct CompareRecord {
  int level = 1;
  int ndof = 0;
  std::int64_t mg_matvec_total = 0;
  double mg_wall_seconds = 0.0;
  std::int64_t dir_matvec_total = 0;
  double dir_wall_seconds = 0.0;
  /// mg matvecs relative to the previous level (NaN where undefined).
  double mg_growth = 0.0;
};

struct BaselineResult {
  EigenSet set;
  std::int64_t matvec_total = 0;
  std::int64_t work_total = 0;
  int sweeps = 0;
};

/// Block inverse subspace iteration with multigrid-preconditioned CG on the
/// finest of `levels`, counting matvecs. Stops when every eigen_residual
/// falls below tol * lambda.
BaselineResult counted_baseline(std::span<const DiscreteForms> levels, std::span<const SparseMatrix> prolongations,
                                int count, const SolverConfig& solver, std::uint64_t seed, double tol = 1e-8,
                                int max_sweeps = 500);

std::vector<CompareRecord> compare_study(const ProblemDefinition& problem, const TriangleMesh& initial,
                                         const StudyConfig& config);

}  // namespace eigmg
