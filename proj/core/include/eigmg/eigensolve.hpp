#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "eigmg/assembly.hpp"
#include "eigmg/linsolve.hpp"
#include "eigmg/sparse.hpp"

namespace eigmg {

/// Approximate eigenpair on one level: ||coeffs||_a = 1 and lambda is the
/// Rayleigh quotient of coeffs.
struct EigenPair {
  double lambda = 0.0;
  Vector coeffs;
  int level = 1;
};

/// m approximate eigenpairs on one level, lambdas ascending, vectors a-orthonormal.
struct EigenSet {
  std::vector<double> lambdas;
  std::vector<Vector> vectors;
  int level = 1;

  std::size_t size() const noexcept { return lambdas.size(); }
  EigenPair pair(std::size_t j) const { return {lambdas[j], vectors[j], level}; }
};

enum class ShiftMode {
  paper,     ///< max{0, (sigma*lambda_k - lambda2) / (sigma - 1)}
  zero,      ///< alpha = 0: plain two-grid inverse iteration
  rayleigh,  ///< alpha = current Rayleigh quotient
};

ShiftMode parse_shift_mode(const std::string& text);
std::string to_string(ShiftMode mode);

struct ShiftConfig {
  /// Combined shift constant 2(1 + C4/C5) * beta; must exceed 1.
  double sigma = 8.0;
  ShiftMode mode = ShiftMode::paper;
  /// Shifted-inverse steps per level (>= 1).
  int inner_steps = 1;
  /// Shift halvings tried after an indefinite solve before falling back to 0.
  int max_shift_retries = 3;

  void validate() const;
};

struct SolverConfig {
  double cg_tol = 1e-10;
  int cg_max_iterations = 5000;
  /// Precondition CG with a geometric V-cycle over the coarser levels.
  bool multigrid = true;
  int smoothing_sweeps = 2;
};

enum class MultiCorrection { rayleigh_ritz, gram_schmidt };

struct SchemeConfig {
  ShiftConfig shift;
  SolverConfig solver;
  MultiCorrection multi = MultiCorrection::rayleigh_ritz;
  /// Largest coarse dimension handled by the dense eigensolver.
  int dense_budget = 4000;
  /// Keep the eigen-approximation of every level in the result.
  bool record_iterates = false;
};

/// Solves (A - alpha M) x = rhs on one level of a hierarchy.
class ShiftedSystemSolver {
public:
  /// Unpreconditioned CG on a single level.
  ShiftedSystemSolver(const DiscreteForms& forms, SolverConfig config);
  /// V-cycle preconditioned CG. `levels` runs coarse -> this level and
  /// `prolongations[k]` maps level k to k+1.
  ShiftedSystemSolver(std::span<const DiscreteForms> levels, std::span<const SparseMatrix> prolongations,
                      SolverConfig config);

  const DiscreteForms& forms() const noexcept { return *forms_; }

  /// SPD-guarded solve: stops as soon as negative curvature appears (or the
  /// shifted V-cycle cannot be built) and reports indefinite_detected.
  CgResult solve_definite(double alpha, std::span<const double> rhs) const;
  /// Continues through negative curvature; preconditioned by the unshifted V-cycle.
  CgResult solve_indefinite(double alpha, std::span<const double> rhs) const;

private:
  std::vector<const SparseMatrix*> stiffness_;
  std::vector<const SparseMatrix*> mass_;
  std::vector<SparseMatrix> prolongations_;
  const DiscreteForms* forms_ = nullptr;
  SolverConfig config_;
  mutable double cached_alpha_ = 0.0;
  mutable VCyclePtr cached_vcycle_;
  mutable VCyclePtr unshifted_vcycle_;
};

/// Record of one shifted solve inside a correction step.
struct StepTrace {
  double alpha_requested = 0.0;
  double alpha_used = 0.0;
  int shift_retries = 0;
  SolveReport report;
  double lambda = 0.0;
  /// |lambda - alpha_used|; small values flag a near-singular shifted system.
  double shift_distance = 0.0;
};

/// Per-level diagnostics of a multigrid run. Vectors are indexed by j
/// (size 1 for the single-eigenvalue scheme).
struct LevelTrace {
  int level = 1;
  int ndof = 0;
  std::vector<double> alphas;
  std::vector<double> theta_estimates;
  std::vector<double> lambdas;
  std::vector<StepTrace> steps;
  int inner_steps_used = 0;
  std::int64_t matvec_total = 0;
  std::int64_t work_total = 0;
  double residual = 0.0;
  double wall_seconds = 0.0;
};

/// a(v,v) / b(v,v). Throws DimensionError / NumericalError for a zero vector.
double rayleigh_quotient(const DiscreteForms& forms, std::span<const double> v);

/// ||A u - lambda M u|| in the lumped-mass dual norm.
double eigen_residual(const DiscreteForms& forms, double lambda, std::span<const double> u);

/// The `count` smallest eigenpairs of (A, M) by a dense solve, a-normalized,
/// ascending. Throws ResourceError above `dense_budget` unknowns.
EigenSet coarse_eigensolve(const DiscreteForms& forms, int count, int dense_budget = 4000);

/// Shift for the next level from the current eigenvalue approximation and the
/// cached coarse (or next) eigenvalue.
double shift_select(double lambda_k, double lambda_next, const ShiftConfig& config);

/// |lambda1 - alpha| / (lambda2 - alpha). Throws NumericalError if alpha >= lambda2.
double theta_factor(double lambda1_fine, double lambda2_fine, double alpha);

/// Solve (A - alpha M) u = M (P u_prev); a-normalize; Rayleigh quotient.
/// `prolongation` may be null when u_prev already lives on the fine level.
/// Indefinite solves trigger the shift-retry policy; unrecoverable failure
/// throws NumericalError naming the level.
std::pair<EigenPair, StepTrace> correction_step(const ShiftedSystemSolver& solver, const SparseMatrix* prolongation,
                                                double alpha, const EigenPair& u_prev, const ShiftConfig& config);

struct MultiStepResult {
  EigenPair pair;
  std::vector<StepTrace> steps;
};

/// `inner_steps` correction steps on the same fine level; prolongation only
/// before the first. Later steps reuse alpha (paper/zero) or the current
/// Rayleigh quotient (rayleigh). Stops early once the residual falls below
/// `residual_target` (pass 0 to disable).
MultiStepResult multi_correction_step(const ShiftedSystemSolver& solver, const SparseMatrix* prolongation,
                                      double alpha, const EigenPair& u_prev, const ShiftConfig& config,
                                      double residual_target = 0.0);

struct MultigridResult {
  EigenPair pair;
  std::vector<LevelTrace> traces;
  /// Coarse-level second eigenvalue used by shift mode paper.
  double lambda2_coarse = 0.0;
  /// Per-level approximations when SchemeConfig::record_iterates is set.
  std::vector<EigenPair> iterates;
};

/// Single-eigenvalue multigrid scheme over nested levels.
MultigridResult eigen_multigrid(std::span<const DiscreteForms> levels, std::span<const SparseMatrix> prolongations,
                                const SchemeConfig& config);
MultigridResult eigen_multigrid(const MeshHierarchy& hierarchy, const ProblemDefinition& problem,
                                const SchemeConfig& config);

struct MultiSetStep {
  EigenSet set;
  std::vector<StepTrace> steps;
};

/// Shifted solves for every j followed by a-orthogonal Gram-Schmidt.
/// Throws NumericalError naming j when a vector collapses (a-norm < 1e-12).
MultiSetStep correction_step_multi_gs(const ShiftedSystemSolver& solver, const SparseMatrix* prolongation,
                                      std::span<const double> alphas, const EigenSet& prev, const ShiftConfig& config);

/// Shifted solves for every j followed by Rayleigh-Ritz on their span.
/// Throws NumericalError if the projected mass matrix has condition > 1e12.
MultiSetStep correction_step_multi_rr(const ShiftedSystemSolver& solver, const SparseMatrix* prolongation,
                                      std::span<const double> alphas, const EigenSet& prev, const ShiftConfig& config);

/// Shifts alpha_j for the next level. j < m pairs lambda_j with lambda_{j+1}
/// of the current level; j = m pairs it with the cached coarse lambda_{m+1}.
std::vector<double> multi_shifts(std::span<const double> lambdas, double lambda_next_coarse, const ShiftConfig& config);

struct MultiMultigridResult {
  EigenSet set;
  std::vector<LevelTrace> traces;
  double lambda_next_coarse = 0.0;
  std::vector<EigenSet> iterates;
};

/// Multi-eigenvalue multigrid scheme.
MultiMultigridResult eigen_multigrid_multi(std::span<const DiscreteForms> levels,
                                           std::span<const SparseMatrix> prolongations, int m,
                                           const SchemeConfig& config);
MultiMultigridResult eigen_multigrid_multi(const MeshHierarchy& hierarchy, const ProblemDefinition& problem, int m,
                                           const SchemeConfig& config);

}  // namespace eigmg
