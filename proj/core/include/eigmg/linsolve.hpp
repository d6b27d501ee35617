#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "eigmg/dense.hpp"
#include "eigmg/sparse.hpp"

namespace eigmg {

/// y = Op(x). `cost` is the flop-proportional work charged per application
/// (nonzeros touched), used for work accounting.
struct LinearOperator {
  int size = 0;
  std::function<void(std::span<const double>, std::span<double>)> apply;
  std::int64_t cost = 0;
};

/// A*v - alpha*(M*v)
Vector shifted_apply(const SparseMatrix& a, const SparseMatrix& m, double alpha, std::span<const double> v);

/// Operator for A - alpha*M without forming the matrix.
/// Both operators keep references: the matrices must outlive them.
LinearOperator shifted_operator(const SparseMatrix& a, const SparseMatrix& m, double alpha);
LinearOperator matrix_operator(const SparseMatrix& a);

struct SolveReport {
  int iterations = 0;
  double relative_residual = 0.0;
  /// Exact number of operator applications.
  std::int64_t matvec_count = 0;
  std::int64_t precond_count = 0;
  /// Operator plus preconditioner cost, in nonzeros touched.
  std::int64_t work = 0;
  bool converged = false;
  /// A search direction with p^T Op p <= 0 was seen.
  bool indefinite_detected = false;
};

struct CgOptions {
  double tol = 1e-10;
  int max_iterations = 10000;
  /// Return the partial iterate as soon as p^T Op p <= 0. When false the
  /// recurrence continues through negative curvature and only an exact
  /// breakdown stops it; the flag is still reported.
  bool stop_on_indefinite = true;
};

struct CgResult {
  Vector x;
  SolveReport report;
};

/// (Preconditioned) conjugate gradients from a zero initial guess. Stops when
/// ||rhs - Op x||_2 <= tol * ||rhs||_2.
CgResult cg_solve(const LinearOperator& op, std::span<const double> rhs, const CgOptions& options,
                  const LinearOperator* preconditioner = nullptr);

/// One symmetric V-cycle over a sequence of level matrices.
///
/// Levels are ordered coarse -> fine; prolongations[k] maps level k to k+1.
/// Smoothing is `sweeps` symmetric Gauss-Seidel sweeps before and after the
/// coarse correction; the coarsest level is solved by dense Cholesky.
class VCyclePreconditioner {
public:
  /// Throws NumericalError if the coarsest matrix is not numerically SPD.
  VCyclePreconditioner(std::vector<SparseMatrix> level_matrices, std::vector<SparseMatrix> prolongations,
                       int sweeps = 2);

  int size() const noexcept { return levels_.empty() ? 0 : levels_.back().rows(); }
  std::size_t num_levels() const noexcept { return levels_.size(); }

  /// z = B r
  void apply(std::span<const double> r, std::span<double> z) const;
  /// Nonzeros touched by one apply().
  std::int64_t cost() const noexcept { return cost_; }

  LinearOperator as_operator() const;

private:
  void cycle(std::size_t level, std::span<const double> b, std::span<double> x) const;
  void gauss_seidel(std::size_t level, std::span<const double> b, std::span<double> x, bool forward) const;

  std::vector<SparseMatrix> levels_;
  std::vector<SparseMatrix> prolongations_;
  std::vector<Vector> diagonals_;
  DenseCholesky coarse_;
  int sweeps_ = 2;
  std::int64_t cost_ = 0;
};

/// Shared pointer form used by solver configurations.
using VCyclePtr = std::shared_ptr<const VCyclePreconditioner>;

/// Builds the V-cycle for A_k - alpha*M_k on levels 0..finest.
VCyclePtr make_shifted_vcycle(std::span<const SparseMatrix* const> stiffness,
                              std::span<const SparseMatrix* const> mass,
                              std::span<const SparseMatrix> prolongations, double alpha, int sweeps = 2);

}  // namespace eigmg
