#include "eigmg/linsolve.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "eigmg/error.hpp"

namespace eigmg {

Vector shifted_apply(const SparseMatrix& a, const SparseMatrix& m, double alpha, std::span<const double> v) {
  if (a.rows() != m.rows() || a.cols() != m.cols() || v.size() != static_cast<std::size_t>(a.cols())) {
    throw DimensionError("shifted_apply: dimension mismatch");
  }
  Vector av = a * v;
  if (alpha != 0.0) {
    const Vector mv = m * v;
    axpy(-alpha, mv, av);
  }
  return av;
}

LinearOperator shifted_operator(const SparseMatrix& a, const SparseMatrix& m, double alpha) {
  if (a.rows() != m.rows() || a.cols() != m.cols()) throw DimensionError("shifted_operator: dimension mismatch");
  LinearOperator op;
  op.size = a.rows();
  op.cost = static_cast<std::int64_t>(a.nnz() + (alpha != 0.0 ? m.nnz() : 0));
  auto scratch = std::make_shared<Vector>(static_cast<std::size_t>(a.rows()));
  op.apply = [&a, &m, alpha, scratch](std::span<const double> x, std::span<double> y) {
    a.multiply(x, y);
    if (alpha == 0.0) return;
    m.multiply(x, *scratch);
    axpy(-alpha, *scratch, y);
  };
  return op;
}

LinearOperator matrix_operator(const SparseMatrix& a) {
  LinearOperator op;
  op.size = a.rows();
  op.cost = static_cast<std::int64_t>(a.nnz());
  op.apply = [&a](std::span<const double> x, std::span<double> y) { a.multiply(x, y); };
  return op;
}

CgResult cg_solve(const LinearOperator& op, std::span<const double> rhs, const CgOptions& options,
                  const LinearOperator* preconditioner) {
  if (!(options.tol > 0.0)) throw ConfigError("cg_solve: tolerance must be positive");
  const std::size_t n = static_cast<std::size_t>(op.size);
  if (rhs.size() != n) throw DimensionError("cg_solve: right-hand side length mismatch");
  if (preconditioner != nullptr && preconditioner->size != op.size) {
    throw DimensionError("cg_solve: preconditioner size mismatch");
  }

  CgResult result;
  result.x.assign(n, 0.0);
  SolveReport& rep = result.report;
  const double rhs_norm = norm2(rhs);
  if (rhs_norm == 0.0) {
    rep.converged = true;
    return result;
  }

  Vector r(rhs.begin(), rhs.end());
  Vector z(n), p(n), q(n);
  double rho_prev = 0.0;
  double res_norm = rhs_norm;
  for (int it = 0; it < options.max_iterations; ++it) {
    if (preconditioner != nullptr) {
      preconditioner->apply(r, z);
      ++rep.precond_count;
      rep.work += preconditioner->cost;
    } else {
      std::copy(r.begin(), r.end(), z.begin());
    }
    const double rho = dot(r, z);
    if (it == 0) {
      p = z;
    } else {
      const double beta = rho / rho_prev;
      for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
    }
    op.apply(p, q);
    ++rep.matvec_count;
    rep.work += op.cost;
    const double curvature = dot(p, q);
    rep.iterations = it + 1;
    if (!(curvature > 0.0)) {
      rep.indefinite_detected = true;
      const double scale = norm2(p) * norm2(q);
      if (options.stop_on_indefinite || std::abs(curvature) <= 1e3 * std::numeric_limits<double>::epsilon() * scale) {
        break;
      }
    }
    const double step = rho / curvature;
    axpy(step, p, result.x);
    axpy(-step, q, r);
    res_norm = norm2(r);
    rho_prev = rho;
    if (res_norm <= options.tol * rhs_norm) {
      rep.converged = true;
      break;
    }
  }
  rep.relative_residual = res_norm / rhs_norm;
  return result;
}

VCyclePreconditioner::VCyclePreconditioner(std::vector<SparseMatrix> level_matrices,
                                           std::vector<SparseMatrix> prolongations, int sweeps)
    : levels_(std::move(level_matrices)), prolongations_(std::move(prolongations)), sweeps_(sweeps) {
  if (levels_.empty()) throw DimensionError("VCyclePreconditioner: no levels");
  if (prolongations_.size() + 1 != levels_.size()) {
    throw DimensionError("VCyclePreconditioner: need one prolongation per level transition");
  }
  for (std::size_t k = 0; k + 1 < levels_.size(); ++k) {
    if (prolongations_[k].cols() != levels_[k].rows() || prolongations_[k].rows() != levels_[k + 1].rows()) {
      throw DimensionError("VCyclePreconditioner: prolongation " + std::to_string(k) + " has wrong shape");
    }
  }
  if (sweeps_ < 0) throw ConfigError("VCyclePreconditioner: sweeps must be >= 0");

  coarse_ = DenseCholesky(DenseMatrix::from_sparse(levels_.front()));
  diagonals_.reserve(levels_.size());
  for (const auto& a : levels_) {
    Vector d = a.diagonal();
    for (double v : d) {
      if (!(v > 0.0)) throw NumericalError("VCyclePreconditioner: non-positive diagonal entry");
    }
    diagonals_.push_back(std::move(d));
  }

  const auto nc = static_cast<std::int64_t>(levels_.front().rows());
  cost_ = nc * nc;
  for (std::size_t k = 1; k < levels_.size(); ++k) {
    const auto nnz = static_cast<std::int64_t>(levels_[k].nnz());
    // 4*sweeps triangular sweeps, one residual, one restriction and one prolongation.
    cost_ += (4 * sweeps_ + 1) * nnz + 2 * static_cast<std::int64_t>(prolongations_[k - 1].nnz());
  }
}

void VCyclePreconditioner::gauss_seidel(std::size_t level, std::span<const double> b, std::span<double> x,
                                        bool forward) const {
  const SparseMatrix& a = levels_[level];
  const auto offsets = a.row_offsets();
  const auto cols = a.col_indices();
  const auto vals = a.values();
  const auto& diag = diagonals_[level];
  const int n = a.rows();
  auto relax = [&](int i) {
    double s = b[i];
    for (int k = offsets[i]; k < offsets[i + 1]; ++k) {
      if (cols[k] != i) s -= vals[k] * x[cols[k]];
    }
    x[i] = s / diag[i];
  };
  if (forward) {
    for (int i = 0; i < n; ++i) relax(i);
  } else {
    for (int i = n - 1; i >= 0; --i) relax(i);
  }
}

void VCyclePreconditioner::cycle(std::size_t level, std::span<const double> b, std::span<double> x) const {
  if (level == 0) {
    std::copy(b.begin(), b.end(), x.begin());
    coarse_.solve_in_place(x);
    return;
  }
  const SparseMatrix& a = levels_[level];
  const SparseMatrix& p = prolongations_[level - 1];
  std::fill(x.begin(), x.end(), 0.0);
  for (int s = 0; s < sweeps_; ++s) {
    gauss_seidel(level, b, x, true);
    gauss_seidel(level, b, x, false);
  }
  Vector residual = a * x;
  for (std::size_t i = 0; i < residual.size(); ++i) residual[i] = b[i] - residual[i];
  Vector coarse_rhs(static_cast<std::size_t>(p.cols()));
  p.multiply_transpose(residual, coarse_rhs);
  Vector coarse_x(coarse_rhs.size());
  cycle(level - 1, coarse_rhs, coarse_x);
  Vector correction = p * coarse_x;
  axpy(1.0, correction, x);
  // A symmetric Gauss-Seidel sweep is self-adjoint, so the post-smoother
  // repeats the pre-smoother order.
  for (int s = 0; s < sweeps_; ++s) {
    gauss_seidel(level, b, x, true);
    gauss_seidel(level, b, x, false);
  }
}

void VCyclePreconditioner::apply(std::span<const double> r, std::span<double> z) const {
  if (r.size() != static_cast<std::size_t>(size()) || z.size() != r.size()) {
    throw DimensionError("VCyclePreconditioner::apply: size mismatch");
  }
  cycle(levels_.size() - 1, r, z);
}

LinearOperator VCyclePreconditioner::as_operator() const {
  LinearOperator op;
  op.size = size();
  op.cost = cost_;
  op.apply = [this](std::span<const double> x, std::span<double> y) { apply(x, y); };
  return op;
}

VCyclePtr make_shifted_vcycle(std::span<const SparseMatrix* const> stiffness, std::span<const SparseMatrix* const> mass,
                              std::span<const SparseMatrix> prolongations, double alpha, int sweeps) {
  if (stiffness.size() != mass.size() || stiffness.empty() || prolongations.size() + 1 < stiffness.size()) {
    throw DimensionError("make_shifted_vcycle: inconsistent level data");
  }
  std::vector<SparseMatrix> levels;
  levels.reserve(stiffness.size());
  for (std::size_t k = 0; k < stiffness.size(); ++k) {
    levels.push_back(alpha == 0.0 ? *stiffness[k] : linear_combination(1.0, *stiffness[k], -alpha, *mass[k]));
  }
  std::vector<SparseMatrix> prol(prolongations.begin(), prolongations.begin() + static_cast<std::ptrdiff_t>(stiffness.size() - 1));
  return std::make_shared<const VCyclePreconditioner>(std::move(levels), std::move(prol), sweeps);
}

}  // namespace eigmg
