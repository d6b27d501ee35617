#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace eigmg {

class SparseMatrix;

/// Small row-major dense matrix used for coarse solves and projected pencils.
class DenseMatrix {
public:
  DenseMatrix() = default;
  DenseMatrix(int rows, int cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(static_cast<std::size_t>(rows) * cols, fill) {}

  static DenseMatrix from_sparse(const SparseMatrix& a);

  int rows() const noexcept { return rows_; }
  int cols() const noexcept { return cols_; }

  double& operator()(int i, int j) { return data_[static_cast<std::size_t>(i) * cols_ + j]; }
  double operator()(int i, int j) const { return data_[static_cast<std::size_t>(i) * cols_ + j]; }

  std::span<double> row(int i) { return {data_.data() + static_cast<std::size_t>(i) * cols_, static_cast<std::size_t>(cols_)}; }
  std::span<const double> row(int i) const {
    return {data_.data() + static_cast<std::size_t>(i) * cols_, static_cast<std::size_t>(cols_)};
  }

  std::vector<double> column(int j) const;

private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<double> data_;
};

/// Lower-triangular Cholesky factor of an SPD matrix.
class DenseCholesky {
public:
  DenseCholesky() = default;
  /// Throws NumericalError when a pivot is not positive relative to the
  /// largest diagonal entry.
  explicit DenseCholesky(const DenseMatrix& a);

  int size() const noexcept { return l_.rows(); }
  const DenseMatrix& factor() const noexcept { return l_; }

  /// x = A^{-1} b, in place.
  void solve_in_place(std::span<double> b) const;
  /// L^{-1} b and L^{-T} b, in place.
  void forward_in_place(std::span<double> b) const;
  void backward_in_place(std::span<double> b) const;

private:
  DenseMatrix l_;
};

/// Eigen-decomposition of a dense symmetric matrix.
/// `values` ascending; column j of `vectors` is the unit eigenvector for values[j].
struct SymmetricEigen {
  std::vector<double> values;
  DenseMatrix vectors;
};

/// Householder tridiagonalisation followed by implicit QL with Wilkinson shifts.
SymmetricEigen symmetric_eigen(const DenseMatrix& a);

/// A x = lambda B x with B SPD. Eigenvectors are B-orthonormal, values ascending.
SymmetricEigen generalized_symmetric_eigen(const DenseMatrix& a, const DenseMatrix& b);

}  // namespace eigmg
