#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

namespace eigmg {

using Vector = std::vector<double>;

struct Triplet {
  int row;
  int col;
  double value;
};

/// Compressed sparse row matrix. Column indices are strictly increasing within
/// each row; the value array is laid out row by row.
class SparseMatrix {
public:
  SparseMatrix() = default;
  SparseMatrix(int nrows, int ncols, std::vector<int> row_offsets, std::vector<int> col_indices,
               std::vector<double> values);

  /// Duplicates are summed in input order so the result is deterministic.
  static SparseMatrix from_triplets(int nrows, int ncols, std::span<const Triplet> triplets);
  static SparseMatrix identity(int n);

  int rows() const noexcept { return nrows_; }
  int cols() const noexcept { return ncols_; }
  std::size_t nnz() const noexcept { return values_.size(); }

  std::span<const int> row_offsets() const noexcept { return row_offsets_; }
  std::span<const int> col_indices() const noexcept { return col_indices_; }
  std::span<const double> values() const noexcept { return values_; }

  /// Entry (i, j), zero when not stored.
  double coeff(int i, int j) const;

  /// y = A x
  void multiply(std::span<const double> x, std::span<double> y) const;
  Vector operator*(std::span<const double> x) const;
  /// y = A^T x
  void multiply_transpose(std::span<const double> x, std::span<double> y) const;

  SparseMatrix transpose() const;
  Vector diagonal() const;

  /// Largest absolute entry.
  double max_abs() const;
  /// Max absolute row sum.
  double norm_inf() const;

  /// Row-major dense copy, for small matrices and tests.
  std::vector<double> to_dense() const;

private:
  int nrows_ = 0;
  int ncols_ = 0;
  std::vector<int> row_offsets_{0};
  std::vector<int> col_indices_;
  std::vector<double> values_;
};

/// alpha*A + beta*B over the union of both patterns.
SparseMatrix linear_combination(double alpha, const SparseMatrix& a, double beta, const SparseMatrix& b);

/// A * B
SparseMatrix multiply(const SparseMatrix& a, const SparseMatrix& b);

/// P^T A P
SparseMatrix galerkin_product(const SparseMatrix& p, const SparseMatrix& a);

/// max |A_ij - B_ij| over both patterns.
double max_abs_difference(const SparseMatrix& a, const SparseMatrix& b);

/// Matrix Market coordinate format ("general", real), 1-based indices.
void write_matrix_market(std::ostream& os, const SparseMatrix& a);

// Dense vector kernels shared across modules.
double dot(std::span<const double> x, std::span<const double> y);
double norm2(std::span<const double> x);
/// y += a * x
void axpy(double a, std::span<const double> x, std::span<double> y);
void scale(double a, std::span<double> x);

}  // namespace eigmg
