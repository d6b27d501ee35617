#include "eigmg/sparse.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numeric>
#include <ostream>
#include <string>

#include "eigmg/error.hpp"

namespace eigmg {

SparseMatrix::SparseMatrix(int nrows, int ncols, std::vector<int> row_offsets,
                           std::vector<int> col_indices, std::vector<double> values)
    : nrows_(nrows),
      ncols_(ncols),
      row_offsets_(std::move(row_offsets)),
      col_indices_(std::move(col_indices)),
      values_(std::move(values)) {
  if (nrows_ < 0 || ncols_ < 0 || row_offsets_.size() != static_cast<std::size_t>(nrows_) + 1 ||
      col_indices_.size() != values_.size() ||
      static_cast<std::size_t>(row_offsets_.back()) != values_.size()) {
    throw DimensionError("SparseMatrix: inconsistent CSR arrays");
  }
  for (int i = 0; i < nrows_; ++i) {
    for (int k = row_offsets_[i]; k < row_offsets_[i + 1]; ++k) {
      const int c = col_indices_[k];
      if (c < 0 || c >= ncols_) throw DimensionError("SparseMatrix: column index out of range");
      if (k > row_offsets_[i] && col_indices_[k - 1] >= c) {
        throw ValidationError("SparseMatrix: column indices not strictly increasing");
      }
    }
  }
}

SparseMatrix SparseMatrix::from_triplets(int nrows, int ncols, std::span<const Triplet> triplets) {
  std::vector<std::size_t> order(triplets.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t l, std::size_t r) {
    const auto& a = triplets[l];
    const auto& b = triplets[r];
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  });

  std::vector<int> offsets(static_cast<std::size_t>(nrows) + 1, 0);
  std::vector<int> cols;
  std::vector<double> vals;
  cols.reserve(triplets.size());
  vals.reserve(triplets.size());
  int last_row = -1;
  int last_col = -1;
  for (std::size_t idx : order) {
    const auto& t = triplets[idx];
    if (t.row < 0 || t.row >= nrows || t.col < 0 || t.col >= ncols) {
      throw DimensionError("from_triplets: index out of range");
    }
    if (t.row == last_row && t.col == last_col) {
      vals.back() += t.value;
      continue;
    }
    cols.push_back(t.col);
    vals.push_back(t.value);
    ++offsets[t.row + 1];
    last_row = t.row;
    last_col = t.col;
  }
  std::partial_sum(offsets.begin(), offsets.end(), offsets.begin());
  return SparseMatrix(nrows, ncols, std::move(offsets), std::move(cols), std::move(vals));
}

SparseMatrix SparseMatrix::identity(int n) {
  std::vector<int> offsets(static_cast<std::size_t>(n) + 1);
  std::iota(offsets.begin(), offsets.end(), 0);
  std::vector<int> cols(static_cast<std::size_t>(n));
  std::iota(cols.begin(), cols.end(), 0);
  return SparseMatrix(n, n, std::move(offsets), std::move(cols), std::vector<double>(n, 1.0));
}

double SparseMatrix::coeff(int i, int j) const {
  const auto first = col_indices_.begin() + row_offsets_[i];
  const auto last = col_indices_.begin() + row_offsets_[i + 1];
  const auto it = std::lower_bound(first, last, j);
  if (it == last || *it != j) return 0.0;
  return values_[static_cast<std::size_t>(it - col_indices_.begin())];
}

void SparseMatrix::multiply(std::span<const double> x, std::span<double> y) const {
  if (x.size() != static_cast<std::size_t>(ncols_) || y.size() != static_cast<std::size_t>(nrows_)) {
    throw DimensionError("SparseMatrix::multiply: dimension mismatch");
  }
  for (int i = 0; i < nrows_; ++i) {
    double sum = 0.0;
    for (int k = row_offsets_[i]; k < row_offsets_[i + 1]; ++k) sum += values_[k] * x[col_indices_[k]];
    y[i] = sum;
  }
}

Vector SparseMatrix::operator*(std::span<const double> x) const {
  Vector y(static_cast<std::size_t>(nrows_));
  multiply(x, y);
  return y;
}

void SparseMatrix::multiply_transpose(std::span<const double> x, std::span<double> y) const {
  if (x.size() != static_cast<std::size_t>(nrows_) || y.size() != static_cast<std::size_t>(ncols_)) {
    throw DimensionError("SparseMatrix::multiply_transpose: dimension mismatch");
  }
  std::fill(y.begin(), y.end(), 0.0);
  for (int i = 0; i < nrows_; ++i) {
    const double xi = x[i];
    if (xi == 0.0) continue;
    for (int k = row_offsets_[i]; k < row_offsets_[i + 1]; ++k) y[col_indices_[k]] += values_[k] * xi;
  }
}

SparseMatrix SparseMatrix::transpose() const {
  std::vector<int> offsets(static_cast<std::size_t>(ncols_) + 1, 0);
  for (int c : col_indices_) ++offsets[c + 1];
  std::partial_sum(offsets.begin(), offsets.end(), offsets.begin());
  std::vector<int> next(offsets.begin(), offsets.end() - 1);
  std::vector<int> cols(values_.size());
  std::vector<double> vals(values_.size());
  for (int i = 0; i < nrows_; ++i) {
    for (int k = row_offsets_[i]; k < row_offsets_[i + 1]; ++k) {
      const int dst = next[col_indices_[k]]++;
      cols[dst] = i;
      vals[dst] = values_[k];
    }
  }
  return SparseMatrix(ncols_, nrows_, std::move(offsets), std::move(cols), std::move(vals));
}

Vector SparseMatrix::diagonal() const {
  Vector d(static_cast<std::size_t>(std::min(nrows_, ncols_)), 0.0);
  for (std::size_t i = 0; i < d.size(); ++i) d[i] = coeff(static_cast<int>(i), static_cast<int>(i));
  return d;
}

double SparseMatrix::max_abs() const {
  double m = 0.0;
  for (double v : values_) m = std::max(m, std::abs(v));
  return m;
}

double SparseMatrix::norm_inf() const {
  double m = 0.0;
  for (int i = 0; i < nrows_; ++i) {
    double s = 0.0;
    for (int k = row_offsets_[i]; k < row_offsets_[i + 1]; ++k) s += std::abs(values_[k]);
    m = std::max(m, s);
  }
  return m;
}

std::vector<double> SparseMatrix::to_dense() const {
  std::vector<double> d(static_cast<std::size_t>(nrows_) * ncols_, 0.0);
  for (int i = 0; i < nrows_; ++i) {
    for (int k = row_offsets_[i]; k < row_offsets_[i + 1]; ++k) {
      d[static_cast<std::size_t>(i) * ncols_ + col_indices_[k]] = values_[k];
    }
  }
  return d;
}

SparseMatrix linear_combination(double alpha, const SparseMatrix& a, double beta, const SparseMatrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw DimensionError("linear_combination: dimension mismatch");
  }
  std::vector<int> offsets(static_cast<std::size_t>(a.rows()) + 1, 0);
  std::vector<int> cols;
  std::vector<double> vals;
  cols.reserve(std::max(a.nnz(), b.nnz()));
  vals.reserve(std::max(a.nnz(), b.nnz()));
  const auto ao = a.row_offsets(), bo = b.row_offsets();
  const auto ac = a.col_indices(), bc = b.col_indices();
  const auto av = a.values(), bv = b.values();
  for (int i = 0; i < a.rows(); ++i) {
    int ka = ao[i], kb = bo[i];
    while (ka < ao[i + 1] || kb < bo[i + 1]) {
      if (kb >= bo[i + 1] || (ka < ao[i + 1] && ac[ka] < bc[kb])) {
        cols.push_back(ac[ka]);
        vals.push_back(alpha * av[ka]);
        ++ka;
      } else if (ka >= ao[i + 1] || bc[kb] < ac[ka]) {
        cols.push_back(bc[kb]);
        vals.push_back(beta * bv[kb]);
        ++kb;
      } else {
        cols.push_back(ac[ka]);
        vals.push_back(alpha * av[ka] + beta * bv[kb]);
        ++ka;
        ++kb;
      }
    }
    offsets[i + 1] = static_cast<int>(cols.size());
  }
  return SparseMatrix(a.rows(), a.cols(), std::move(offsets), std::move(cols), std::move(vals));
}

SparseMatrix multiply(const SparseMatrix& a, const SparseMatrix& b) {
  if (a.cols() != b.rows()) throw DimensionError("multiply: inner dimension mismatch");
  std::vector<int> offsets(static_cast<std::size_t>(a.rows()) + 1, 0);
  std::vector<int> cols;
  std::vector<double> vals;
  std::vector<double> accum(static_cast<std::size_t>(b.cols()), 0.0);
  std::vector<int> marker(static_cast<std::size_t>(b.cols()), -1);
  std::vector<int> touched;
  const auto ao = a.row_offsets(), bo = b.row_offsets();
  const auto ac = a.col_indices(), bc = b.col_indices();
  const auto av = a.values(), bv = b.values();
  for (int i = 0; i < a.rows(); ++i) {
    touched.clear();
    for (int ka = ao[i]; ka < ao[i + 1]; ++ka) {
      const int r = ac[ka];
      for (int kb = bo[r]; kb < bo[r + 1]; ++kb) {
        const int c = bc[kb];
        if (marker[c] != i) {
          marker[c] = i;
          accum[c] = 0.0;
          touched.push_back(c);
        }
        accum[c] += av[ka] * bv[kb];
      }
    }
    std::sort(touched.begin(), touched.end());
    for (int c : touched) {
      cols.push_back(c);
      vals.push_back(accum[c]);
    }
    offsets[i + 1] = static_cast<int>(cols.size());
  }
  return SparseMatrix(a.rows(), b.cols(), std::move(offsets), std::move(cols), std::move(vals));
}

SparseMatrix galerkin_product(const SparseMatrix& p, const SparseMatrix& a) {
  return multiply(p.transpose(), multiply(a, p));
}

double max_abs_difference(const SparseMatrix& a, const SparseMatrix& b) {
  return linear_combination(1.0, a, -1.0, b).max_abs();
}

void write_matrix_market(std::ostream& os, const SparseMatrix& a) {
  os << "%%MatrixMarket matrix coordinate real general\n";
  os << a.rows() << ' ' << a.cols() << ' ' << a.nnz() << '\n';
  const auto offsets = a.row_offsets();
  const auto cols = a.col_indices();
  const auto vals = a.values();
  const auto old_flags = os.flags();
  const auto old_precision = os.precision();
  os << std::setprecision(17);
  for (int i = 0; i < a.rows(); ++i) {
    for (int k = offsets[i]; k < offsets[i + 1]; ++k) {
      os << i + 1 << ' ' << cols[k] + 1 << ' ' << vals[k] << '\n';
    }
  }
  os.flags(old_flags);
  os.precision(old_precision);
}

double dot(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw DimensionError("dot: dimension mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
  return s;
}

double norm2(std::span<const double> x) { return std::sqrt(dot(x, x)); }

void axpy(double a, std::span<const double> x, std::span<double> y) {
  if (x.size() != y.size()) throw DimensionError("axpy: dimension mismatch");
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += a * x[i];
}

void scale(double a, std::span<double> x) {
  for (double& v : x) v *= a;
}

}  // namespace eigmg
