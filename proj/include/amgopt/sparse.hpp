#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace amgopt {

using Index = std::int32_t;
using Vector = std::vector<double>;

struct Triplet {
  Index row;
  Index col;
  double value;
};

/// Compressed sparse row matrix.
///
/// Column indices are sorted and unique within each row and no explicit
/// zeros are stored. All constructors establish these invariants.
class SparseMatrix {
 public:
  SparseMatrix() = default;
  SparseMatrix(Index rows, Index cols, std::vector<std::size_t> row_ptr,
               std::vector<Index> col_idx, std::vector<double> values);

  /// Duplicates are summed; entries that sum to exactly zero are dropped.
  static SparseMatrix from_triplets(Index rows, Index cols, std::vector<Triplet> entries);
  static SparseMatrix identity(Index n);
  static SparseMatrix diagonal(std::span<const double> d);
  /// Row-major dense input.
  static SparseMatrix from_dense(Index rows, Index cols, std::span<const double> dense);

  Index rows() const noexcept { return rows_; }
  Index cols() const noexcept { return cols_; }
  std::size_t nnz() const noexcept { return values_.size(); }
  bool empty() const noexcept { return rows_ == 0 && cols_ == 0; }

  std::span<const std::size_t> row_ptr() const noexcept { return row_ptr_; }
  std::span<const Index> col_idx() const noexcept { return col_idx_; }
  std::span<const double> values() const noexcept { return values_; }

  double at(Index i, Index j) const;
  Vector diagonal_values() const;
  /// Row-major dense copy.
  std::vector<double> to_dense() const;

  SparseMatrix transpose() const;

 private:
  Index rows_ = 0;
  Index cols_ = 0;
  std::vector<std::size_t> row_ptr_{0};
  std::vector<Index> col_idx_;
  std::vector<double> values_;
};

/// y = A x. Each row is summed left to right in column order.
Vector spmv(const SparseMatrix& A, std::span<const double> x);
void spmv(const SparseMatrix& A, std::span<const double> x, std::span<double> y);
/// y = A^T x without forming the transpose.
Vector spmv_transpose(const SparseMatrix& A, std::span<const double> x);

SparseMatrix multiply(const SparseMatrix& A, const SparseMatrix& B);
/// R * A * P.
SparseMatrix triple_product(const SparseMatrix& R, const SparseMatrix& A, const SparseMatrix& P);
/// P^T * A * P.
SparseMatrix galerkin_product(const SparseMatrix& P, const SparseMatrix& A);
/// alpha * A + beta * B.
SparseMatrix add(double alpha, const SparseMatrix& A, double beta, const SparseMatrix& B);
SparseMatrix scale(double alpha, const SparseMatrix& A);
/// Keeps the listed rows and columns, in the given order.
SparseMatrix submatrix(const SparseMatrix& A, std::span<const Index> rows, std::span<const Index> cols);

/// max |A_ij - B_ij| / max |A_ij|.
double relative_difference(const SparseMatrix& A, const SparseMatrix& B);
double max_abs(const SparseMatrix& A);

// Dense vector helpers.
double dot(std::span<const double> x, std::span<const double> y);
double norm2(std::span<const double> x);
/// y += alpha * x
void axpy(double alpha, std::span<const double> x, std::span<double> y);
Vector linear_combination(double a, std::span<const double> x, double b, std::span<const double> y);

}  // namespace amgopt
