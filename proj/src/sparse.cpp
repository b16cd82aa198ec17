#include "amgopt/sparse.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "amgopt/error.hpp"

namespace amgopt {

namespace {

std::string dims(Index r, Index c) { return std::to_string(r) + "x" + std::to_string(c); }

}  // namespace

SparseMatrix::SparseMatrix(Index rows, Index cols, std::vector<std::size_t> row_ptr,
                           std::vector<Index> col_idx, std::vector<double> values)
    : rows_(rows), cols_(cols), row_ptr_(std::move(row_ptr)), col_idx_(std::move(col_idx)),
      values_(std::move(values)) {
  require(rows >= 0 && cols >= 0, "negative matrix dimension");
  require(row_ptr_.size() == static_cast<std::size_t>(rows) + 1, "row_ptr size must be rows+1");
  require(row_ptr_.front() == 0 && row_ptr_.back() == col_idx_.size(), "row_ptr inconsistent with nnz");
  require(col_idx_.size() == values_.size(), "col_idx and values differ in length");
  for (Index i = 0; i < rows; ++i) {
    require(row_ptr_[i] <= row_ptr_[i + 1], "row_ptr not monotone");
    for (std::size_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) {
      require(col_idx_[k] >= 0 && col_idx_[k] < cols, "column index out of range");
      require(k == row_ptr_[i] || col_idx_[k - 1] < col_idx_[k], "columns not sorted and unique");
      require(values_[k] != 0.0, "explicit zero stored");
    }
  }
}

SparseMatrix SparseMatrix::from_triplets(Index rows, Index cols, std::vector<Triplet> entries) {
  for (const auto& t : entries) {
    if (t.row < 0 || t.row >= rows || t.col < 0 || t.col >= cols)
      throw DimensionError("triplet (" + std::to_string(t.row) + "," + std::to_string(t.col) +
                           ") outside " + dims(rows, cols));
  }
  std::stable_sort(entries.begin(), entries.end(), [](const Triplet& a, const Triplet& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  });
  SparseMatrix m;
  m.rows_ = rows;
  m.cols_ = cols;
  m.row_ptr_.assign(static_cast<std::size_t>(rows) + 1, 0);
  std::size_t k = 0;
  for (Index i = 0; i < rows; ++i) {
    while (k < entries.size() && entries[k].row == i) {
      const Index j = entries[k].col;
      double v = 0.0;
      while (k < entries.size() && entries[k].row == i && entries[k].col == j) v += entries[k++].value;
      if (v != 0.0) {
        m.col_idx_.push_back(j);
        m.values_.push_back(v);
      }
    }
    m.row_ptr_[i + 1] = m.col_idx_.size();
  }
  return m;
}

SparseMatrix SparseMatrix::identity(Index n) {
  std::vector<double> ones(static_cast<std::size_t>(n), 1.0);
  return diagonal(ones);
}

SparseMatrix SparseMatrix::diagonal(std::span<const double> d) {
  std::vector<Triplet> t;
  for (std::size_t i = 0; i < d.size(); ++i)
    t.push_back({static_cast<Index>(i), static_cast<Index>(i), d[i]});
  const auto n = static_cast<Index>(d.size());
  return from_triplets(n, n, std::move(t));
}

SparseMatrix SparseMatrix::from_dense(Index rows, Index cols, std::span<const double> dense) {
  if (dense.size() != static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols))
    throw DimensionError("dense buffer does not match " + dims(rows, cols));
  std::vector<Triplet> t;
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) {
      const double v = dense[static_cast<std::size_t>(i) * cols + j];
      if (v != 0.0) t.push_back({i, j, v});
    }
  return from_triplets(rows, cols, std::move(t));
}

double SparseMatrix::at(Index i, Index j) const {
  if (i < 0 || i >= rows_ || j < 0 || j >= cols_) throw DimensionError("index outside " + dims(rows_, cols_));
  const auto first = col_idx_.begin() + static_cast<std::ptrdiff_t>(row_ptr_[i]);
  const auto last = col_idx_.begin() + static_cast<std::ptrdiff_t>(row_ptr_[i + 1]);
  const auto it = std::lower_bound(first, last, j);
  if (it == last || *it != j) return 0.0;
  return values_[static_cast<std::size_t>(it - col_idx_.begin())];
}

Vector SparseMatrix::diagonal_values() const {
  Vector d(static_cast<std::size_t>(std::min(rows_, cols_)), 0.0);
  for (Index i = 0; i < static_cast<Index>(d.size()); ++i) d[i] = at(i, i);
  return d;
}

std::vector<double> SparseMatrix::to_dense() const {
  std::vector<double> d(static_cast<std::size_t>(rows_) * static_cast<std::size_t>(cols_), 0.0);
  for (Index i = 0; i < rows_; ++i)
    for (std::size_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k)
      d[static_cast<std::size_t>(i) * cols_ + col_idx_[k]] = values_[k];
  return d;
}

SparseMatrix SparseMatrix::transpose() const {
  SparseMatrix t;
  t.rows_ = cols_;
  t.cols_ = rows_;
  t.row_ptr_.assign(static_cast<std::size_t>(cols_) + 1, 0);
  for (Index j : col_idx_) ++t.row_ptr_[j + 1];
  std::partial_sum(t.row_ptr_.begin(), t.row_ptr_.end(), t.row_ptr_.begin());
  t.col_idx_.resize(nnz());
  t.values_.resize(nnz());
  std::vector<std::size_t> next(t.row_ptr_.begin(), t.row_ptr_.end() - 1);
  // Visiting rows in order keeps the transposed columns sorted.
  for (Index i = 0; i < rows_; ++i)
    for (std::size_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) {
      const std::size_t dst = next[col_idx_[k]]++;
      t.col_idx_[dst] = i;
      t.values_[dst] = values_[k];
    }
  return t;
}

void spmv(const SparseMatrix& A, std::span<const double> x, std::span<double> y) {
  if (x.size() != static_cast<std::size_t>(A.cols()) || y.size() != static_cast<std::size_t>(A.rows()))
    throw DimensionError("spmv: matrix " + dims(A.rows(), A.cols()) + " with x of size " +
                         std::to_string(x.size()));
  const auto rp = A.row_ptr();
  const auto ci = A.col_idx();
  const auto v = A.values();
  for (Index i = 0; i < A.rows(); ++i) {
    double s = 0.0;
    for (std::size_t k = rp[i]; k < rp[i + 1]; ++k) s += v[k] * x[ci[k]];
    y[i] = s;
  }
}

Vector spmv(const SparseMatrix& A, std::span<const double> x) {
  Vector y(static_cast<std::size_t>(A.rows()));
  spmv(A, x, y);
  return y;
}

Vector spmv_transpose(const SparseMatrix& A, std::span<const double> x) {
  if (x.size() != static_cast<std::size_t>(A.rows()))
    throw DimensionError("spmv_transpose: matrix " + dims(A.rows(), A.cols()) + " with x of size " +
                         std::to_string(x.size()));
  Vector y(static_cast<std::size_t>(A.cols()), 0.0);
  const auto rp = A.row_ptr();
  const auto ci = A.col_idx();
  const auto v = A.values();
  for (Index i = 0; i < A.rows(); ++i)
    for (std::size_t k = rp[i]; k < rp[i + 1]; ++k) y[ci[k]] += v[k] * x[i];
  return y;
}

SparseMatrix multiply(const SparseMatrix& A, const SparseMatrix& B) {
  if (A.cols() != B.rows())
    throw DimensionError("multiply: " + dims(A.rows(), A.cols()) + " times " + dims(B.rows(), B.cols()));
  const auto arp = A.row_ptr();
  const auto aci = A.col_idx();
  const auto av = A.values();
  const auto brp = B.row_ptr();
  const auto bci = B.col_idx();
  const auto bv = B.values();

  std::vector<std::size_t> rp{0};
  rp.reserve(static_cast<std::size_t>(A.rows()) + 1);
  std::vector<Index> ci;
  std::vector<double> vals;
  std::vector<double> acc(static_cast<std::size_t>(B.cols()), 0.0);
  std::vector<char> used(static_cast<std::size_t>(B.cols()), 0);
  std::vector<Index> pattern;
  for (Index i = 0; i < A.rows(); ++i) {
    pattern.clear();
    for (std::size_t ka = arp[i]; ka < arp[i + 1]; ++ka) {
      const Index k = aci[ka];
      const double a = av[ka];
      for (std::size_t kb = brp[k]; kb < brp[k + 1]; ++kb) {
        const Index j = bci[kb];
        if (!used[j]) {
          used[j] = 1;
          pattern.push_back(j);
        }
        acc[j] += a * bv[kb];
      }
    }
    std::sort(pattern.begin(), pattern.end());
    for (Index j : pattern) {
      if (acc[j] != 0.0) {
        ci.push_back(j);
        vals.push_back(acc[j]);
      }
      acc[j] = 0.0;
      used[j] = 0;
    }
    rp.push_back(ci.size());
  }
  return SparseMatrix(A.rows(), B.cols(), std::move(rp), std::move(ci), std::move(vals));
}

SparseMatrix triple_product(const SparseMatrix& R, const SparseMatrix& A, const SparseMatrix& P) {
  if (R.cols() != A.rows() || A.cols() != P.rows())
    throw DimensionError("triple_product: " + dims(R.rows(), R.cols()) + " * " + dims(A.rows(), A.cols()) +
                         " * " + dims(P.rows(), P.cols()));
  return multiply(multiply(R, A), P);
}

SparseMatrix galerkin_product(const SparseMatrix& P, const SparseMatrix& A) {
  return triple_product(P.transpose(), A, P);
}

SparseMatrix add(double alpha, const SparseMatrix& A, double beta, const SparseMatrix& B) {
  if (A.rows() != B.rows() || A.cols() != B.cols())
    throw DimensionError("add: " + dims(A.rows(), A.cols()) + " and " + dims(B.rows(), B.cols()));
  std::vector<std::size_t> rp{0};
  std::vector<Index> ci;
  std::vector<double> vals;
  const auto arp = A.row_ptr();
  const auto brp = B.row_ptr();
  const auto aci = A.col_idx();
  const auto bci = B.col_idx();
  const auto av = A.values();
  const auto bv = B.values();
  auto emit = [&](Index j, double v) {
    if (v != 0.0) {
      ci.push_back(j);
      vals.push_back(v);
    }
  };
  for (Index i = 0; i < A.rows(); ++i) {
    std::size_t ka = arp[i], kb = brp[i];
    while (ka < arp[i + 1] || kb < brp[i + 1]) {
      if (kb == brp[i + 1] || (ka < arp[i + 1] && aci[ka] < bci[kb])) {
        emit(aci[ka], alpha * av[ka]);
        ++ka;
      } else if (ka == arp[i + 1] || bci[kb] < aci[ka]) {
        emit(bci[kb], beta * bv[kb]);
        ++kb;
      } else {
        emit(aci[ka], alpha * av[ka] + beta * bv[kb]);
        ++ka;
        ++kb;
      }
    }
    rp.push_back(ci.size());
  }
  return SparseMatrix(A.rows(), A.cols(), std::move(rp), std::move(ci), std::move(vals));
}

SparseMatrix scale(double alpha, const SparseMatrix& A) {
  if (alpha == 0.0)
    return SparseMatrix(A.rows(), A.cols(), std::vector<std::size_t>(static_cast<std::size_t>(A.rows()) + 1, 0),
                        {}, {});
  std::vector<double> v(A.values().begin(), A.values().end());
  for (double& x : v) x *= alpha;
  return SparseMatrix(A.rows(), A.cols(), {A.row_ptr().begin(), A.row_ptr().end()},
                      {A.col_idx().begin(), A.col_idx().end()}, std::move(v));
}

SparseMatrix submatrix(const SparseMatrix& A, std::span<const Index> rows, std::span<const Index> cols) {
  std::vector<Index> col_map(static_cast<std::size_t>(A.cols()), -1);
  for (std::size_t k = 0; k < cols.size(); ++k) {
    if (cols[k] < 0 || cols[k] >= A.cols()) throw DimensionError("submatrix: column out of range");
    col_map[cols[k]] = static_cast<Index>(k);
  }
  std::vector<Triplet> t;
  const auto rp = A.row_ptr();
  const auto ci = A.col_idx();
  const auto v = A.values();
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const Index i = rows[r];
    if (i < 0 || i >= A.rows()) throw DimensionError("submatrix: row out of range");
    for (std::size_t k = rp[i]; k < rp[i + 1]; ++k)
      if (col_map[ci[k]] >= 0) t.push_back({static_cast<Index>(r), col_map[ci[k]], v[k]});
  }
  return SparseMatrix::from_triplets(static_cast<Index>(rows.size()), static_cast<Index>(cols.size()),
                                     std::move(t));
}

double max_abs(const SparseMatrix& A) {
  double m = 0.0;
  for (double v : A.values()) m = std::max(m, std::abs(v));
  return m;
}

double relative_difference(const SparseMatrix& A, const SparseMatrix& B) {
  const SparseMatrix d = add(1.0, A, -1.0, B);
  const double ref = max_abs(A);
  const double diff = max_abs(d);
  return ref > 0.0 ? diff / ref : diff;
}

double dot(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw DimensionError("dot: size mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
  return s;
}

double norm2(std::span<const double> x) { return std::sqrt(dot(x, x)); }

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  if (x.size() != y.size()) throw DimensionError("axpy: size mismatch");
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

Vector linear_combination(double a, std::span<const double> x, double b, std::span<const double> y) {
  if (x.size() != y.size()) throw DimensionError("linear_combination: size mismatch");
  Vector z(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) z[i] = a * x[i] + b * y[i];
  return z;
}

}  // namespace amgopt
