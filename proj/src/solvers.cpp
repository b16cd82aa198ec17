#include "amgopt/solvers.hpp"

#include <cmath>
#include <random>
#include <string>

#include "amgopt/error.hpp"

namespace amgopt {

Vector LinearOperator::operator()(const Vector& x) const {
  if (x.size() != static_cast<std::size_t>(cols))
    throw DimensionError("operator with " + std::to_string(cols) + " columns applied to vector of size " +
                         std::to_string(x.size()));
  return apply(x);
}

LinearOperator LinearOperator::from_matrix(std::shared_ptr<const SparseMatrix> A) {
  LinearOperator op;
  op.rows = A->rows();
  op.cols = A->cols();
  op.apply = [A](const Vector& x) { return spmv(*A, x); };
  op.apply_transpose = [A](const Vector& x) { return spmv_transpose(*A, x); };
  return op;
}

LinearOperator LinearOperator::identity(Index n) {
  LinearOperator op;
  op.rows = op.cols = n;
  op.apply = [](const Vector& x) { return x; };
  op.apply_transpose = op.apply;
  op.self_adjoint = true;
  return op;
}

InnerProduct::InnerProduct(const SparseMatrix& weight) : weight_(&weight) {
  if (weight.rows() != weight.cols()) throw DimensionError("inner product weight must be square");
}

double InnerProduct::dot(std::span<const double> x, std::span<const double> y) const {
  if (!weight_) return amgopt::dot(x, y);
  return amgopt::dot(x, spmv(*weight_, y));
}

double InnerProduct::norm(std::span<const double> x) const { return std::sqrt(std::max(0.0, dot(x, x))); }

CgResult cg(const LinearOperator& op, std::span<const double> b, const InnerProduct& inner,
            const LinearOperator* precond, const CgOptions& options, const Vector* x0) {
  if (op.rows != op.cols) throw DimensionError("cg: operator must be square");
  if (b.size() != static_cast<std::size_t>(op.rows)) throw DimensionError("cg: right-hand side size mismatch");

  CgResult res;
  res.x = x0 ? *x0 : Vector(b.size(), 0.0);
  if (res.x.size() != b.size()) throw DimensionError("cg: initial guess size mismatch");

  const double bnorm = inner.norm(b);
  if (bnorm == 0.0) {
    res.x.assign(b.size(), 0.0);
    res.converged = true;
    return res;
  }

  Vector r(b.begin(), b.end());
  if (x0) axpy(-1.0, op(res.x), r);
  res.relative_residual = inner.norm(r) / bnorm;
  res.residual_history.push_back(res.relative_residual);
  if (res.relative_residual <= options.tol) {
    res.converged = true;
    return res;
  }

  Vector z = precond ? (*precond)(r) : r;
  double rho = inner.dot(r, z);
  if (!(rho > 0.0)) {
    res.breakdown = true;
    return res;
  }
  Vector p = z;

  for (int it = 1; it <= options.max_iterations; ++it) {
    const Vector q = op(p);
    const double curvature = inner.dot(p, q);
    if (!(curvature > 0.0)) {
      res.breakdown = true;
      return res;
    }
    const double alpha = rho / curvature;
    axpy(alpha, p, res.x);
    axpy(-alpha, q, r);
    res.iterations = it;
    res.relative_residual = inner.norm(r) / bnorm;
    res.residual_history.push_back(res.relative_residual);
    if (res.relative_residual <= options.tol) {
      res.converged = true;
      return res;
    }
    z = precond ? (*precond)(r) : r;
    const double rho_next = inner.dot(r, z);
    if (!(rho_next > 0.0)) {
      res.breakdown = true;
      return res;
    }
    const double beta = rho_next / rho;
    rho = rho_next;
    for (std::size_t i = 0; i < p.size(); ++i) p[i] = z[i] + beta * p[i];
  }
  return res;
}

Vector gauss_seidel_sym(const SparseMatrix& A, std::span<const double> b, Vector x, int sweeps) {
  if (A.rows() != A.cols()) throw DimensionError("gauss_seidel_sym: matrix must be square");
  if (b.size() != static_cast<std::size_t>(A.rows()) || x.size() != b.size())
    throw DimensionError("gauss_seidel_sym: vector size mismatch");
  const auto rp = A.row_ptr();
  const auto ci = A.col_idx();
  const auto v = A.values();
  const Index n = A.rows();
  Vector diag(static_cast<std::size_t>(n), 0.0);
  for (Index i = 0; i < n; ++i) {
    for (std::size_t k = rp[i]; k < rp[i + 1]; ++k)
      if (ci[k] == i) diag[i] = v[k];
    if (diag[i] == 0.0) throw Error(ErrorCode::invalid_argument, "gauss_seidel_sym: zero diagonal in row " + std::to_string(i));
  }
  auto relax = [&](Index i) {
    double s = b[i];
    for (std::size_t k = rp[i]; k < rp[i + 1]; ++k)
      if (ci[k] != i) s -= v[k] * x[ci[k]];
    x[i] = s / diag[i];
  };
  for (int s = 0; s < sweeps; ++s) {
    for (Index i = 0; i < n; ++i) relax(i);
    for (Index i = n - 1; i >= 0; --i) relax(i);
  }
  return x;
}

namespace {

Vector random_unit(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  Vector v(n);
  for (double& x : v) x = dist(gen);
  const double nv = norm2(v);
  for (double& x : v) x /= nv;
  return v;
}

}  // namespace

PowerResult power_eig(const LinearOperator& op, double tol, int max_iterations, std::uint64_t seed) {
  if (op.rows != op.cols) throw DimensionError("power_eig: operator must be square");
  PowerResult res;
  if (op.cols == 0) {
    res.converged = true;
    return res;
  }
  Vector v = random_unit(static_cast<std::size_t>(op.cols), seed);
  double prev = 0.0;
  for (int it = 1; it <= max_iterations; ++it) {
    Vector w = op(v);
    const double est = dot(v, w);
    const double nw = norm2(w);
    res.iterations = it;
    res.norm = est;
    if (nw == 0.0) {
      res.norm = 0.0;
      res.converged = true;
      return res;
    }
    if (it > 1 && std::abs(est - prev) <= tol * std::abs(est)) {
      res.converged = true;
      return res;
    }
    prev = est;
    for (std::size_t i = 0; i < w.size(); ++i) v[i] = w[i] / nw;
  }
  return res;
}

PowerResult power_norm(const LinearOperator& op, double tol, int max_iterations, std::uint64_t seed) {
  if (!op.apply_transpose) throw Error(ErrorCode::invalid_argument, "power_norm: operator has no transpose");
  LinearOperator normal;
  normal.rows = normal.cols = op.cols;
  normal.apply = [&op](const Vector& x) { return op.apply_transpose(op(x)); };
  // A relative change d in the eigenvalue is d/2 in its square root.
  PowerResult res = power_eig(normal, 2.0 * tol, max_iterations, seed);
  res.norm = std::sqrt(std::max(0.0, res.norm));
  return res;
}

}  // namespace amgopt
