#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "amgopt/sparse.hpp"

namespace amgopt {

/// A matrix-free linear map. `apply_transpose` is the Euclidean transpose and
/// may be left empty when no caller needs it.
struct LinearOperator {
  using Apply = std::function<Vector(const Vector&)>;

  Index rows = 0;
  Index cols = 0;
  Apply apply;
  Apply apply_transpose;
  /// Declares self-adjointness with respect to (x, y) = x^T W y, where W is
  /// this matrix, or the Euclidean product when W is null and the flag is set.
  bool self_adjoint = false;
  std::shared_ptr<const SparseMatrix> self_adjoint_weight;

  Vector operator()(const Vector& x) const;

  static LinearOperator from_matrix(std::shared_ptr<const SparseMatrix> A);
  static LinearOperator identity(Index n);
};

/// Inner product x^T W y; Euclidean when default constructed.
class InnerProduct {
 public:
  InnerProduct() = default;
  explicit InnerProduct(const SparseMatrix& weight);

  double dot(std::span<const double> x, std::span<const double> y) const;
  double norm(std::span<const double> x) const;
  bool euclidean() const noexcept { return weight_ == nullptr; }

 private:
  const SparseMatrix* weight_ = nullptr;
};

struct CgOptions {
  double tol = 1e-8;
  int max_iterations = 1000;
};

struct CgResult {
  Vector x;
  int iterations = 0;
  double relative_residual = 0.0;
  bool converged = false;
  /// Set when p.Ap <= 0 or r.z <= 0 was met, i.e. the operator or the
  /// preconditioner is not positive definite in the chosen inner product.
  bool breakdown = false;
  std::vector<double> residual_history;
};

/// Preconditioned conjugate gradients in the inner product `inner`.
///
/// `op` must be self-adjoint and positive definite with respect to `inner`,
/// and so must `precond` when given. Convergence is declared when the
/// `inner`-norm of the recursively updated residual drops below
/// tol * ||b||. The iteration never throws on breakdown; it stops and flags it.
CgResult cg(const LinearOperator& op, std::span<const double> b, const InnerProduct& inner,
            const LinearOperator* precond, const CgOptions& options, const Vector* x0 = nullptr);

/// Symmetric Gauss-Seidel: each sweep is a forward pass followed by a backward pass.
Vector gauss_seidel_sym(const SparseMatrix& A, std::span<const double> b, Vector x, int sweeps);

struct PowerResult {
  double norm = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// Estimates ||op||_2 by power iteration on op^T op. Requires apply_transpose.
/// Returns the best estimate with converged=false when max_iterations is hit.
PowerResult power_norm(const LinearOperator& op, double tol, int max_iterations, std::uint64_t seed = 17);

/// Largest eigenvalue of a symmetric positive semidefinite operator.
PowerResult power_eig(const LinearOperator& op, double tol, int max_iterations, std::uint64_t seed = 17);

}  // namespace amgopt
