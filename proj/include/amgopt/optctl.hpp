#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "amgopt/hierarchy.hpp"
#include "amgopt/solvers.hpp"

namespace amgopt {

struct Tolerances {
  double forward = 1e-8;  ///< state solves A^{-1}
  double mass = 1e-8;     ///< mass solves M_u^{-1}
  double coarse = 1e-4;   ///< coarsest Hessian solve
  double outer = 1e-8;    ///< outer CG
  int max_inner_iterations = 500;
  int max_coarse_iterations = 500;
  int max_outer_iterations = 500;
};

/// Per-level call counts collected by apply_mlas.
struct MlasStats {
  std::vector<int> two_level_applies;
  std::vector<int> hessian_applies;
  int coarsest_solves = 0;
};

/// Linear-quadratic control problem on a hierarchy:
/// minimize 1/2 |y - y_d|^2_{M_y} + beta/2 |u|^2_{M_u} subject to A y = M_yu u.
///
/// Level j operators (all matrix-free, control vectors live on level j):
///   K_j   = A_j^{-1} M_yu,j
///   K_j*  = M_u,j^{-1} M_yu,j^T A_j^{-1} M_y,j
///   G_j   = K_j* K_j + beta I
///   Pi_j  = M_u,j+1^{-1} P_j^T M_u,j
/// Copies share the hierarchy and the inner solvers.
class ControlProblem {
 public:
  ControlProblem(std::shared_ptr<const Hierarchy> hierarchy, double beta, Vector desired_state,
                 Tolerances tolerances = {}, int levels_used = 0, const AmgOptions& inner = {});

  const Hierarchy& hierarchy() const noexcept { return *hierarchy_; }
  std::shared_ptr<const Hierarchy> hierarchy_ptr() const noexcept { return hierarchy_; }
  double beta() const noexcept { return beta_; }
  const Vector& desired_state() const noexcept { return yd_; }
  const Tolerances& tolerances() const noexcept { return tol_; }
  void set_tolerances(const Tolerances& t);
  /// Number of levels the preconditioner uses; 0 < n <= hierarchy size.
  int levels_used() const noexcept { return levels_used_; }
  void set_levels_used(int n);

  Vector state_solve(int j, const Vector& b) const;
  Vector mass_solve(int j, const Vector& b) const;

  Vector apply_K(int j, const Vector& u) const;
  /// Euclidean transpose M_yu^T A^{-1}.
  Vector apply_K_transpose(int j, const Vector& y) const;
  Vector apply_K_adjoint(int j, const Vector& y) const;
  Vector apply_hessian(int j, const Vector& u) const;
  /// M_u,j G_j u without any mass solve.
  Vector apply_hessian_matrix(int j, const Vector& u) const;

  /// Level j -> j+1.
  Vector apply_projection(int j, const Vector& u) const;
  /// Euclidean transpose of Pi_j, level j+1 -> j: M_u,j P_j M_u,j+1^{-1}.
  Vector apply_projection_transpose(int j, const Vector& v) const;
  Vector apply_prolongation(int j, const Vector& v) const;

  /// P_j W_next(Pi_j b) + beta^{-1}(b - P_j Pi_j b).
  Vector apply_two_level_inv(int j, const LinearOperator& w_next, const Vector& b) const;
  Vector apply_mlas(int j, const Vector& b, MlasStats* stats = nullptr) const;
  /// Unpreconditioned M_u-weighted CG on G at the coarsest used level.
  Vector coarsest_solve(const Vector& b) const;

  /// Right-hand side M_yu^T A^{-1} M_y y_d of the reduced normal equations.
  Vector reduced_rhs() const;
  /// J(K u, u).
  double objective(const Vector& u) const;

  LinearOperator hessian_operator(int j) const;
  LinearOperator mlas_operator(int j) const;

 private:
  void check_level(int j, bool needs_coarser) const;

  std::shared_ptr<const Hierarchy> hierarchy_;
  std::shared_ptr<const std::vector<AmgSolver>> state_solvers_;
  double beta_;
  Vector yd_;
  Tolerances tol_;
  int levels_used_;
};

enum class Preconditioner { none, multilevel };

std::string to_string(Preconditioner p);
Preconditioner parse_preconditioner(const std::string& s);

struct SolveReport {
  Index n_state = 0;
  Index n_control = 0;
  double beta = 0.0;
  Preconditioner preconditioner = Preconditioner::none;
  int levels_requested = 0;
  int levels_used = 0;
  int retries = 0;
  int iterations = 0;
  bool converged = false;
  /// Some attempt stopped on nonpositive curvature.
  bool breakdown = false;
  /// Euclidean relative residual of the reduced normal equations as seen by CG.
  double relative_residual = 0.0;
  /// Relative residual recomputed with forward and mass tolerance 1e-10, in the M_u^{-1} norm.
  double verified_residual = 0.0;
  double objective = 0.0;
  std::optional<double> control_error;
  std::optional<double> wall_seconds;
  Vector control;
  std::vector<double> residual_history;
  std::string message;
};

struct SolveOptions {
  /// Retry with one fewer level after a breakdown or a stall, down to this many levels.
  int min_levels = 2;
  bool timings = false;
};

/// Outer CG on (M_yu^T A^{-1} M_y A^{-1} M_yu + beta M_u) u = M_yu^T A^{-1} M_y y_d.
/// The multilevel preconditioner applies W_0 M_u^{-1} with the fine projection
/// folded in: P_0 W_1(M_u,1^{-1} P_0^T r) + beta^{-1}(M_u^{-1} r - P_0 M_u,1^{-1} P_0^T r).
SolveReport solve_control_problem(const ControlProblem& problem, Preconditioner preconditioner,
                                  const SolveOptions& options = {});

}  // namespace amgopt
