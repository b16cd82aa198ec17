#pragma once

#include <Eigen/Dense>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "amgopt/fem.hpp"
#include "amgopt/hierarchy.hpp"
#include "amgopt/optctl.hpp"

namespace amgopt {

/// Dense work is refused above this many rows.
inline constexpr Index dense_cap = 2000;

Eigen::MatrixXd to_dense(const SparseMatrix& A);
/// Columns op(e_0), ..., op(e_{n-1}).
Eigen::MatrixXd dense_operator(const LinearOperator& op);

struct SpectralDistanceResult {
  double distance = 0.0;
  double lambda_min = 1.0;
  double lambda_max = 1.0;
};

/// d(X, Y) = max |ln lambda| over the pencil X v = lambda Y v; X and Y symmetric positive definite.
SpectralDistanceResult spectral_distance_dense(const Eigen::MatrixXd& X, const Eigen::MatrixXd& Y);

/// Same distance for operators self-adjoint in (x, y) = x^T M y: the pencil (M X, M Y).
SpectralDistanceResult spectral_distance_weighted(const Eigen::MatrixXd& X, const Eigen::MatrixXd& Y,
                                                  const Eigen::MatrixXd& M);

/// E_j(X) = P_j X Pi_j + beta^{-1}(I - P_j Pi_j), with Pi_j formed densely.
Eigen::MatrixXd dense_E(const Level& level, const SparseMatrix& coarse_mass, double beta, const Eigen::MatrixXd& X);

/// ||K_j - S_j K_{j+1} Pi_j||_2 by power iteration on L^T L.
PowerResult estimate_aj_tilde(const ControlProblem& p, int j, double tol = 1e-4, int max_iterations = 500);

/// ||M_y^{1/2} (K_j - S_j K_{j+1} Pi_j) M_u^{-1/2}||_2 computed densely.
double compute_aj_exact(const Hierarchy& h, int j);

struct ApproxReport {
  std::string mode;
  std::vector<Index> n_control;
  std::vector<double> aj_tilde;
  std::vector<std::optional<double>> aj;

  /// aj_tilde[j] / aj_tilde[j+1].
  std::vector<double> ratios() const;
};

/// ã_j for every j with a coarser level, plus the exact a_j where the level fits dense_cap.
ApproxReport approximation_study(const ControlProblem& p, const std::string& mode, bool exact);

/// Columns: level,n_control,a_j,a_j_tilde,ratio (NA where undefined).
void write_approx_csv(std::ostream& out, const ApproxReport& report);

struct PreconditionerQuality {
  SpectralDistanceResult distance;  ///< d(W_0, G_0^{-1})
  double condition = 1.0;           ///< cond(W_0 G_0)
};

/// Dense W_0 and G_0 from column applies on level 0.
PreconditionerQuality measure_preconditioner_quality(const ControlProblem& p);

/// prod_k sin(pi x_k).
double sine_product(const Point& x, int dim);

/// Desired state (1/(d pi^2) + d pi^2 beta) prod sin(pi x_k) on the state dofs,
/// for which the optimal control is prod sin(pi x_k).
Vector manufactured_desired_state(const FeProblem& p, double beta);

/// L2 distance between the Q1 function with vertex values u and prod sin(pi x_k),
/// 3-point Gauss per axis.
double control_error_vs_exact(const Mesh& mesh, std::span<const double> u);

}  // namespace amgopt
