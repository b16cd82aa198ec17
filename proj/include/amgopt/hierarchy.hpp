#pragma once

#include <memory>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "amgopt/fem.hpp"
#include "amgopt/solvers.hpp"
#include "amgopt/sparse.hpp"

namespace amgopt {

struct Aggregation {
  static constexpr Index unassigned = -1;

  Index n_fine = 0;
  Index n_aggregates = 0;
  std::vector<Index> assignment;  // fine dof -> aggregate id
};

/// Strong neighbours of every row: j != i with |a_ij| >= theta sqrt(|a_ii a_jj|).
std::vector<std::vector<Index>> strength_graph(const SparseMatrix& A, double theta);

/// Greedy standard aggregation.
///
/// Pass 1 visits dofs in ascending order and seeds an aggregate from every
/// dof whose whole strong neighbourhood is still unassigned. Pass 2 attaches
/// leftovers to the neighbouring aggregate with the largest summed |a_ij|,
/// lowest aggregate id on ties, repeating until nothing changes. Dofs without
/// strong connections end up as singletons. With `aggressive` the pass-1
/// neighbourhood is the distance-two neighbourhood of the strength graph.
Aggregation aggregate(const SparseMatrix& A, double theta, bool aggressive = false);

/// Piecewise-constant 0/1 aggregate indicator (n_fine x n_aggregates).
SparseMatrix tentative_prolongator(const Aggregation& agg);

struct SmoothingOptions {
  double omega_factor = 4.0 / 3.0;
  double eig_tol = 1e-6;
  int eig_max_iterations = 200;
};

/// Largest eigenvalue of D^{-1} A (computed on the similar matrix D^{-1/2} A D^{-1/2}).
double estimate_jacobi_spectral_radius(const SparseMatrix& A, double tol, int max_iterations);

/// (I - omega D^{-1} A) P_tent with omega = omega_factor / lambda_max(D^{-1} A).
SparseMatrix smoothed_prolongator(const SparseMatrix& A, const Aggregation& agg, const SmoothingOptions& opts = {});

/// Q1 interpolation from `coarse` to `fine`, where fine is a uniform refinement
/// of coarse (compared by coordinates). The state variant keeps only
/// non-Dirichlet rows and columns.
SparseMatrix geometric_prolongator(const FeProblem& fine, const FeProblem& coarse, Space space);

/// One rung of the hierarchy. S and P map level j+1 into level j and are
/// empty on the coarsest level. `Au` is the control-space operator used only
/// to aggregate controls.
struct Level {
  SparseMatrix A;
  SparseMatrix My;
  SparseMatrix Mu;
  SparseMatrix Myu;
  SparseMatrix Au;
  SparseMatrix S;
  SparseMatrix P;

  Index num_state() const noexcept { return A.rows(); }
  Index num_control() const noexcept { return Mu.rows(); }
};

enum class HierarchyMode { amg, geometric };

std::string to_string(HierarchyMode mode);
HierarchyMode parse_hierarchy_mode(const std::string& s);

struct HierarchyConfig {
  HierarchyMode mode = HierarchyMode::amg;
  double theta = 0.08;
  SmoothingOptions smoothing{};
  /// Stop once the control space has at most this many dofs.
  Index coarse_cap = 2000;
  int max_levels = 10;
  /// Aggregate the first coarsening on the distance-two strength graph.
  bool aggressive = false;

  /// Defaults for Q1 stiffness matrices in the given dimension.
  static HierarchyConfig defaults(int dim, HierarchyMode mode);
};

struct FineSystem {
  SparseMatrix A;
  SparseMatrix My;
  SparseMatrix Mu;
  SparseMatrix Myu;
  /// Control-space stiffness without Dirichlet elimination; AMG mode only.
  SparseMatrix Au;
};

/// Assembles the fine-level matrices of the control problem.
FineSystem assemble_fine_system(const FeProblem& p, const Coefficient& kappa);

class Hierarchy {
 public:
  Hierarchy(std::vector<Level> levels, std::vector<std::string> warnings);

  int size() const noexcept { return static_cast<int>(levels_.size()); }
  const Level& level(int j) const { return levels_.at(static_cast<std::size_t>(j)); }
  const std::vector<Level>& levels() const noexcept { return levels_; }
  const std::vector<std::string>& warnings() const noexcept { return warnings_; }

  /// Largest relative Galerkin defect over all levels, measured with random
  /// probes x^T A_{j+1} y against (S x)^T A_j (S y) and the same for the
  /// three mass matrices.
  double galerkin_defect(std::uint64_t seed = 7) const;

  /// CSV with one row per level: sizes and nonzero counts.
  void write_summary_csv(std::ostream& out) const;

 private:
  std::vector<Level> levels_;
  std::vector<std::string> warnings_;
};

/// Builds the multilevel hierarchy. Geometric mode takes the nested problems,
/// finest first, and ignores coarse_cap.
Hierarchy build_hierarchy(FineSystem fine, const HierarchyConfig& config,
                          std::span<const FeProblem> nested = {});

struct AmgOptions {
  double theta = 0.08;
  SmoothingOptions smoothing{};
  /// Levels at or below this size are solved by dense Cholesky.
  Index direct_size = 300;
  int max_levels = 25;
};

/// Smoothed-aggregation V(1,1)-cycle for an SPD matrix, used as a CG
/// preconditioner. Forward Gauss-Seidel before and backward Gauss-Seidel after
/// the coarse correction, so the cycle is symmetric.
class AmgSolver {
 public:
  AmgSolver(const SparseMatrix& A, const AmgOptions& options);

  int num_levels() const noexcept { return static_cast<int>(ops_.size()); }
  Index size() const noexcept { return ops_.front().rows(); }
  const SparseMatrix& matrix() const noexcept { return ops_.front(); }

  Vector vcycle(const Vector& b) const;
  /// PCG to relative Euclidean residual tol.
  CgResult solve(std::span<const double> b, double tol, int max_iterations) const;

 private:
  struct DenseFactor;

  Vector cycle(std::size_t level, const Vector& b) const;

  std::vector<SparseMatrix> ops_;
  std::vector<SparseMatrix> prolongators_;
  std::shared_ptr<const DenseFactor> coarse_;
};

}  // namespace amgopt
