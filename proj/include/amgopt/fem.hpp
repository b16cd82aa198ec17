#pragma once

#include <functional>
#include <string>
#include <vector>

#include "amgopt/mesh.hpp"
#include "amgopt/sparse.hpp"

namespace amgopt {

/// Diffusion coefficient kappa(x).
class Coefficient {
 public:
  enum class Kind { constant, ball };

  static Coefficient constant(double value);
  /// alpha inside the closed ball |x - center| <= radius, 1 outside.
  static Coefficient ball(double alpha, Point center, double radius);

  double operator()(const Point& x) const;
  Kind kind() const noexcept { return kind_; }
  double value() const noexcept { return value_; }
  std::string describe() const;

 private:
  Kind kind_ = Kind::constant;
  double value_ = 1.0;
  Point center_{0.5, 0.5, 0.5};
  double radius_ = 0.25;
};

enum class Space { state, control };

/// A mesh with its state space (Q1, Dirichlet vertices eliminated) and control
/// space (Q1 on every vertex).
class FeProblem {
 public:
  FeProblem(Mesh mesh, FaceMask dirichlet_faces);

  const Mesh& mesh() const noexcept { return mesh_; }
  FaceMask dirichlet_faces() const noexcept { return dirichlet_; }
  Index num_state() const noexcept { return static_cast<Index>(state_vertices_.size()); }
  Index num_control() const noexcept { return mesh_.num_vertices(); }
  Index size(Space s) const noexcept { return s == Space::state ? num_state() : num_control(); }

  /// vertex -> state dof, or -1 for eliminated Dirichlet vertices.
  const std::vector<Index>& state_index() const noexcept { return state_index_; }
  /// state dof -> vertex.
  const std::vector<Index>& state_vertices() const noexcept { return state_vertices_; }

  /// Nodal interpolant of f in the given space.
  Vector interpolate(const std::function<double(const Point&)>& f, Space space) const;
  /// Extends a state vector by zeros on Dirichlet vertices.
  Vector state_to_vertices(std::span<const double> y) const;

 private:
  Mesh mesh_;
  FaceMask dirichlet_;
  std::vector<Index> state_index_;
  std::vector<Index> state_vertices_;
};

/// a(y, v) = int kappa grad y . grad v with 2^d-point Gauss quadrature.
/// Rows and columns live in `space`; the state variant drops Dirichlet vertices.
SparseMatrix assemble_stiffness(const FeProblem& p, const Coefficient& kappa, Space space = Space::state);

/// [M]_ij = (phi_j, phi_i) with row basis from `rows` and column basis from `cols`.
SparseMatrix assemble_mass(const FeProblem& p, Space rows, Space cols);

}  // namespace amgopt
