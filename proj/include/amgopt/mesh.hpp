#pragma once

#include <array>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "amgopt/sparse.hpp"

namespace amgopt {

/// Boundary faces of the unit box, usable as bit flags.
enum Face : unsigned {
  face_x0 = 1u << 0,
  face_x1 = 1u << 1,
  face_y0 = 1u << 2,
  face_y1 = 1u << 3,
  face_z0 = 1u << 4,
  face_z1 = 1u << 5,
};
using FaceMask = unsigned;

FaceMask all_faces(int dim);
/// "x0,y1" style list; empty string for no faces.
std::string face_names(FaceMask mask);
FaceMask parse_faces(const std::string& names);

using Point = std::array<double, 3>;

/// Axis-aligned quadrilateral (2D) or hexahedral (3D) mesh.
///
/// Element vertices use tensor-product local ordering: local vertex
/// a = bx + 2 by + 4 bz sits at the corner with bit offsets (bx, by, bz).
/// Boundary tags are derived from the bounding box of the vertices.
class Mesh {
 public:
  Mesh(int dim, std::vector<Point> vertices, std::vector<std::array<Index, 8>> elements);

  int dim() const noexcept { return dim_; }
  int vertices_per_element() const noexcept { return 1 << dim_; }
  Index num_vertices() const noexcept { return static_cast<Index>(vertices_.size()); }
  Index num_elements() const noexcept { return static_cast<Index>(elements_.size()); }

  const std::vector<Point>& vertices() const noexcept { return vertices_; }
  const std::vector<std::array<Index, 8>>& elements() const noexcept { return elements_; }
  /// Per-vertex face mask, zero for interior vertices.
  const std::vector<FaceMask>& boundary_tags() const noexcept { return tags_; }
  std::vector<Index> boundary_vertices() const;

  /// Extent of element e along each axis.
  Point element_size(Index e) const;
  double element_volume(Index e) const;

  friend bool operator==(const Mesh&, const Mesh&) = default;

 private:
  int dim_;
  std::vector<Point> vertices_;
  std::vector<std::array<Index, 8>> elements_;
  std::vector<FaceMask> tags_;
};

Mesh build_structured_mesh(int dim, int cells_per_side);
/// Splits every quad into 4 and every hex into 8. Existing vertices keep their indices.
Mesh refine_uniform(const Mesh& mesh);

void write_mesh(std::ostream& out, const Mesh& mesh);
Mesh read_mesh(std::istream& in);
void save_mesh(const Mesh& mesh, const std::filesystem::path& path);
Mesh load_mesh(const std::filesystem::path& path);

}  // namespace amgopt
