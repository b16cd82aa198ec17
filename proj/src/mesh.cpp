#include "amgopt/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>

#include "amgopt/error.hpp"

namespace amgopt {

namespace {

constexpr double kTagTol = 1e-12;
constexpr const char* kFaceNames[6] = {"x0", "x1", "y0", "y1", "z0", "z1"};

}  // namespace

FaceMask all_faces(int dim) { return dim == 3 ? 0x3Fu : 0x0Fu; }

std::string face_names(FaceMask mask) {
  std::string out;
  for (int f = 0; f < 6; ++f)
    if (mask & (1u << f)) {
      if (!out.empty()) out += ',';
      out += kFaceNames[f];
    }
  return out;
}

FaceMask parse_faces(const std::string& names) {
  FaceMask mask = 0;
  std::stringstream ss(names);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (tok.empty()) continue;
    if (tok == "all") {
      mask |= 0x3Fu;
      continue;
    }
    const auto* it = std::find(std::begin(kFaceNames), std::end(kFaceNames), tok);
    if (it == std::end(kFaceNames)) throw Error(ErrorCode::invalid_argument, "unknown face '" + tok + "'");
    mask |= 1u << (it - std::begin(kFaceNames));
  }
  return mask;
}

Mesh::Mesh(int dim, std::vector<Point> vertices, std::vector<std::array<Index, 8>> elements)
    : dim_(dim), vertices_(std::move(vertices)), elements_(std::move(elements)) {
  require(dim == 2 || dim == 3, "mesh dimension must be 2 or 3, got " + std::to_string(dim));
  require(!vertices_.empty() && !elements_.empty(), "mesh must have vertices and elements");
  const int nv = vertices_per_element();
  for (std::size_t e = 0; e < elements_.size(); ++e) {
    const auto& el = elements_[e];
    for (int a = 0; a < nv; ++a) {
      require(el[a] >= 0 && el[a] < num_vertices(),
              "element " + std::to_string(e) + " references vertex " + std::to_string(el[a]) + " out of range");
      for (int b = 0; b < a; ++b) require(el[a] != el[b], "element " + std::to_string(e) + " repeats a vertex");
    }
    // Tensor ordering: flipping bit k moves strictly forward along axis k only.
    for (int a = 0; a < nv; ++a)
      for (int k = 0; k < dim; ++k) {
        if (a & (1 << k)) continue;
        const Point& p = vertices_[el[a]];
        const Point& q = vertices_[el[a | (1 << k)]];
        for (int m = 0; m < dim; ++m) {
          const double d = q[m] - p[m];
          require(m == k ? d > 0.0 : d == 0.0,
                  "element " + std::to_string(e) + " is not an axis-aligned box with positive Jacobian");
        }
      }
  }
  Point lo{0, 0, 0}, hi{0, 0, 0};
  for (int k = 0; k < dim; ++k) {
    lo[k] = hi[k] = vertices_.front()[k];
    for (const auto& v : vertices_) {
      lo[k] = std::min(lo[k], v[k]);
      hi[k] = std::max(hi[k], v[k]);
    }
  }
  tags_.assign(vertices_.size(), 0);
  for (std::size_t i = 0; i < vertices_.size(); ++i)
    for (int k = 0; k < dim; ++k) {
      if (std::abs(vertices_[i][k] - lo[k]) <= kTagTol) tags_[i] |= 1u << (2 * k);
      if (std::abs(vertices_[i][k] - hi[k]) <= kTagTol) tags_[i] |= 1u << (2 * k + 1);
    }
}

std::vector<Index> Mesh::boundary_vertices() const {
  std::vector<Index> out;
  for (Index i = 0; i < num_vertices(); ++i)
    if (tags_[i]) out.push_back(i);
  return out;
}

Point Mesh::element_size(Index e) const {
  const auto& el = elements_.at(e);
  Point h{0, 0, 0};
  for (int k = 0; k < dim_; ++k) h[k] = vertices_[el[1 << k]][k] - vertices_[el[0]][k];
  return h;
}

double Mesh::element_volume(Index e) const {
  const Point h = element_size(e);
  double v = 1.0;
  for (int k = 0; k < dim_; ++k) v *= h[k];
  return v;
}

Mesh build_structured_mesh(int dim, int cells_per_side) {
  require(dim == 2 || dim == 3, "mesh dimension must be 2 or 3, got " + std::to_string(dim));
  require(cells_per_side >= 1, "cells_per_side must be at least 1");
  const Index n = cells_per_side;
  const Index np = n + 1;
  const Index nz = dim == 3 ? np : 1;
  std::vector<Point> verts;
  verts.reserve(static_cast<std::size_t>(np * np * nz));
  for (Index k = 0; k < nz; ++k)
    for (Index j = 0; j < np; ++j)
      for (Index i = 0; i < np; ++i)
        verts.push_back({static_cast<double>(i) / n, static_cast<double>(j) / n,
                         dim == 3 ? static_cast<double>(k) / n : 0.0});
  auto vid = [&](Index i, Index j, Index k) { return i + np * (j + np * k); };
  std::vector<std::array<Index, 8>> elems;
  const Index ez = dim == 3 ? n : 1;
  for (Index k = 0; k < ez; ++k)
    for (Index j = 0; j < n; ++j)
      for (Index i = 0; i < n; ++i) {
        std::array<Index, 8> el{};
        for (int a = 0; a < (1 << dim); ++a)
          el[a] = vid(i + (a & 1), j + ((a >> 1) & 1), k + ((a >> 2) & 1));
        elems.push_back(el);
      }
  return Mesh(dim, std::move(verts), std::move(elems));
}

Mesh refine_uniform(const Mesh& mesh) {
  const int dim = mesh.dim();
  std::vector<Point> verts = mesh.vertices();
  std::map<Point, Index> index;
  for (Index i = 0; i < mesh.num_vertices(); ++i) index.emplace(verts[i], i);
  auto lookup = [&](const Point& p) {
    auto [it, inserted] = index.emplace(p, static_cast<Index>(verts.size()));
    if (inserted) verts.push_back(p);
    return it->second;
  };

  std::vector<std::array<Index, 8>> elems;
  elems.reserve(static_cast<std::size_t>(mesh.num_elements()) << dim);
  const int nz = dim == 3 ? 3 : 1;
  for (Index e = 0; e < mesh.num_elements(); ++e) {
    const Point lo = verts[mesh.elements()[e][0]];
    const Point h = mesh.element_size(e);
    // Sub-vertex (a, b, c) with each coordinate in {0, 1, 2} halves of the element.
    std::array<Index, 27> sub{};
    for (int c = 0; c < nz; ++c)
      for (int b = 0; b < 3; ++b)
        for (int a = 0; a < 3; ++a) {
          Point p{lo[0] + 0.5 * a * h[0], lo[1] + 0.5 * b * h[1], dim == 3 ? lo[2] + 0.5 * c * h[2] : 0.0};
          sub[a + 3 * (b + 3 * c)] = lookup(p);
        }
    for (int child = 0; child < (1 << dim); ++child) {
      std::array<Index, 8> el{};
      for (int loc = 0; loc < (1 << dim); ++loc) {
        const int a = (child & 1) + (loc & 1);
        const int b = ((child >> 1) & 1) + ((loc >> 1) & 1);
        const int c = ((child >> 2) & 1) + ((loc >> 2) & 1);
        el[loc] = sub[a + 3 * (b + 3 * c)];
      }
      elems.push_back(el);
    }
  }
  return Mesh(dim, std::move(verts), std::move(elems));
}

void write_mesh(std::ostream& out, const Mesh& mesh) {
  const int dim = mesh.dim();
  out << "amgopt-mesh 1\n";
  out << "dim " << dim << "\n";
  out << "vertices " << mesh.num_vertices() << "\n";
  out << std::setprecision(17);
  for (const auto& v : mesh.vertices()) {
    for (int k = 0; k < dim; ++k) out << (k ? " " : "") << v[k];
    out << "\n";
  }
  out << "elements " << mesh.num_elements() << "\n";
  for (const auto& el : mesh.elements()) {
    for (int a = 0; a < mesh.vertices_per_element(); ++a) out << (a ? " " : "") << el[a];
    out << "\n";
  }
  const auto bnd = mesh.boundary_vertices();
  out << "boundary " << bnd.size() << "\n";
  for (Index i : bnd) out << i << " " << face_names(mesh.boundary_tags()[i]) << "\n";
}

namespace {

class LineReader {
 public:
  explicit LineReader(std::istream& in) : in_(in) {}

  std::istringstream next(const char* what) {
    std::string s;
    while (std::getline(in_, s)) {
      ++line_;
      if (s.find_first_not_of(" \t\r") != std::string::npos && s[s.find_first_not_of(" \t\r")] != '#')
        return std::istringstream(s);
    }
    throw ParseError(line_ + 1, std::string("unexpected end of file, expected ") + what);
  }

  /// Reads "<keyword> <count>".
  long header(const std::string& keyword) {
    auto ss = next(keyword.c_str());
    std::string kw;
    long value = -1;
    if (!(ss >> kw >> value) || kw != keyword || value < 0) fail("expected '" + keyword + " <count>'");
    expect_end(ss);
    return value;
  }

  void expect_end(std::istringstream& ss) {
    std::string extra;
    if (ss >> extra) fail("unexpected trailing token '" + extra + "'");
  }

  [[noreturn]] void fail(const std::string& what) const { throw ParseError(line_, what); }
  int line() const { return line_; }

 private:
  std::istream& in_;
  int line_ = 0;
};

}  // namespace

Mesh read_mesh(std::istream& in) {
  LineReader r(in);
  {
    auto ss = r.next("header");
    std::string magic;
    int version = 0;
    if (!(ss >> magic >> version) || magic != "amgopt-mesh" || version != 1)
      r.fail("expected 'amgopt-mesh 1' header");
  }
  const long dim = r.header("dim");
  if (dim != 2 && dim != 3) r.fail("dimension must be 2 or 3");

  const long nv = r.header("vertices");
  std::vector<Point> verts(static_cast<std::size_t>(nv), Point{0, 0, 0});
  for (long i = 0; i < nv; ++i) {
    auto ss = r.next("vertex");
    for (int k = 0; k < dim; ++k)
      if (!(ss >> verts[i][k]) || !std::isfinite(verts[i][k])) r.fail("malformed vertex coordinates");
    r.expect_end(ss);
  }

  const long ne = r.header("elements");
  std::vector<std::array<Index, 8>> elems(static_cast<std::size_t>(ne));
  for (long e = 0; e < ne; ++e) {
    auto ss = r.next("element");
    elems[e].fill(0);
    for (int a = 0; a < (1 << dim); ++a) {
      long v = -1;
      if (!(ss >> v)) r.fail("element needs " + std::to_string(1 << dim) + " vertex indices");
      if (v < 0 || v >= nv) r.fail("element vertex index " + std::to_string(v) + " out of range");
      elems[e][a] = static_cast<Index>(v);
    }
    r.expect_end(ss);
  }

  std::vector<FaceMask> tags(static_cast<std::size_t>(nv), 0);
  std::vector<int> tag_line(static_cast<std::size_t>(nv), 0);
  const long nb = r.header("boundary");
  for (long b = 0; b < nb; ++b) {
    auto ss = r.next("boundary tag");
    long v = -1;
    std::string names;
    if (!(ss >> v >> names)) r.fail("expected '<vertex> <faces>'");
    if (v < 0 || v >= nv) r.fail("boundary vertex index " + std::to_string(v) + " out of range");
    r.expect_end(ss);
    try {
      tags[v] = parse_faces(names);
    } catch (const Error& e) {
      r.fail(e.what());
    }
    tag_line[v] = r.line();
  }

  std::optional<Mesh> mesh;
  try {
    mesh.emplace(static_cast<int>(dim), std::move(verts), std::move(elems));
  } catch (const Error& e) {
    throw ParseError(r.line(), e.what());
  }
  for (Index i = 0; i < mesh->num_vertices(); ++i)
    if (mesh->boundary_tags()[i] != tags[i])
      throw ParseError(tag_line[i] ? tag_line[i] : r.line(),
                       "boundary tags of vertex " + std::to_string(i) + " do not match its coordinates");
  return std::move(*mesh);
}

void save_mesh(const Mesh& mesh, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::io_error, "cannot open " + path.string() + " for writing");
  write_mesh(out, mesh);
  if (!out) throw Error(ErrorCode::io_error, "failed writing " + path.string());
}

Mesh load_mesh(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::io_error, "cannot open " + path.string());
  return read_mesh(in);
}

}  // namespace amgopt
