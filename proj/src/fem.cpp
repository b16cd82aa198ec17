#include "amgopt/fem.hpp"

#include <array>
#include <cmath>
#include <sstream>

#include "amgopt/error.hpp"

namespace amgopt {

namespace {

// Two-point Gauss rule on [0, 1].
constexpr double kGaussLo = 0.5 - 0.5 / 1.7320508075688772;
constexpr double kGaussHi = 0.5 + 0.5 / 1.7320508075688772;

struct QuadPoint {
  Point xi;  // reference coordinates in [0,1]^d
  double weight;
};

std::vector<QuadPoint> gauss_rule(int dim) {
  const double g[2] = {kGaussLo, kGaussHi};
  std::vector<QuadPoint> q;
  const int nz = dim == 3 ? 2 : 1;
  for (int c = 0; c < nz; ++c)
    for (int b = 0; b < 2; ++b)
      for (int a = 0; a < 2; ++a) q.push_back({{g[a], g[b], dim == 3 ? g[c] : 0.0}, 1.0 / (1 << dim)});
  return q;
}

double shape(int dim, int local, const Point& xi) {
  double v = 1.0;
  for (int k = 0; k < dim; ++k) v *= (local >> k) & 1 ? xi[k] : 1.0 - xi[k];
  return v;
}

// Reference gradient; the caller divides component k by h_k.
Point shape_grad(int dim, int local, const Point& xi) {
  Point g{0, 0, 0};
  for (int k = 0; k < dim; ++k) {
    double v = (local >> k) & 1 ? 1.0 : -1.0;
    for (int m = 0; m < dim; ++m)
      if (m != k) v *= (local >> m) & 1 ? xi[m] : 1.0 - xi[m];
    g[k] = v;
  }
  return g;
}

// Maps a vertex to its dof in `space`, -1 if it has none.
Index dof(const FeProblem& p, Space space, Index vertex) {
  return space == Space::state ? p.state_index()[vertex] : vertex;
}

}  // namespace

Coefficient Coefficient::constant(double value) {
  require(value > 0.0 && std::isfinite(value), "coefficient must be positive and finite");
  Coefficient c;
  c.kind_ = Kind::constant;
  c.value_ = value;
  return c;
}

Coefficient Coefficient::ball(double alpha, Point center, double radius) {
  require(alpha > 0.0 && std::isfinite(alpha), "ball coefficient value must be positive and finite");
  require(radius > 0.0, "ball radius must be positive");
  Coefficient c;
  c.kind_ = Kind::ball;
  c.value_ = alpha;
  c.center_ = center;
  c.radius_ = radius;
  return c;
}

double Coefficient::operator()(const Point& x) const {
  if (kind_ == Kind::constant) return value_;
  double r2 = 0.0;
  for (int k = 0; k < 3; ++k) r2 += (x[k] - center_[k]) * (x[k] - center_[k]);
  return r2 <= radius_ * radius_ ? value_ : 1.0;
}

std::string Coefficient::describe() const {
  std::ostringstream s;
  if (kind_ == Kind::constant)
    s << "constant:" << value_;
  else
    s << "ball:" << value_;
  return s.str();
}

FeProblem::FeProblem(Mesh mesh, FaceMask dirichlet_faces) : mesh_(std::move(mesh)), dirichlet_(dirichlet_faces) {
  require((dirichlet_ & ~all_faces(mesh_.dim())) == 0, "Dirichlet face does not exist in this dimension");
  state_index_.assign(static_cast<std::size_t>(mesh_.num_vertices()), -1);
  for (Index v = 0; v < mesh_.num_vertices(); ++v)
    if ((mesh_.boundary_tags()[v] & dirichlet_) == 0) {
      state_index_[v] = static_cast<Index>(state_vertices_.size());
      state_vertices_.push_back(v);
    }
}

Vector FeProblem::interpolate(const std::function<double(const Point&)>& f, Space space) const {
  Vector out(static_cast<std::size_t>(size(space)));
  for (Index v = 0; v < mesh_.num_vertices(); ++v) {
    const Index d = dof(*this, space, v);
    if (d >= 0) out[d] = f(mesh_.vertices()[v]);
  }
  return out;
}

Vector FeProblem::state_to_vertices(std::span<const double> y) const {
  if (y.size() != state_vertices_.size()) throw DimensionError("state vector size mismatch");
  Vector out(static_cast<std::size_t>(mesh_.num_vertices()), 0.0);
  for (std::size_t i = 0; i < y.size(); ++i) out[state_vertices_[i]] = y[i];
  return out;
}

SparseMatrix assemble_stiffness(const FeProblem& p, const Coefficient& kappa, Space space) {
  const Mesh& mesh = p.mesh();
  const int dim = mesh.dim();
  const int nloc = mesh.vertices_per_element();
  const auto quad = gauss_rule(dim);
  std::vector<Triplet> t;
  t.reserve(static_cast<std::size_t>(mesh.num_elements()) * nloc * nloc);
  for (Index e = 0; e < mesh.num_elements(); ++e) {
    const auto& el = mesh.elements()[e];
    const Point h = mesh.element_size(e);
    const Point& lo = mesh.vertices()[el[0]];
    const double vol = mesh.element_volume(e);
    std::array<double, 64> ke{};
    for (const auto& q : quad) {
      const Point x{lo[0] + q.xi[0] * h[0], lo[1] + q.xi[1] * h[1], dim == 3 ? lo[2] + q.xi[2] * h[2] : 0.0};
      const double k = kappa(x);
      if (!(k > 0.0)) throw Error(ErrorCode::invalid_argument, "coefficient is not positive at a quadrature point");
      std::array<Point, 8> grad{};
      for (int a = 0; a < nloc; ++a) {
        grad[a] = shape_grad(dim, a, q.xi);
        for (int m = 0; m < dim; ++m) grad[a][m] /= h[m];
      }
      for (int a = 0; a < nloc; ++a)
        for (int b = 0; b < nloc; ++b) {
          double g = 0.0;
          for (int m = 0; m < dim; ++m) g += grad[a][m] * grad[b][m];
          ke[a * nloc + b] += k * g * q.weight * vol;
        }
    }
    for (int a = 0; a < nloc; ++a) {
      const Index i = dof(p, space, el[a]);
      if (i < 0) continue;
      for (int b = 0; b < nloc; ++b) {
        const Index j = dof(p, space, el[b]);
        if (j >= 0) t.push_back({i, j, ke[a * nloc + b]});
      }
    }
  }
  const Index n = p.size(space);
  return SparseMatrix::from_triplets(n, n, std::move(t));
}

SparseMatrix assemble_mass(const FeProblem& p, Space rows, Space cols) {
  const Mesh& mesh = p.mesh();
  const int dim = mesh.dim();
  const int nloc = mesh.vertices_per_element();
  const auto quad = gauss_rule(dim);
  // Reference element mass matrix; scaled per element by its volume.
  std::array<double, 64> mref{};
  for (const auto& q : quad)
    for (int a = 0; a < nloc; ++a)
      for (int b = 0; b < nloc; ++b) mref[a * nloc + b] += shape(dim, a, q.xi) * shape(dim, b, q.xi) * q.weight;

  std::vector<Triplet> t;
  t.reserve(static_cast<std::size_t>(mesh.num_elements()) * nloc * nloc);
  for (Index e = 0; e < mesh.num_elements(); ++e) {
    const auto& el = mesh.elements()[e];
    const double vol = mesh.element_volume(e);
    for (int a = 0; a < nloc; ++a) {
      const Index i = dof(p, rows, el[a]);
      if (i < 0) continue;
      for (int b = 0; b < nloc; ++b) {
        const Index j = dof(p, cols, el[b]);
        if (j >= 0) t.push_back({i, j, mref[a * nloc + b] * vol});
      }
    }
  }
  return SparseMatrix::from_triplets(p.size(rows), p.size(cols), std::move(t));
}

}  // namespace amgopt
