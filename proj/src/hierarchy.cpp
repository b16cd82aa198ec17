#include "amgopt/hierarchy.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>
#include <random>

#include "amgopt/error.hpp"

namespace amgopt {

std::vector<std::vector<Index>> strength_graph(const SparseMatrix& A, double theta) {
  if (A.rows() != A.cols()) throw DimensionError("strength_graph: matrix must be square");
  const Vector d = A.diagonal_values();
  const auto rp = A.row_ptr();
  const auto ci = A.col_idx();
  const auto v = A.values();
  std::vector<std::vector<Index>> g(static_cast<std::size_t>(A.rows()));
  for (Index i = 0; i < A.rows(); ++i)
    for (std::size_t k = rp[i]; k < rp[i + 1]; ++k) {
      const Index j = ci[k];
      if (j != i && std::abs(v[k]) >= theta * std::sqrt(std::abs(d[i] * d[j]))) g[i].push_back(j);
    }
  return g;
}

namespace {

std::vector<std::vector<Index>> distance_two(const std::vector<std::vector<Index>>& g) {
  std::vector<std::vector<Index>> g2(g.size());
  std::vector<Index> buf;
  for (std::size_t i = 0; i < g.size(); ++i) {
    buf = g[i];
    for (Index j : g[i]) buf.insert(buf.end(), g[j].begin(), g[j].end());
    std::sort(buf.begin(), buf.end());
    buf.erase(std::unique(buf.begin(), buf.end()), buf.end());
    buf.erase(std::remove(buf.begin(), buf.end(), static_cast<Index>(i)), buf.end());
    g2[i] = buf;
  }
  return g2;
}

}  // namespace

Aggregation aggregate(const SparseMatrix& A, double theta, bool aggressive) {
  require(A.rows() > 0, "aggregate: empty matrix");
  require(theta >= 0.0 && theta < 1.0, "aggregate: theta must lie in [0, 1)");
  const auto strong = strength_graph(A, theta);
  const auto seeds_graph = aggressive ? distance_two(strong) : strong;

  Aggregation agg;
  agg.n_fine = A.rows();
  agg.assignment.assign(static_cast<std::size_t>(A.rows()), Aggregation::unassigned);
  auto& assign = agg.assignment;

  for (Index i = 0; i < A.rows(); ++i) {
    if (assign[i] != Aggregation::unassigned || strong[i].empty()) continue;
    const auto& nb = seeds_graph[i];
    if (std::any_of(nb.begin(), nb.end(), [&](Index j) { return assign[j] != Aggregation::unassigned; })) continue;
    assign[i] = agg.n_aggregates;
    for (Index j : nb) assign[j] = agg.n_aggregates;
    ++agg.n_aggregates;
  }

  const auto rp = A.row_ptr();
  const auto ci = A.col_idx();
  const auto v = A.values();
  for (bool changed = true; changed;) {
    changed = false;
    const std::vector<Index> snapshot = assign;
    for (Index i = 0; i < A.rows(); ++i) {
      if (snapshot[i] != Aggregation::unassigned) continue;
      std::map<Index, double> weight;
      for (std::size_t k = rp[i]; k < rp[i + 1]; ++k) {
        const Index j = ci[k];
        if (j == i || snapshot[j] == Aggregation::unassigned) continue;
        if (!std::binary_search(strong[i].begin(), strong[i].end(), j)) continue;
        weight[snapshot[j]] += std::abs(v[k]);
      }
      Index best = Aggregation::unassigned;
      double best_w = -1.0;
      for (const auto& [id, w] : weight)  // ascending id, strict > keeps the lowest on ties
        if (w > best_w) {
          best = id;
          best_w = w;
        }
      if (best != Aggregation::unassigned) {
        assign[i] = best;
        changed = true;
      }
    }
  }

  for (Index i = 0; i < A.rows(); ++i)
    if (assign[i] == Aggregation::unassigned) assign[i] = agg.n_aggregates++;
  return agg;
}

SparseMatrix tentative_prolongator(const Aggregation& agg) {
  std::vector<Triplet> t;
  t.reserve(agg.assignment.size());
  for (Index i = 0; i < agg.n_fine; ++i) {
    require(agg.assignment[i] >= 0 && agg.assignment[i] < agg.n_aggregates, "aggregation is incomplete");
    t.push_back({i, agg.assignment[i], 1.0});
  }
  return SparseMatrix::from_triplets(agg.n_fine, agg.n_aggregates, std::move(t));
}

double estimate_jacobi_spectral_radius(const SparseMatrix& A, double tol, int max_iterations) {
  Vector dinv_sqrt = A.diagonal_values();
  for (double& d : dinv_sqrt) {
    require(d > 0.0, "matrix has a nonpositive diagonal entry");
    d = 1.0 / std::sqrt(d);
  }
  LinearOperator op;
  op.rows = op.cols = A.rows();
  op.apply = [&](const Vector& x) {
    Vector y(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) y[i] = dinv_sqrt[i] * x[i];
    y = spmv(A, y);
    for (std::size_t i = 0; i < x.size(); ++i) y[i] *= dinv_sqrt[i];
    return y;
  };
  return power_eig(op, tol, max_iterations).norm;
}

SparseMatrix smoothed_prolongator(const SparseMatrix& A, const Aggregation& agg, const SmoothingOptions& opts) {
  require(agg.n_fine == A.rows(), "aggregation size does not match the matrix");
  SparseMatrix tent = tentative_prolongator(agg);
  if (opts.omega_factor == 0.0) return tent;
  const double lambda = estimate_jacobi_spectral_radius(A, opts.eig_tol, opts.eig_max_iterations);
  const double omega = opts.omega_factor / lambda;
  Vector dinv = A.diagonal_values();
  for (double& d : dinv) d = -omega / d;
  const SparseMatrix jacobi = add(1.0, SparseMatrix::identity(A.rows()), 1.0,
                                  multiply(SparseMatrix::diagonal(dinv), A));
  return multiply(jacobi, tent);
}

SparseMatrix geometric_prolongator(const FeProblem& fine, const FeProblem& coarse, Space space) {
  const Mesh& fm = fine.mesh();
  const Mesh& cm = coarse.mesh();
  require(fm.dim() == cm.dim(), "geometric_prolongator: meshes differ in dimension");
  const int dim = fm.dim();
  std::map<Point, Index> fine_index;
  for (Index i = 0; i < fm.num_vertices(); ++i) fine_index.emplace(fm.vertices()[i], i);

  std::vector<Triplet> t;
  const int nz = dim == 3 ? 3 : 1;
  for (Index e = 0; e < cm.num_elements(); ++e) {
    const auto& el = cm.elements()[e];
    const Point lo = cm.vertices()[el[0]];
    const Point h = cm.element_size(e);
    for (int c = 0; c < nz; ++c)
      for (int b = 0; b < 3; ++b)
        for (int a = 0; a < 3; ++a) {
          const int s[3] = {a, b, c};
          const Point p{lo[0] + 0.5 * a * h[0], lo[1] + 0.5 * b * h[1], dim == 3 ? lo[2] + 0.5 * c * h[2] : 0.0};
          const auto it = fine_index.find(p);
          if (it == fine_index.end()) throw Error(ErrorCode::invalid_argument, "geometric_prolongator: meshes are not nested");
          for (int loc = 0; loc < cm.vertices_per_element(); ++loc) {
            double w = 1.0;
            for (int k = 0; k < dim; ++k) w *= ((loc >> k) & 1) ? 0.5 * s[k] : 1.0 - 0.5 * s[k];
            if (w > 0.0) t.push_back({it->second, el[loc], w});
          }
        }
  }
  // Shared sub-vertices are visited once per adjacent coarse cell with identical weights.
  std::sort(t.begin(), t.end(), [](const Triplet& x, const Triplet& y) {
    return x.row != y.row ? x.row < y.row : x.col < y.col;
  });
  t.erase(std::unique(t.begin(), t.end(), [](const Triplet& x, const Triplet& y) {
            return x.row == y.row && x.col == y.col;
          }),
          t.end());
  std::vector<char> covered(static_cast<std::size_t>(fm.num_vertices()), 0);
  for (const auto& x : t) covered[x.row] = 1;
  if (std::find(covered.begin(), covered.end(), 0) != covered.end())
    throw Error(ErrorCode::invalid_argument, "geometric_prolongator: fine mesh is not a single refinement of coarse");

  if (space == Space::control)
    return SparseMatrix::from_triplets(fm.num_vertices(), cm.num_vertices(), std::move(t));
  std::vector<Triplet> ts;
  for (const auto& x : t) {
    const Index i = fine.state_index()[x.row];
    const Index j = coarse.state_index()[x.col];
    if (i >= 0 && j >= 0) ts.push_back({i, j, x.value});
  }
  return SparseMatrix::from_triplets(fine.num_state(), coarse.num_state(), std::move(ts));
}

std::string to_string(HierarchyMode mode) { return mode == HierarchyMode::amg ? "amg" : "geometric"; }

HierarchyMode parse_hierarchy_mode(const std::string& s) {
  if (s == "amg") return HierarchyMode::amg;
  if (s == "geometric") return HierarchyMode::geometric;
  throw Error(ErrorCode::invalid_argument, "unknown hierarchy mode '" + s + "'");
}

HierarchyConfig HierarchyConfig::defaults(int dim, HierarchyMode mode) {
  HierarchyConfig c;
  c.mode = mode;
  // Q1 off-diagonals relative to sqrt(a_ii a_jj) are 1/8 in 2D and at most 1/16 in 3D.
  c.theta = dim == 3 ? 0.02 : 0.08;
  return c;
}

FineSystem assemble_fine_system(const FeProblem& p, const Coefficient& kappa) {
  FineSystem f;
  f.A = assemble_stiffness(p, kappa, Space::state);
  f.My = assemble_mass(p, Space::state, Space::state);
  f.Mu = assemble_mass(p, Space::control, Space::control);
  f.Myu = assemble_mass(p, Space::state, Space::control);
  f.Au = assemble_stiffness(p, kappa, Space::control);
  return f;
}

Hierarchy::Hierarchy(std::vector<Level> levels, std::vector<std::string> warnings)
    : levels_(std::move(levels)), warnings_(std::move(warnings)) {
  require(!levels_.empty(), "hierarchy needs at least one level");
}

namespace {

Vector random_vector(std::size_t n, std::mt19937_64& gen) {
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  Vector v(n);
  for (double& x : v) x = dist(gen);
  return v;
}

// |x^T C y - (Rx)^T F (Py)| relative to ||Rx|| ||F Py||.
double probe_defect(const SparseMatrix& coarse, const SparseMatrix& fine, const SparseMatrix& R,
                    const SparseMatrix& P, std::mt19937_64& gen) {
  if (coarse.rows() == 0 || coarse.cols() == 0) return 0.0;
  const Vector x = random_vector(static_cast<std::size_t>(coarse.rows()), gen);
  const Vector y = random_vector(static_cast<std::size_t>(coarse.cols()), gen);
  const double lhs = dot(x, spmv(coarse, y));
  const Vector rx = spmv(R, x);
  const Vector fpy = spmv(fine, spmv(P, y));
  const double rhs = dot(rx, fpy);
  const double scale = norm2(rx) * norm2(fpy);
  return scale > 0.0 ? std::abs(lhs - rhs) / scale : std::abs(lhs - rhs);
}

}  // namespace

double Hierarchy::galerkin_defect(std::uint64_t seed) const {
  std::mt19937_64 gen(seed);
  double worst = 0.0;
  for (std::size_t j = 0; j + 1 < levels_.size(); ++j) {
    const Level& f = levels_[j];
    const Level& c = levels_[j + 1];
    for (int probe = 0; probe < 3; ++probe) {
      worst = std::max(worst, probe_defect(c.A, f.A, f.S, f.S, gen));
      worst = std::max(worst, probe_defect(c.My, f.My, f.S, f.S, gen));
      worst = std::max(worst, probe_defect(c.Mu, f.Mu, f.P, f.P, gen));
      worst = std::max(worst, probe_defect(c.Myu, f.Myu, f.S, f.P, gen));
    }
  }
  return worst;
}

void Hierarchy::write_summary_csv(std::ostream& out) const {
  out << "level,n_state,n_control,nnz_A,nnz_My,nnz_Mu,nnz_Myu,nnz_S,nnz_P\n";
  for (std::size_t j = 0; j < levels_.size(); ++j) {
    const Level& l = levels_[j];
    out << j << ',' << l.num_state() << ',' << l.num_control() << ',' << l.A.nnz() << ',' << l.My.nnz() << ','
        << l.Mu.nnz() << ',' << l.Myu.nnz() << ',' << l.S.nnz() << ',' << l.P.nnz() << '\n';
  }
}

Hierarchy build_hierarchy(FineSystem fine, const HierarchyConfig& config, std::span<const FeProblem> nested) {
  const Index m = fine.A.rows();
  const Index n = fine.Mu.rows();
  if (fine.A.cols() != m || fine.My.rows() != m || fine.My.cols() != m || fine.Mu.cols() != n ||
      fine.Myu.rows() != m || fine.Myu.cols() != n)
    throw DimensionError("build_hierarchy: inconsistent fine matrices");
  require(config.max_levels >= 1, "max_levels must be at least 1");

  std::vector<Level> levels;
  std::vector<std::string> warnings;
  levels.push_back({std::move(fine.A), std::move(fine.My), std::move(fine.Mu), std::move(fine.Myu),
                    std::move(fine.Au), {}, {}});

  if (config.mode == HierarchyMode::geometric) {
    require(!nested.empty(), "geometric hierarchy needs the nested problems");
    require(nested.front().num_state() == m && nested.front().num_control() == n,
            "finest nested problem does not match the fine matrices");
    const int count = std::min<int>(config.max_levels, static_cast<int>(nested.size()));
    for (int j = 0; j + 1 < count; ++j) {
      Level& f = levels.back();
      f.S = geometric_prolongator(nested[j], nested[j + 1], Space::state);
      f.P = geometric_prolongator(nested[j], nested[j + 1], Space::control);
      Level c;
      c.A = galerkin_product(f.S, f.A);
      c.My = galerkin_product(f.S, f.My);
      c.Mu = galerkin_product(f.P, f.Mu);
      c.Myu = triple_product(f.S.transpose(), f.Myu, f.P);
      levels.push_back(std::move(c));
    }
    return Hierarchy(std::move(levels), std::move(warnings));
  }

  require(levels.front().Au.rows() == n, "AMG hierarchy needs the control-space stiffness");
  while (static_cast<int>(levels.size()) < config.max_levels && levels.back().num_control() > config.coarse_cap) {
    Level& f = levels.back();
    const bool aggressive = config.aggressive && levels.size() == 1;
    const Aggregation agg_s = aggregate(f.A, config.theta, aggressive);
    const Aggregation agg_u = aggregate(f.Au, config.theta, aggressive);
    if (agg_s.n_aggregates >= f.num_state() || agg_u.n_aggregates >= f.num_control()) {
      warnings.push_back("coarsening stagnated at level " + std::to_string(levels.size() - 1));
      break;
    }
    SparseMatrix S = smoothed_prolongator(f.A, agg_s, config.smoothing);
    SparseMatrix P = smoothed_prolongator(f.Au, agg_u, config.smoothing);
    Level c;
    c.A = galerkin_product(S, f.A);
    c.My = galerkin_product(S, f.My);
    c.Mu = galerkin_product(P, f.Mu);
    c.Myu = triple_product(S.transpose(), f.Myu, P);
    c.Au = galerkin_product(P, f.Au);
    f.S = std::move(S);
    f.P = std::move(P);
    levels.push_back(std::move(c));
  }
  return Hierarchy(std::move(levels), std::move(warnings));
}

// ---------------------------------------------------------------------------

struct AmgSolver::DenseFactor {
  Eigen::LLT<Eigen::MatrixXd> llt;
};

AmgSolver::AmgSolver(const SparseMatrix& A, const AmgOptions& options) {
  require(A.rows() == A.cols(), "AmgSolver: matrix must be square");
  ops_.push_back(A);
  while (ops_.back().rows() > options.direct_size && static_cast<int>(ops_.size()) < options.max_levels) {
    const SparseMatrix& f = ops_.back();
    const Aggregation agg = aggregate(f, options.theta);
    if (agg.n_aggregates >= f.rows()) break;
    SparseMatrix P = smoothed_prolongator(f, agg, options.smoothing);
    SparseMatrix c = galerkin_product(P, f);
    prolongators_.push_back(std::move(P));
    ops_.push_back(std::move(c));
  }
  const SparseMatrix& c = ops_.back();
  const std::vector<double> dense = c.to_dense();
  Eigen::MatrixXd M = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
      dense.data(), c.rows(), c.cols());
  auto factor = std::make_shared<DenseFactor>();
  factor->llt.compute(M);
  if (factor->llt.info() != Eigen::Success) throw Error(ErrorCode::not_spd, "AmgSolver: coarse matrix is not SPD");
  coarse_ = std::move(factor);
}

namespace {

void gs_sweep(const SparseMatrix& A, std::span<const double> b, Vector& x, bool forward) {
  const auto rp = A.row_ptr();
  const auto ci = A.col_idx();
  const auto v = A.values();
  const Index n = A.rows();
  for (Index step = 0; step < n; ++step) {
    const Index i = forward ? step : n - 1 - step;
    double s = b[i];
    double diag = 0.0;
    for (std::size_t k = rp[i]; k < rp[i + 1]; ++k) {
      if (ci[k] == i)
        diag = v[k];
      else
        s -= v[k] * x[ci[k]];
    }
    x[i] = s / diag;
  }
}

}  // namespace

Vector AmgSolver::cycle(std::size_t level, const Vector& b) const {
  if (level + 1 == ops_.size()) {
    const Eigen::Map<const Eigen::VectorXd> rhs(b.data(), static_cast<Eigen::Index>(b.size()));
    const Eigen::VectorXd sol = coarse_->llt.solve(rhs);
    return Vector(sol.data(), sol.data() + sol.size());
  }
  const SparseMatrix& A = ops_[level];
  Vector x(b.size(), 0.0);
  gs_sweep(A, b, x, true);
  Vector r = spmv(A, x);
  for (std::size_t i = 0; i < r.size(); ++i) r[i] = b[i] - r[i];
  const Vector xc = cycle(level + 1, spmv_transpose(prolongators_[level], r));
  axpy(1.0, spmv(prolongators_[level], xc), x);
  gs_sweep(A, b, x, false);
  return x;
}

Vector AmgSolver::vcycle(const Vector& b) const {
  if (b.size() != static_cast<std::size_t>(size())) throw DimensionError("AmgSolver: right-hand side size mismatch");
  return cycle(0, b);
}

CgResult AmgSolver::solve(std::span<const double> b, double tol, int max_iterations) const {
  LinearOperator op;
  op.rows = op.cols = size();
  op.apply = [this](const Vector& x) { return spmv(ops_.front(), x); };
  LinearOperator pre;
  pre.rows = pre.cols = size();
  pre.apply = [this](const Vector& x) { return vcycle(x); };
  return cg(op, b, InnerProduct{}, &pre, CgOptions{tol, max_iterations});
}

}  // namespace amgopt
