#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <set>
#include <sstream>

#include "amgopt/error.hpp"
#include "amgopt/hierarchy.hpp"
#include "oracles.hpp"

using namespace amgopt;
using oracle::Dense;

namespace {

SparseMatrix laplacian(int n) { return oracle::to_sparse(oracle::laplacian_1d(n)); }

std::vector<std::set<Index>> groups(const Aggregation& agg) {
  std::vector<std::set<Index>> g(static_cast<std::size_t>(agg.n_aggregates));
  for (Index i = 0; i < agg.n_fine; ++i) g.at(static_cast<std::size_t>(agg.assignment[i])).insert(i);
  return g;
}

/// Every dof assigned once, every aggregate nonempty and connected in the strength graph.
void check_aggregation_invariants(const SparseMatrix& A, double theta, const Aggregation& agg) {
  REQUIRE(agg.n_fine == A.rows());
  REQUIRE(agg.assignment.size() == static_cast<std::size_t>(A.rows()));
  for (Index a : agg.assignment) REQUIRE((a >= 0 && a < agg.n_aggregates));
  const auto strong = strength_graph(A, theta);
  for (const auto& members : groups(agg)) {
    REQUIRE_FALSE(members.empty());
    std::set<Index> seen{*members.begin()};
    std::vector<Index> stack{*members.begin()};
    while (!stack.empty()) {
      const Index i = stack.back();
      stack.pop_back();
      for (Index j : strong[i])
        if (members.count(j) && seen.insert(j).second) stack.push_back(j);
    }
    CHECK(seen == members);
  }
}

std::vector<FeProblem> nested(int dim, int cells, int refinements, FaceMask faces) {
  std::vector<Mesh> meshes{build_structured_mesh(dim, cells)};
  for (int r = 0; r < refinements; ++r) meshes.push_back(refine_uniform(meshes.back()));
  std::vector<FeProblem> out;
  for (auto it = meshes.rbegin(); it != meshes.rend(); ++it) out.emplace_back(*it, faces);
  return out;
}

}  // namespace

TEST_CASE("strength graph", "[aggregation]") {
  const auto A = laplacian(4);
  const auto g = strength_graph(A, 0.25);
  CHECK(g[0] == std::vector<Index>{1});
  CHECK(g[1] == std::vector<Index>{0, 2});
  for (const auto& row : strength_graph(A, 0.6)) CHECK(row.empty());
}

TEST_CASE("greedy aggregation of the 1D Laplacian", "[aggregation]") {
  // Pass 1 seeds {0,1}, {2,3,4}, {5,6,7}; pass 2 attaches 8 to the last aggregate.
  const auto A = laplacian(9);
  const auto agg = aggregate(A, 0.25);
  CHECK(agg.n_aggregates == 3);
  CHECK(agg.assignment == std::vector<Index>{0, 0, 1, 1, 1, 2, 2, 2, 2});
  check_aggregation_invariants(A, 0.25, agg);
}

TEST_CASE("aggregation corner cases", "[aggregation]") {
  SECTION("all connections weak") {
    const auto agg = aggregate(laplacian(7), 0.99);
    CHECK(agg.n_aggregates == 7);
  }
  SECTION("diagonal matrix") {
    const auto agg = aggregate(SparseMatrix::diagonal(Vector{1.0, 2.0, 3.0, 4.0}), 0.25);
    CHECK(agg.n_aggregates == 4);
  }
  SECTION("aggressive mode makes larger aggregates") {
    const auto A = laplacian(30);
    CHECK(aggregate(A, 0.25, true).n_aggregates < aggregate(A, 0.25, false).n_aggregates);
    check_aggregation_invariants(A, 0.25, aggregate(A, 0.25, true));
  }
}

TEST_CASE("aggregation invariants on random SPD matrices", "[aggregation][property]") {
  oracle::Rng rng(31);
  for (int trial = 0; trial < 25; ++trial) {
    const int n = rng.integer(2, 30);
    const Dense D = rng.sparse_matrix(n, n, 0.15);
    const Dense A = D * D.transpose() + Dense::Identity(n, n);
    const double theta = rng.uniform(0.0, 0.5);
    const bool aggressive = rng.integer(0, 1) == 1;
    const auto As = oracle::to_sparse(A);
    check_aggregation_invariants(As, theta, aggregate(As, theta, aggressive));
  }
}

TEST_CASE("tentative prolongator", "[prolongator]") {
  const auto agg = aggregate(laplacian(9), 0.25);
  const Dense T = oracle::dense_of(tentative_prolongator(agg));
  CHECK(T.cols() == 3);
  CHECK(T.colwise().sum() == Eigen::RowVector3d(2, 3, 4));
  CHECK(T.rowwise().sum() == Eigen::VectorXd::Ones(9));
}

TEST_CASE("smoothed prolongator of the 1D Laplacian", "[prolongator]") {
  const auto A = laplacian(9);
  const auto agg = aggregate(A, 0.25);
  SmoothingOptions opts;
  opts.eig_tol = 1e-12;
  opts.eig_max_iterations = 20000;
  // D^{-1} A has eigenvalues 1 - cos(k pi / 10), k = 1..9.
  const double lambda = 1.0 + std::cos(std::numbers::pi / 10.0);
  CHECK(estimate_jacobi_spectral_radius(A, 1e-12, 20000) == Catch::Approx(lambda).epsilon(1e-6));
  const double omega = (4.0 / 3.0) / lambda;
  const Dense Ad = oracle::laplacian_1d(9);
  const Dense T = oracle::dense_of(tentative_prolongator(agg));
  const Dense expected = (Dense::Identity(9, 9) - omega * 0.5 * Ad) * T;
  const Dense P = oracle::dense_of(smoothed_prolongator(A, agg, opts));
  CHECK(oracle::rel_err(P, expected) <= 1e-6);
  // Row 1 is interior to aggregate {0,1} next to aggregate {2,3,4}.
  CHECK(P(1, 0) == Catch::Approx(1.0 - omega * 0.5).epsilon(1e-6));
  CHECK(P(1, 1) == Catch::Approx(omega * 0.5).epsilon(1e-6));
  CHECK(Eigen::FullPivLU<Dense>(P).rank() == 3);

  opts.omega_factor = 0.0;
  CHECK(relative_difference(smoothed_prolongator(A, agg, opts), tentative_prolongator(agg)) == 0.0);
}

TEST_CASE("geometric prolongator", "[prolongator]") {
  for (int dim : {2, 3}) {
    const auto probs = nested(dim, 2, 1, all_faces(dim));
    const FeProblem& fine = probs[0];
    const FeProblem& coarse = probs[1];
    const Dense P = oracle::dense_of(geometric_prolongator(fine, coarse, Space::control));
    CHECK(P.rows() == fine.num_control());
    CHECK(P.cols() == coarse.num_control());
    CHECK((P.rowwise().sum().array() - 1.0).abs().maxCoeff() <= 1e-15);
    std::set<double> values;
    for (Eigen::Index i = 0; i < P.rows(); ++i)
      for (Eigen::Index j = 0; j < P.cols(); ++j)
        if (P(i, j) != 0.0) values.insert(P(i, j));
    for (double v : values) CHECK((v == 1.0 || v == 0.5 || v == 0.25 || v == 0.125));
    // Refinement keeps coarse vertex ids, so those rows are unit rows.
    for (Index c = 0; c < coarse.num_control(); ++c) CHECK(P(c, c) == 1.0);
    // Interpolation of a linear function is exact.
    Eigen::VectorXd lin(coarse.num_control()), lin_f(fine.num_control());
    for (Index v = 0; v < coarse.num_control(); ++v) lin(v) = 1.0 + 2.0 * coarse.mesh().vertices()[v][0] - coarse.mesh().vertices()[v][1];
    for (Index v = 0; v < fine.num_control(); ++v) lin_f(v) = 1.0 + 2.0 * fine.mesh().vertices()[v][0] - fine.mesh().vertices()[v][1];
    CHECK((P * lin - lin_f).cwiseAbs().maxCoeff() <= 1e-14);

    const Dense S = oracle::dense_of(geometric_prolongator(fine, coarse, Space::state));
    CHECK(S.rows() == fine.num_state());
    CHECK(S.cols() == coarse.num_state());
    CHECK(oracle::rel_err(S, oracle::restrict(P, fine.state_vertices(), coarse.state_vertices())) == 0.0);
  }
  const FeProblem a(build_structured_mesh(2, 2), 0), b(build_structured_mesh(2, 3), 0);
  CHECK_THROWS_AS(geometric_prolongator(b, a, Space::control), Error);
}

TEST_CASE("geometric Galerkin matrices equal directly assembled coarse matrices", "[hierarchy]") {
  for (int dim : {2, 3}) {
    const auto probs = nested(dim, 2, dim == 2 ? 2 : 1, all_faces(dim));
    auto fine = assemble_fine_system(probs[0], Coefficient::constant(1.0));
    const Hierarchy h = build_hierarchy(std::move(fine), HierarchyConfig::defaults(dim, HierarchyMode::geometric), probs);
    REQUIRE(h.size() == static_cast<int>(probs.size()));
    for (int j = 1; j < h.size(); ++j) {
      const FeProblem& p = probs[static_cast<std::size_t>(j)];
      const Level& L = h.level(j);
      CHECK(relative_difference(L.A, assemble_stiffness(p, Coefficient::constant(1.0))) <= 1e-12);
      CHECK(relative_difference(L.My, assemble_mass(p, Space::state, Space::state)) <= 1e-12);
      CHECK(relative_difference(L.Mu, assemble_mass(p, Space::control, Space::control)) <= 1e-12);
      CHECK(relative_difference(L.Myu, assemble_mass(p, Space::state, Space::control)) <= 1e-12);
    }
    CHECK(h.galerkin_defect() <= 1e-12);
  }
}

TEST_CASE("AMG hierarchy on the 2D Laplacian", "[hierarchy]") {
  const FeProblem p(build_structured_mesh(2, 32), all_faces(2));
  auto cfg = HierarchyConfig::defaults(2, HierarchyMode::amg);
  cfg.coarse_cap = 10;
  const Hierarchy h = build_hierarchy(assemble_fine_system(p, Coefficient::constant(1.0)), cfg);
  REQUIRE(h.size() >= 3);
  for (int j = 0; j + 1 < h.size(); ++j) {
    const Level& a = h.level(j);
    const Level& b = h.level(j + 1);
    CHECK(b.num_control() <= 0.6 * a.num_control());
    CHECK(b.num_state() <= 0.6 * a.num_state());
    CHECK(a.S.rows() == a.num_state());
    CHECK(a.S.cols() == b.num_state());
    CHECK(a.P.rows() == a.num_control());
    CHECK(a.P.cols() == b.num_control());
  }
  CHECK(h.galerkin_defect() <= 1e-12);
  for (int j = 1; j < h.size(); ++j) {
    const Level& L = h.level(j);
    CHECK(relative_difference(L.A, L.A.transpose()) <= 1e-14);
    CHECK(relative_difference(L.Mu, L.Mu.transpose()) <= 1e-14);
  }
  const Dense P = oracle::dense_of(h.level(h.size() - 2).P);
  CHECK(Eigen::FullPivLU<Dense>(P.transpose() * P).rank() == P.cols());

  std::ostringstream csv;
  h.write_summary_csv(csv);
  const std::string text = csv.str();
  CHECK(std::count(text.begin(), text.end(), '\n') == h.size() + 1);
}

TEST_CASE("a single-level configuration keeps only the fine level", "[hierarchy]") {
  const FeProblem p(build_structured_mesh(2, 8), all_faces(2));
  auto cfg = HierarchyConfig::defaults(2, HierarchyMode::amg);
  cfg.max_levels = 1;
  const Hierarchy h = build_hierarchy(assemble_fine_system(p, Coefficient::constant(1.0)), cfg);
  CHECK(h.size() == 1);
  CHECK(h.level(0).S.rows() == 0);
}

TEST_CASE("AMG preconditioned CG", "[amgsolver]") {
  const FeProblem p(build_structured_mesh(3, 16), all_faces(3));
  const auto A = assemble_stiffness(p, Coefficient::ball(1e-3, {0.5, 0.5, 0.5}, 0.25));
  const AmgSolver amg(A, AmgOptions{});
  CHECK(amg.num_levels() >= 2);
  oracle::Rng rng(41);
  const auto b = rng.vector(static_cast<std::size_t>(A.rows()));
  const auto r = amg.solve(b, 1e-8, 100);
  REQUIRE(r.converged);
  CHECK(r.iterations <= 40);
  auto res = spmv(A, r.x);
  for (std::size_t i = 0; i < res.size(); ++i) res[i] = b[i] - res[i];
  CHECK(norm2(res) <= 1e-8 * norm2(b) * 1.0001);

  // The V-cycle is a symmetric operator.
  const auto x = rng.vector(b.size()), y = rng.vector(b.size());
  const double xy = dot(x, amg.vcycle(y)), yx = dot(y, amg.vcycle(x));
  CHECK(std::abs(xy - yx) <= 1e-10 * std::abs(xy));
  CHECK(dot(x, amg.vcycle(x)) > 0.0);
}

TEST_CASE("AMG on a small matrix is a direct solve", "[amgsolver]") {
  oracle::Rng rng(42);
  const Dense A = rng.spd(20);
  const AmgSolver amg(oracle::to_sparse(A), AmgOptions{});
  CHECK(amg.num_levels() == 1);
  const auto b = rng.vector(20);
  const Eigen::VectorXd x = A.llt().solve(oracle::vec(b));
  CHECK((oracle::vec(amg.vcycle(b)) - x).norm() <= 1e-12 * x.norm());
}
