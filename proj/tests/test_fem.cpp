#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

#include "amgopt/error.hpp"
#include "amgopt/fem.hpp"
#include "amgopt/solvers.hpp"
#include "oracles.hpp"

using namespace amgopt;
using oracle::Dense;

namespace {

FeProblem unit_element(int dim, FaceMask dirichlet = 0) { return FeProblem(build_structured_mesh(dim, 1), dirichlet); }

}  // namespace

TEST_CASE("single 2D element matrices", "[fem]") {
  const FeProblem p = unit_element(2);
  const Dense K = oracle::dense_of(assemble_stiffness(p, Coefficient::constant(1.0), Space::control));
  const Dense M = oracle::dense_of(assemble_mass(p, Space::control, Space::control));
  CHECK(K(0, 0) == Catch::Approx(2.0 / 3.0));
  CHECK(K(0, 1) == Catch::Approx(-1.0 / 6.0));
  CHECK(K(0, 3) == Catch::Approx(-1.0 / 3.0));
  CHECK(M(0, 0) == Catch::Approx(1.0 / 9.0));
  CHECK(M(0, 1) == Catch::Approx(1.0 / 18.0));
  CHECK(M(0, 3) == Catch::Approx(1.0 / 36.0));
  CHECK(M.sum() == Catch::Approx(1.0));
  CHECK(K.rowwise().sum().cwiseAbs().maxCoeff() <= 1e-15);
}

TEST_CASE("single 3D element matrices", "[fem]") {
  const FeProblem p = unit_element(3);
  const Dense K = oracle::dense_of(assemble_stiffness(p, Coefficient::constant(1.0), Space::control));
  const Dense M = oracle::dense_of(assemble_mass(p, Space::control, Space::control));
  CHECK(K(0, 0) == Catch::Approx(1.0 / 3.0));
  CHECK(K(0, 7) == Catch::Approx(-1.0 / 12.0));
  CHECK(M(0, 0) == Catch::Approx(1.0 / 27.0));
  CHECK(M(0, 7) == Catch::Approx(1.0 / 216.0));
  CHECK(M.sum() == Catch::Approx(1.0));
}

TEST_CASE("assembled matrices match tensor-product oracles", "[fem][property]") {
  for (int dim : {2, 3})
    for (int n : {1, 2, 3, 4}) {
      if (dim == 3 && n > 3) continue;
      const FeProblem p(build_structured_mesh(dim, n), 0);
      const Dense K = oracle::dense_of(assemble_stiffness(p, Coefficient::constant(1.0), Space::control));
      const Dense M = oracle::dense_of(assemble_mass(p, Space::control, Space::control));
      CHECK(oracle::rel_err(K, oracle::tensor_stiffness(dim, n)) <= 1e-14);
      CHECK(oracle::rel_err(M, oracle::tensor_mass(dim, n)) <= 1e-14);
    }
}

TEST_CASE("state matrices eliminate Dirichlet vertices", "[fem]") {
  const int n = 3;
  const FeProblem p(build_structured_mesh(3, n), parse_faces("z0"));
  CHECK(p.num_state() == 4 * 4 * 3);
  const Dense Kfull = oracle::tensor_stiffness(3, n), Mfull = oracle::tensor_mass(3, n);
  std::vector<Index> all(p.num_control());
  for (Index i = 0; i < p.num_control(); ++i) all[i] = i;
  const Dense A = oracle::dense_of(assemble_stiffness(p, Coefficient::constant(2.5)));
  CHECK(oracle::rel_err(A, 2.5 * oracle::restrict(Kfull, p.state_vertices(), p.state_vertices())) <= 1e-14);
  const Dense Myu = oracle::dense_of(assemble_mass(p, Space::state, Space::control));
  CHECK(oracle::rel_err(Myu, oracle::restrict(Mfull, p.state_vertices(), all)) <= 1e-14);
  const Dense Mu = oracle::dense_of(assemble_mass(p, Space::control, Space::control));
  CHECK(oracle::rel_err(Mu, Mfull) <= 1e-14);
  for (Index v : p.state_vertices()) CHECK((p.mesh().boundary_tags()[v] & face_z0) == 0);
  const auto ext = p.state_to_vertices(Vector(p.num_state(), 1.0));
  for (Index v = 0; v < p.num_control(); ++v) CHECK(ext[v] == (p.state_index()[v] < 0 ? 0.0 : 1.0));
}

TEST_CASE("matrices are symmetric positive definite", "[fem][property]") {
  oracle::Rng rng(21);
  for (int trial = 0; trial < 4; ++trial) {
    const int dim = rng.integer(2, 3);
    const FeProblem p(build_structured_mesh(dim, rng.integer(2, 3)), all_faces(dim));
    const Dense A = oracle::dense_of(assemble_stiffness(p, Coefficient::ball(rng.uniform(1e-3, 1.0), {0.5, 0.5, 0.5}, 0.3)));
    const Dense M = oracle::dense_of(assemble_mass(p, Space::state, Space::state));
    CHECK(oracle::rel_err(A, A.transpose()) <= 1e-15);
    CHECK(oracle::rel_err(M, M.transpose()) <= 1e-15);
    CHECK(Eigen::SelfAdjointEigenSolver<Dense>(A).eigenvalues().minCoeff() > 0.0);
    CHECK(Eigen::SelfAdjointEigenSolver<Dense>(M).eigenvalues().minCoeff() > 0.0);
  }
}

TEST_CASE("stiffness is linear in a constant coefficient", "[fem]") {
  const FeProblem p(build_structured_mesh(2, 3), all_faces(2));
  const auto A1 = assemble_stiffness(p, Coefficient::constant(1.0));
  const auto A7 = assemble_stiffness(p, Coefficient::constant(7.0));
  CHECK(relative_difference(A7, scale(7.0, A1)) <= 1e-15);
}

TEST_CASE("ball coefficient", "[fem]") {
  const auto c = Coefficient::ball(1e-2, {0.5, 0.5, 0.5}, 0.25);
  CHECK(c({0.5, 0.5, 0.5}) == 1e-2);
  CHECK(c({0.75, 0.5, 0.5}) == 1e-2);
  CHECK(c({0.0, 0.0, 0.0}) == 1.0);
  CHECK(Coefficient::constant(3.0)({0.1, 0.2, 0.3}) == 3.0);
}

TEST_CASE("Poisson solution converges at second order", "[fem]") {
  // -Laplace y = d pi^2 prod sin(pi x_k) has solution prod sin(pi x_k).
  const double pi = std::numbers::pi;
  std::vector<double> errors;
  for (int n : {4, 8, 16, 32}) {
    const FeProblem p(build_structured_mesh(2, n), all_faces(2));
    auto exact = [&](const Point& x) { return std::sin(pi * x[0]) * std::sin(pi * x[1]); };
    const auto A = std::make_shared<const SparseMatrix>(assemble_stiffness(p, Coefficient::constant(1.0)));
    const auto M = assemble_mass(p, Space::state, Space::control);
    auto f = p.interpolate([&](const Point& x) { return 2.0 * pi * pi * exact(x); }, Space::control);
    const auto b = spmv(M, f);
    const auto r = cg(LinearOperator::from_matrix(A), b, InnerProduct{}, nullptr, CgOptions{1e-13, 2000});
    REQUIRE(r.converged);
    const auto yi = p.interpolate(exact, Space::state);
    double err = 0.0;
    for (std::size_t i = 0; i < yi.size(); ++i) err = std::max(err, std::abs(yi[i] - r.x[i]));
    errors.push_back(err);
  }
  for (std::size_t k = 1; k < errors.size(); ++k) {
    const double rate = std::log2(errors[k - 1] / errors[k]);
    CHECK(rate >= 1.8);
  }
}

TEST_CASE("invalid problems are rejected", "[fem]") {
  CHECK_THROWS_AS(FeProblem(build_structured_mesh(2, 2), face_z0), Error);
}
