#include "amgopt/optctl.hpp"

#include <chrono>
#include <cmath>

#include "amgopt/error.hpp"

namespace amgopt {

namespace {

bool is_zero(const Vector& v) {
  for (double x : v)
    if (x != 0.0) return false;
  return true;
}

void check_size(const Vector& v, Index n, const char* what) {
  if (v.size() != static_cast<std::size_t>(n))
    throw DimensionError(std::string(what) + ": expected length " + std::to_string(n) + ", got " +
                         std::to_string(v.size()));
}

void validate(const Tolerances& t) {
  for (double x : {t.forward, t.mass, t.coarse, t.outer})
    require(x > 0.0 && x < 1.0, "tolerances must lie in (0, 1)");
  require(t.max_inner_iterations > 0 && t.max_coarse_iterations > 0 && t.max_outer_iterations > 0,
          "iteration limits must be positive");
}

}  // namespace

ControlProblem::ControlProblem(std::shared_ptr<const Hierarchy> hierarchy, double beta, Vector desired_state,
                               Tolerances tolerances, int levels_used, const AmgOptions& inner)
    : hierarchy_(std::move(hierarchy)), beta_(beta), yd_(std::move(desired_state)), tol_(tolerances) {
  require(hierarchy_ != nullptr, "control problem needs a hierarchy");
  require(beta_ > 0.0 && std::isfinite(beta_), "beta must be positive");
  validate(tol_);
  check_size(yd_, hierarchy_->level(0).num_state(), "desired state");
  set_levels_used(levels_used == 0 ? hierarchy_->size() : levels_used);
  auto solvers = std::make_shared<std::vector<AmgSolver>>();
  solvers->reserve(static_cast<std::size_t>(hierarchy_->size()));
  for (const Level& l : hierarchy_->levels()) solvers->emplace_back(l.A, inner);
  state_solvers_ = std::move(solvers);
}

void ControlProblem::set_tolerances(const Tolerances& t) {
  validate(t);
  tol_ = t;
}

void ControlProblem::set_levels_used(int n) {
  require(n >= 1 && n <= hierarchy_->size(),
          "levels used must lie in [1, " + std::to_string(hierarchy_->size()) + "]");
  levels_used_ = n;
}

void ControlProblem::check_level(int j, bool needs_coarser) const {
  const int limit = hierarchy_->size() - (needs_coarser ? 1 : 0);
  if (j < 0 || j >= limit) throw Error(ErrorCode::invalid_argument, "level " + std::to_string(j) + " out of range");
}

Vector ControlProblem::state_solve(int j, const Vector& b) const {
  check_level(j, false);
  check_size(b, hierarchy_->level(j).num_state(), "state solve");
  if (is_zero(b)) return Vector(b.size(), 0.0);
  CgResult r = (*state_solvers_)[static_cast<std::size_t>(j)].solve(b, tol_.forward, tol_.max_inner_iterations);
  if (!r.converged)
    throw SolverError("state solve on level " + std::to_string(j) + " did not converge", std::move(r.residual_history));
  return std::move(r.x);
}

Vector ControlProblem::mass_solve(int j, const Vector& b) const {
  check_level(j, false);
  const SparseMatrix& M = hierarchy_->level(j).Mu;
  check_size(b, M.rows(), "mass solve");
  if (is_zero(b)) return Vector(b.size(), 0.0);
  LinearOperator op;
  op.rows = op.cols = M.rows();
  op.apply = [&M](const Vector& x) { return spmv(M, x); };
  LinearOperator pre;
  pre.rows = pre.cols = M.rows();
  pre.apply = [&M](const Vector& x) { return gauss_seidel_sym(M, x, Vector(x.size(), 0.0), 1); };
  CgResult r = cg(op, b, InnerProduct{}, &pre, CgOptions{tol_.mass, tol_.max_inner_iterations});
  if (!r.converged)
    throw SolverError("mass solve on level " + std::to_string(j) + " did not converge", std::move(r.residual_history));
  return std::move(r.x);
}

Vector ControlProblem::apply_K(int j, const Vector& u) const {
  check_level(j, false);
  const Level& l = hierarchy_->level(j);
  check_size(u, l.num_control(), "apply_K");
  return state_solve(j, spmv(l.Myu, u));
}

Vector ControlProblem::apply_K_transpose(int j, const Vector& y) const {
  check_level(j, false);
  const Level& l = hierarchy_->level(j);
  check_size(y, l.num_state(), "apply_K_transpose");
  return spmv_transpose(l.Myu, state_solve(j, y));
}

Vector ControlProblem::apply_K_adjoint(int j, const Vector& y) const {
  check_level(j, false);
  const Level& l = hierarchy_->level(j);
  check_size(y, l.num_state(), "apply_K_adjoint");
  return mass_solve(j, apply_K_transpose(j, spmv(l.My, y)));
}

Vector ControlProblem::apply_hessian(int j, const Vector& u) const {
  Vector g = apply_K_adjoint(j, apply_K(j, u));
  axpy(beta_, u, g);
  return g;
}

Vector ControlProblem::apply_hessian_matrix(int j, const Vector& u) const {
  const Level& l = hierarchy_->level(j);
  Vector h = apply_K_transpose(j, spmv(l.My, apply_K(j, u)));
  axpy(beta_, spmv(l.Mu, u), h);
  return h;
}

Vector ControlProblem::apply_projection(int j, const Vector& u) const {
  check_level(j, true);
  const Level& l = hierarchy_->level(j);
  check_size(u, l.num_control(), "apply_projection");
  return mass_solve(j + 1, spmv_transpose(l.P, spmv(l.Mu, u)));
}

Vector ControlProblem::apply_projection_transpose(int j, const Vector& v) const {
  check_level(j, true);
  const Level& l = hierarchy_->level(j);
  check_size(v, l.P.cols(), "apply_projection_transpose");
  return spmv(l.Mu, spmv(l.P, mass_solve(j + 1, v)));
}

Vector ControlProblem::apply_prolongation(int j, const Vector& v) const {
  check_level(j, true);
  const Level& l = hierarchy_->level(j);
  check_size(v, l.P.cols(), "apply_prolongation");
  return spmv(l.P, v);
}

Vector ControlProblem::apply_two_level_inv(int j, const LinearOperator& w_next, const Vector& b) const {
  const Vector pb = apply_projection(j, b);
  const Level& l = hierarchy_->level(j);
  Vector out = spmv(l.P, w_next(pb));
  const Vector ppb = spmv(l.P, pb);
  const double inv_beta = 1.0 / beta_;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += inv_beta * (b[i] - ppb[i]);
  return out;
}

Vector ControlProblem::apply_mlas(int j, const Vector& b, MlasStats* stats) const {
  require(j >= 0 && j < levels_used_, "apply_mlas: level beyond the levels in use");
  check_size(b, hierarchy_->level(j).num_control(), "apply_mlas");
  if (stats) {
    const auto n = static_cast<std::size_t>(levels_used_);
    if (stats->two_level_applies.size() < n) stats->two_level_applies.resize(n, 0);
    if (stats->hessian_applies.size() < n) stats->hessian_applies.resize(n, 0);
  }
  if (j == levels_used_ - 1) {
    if (stats) ++stats->coarsest_solves;
    return coarsest_solve(b);
  }
  LinearOperator w_next;
  w_next.rows = w_next.cols = hierarchy_->level(j + 1).num_control();
  w_next.apply = [this, j, stats](const Vector& x) { return apply_mlas(j + 1, x, stats); };
  auto t_inv = [&](const Vector& x) {
    if (stats) ++stats->two_level_applies[static_cast<std::size_t>(j)];
    return apply_two_level_inv(j, w_next, x);
  };
  Vector u = t_inv(b);
  if (j == 0) return u;
  if (stats) ++stats->hessian_applies[static_cast<std::size_t>(j)];
  Vector r = apply_hessian(j, u);
  for (std::size_t i = 0; i < r.size(); ++i) r[i] = b[i] - r[i];
  axpy(1.0, t_inv(r), u);
  return u;
}

Vector ControlProblem::coarsest_solve(const Vector& b) const {
  const int c = levels_used_ - 1;
  const Level& l = hierarchy_->level(c);
  check_size(b, l.num_control(), "coarsest_solve");
  CgResult r = cg(hessian_operator(c), b, InnerProduct(l.Mu), nullptr,
                  CgOptions{tol_.coarse, tol_.max_coarse_iterations});
  if (!r.converged)
    throw SolverError("coarsest Hessian solve on level " + std::to_string(c) + " did not converge",
                      std::move(r.residual_history));
  return std::move(r.x);
}

Vector ControlProblem::reduced_rhs() const {
  return apply_K_transpose(0, spmv(hierarchy_->level(0).My, yd_));
}

double ControlProblem::objective(const Vector& u) const {
  const Level& l = hierarchy_->level(0);
  Vector e = apply_K(0, u);
  axpy(-1.0, yd_, e);
  return 0.5 * dot(e, spmv(l.My, e)) + 0.5 * beta_ * dot(u, spmv(l.Mu, u));
}

LinearOperator ControlProblem::hessian_operator(int j) const {
  check_level(j, false);
  LinearOperator op;
  op.rows = op.cols = hierarchy_->level(j).num_control();
  op.apply = [this, j](const Vector& u) { return apply_hessian(j, u); };
  op.self_adjoint = true;
  op.self_adjoint_weight = std::shared_ptr<const SparseMatrix>(hierarchy_, &hierarchy_->level(j).Mu);
  return op;
}

LinearOperator ControlProblem::mlas_operator(int j) const {
  require(j >= 0 && j < levels_used_, "mlas_operator: level beyond the levels in use");
  LinearOperator op;
  op.rows = op.cols = hierarchy_->level(j).num_control();
  op.apply = [this, j](const Vector& b) { return apply_mlas(j, b); };
  op.self_adjoint = true;
  op.self_adjoint_weight = std::shared_ptr<const SparseMatrix>(hierarchy_, &hierarchy_->level(j).Mu);
  return op;
}

std::string to_string(Preconditioner p) { return p == Preconditioner::none ? "none" : "multilevel"; }

Preconditioner parse_preconditioner(const std::string& s) {
  if (s == "none") return Preconditioner::none;
  if (s == "multilevel") return Preconditioner::multilevel;
  throw Error(ErrorCode::invalid_argument, "unknown preconditioner '" + s + "'");
}

namespace {

CgResult outer_attempt(const ControlProblem& p, Preconditioner pc, const Vector& rhs) {
  const Index n = p.hierarchy().level(0).num_control();
  LinearOperator op;
  op.rows = op.cols = n;
  op.apply = [&p](const Vector& u) { return p.apply_hessian_matrix(0, u); };
  const CgOptions opts{p.tolerances().outer, p.tolerances().max_outer_iterations};
  if (pc == Preconditioner::none) return cg(op, rhs, InnerProduct{}, nullptr, opts);

  LinearOperator pre;
  pre.rows = pre.cols = n;
  if (p.levels_used() == 1) {
    pre.apply = [&p](const Vector& r) { return p.coarsest_solve(p.mass_solve(0, r)); };
  } else {
    const Level& l0 = p.hierarchy().level(0);
    const double inv_beta = 1.0 / p.beta();
    pre.apply = [&p, &l0, inv_beta](const Vector& r) {
      const Vector q = p.mass_solve(1, spmv_transpose(l0.P, r));
      const Vector s = p.mass_solve(0, r);
      Vector z = spmv(l0.P, p.apply_mlas(1, q));
      const Vector pq = spmv(l0.P, q);
      for (std::size_t i = 0; i < z.size(); ++i) z[i] += inv_beta * (s[i] - pq[i]);
      return z;
    };
  }
  return cg(op, rhs, InnerProduct{}, &pre, opts);
}

double mass_inverse_norm(const ControlProblem& p, const Vector& r) {
  return std::sqrt(std::max(0.0, dot(r, p.mass_solve(0, r))));
}

}  // namespace

SolveReport solve_control_problem(const ControlProblem& problem, Preconditioner preconditioner,
                                  const SolveOptions& options) {
  const auto start = std::chrono::steady_clock::now();
  const Level& l0 = problem.hierarchy().level(0);
  SolveReport rep;
  rep.n_state = l0.num_state();
  rep.n_control = l0.num_control();
  rep.beta = problem.beta();
  rep.preconditioner = preconditioner;
  rep.levels_requested = problem.levels_used();

  const Vector rhs = problem.reduced_rhs();
  ControlProblem p = problem;
  CgResult result;
  for (;;) {
    result = outer_attempt(p, preconditioner, rhs);
    rep.breakdown = rep.breakdown || result.breakdown;
    const bool can_retry = preconditioner == Preconditioner::multilevel &&
                           p.levels_used() > std::max(1, options.min_levels);
    if (result.converged || !can_retry) break;
    rep.message += (result.breakdown ? "breakdown" : "no convergence") + std::string(" with ") +
                   std::to_string(p.levels_used()) + " levels; ";
    p.set_levels_used(p.levels_used() - 1);
    ++rep.retries;
  }
  rep.levels_used = preconditioner == Preconditioner::multilevel ? p.levels_used() : 1;
  rep.iterations = result.iterations;
  rep.converged = result.converged;
  rep.relative_residual = result.relative_residual;
  rep.residual_history = result.residual_history;
  if (!result.converged)
    rep.message += result.breakdown ? "indefinite preconditioner" : "outer iteration limit reached";

  Tolerances tight = p.tolerances();
  tight.forward = tight.mass = 1e-10;
  ControlProblem check = p;
  check.set_tolerances(tight);
  const Vector tight_rhs = check.reduced_rhs();
  Vector res = check.apply_hessian_matrix(0, result.x);
  for (std::size_t i = 0; i < res.size(); ++i) res[i] = tight_rhs[i] - res[i];
  const double denom = mass_inverse_norm(check, tight_rhs);
  rep.verified_residual = denom > 0.0 ? mass_inverse_norm(check, res) / denom : mass_inverse_norm(check, res);
  rep.objective = check.objective(result.x);
  rep.control = std::move(result.x);
  if (options.timings)
    rep.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return rep;
}

}  // namespace amgopt
