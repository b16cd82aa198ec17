#include "amgopt/analysis.hpp"

#include <cmath>
#include <numbers>
#include <ostream>

#include "amgopt/error.hpp"
#include "amgopt/format.hpp"

namespace amgopt {

namespace {

void check_cap(Index n, const char* what) {
  if (n > dense_cap)
    throw Error(ErrorCode::size_limit, std::string(what) + ": " + std::to_string(n) + " rows exceed the dense limit " +
                                           std::to_string(dense_cap));
}

Eigen::MatrixXd symmetric_part(const Eigen::MatrixXd& X) { return 0.5 * (X + X.transpose()); }

}  // namespace

Eigen::MatrixXd to_dense(const SparseMatrix& A) {
  Eigen::MatrixXd D = Eigen::MatrixXd::Zero(A.rows(), A.cols());
  const auto rp = A.row_ptr();
  const auto ci = A.col_idx();
  const auto v = A.values();
  for (Index i = 0; i < A.rows(); ++i)
    for (std::size_t k = rp[i]; k < rp[i + 1]; ++k) D(i, ci[k]) = v[k];
  return D;
}

Eigen::MatrixXd dense_operator(const LinearOperator& op) {
  check_cap(op.rows, "dense_operator");
  check_cap(op.cols, "dense_operator");
  Eigen::MatrixXd D(op.rows, op.cols);
  Vector e(static_cast<std::size_t>(op.cols), 0.0);
  for (Index c = 0; c < op.cols; ++c) {
    e[c] = 1.0;
    const Vector col = op(e);
    e[c] = 0.0;
    for (Index r = 0; r < op.rows; ++r) D(r, c) = col[r];
  }
  return D;
}

SpectralDistanceResult spectral_distance_dense(const Eigen::MatrixXd& X, const Eigen::MatrixXd& Y) {
  if (X.rows() != X.cols() || Y.rows() != Y.cols() || X.rows() != Y.rows())
    throw DimensionError("spectral_distance_dense: operands must be square and of equal size");
  require(X.rows() > 0, "spectral_distance_dense: empty operands");
  const Eigen::MatrixXd xs = symmetric_part(X);
  const Eigen::MatrixXd ys = symmetric_part(Y);
  if (Eigen::LLT<Eigen::MatrixXd>(xs).info() != Eigen::Success ||
      Eigen::LLT<Eigen::MatrixXd>(ys).info() != Eigen::Success)
    throw Error(ErrorCode::not_spd, "spectral_distance_dense: operands must be symmetric positive definite");
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(xs, ys, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw Error(ErrorCode::solver_failure, "generalized eigensolve failed");
  SpectralDistanceResult r;
  r.lambda_min = es.eigenvalues().minCoeff();
  r.lambda_max = es.eigenvalues().maxCoeff();
  if (r.lambda_min <= 0.0) throw Error(ErrorCode::not_spd, "spectral_distance_dense: pencil is not definite");
  r.distance = std::max(std::abs(std::log(r.lambda_min)), std::abs(std::log(r.lambda_max)));
  return r;
}

SpectralDistanceResult spectral_distance_weighted(const Eigen::MatrixXd& X, const Eigen::MatrixXd& Y,
                                                  const Eigen::MatrixXd& M) {
  return spectral_distance_dense(M * X, M * Y);
}

Eigen::MatrixXd dense_E(const Level& level, const SparseMatrix& coarse_mass, double beta, const Eigen::MatrixXd& X) {
  const Eigen::MatrixXd P = to_dense(level.P);
  const Eigen::MatrixXd Mu = to_dense(level.Mu);
  const Eigen::MatrixXd Mh = to_dense(coarse_mass);
  if (X.rows() != P.cols() || X.cols() != P.cols()) throw DimensionError("dense_E: coarse operator has wrong size");
  const Eigen::MatrixXd Pi = Mh.llt().solve(P.transpose() * Mu);
  const auto n = P.rows();
  return P * X * Pi + (Eigen::MatrixXd::Identity(n, n) - P * Pi) / beta;
}

PowerResult estimate_aj_tilde(const ControlProblem& p, int j, double tol, int max_iterations) {
  const Hierarchy& h = p.hierarchy();
  require(j >= 0 && j + 1 < h.size(), "estimate_aj_tilde: level needs a coarser neighbour");
  const Level& l = h.level(j);
  LinearOperator op;
  op.rows = l.num_state();
  op.cols = l.num_control();
  op.apply = [&p, &l, j](const Vector& u) {
    Vector y = p.apply_K(j, u);
    axpy(-1.0, spmv(l.S, p.apply_K(j + 1, p.apply_projection(j, u))), y);
    return y;
  };
  op.apply_transpose = [&p, &l, j](const Vector& y) {
    Vector u = p.apply_K_transpose(j, y);
    axpy(-1.0, p.apply_projection_transpose(j, p.apply_K_transpose(j + 1, spmv_transpose(l.S, y))), u);
    return u;
  };
  return power_norm(op, tol, max_iterations);
}

double compute_aj_exact(const Hierarchy& h, int j) {
  require(j >= 0 && j + 1 < h.size(), "compute_aj_exact: level needs a coarser neighbour");
  const Level& f = h.level(j);
  const Level& c = h.level(j + 1);
  check_cap(f.num_state(), "compute_aj_exact");
  check_cap(f.num_control(), "compute_aj_exact");
  const Eigen::MatrixXd Myu = to_dense(f.Myu);
  const Eigen::MatrixXd Mu = to_dense(f.Mu);
  const Eigen::MatrixXd My = to_dense(f.My);
  const Eigen::MatrixXd S = to_dense(f.S);
  const Eigen::MatrixXd P = to_dense(f.P);
  const Eigen::MatrixXd K = to_dense(f.A).llt().solve(Myu);
  const Eigen::MatrixXd Kc = to_dense(c.A).llt().solve(to_dense(c.Myu));
  const Eigen::MatrixXd Pi = to_dense(c.Mu).llt().solve(P.transpose() * Mu);
  const Eigen::MatrixXd L = K - S * Kc * Pi;

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ey(My);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eu(Mu);
  const Eigen::MatrixXd weighted = ey.operatorSqrt() * L * eu.operatorInverseSqrt();
  Eigen::BDCSVD<Eigen::MatrixXd> svd(weighted);
  return svd.singularValues().size() > 0 ? svd.singularValues()(0) : 0.0;
}

std::vector<double> ApproxReport::ratios() const {
  std::vector<double> r;
  for (std::size_t j = 0; j + 1 < aj_tilde.size(); ++j) r.push_back(aj_tilde[j] / aj_tilde[j + 1]);
  return r;
}

ApproxReport approximation_study(const ControlProblem& p, const std::string& mode, bool exact) {
  const Hierarchy& h = p.hierarchy();
  ApproxReport rep;
  rep.mode = mode;
  for (int j = 0; j + 1 < h.size(); ++j) {
    const Level& l = h.level(j);
    rep.n_control.push_back(l.num_control());
    rep.aj_tilde.push_back(estimate_aj_tilde(p, j).norm);
    if (exact && l.num_control() <= dense_cap && l.num_state() <= dense_cap)
      rep.aj.push_back(compute_aj_exact(h, j));
    else
      rep.aj.push_back(std::nullopt);
  }
  return rep;
}

void write_approx_csv(std::ostream& out, const ApproxReport& report) {
  out << "level,n_control,a_j,a_j_tilde,ratio\n";
  const auto ratios = report.ratios();
  for (std::size_t j = 0; j < report.aj_tilde.size(); ++j) {
    out << j << ',' << report.n_control[j] << ',' << (report.aj[j] ? format_real(*report.aj[j]) : "NA") << ','
        << format_real(report.aj_tilde[j]) << ',' << (j < ratios.size() ? format_real(ratios[j]) : "NA") << '\n';
  }
}

PreconditionerQuality measure_preconditioner_quality(const ControlProblem& p) {
  const Level& l = p.hierarchy().level(0);
  check_cap(l.num_control(), "measure_preconditioner_quality");
  const Eigen::MatrixXd M = to_dense(l.Mu);
  const Eigen::MatrixXd H = symmetric_part(M * dense_operator(p.hessian_operator(0)));
  const Eigen::MatrixXd MW = symmetric_part(M * dense_operator(p.mlas_operator(0)));
  const Eigen::MatrixXd MGinv = symmetric_part(M * H.llt().solve(M));
  PreconditionerQuality q;
  q.distance = spectral_distance_dense(MW, MGinv);
  q.condition = q.distance.lambda_max / q.distance.lambda_min;
  return q;
}

double sine_product(const Point& x, int dim) {
  double v = 1.0;
  for (int k = 0; k < dim; ++k) v *= std::sin(std::numbers::pi * x[k]);
  return v;
}

Vector manufactured_desired_state(const FeProblem& p, double beta) {
  const int d = p.mesh().dim();
  const double pi2 = std::numbers::pi * std::numbers::pi;
  const double scale = 1.0 / (d * pi2) + d * pi2 * beta;
  return p.interpolate([d, scale](const Point& x) { return scale * sine_product(x, d); }, Space::state);
}

double control_error_vs_exact(const Mesh& mesh, std::span<const double> u) {
  if (u.size() != static_cast<std::size_t>(mesh.num_vertices()))
    throw DimensionError("control_error_vs_exact: control length differs from the vertex count");
  const int dim = mesh.dim();
  const double g = std::sqrt(0.6);
  const double pts[3] = {0.5 * (1.0 - g), 0.5, 0.5 * (1.0 + g)};
  const double wts[3] = {5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0};
  const int nz = dim == 3 ? 3 : 1;
  double sum = 0.0;
  for (Index e = 0; e < mesh.num_elements(); ++e) {
    const auto& el = mesh.elements()[e];
    const Point lo = mesh.vertices()[el[0]];
    const Point h = mesh.element_size(e);
    const double vol = mesh.element_volume(e);
    for (int c = 0; c < nz; ++c)
      for (int b = 0; b < 3; ++b)
        for (int a = 0; a < 3; ++a) {
          const double s[3] = {pts[a], pts[b], dim == 3 ? pts[c] : 0.0};
          const double w = wts[a] * wts[b] * (dim == 3 ? wts[c] : 1.0);
          double uh = 0.0;
          for (int loc = 0; loc < mesh.vertices_per_element(); ++loc) {
            double phi = 1.0;
            for (int k = 0; k < dim; ++k) phi *= ((loc >> k) & 1) ? s[k] : 1.0 - s[k];
            uh += phi * u[el[loc]];
          }
          const Point x{lo[0] + s[0] * h[0], lo[1] + s[1] * h[1], lo[2] + s[2] * h[2]};
          const double diff = uh - sine_product(x, dim);
          sum += w * vol * diff * diff;
        }
  }
  return std::sqrt(sum);
}

}  // namespace amgopt
