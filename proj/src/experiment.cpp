#include "amgopt/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>

#include "amgopt/error.hpp"
#include "amgopt/format.hpp"

namespace amgopt {

std::string to_string(Command c) {
  switch (c) {
    case Command::solve: return "solve";
    case Command::aj_study: return "aj-study";
    case Command::compare_hierarchies: return "compare-hierarchies";
    case Command::varying_kappa: return "varying-kappa";
  }
  return "?";
}

Command parse_command(const std::string& s) {
  for (Command c : {Command::solve, Command::aj_study, Command::compare_hierarchies, Command::varying_kappa})
    if (to_string(c) == s) return c;
  throw Error(ErrorCode::invalid_argument, "unknown command '" + s + "'");
}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value, const std::string& why) {
  throw Error(ErrorCode::invalid_argument, "config key '" + key + "': invalid value '" + value + "' (" + why + ")");
}

double to_double(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const double d = std::stod(v, &pos);
    if (pos != v.size() || !std::isfinite(d)) bad_value(key, v, "expected a number");
    return d;
  } catch (const std::logic_error&) {
    bad_value(key, v, "expected a number");
  }
}

int to_int(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const long long i = std::stoll(v, &pos);
    if (pos != v.size() || i < -1000000000LL || i > 1000000000LL) bad_value(key, v, "expected an integer");
    return static_cast<int>(i);
  } catch (const std::logic_error&) {
    bad_value(key, v, "expected an integer");
  }
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  bad_value(key, v, "expected true or false");
}

std::vector<double> to_list(const std::string& key, const std::string& v) {
  std::vector<double> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(to_double(key, trim(item)));
  if (out.empty()) bad_value(key, v, "expected a comma separated list");
  return out;
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

std::string join(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + num(v[i]);
  return s;
}

std::string sanitize(std::string s) {
  std::replace(s.begin(), s.end(), ',', ';');
  std::replace(s.begin(), s.end(), '\n', ' ');
  return s;
}

}  // namespace

ExperimentConfig ExperimentConfig::defaults(Command c) {
  ExperimentConfig cfg;
  cfg.command = c;
  switch (c) {
    case Command::solve:
      break;
    case Command::aj_study:
      cfg.dim = 2;
      cfg.refinements = 4;
      cfg.mode = HierarchyMode::geometric;
      break;
    case Command::compare_hierarchies:
      cfg.beta = {1e-4};
      cfg.min_refinements = 0;
      cfg.levels = 2;
      break;
    case Command::varying_kappa:
      cfg.beta = {1.0};
      cfg.kappa = "ball";
      cfg.alpha = {1e-4, 1e-2, 1e-1, 1.0};
      cfg.dirichlet = "z0";
      cfg.desired_state = DesiredState::constant;
      cfg.levels = 2;
      cfg.precond = PreconditionerChoice::both;
      break;
  }
  return cfg;
}

const std::vector<std::string>& ExperimentConfig::keys() {
  static const std::vector<std::string> k{
      "command",     "dim",           "cells_per_side", "refinements",  "min_refinements", "mesh",
      "beta",        "kappa",         "kappa_value",    "alpha",        "ball_radius",     "ball_center",
      "dirichlet",   "desired_state", "desired_value",  "mode",         "aggressive",      "theta",
      "omega_factor", "coarse_cap",   "max_levels",     "levels",       "min_levels",      "precond",
      "forward_tol", "mass_tol",      "coarse_tol",     "outer_tol",    "max_outer_iterations",
      "exact_aj",    "timings",       "output"};
  return k;
}

void ExperimentConfig::set(const std::string& raw_key, const std::string& raw_value) {
  const std::string key = trim(raw_key);
  const std::string v = trim(raw_value);
  if (key == "command") {
    command = parse_command(v);
  } else if (key == "dim") {
    dim = to_int(key, v);
  } else if (key == "cells_per_side") {
    cells_per_side = to_int(key, v);
  } else if (key == "refinements") {
    refinements = to_int(key, v);
  } else if (key == "min_refinements") {
    min_refinements = to_int(key, v);
  } else if (key == "mesh") {
    mesh = v;
  } else if (key == "beta") {
    beta = to_list(key, v);
  } else if (key == "kappa") {
    if (v != "constant" && v != "ball") bad_value(key, v, "expected constant or ball");
    kappa = v;
  } else if (key == "kappa_value") {
    kappa_value = to_double(key, v);
  } else if (key == "alpha") {
    alpha = to_list(key, v);
  } else if (key == "ball_radius") {
    ball_radius = to_double(key, v);
  } else if (key == "ball_center") {
    const auto c = to_list(key, v);
    if (c.size() != 3) bad_value(key, v, "expected three coordinates");
    ball_center = {c[0], c[1], c[2]};
  } else if (key == "dirichlet") {
    try {
      parse_faces(v);
    } catch (const Error& e) {
      bad_value(key, v, e.what());
    }
    dirichlet = v;
  } else if (key == "desired_state") {
    if (v == "manufactured")
      desired_state = DesiredState::manufactured;
    else if (v == "constant")
      desired_state = DesiredState::constant;
    else
      bad_value(key, v, "expected manufactured or constant");
  } else if (key == "desired_value") {
    desired_value = to_double(key, v);
  } else if (key == "mode") {
    try {
      mode = parse_hierarchy_mode(v);
    } catch (const Error&) {
      bad_value(key, v, "expected amg or geometric");
    }
  } else if (key == "aggressive") {
    aggressive = to_bool(key, v);
  } else if (key == "theta") {
    if (v == "auto")
      theta.reset();
    else
      theta = to_double(key, v);
  } else if (key == "omega_factor") {
    omega_factor = to_double(key, v);
  } else if (key == "coarse_cap") {
    coarse_cap = to_int(key, v);
  } else if (key == "max_levels") {
    max_levels = to_int(key, v);
  } else if (key == "levels") {
    levels = v == "all" ? 0 : to_int(key, v);
  } else if (key == "min_levels") {
    min_levels = to_int(key, v);
  } else if (key == "precond") {
    if (v == "none")
      precond = PreconditionerChoice::none;
    else if (v == "multilevel")
      precond = PreconditionerChoice::multilevel;
    else if (v == "both")
      precond = PreconditionerChoice::both;
    else
      bad_value(key, v, "expected none, multilevel or both");
  } else if (key == "forward_tol") {
    tolerances.forward = to_double(key, v);
  } else if (key == "mass_tol") {
    tolerances.mass = to_double(key, v);
  } else if (key == "coarse_tol") {
    tolerances.coarse = to_double(key, v);
  } else if (key == "outer_tol") {
    tolerances.outer = to_double(key, v);
  } else if (key == "max_outer_iterations") {
    tolerances.max_outer_iterations = to_int(key, v);
  } else if (key == "exact_aj") {
    exact_aj = to_bool(key, v);
  } else if (key == "timings") {
    timings = to_bool(key, v);
  } else if (key == "output") {
    output = v.empty() ? "-" : v;
  } else {
    throw Error(ErrorCode::invalid_argument, "unknown config key '" + key + "'");
  }
}

void ExperimentConfig::load_text(std::istream& in) {
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError(lineno, "expected key=value");
    try {
      set(line.substr(0, eq), line.substr(eq + 1));
    } catch (const Error& e) {
      throw ParseError(lineno, e.what());
    }
  }
}

void ExperimentConfig::validate() const {
  auto fail = [](const std::string& key, const std::string& why) {
    throw Error(ErrorCode::invalid_argument, "config key '" + key + "': " + why);
  };
  if (dim != 2 && dim != 3) fail("dim", "must be 2 or 3");
  if (cells_per_side < 1) fail("cells_per_side", "must be at least 1");
  if (refinements < 0 || refinements > 10) fail("refinements", "must lie in [0, 10]");
  if (min_refinements < -1 || min_refinements > refinements) fail("min_refinements", "must lie in [-1, refinements]");
  for (double b : beta)
    if (!(b > 0.0)) fail("beta", "values must be positive");
  for (double a : alpha)
    if (!(a > 0.0)) fail("alpha", "values must be positive");
  if (!(kappa_value > 0.0)) fail("kappa_value", "must be positive");
  if (!(ball_radius > 0.0)) fail("ball_radius", "must be positive");
  if (theta && !(*theta >= 0.0 && *theta < 1.0)) fail("theta", "must lie in [0, 1)");
  if (!(omega_factor >= 0.0 && omega_factor < 2.0)) fail("omega_factor", "must lie in [0, 2)");
  if (coarse_cap < 1) fail("coarse_cap", "must be at least 1");
  if (max_levels < 1) fail("max_levels", "must be at least 1");
  if (levels < 0) fail("levels", "must be nonnegative");
  if (min_levels < 1) fail("min_levels", "must be at least 1");
  if ((dirichlet_mask(*this) & ~all_faces(dim)) != 0) fail("dirichlet", "names a face that does not exist in " + std::to_string(dim) + "D");
  const std::pair<const char*, double> tols[] = {{"forward_tol", tolerances.forward},
                                                 {"mass_tol", tolerances.mass},
                                                 {"coarse_tol", tolerances.coarse},
                                                 {"outer_tol", tolerances.outer}};
  for (const auto& [k, t] : tols)
    if (!(t > 0.0 && t < 1.0)) fail(k, "must lie in (0, 1)");
  if (tolerances.max_outer_iterations < 1) fail("max_outer_iterations", "must be positive");
  if (command == Command::aj_study && mode == HierarchyMode::geometric && refinements < 1)
    fail("refinements", "a geometric study needs at least one refinement");
  if (mesh.empty()) {
    const double n = static_cast<double>(cells_per_side) * std::pow(2.0, refinements);
    if (std::pow(n + 1.0, dim) > 4.0e6)
      throw Error(ErrorCode::size_limit, "config: the finest mesh would exceed 4e6 vertices");
  }
}

std::string ExperimentConfig::to_text() const {
  std::ostringstream o;
  const char* dstate = desired_state == DesiredState::manufactured ? "manufactured" : "constant";
  const char* pc = precond == PreconditionerChoice::none ? "none"
                   : precond == PreconditionerChoice::multilevel ? "multilevel"
                                                                 : "both";
  o << "command=" << to_string(command) << '\n'
    << "dim=" << dim << '\n'
    << "cells_per_side=" << cells_per_side << '\n'
    << "refinements=" << refinements << '\n'
    << "min_refinements=" << min_refinements << '\n'
    << "mesh=" << mesh << '\n'
    << "beta=" << join(beta) << '\n'
    << "kappa=" << kappa << '\n'
    << "kappa_value=" << num(kappa_value) << '\n'
    << "alpha=" << join(alpha) << '\n'
    << "ball_radius=" << num(ball_radius) << '\n'
    << "ball_center=" << join({ball_center[0], ball_center[1], ball_center[2]}) << '\n'
    << "dirichlet=" << dirichlet << '\n'
    << "desired_state=" << dstate << '\n'
    << "desired_value=" << num(desired_value) << '\n'
    << "mode=" << to_string(mode) << '\n'
    << "aggressive=" << (aggressive ? "true" : "false") << '\n'
    << "theta=" << (theta ? num(*theta) : "auto") << '\n'
    << "omega_factor=" << num(omega_factor) << '\n'
    << "coarse_cap=" << coarse_cap << '\n'
    << "max_levels=" << max_levels << '\n'
    << "levels=" << (levels == 0 ? std::string("all") : std::to_string(levels)) << '\n'
    << "min_levels=" << min_levels << '\n'
    << "precond=" << pc << '\n'
    << "forward_tol=" << num(tolerances.forward) << '\n'
    << "mass_tol=" << num(tolerances.mass) << '\n'
    << "coarse_tol=" << num(tolerances.coarse) << '\n'
    << "outer_tol=" << num(tolerances.outer) << '\n'
    << "max_outer_iterations=" << tolerances.max_outer_iterations << '\n'
    << "exact_aj=" << (exact_aj ? "true" : "false") << '\n'
    << "timings=" << (timings ? "true" : "false") << '\n'
    << "output=" << output << '\n';
  return o.str();
}

FaceMask dirichlet_mask(const ExperimentConfig& cfg) {
  return cfg.dirichlet == "all" ? all_faces(cfg.dim) : parse_faces(cfg.dirichlet);
}

std::vector<FeProblem> build_problems(const ExperimentConfig& cfg, int r) {
  std::vector<Mesh> meshes;
  if (cfg.mesh.empty()) {
    meshes.push_back(build_structured_mesh(cfg.dim, cfg.cells_per_side));
  } else {
    meshes.push_back(load_mesh(cfg.mesh));
    if (meshes.back().dim() != cfg.dim)
      throw Error(ErrorCode::invalid_argument, "mesh file dimension differs from config key 'dim'");
  }
  for (int i = 0; i < r; ++i) meshes.push_back(refine_uniform(meshes.back()));
  const FaceMask faces = dirichlet_mask(cfg);
  std::vector<FeProblem> problems;
  problems.reserve(meshes.size());
  for (auto it = meshes.rbegin(); it != meshes.rend(); ++it) problems.emplace_back(std::move(*it), faces);
  return problems;
}

Coefficient make_coefficient(const ExperimentConfig& cfg, double alpha) {
  if (cfg.kappa == "ball") return Coefficient::ball(alpha, cfg.ball_center, cfg.ball_radius);
  return Coefficient::constant(cfg.kappa_value);
}

HierarchyConfig make_hierarchy_config(const ExperimentConfig& cfg, HierarchyMode mode) {
  HierarchyConfig h = HierarchyConfig::defaults(cfg.dim, mode);
  if (cfg.theta) h.theta = *cfg.theta;
  h.smoothing.omega_factor = cfg.omega_factor;
  h.coarse_cap = cfg.coarse_cap;
  h.max_levels = cfg.max_levels;
  h.aggressive = cfg.aggressive;
  return h;
}

AmgOptions make_inner_options(const ExperimentConfig& cfg) {
  AmgOptions o;
  o.theta = cfg.theta ? *cfg.theta : HierarchyConfig::defaults(cfg.dim, HierarchyMode::amg).theta;
  o.smoothing.omega_factor = cfg.omega_factor;
  return o;
}

std::shared_ptr<const Hierarchy> make_hierarchy(const ExperimentConfig& cfg, const std::vector<FeProblem>& problems,
                                                HierarchyMode mode, const Coefficient& kappa) {
  return std::make_shared<const Hierarchy>(
      build_hierarchy(assemble_fine_system(problems.front(), kappa), make_hierarchy_config(cfg, mode), problems));
}

ControlProblem make_control_problem(const ExperimentConfig& cfg, const std::vector<FeProblem>& problems,
                                    std::shared_ptr<const Hierarchy> hierarchy, double beta) {
  const FeProblem& fine = problems.front();
  Vector yd = cfg.desired_state == DesiredState::manufactured
                  ? manufactured_desired_state(fine, beta)
                  : fine.interpolate([v = cfg.desired_value](const Point&) { return v; }, Space::state);
  const int n = hierarchy->size();
  const int levels = cfg.levels == 0 ? n : std::min(cfg.levels, n);
  return ControlProblem(std::move(hierarchy), beta, std::move(yd), cfg.tolerances, levels, make_inner_options(cfg));
}

namespace {

std::vector<int> refinement_range(const ExperimentConfig& cfg) {
  std::vector<int> r;
  for (int i = cfg.min_refinements < 0 ? cfg.refinements : cfg.min_refinements; i <= cfg.refinements; ++i)
    r.push_back(i);
  return r;
}

bool exact_solution_known(const ExperimentConfig& cfg) {
  return cfg.desired_state == DesiredState::manufactured && cfg.kappa == "constant" && cfg.kappa_value == 1.0 &&
         dirichlet_mask(cfg) == all_faces(cfg.dim);
}

std::vector<Preconditioner> preconditioners(const ExperimentConfig& cfg) {
  switch (cfg.precond) {
    case PreconditionerChoice::none: return {Preconditioner::none};
    case PreconditionerChoice::multilevel: return {Preconditioner::multilevel};
    case PreconditionerChoice::both: return {Preconditioner::none, Preconditioner::multilevel};
  }
  return {};
}

SolveOptions solve_options(const ExperimentConfig& cfg) {
  SolveOptions o;
  o.min_levels = cfg.min_levels;
  o.timings = cfg.timings;
  return o;
}

std::string opt_int(const std::optional<SolveReport>& r, int SolveReport::*field) {
  return r ? std::to_string((*r).*field) : "NA";
}

std::string opt_bool(const std::optional<SolveReport>& r, bool SolveReport::*field) {
  return r ? ((*r).*field ? "1" : "0") : "NA";
}

}  // namespace

std::vector<SolveRow> run_solve(const ExperimentConfig& cfg) {
  cfg.validate();
  std::vector<SolveRow> rows;
  const Coefficient kappa = make_coefficient(cfg, cfg.alpha.front());
  for (int r : refinement_range(cfg)) {
    const auto problems = build_problems(cfg, r);
    const auto h = make_hierarchy(cfg, problems, cfg.mode, kappa);
    for (double beta : cfg.beta) {
      for (Preconditioner pc : preconditioners(cfg)) {
        SolveRow row;
        row.refinement = r;
        row.report.n_state = problems.front().num_state();
        row.report.n_control = problems.front().num_control();
        row.report.beta = beta;
        row.report.preconditioner = pc;
        try {
          const ControlProblem p = make_control_problem(cfg, problems, h, beta);
          row.report = solve_control_problem(p, pc, solve_options(cfg));
          if (exact_solution_known(cfg))
            row.report.control_error = control_error_vs_exact(problems.front().mesh(), row.report.control);
          if (!row.report.converged) row.status = sanitize(row.report.message);
        } catch (const std::exception& e) {
          row.status = sanitize(e.what());
        }
        rows.push_back(std::move(row));
      }
    }
  }
  return rows;
}

AjStudy run_aj_study(const ExperimentConfig& cfg) {
  cfg.validate();
  AjStudy study;
  study.refinement = cfg.refinements;
  const auto problems = build_problems(cfg, cfg.refinements);
  const auto h = make_hierarchy(cfg, problems, cfg.mode, make_coefficient(cfg, cfg.alpha.front()));
  if (h->size() < 2) throw Error(ErrorCode::invalid_argument, "aj-study needs a hierarchy with at least two levels");
  const ControlProblem p = make_control_problem(cfg, problems, h, cfg.beta.front());
  const std::string tag = cfg.mode == HierarchyMode::geometric ? "geometric"
                          : cfg.aggressive                     ? "amg-aggressive"
                                                               : "amg-no-aggressive";
  study.report = approximation_study(p, tag, cfg.exact_aj);
  return study;
}

std::vector<CompareRow> run_compare_hierarchies(const ExperimentConfig& cfg) {
  cfg.validate();
  std::vector<CompareRow> rows;
  const Coefficient kappa = make_coefficient(cfg, cfg.alpha.front());
  for (int r : refinement_range(cfg)) {
    const auto problems = build_problems(cfg, r);
    for (double beta : cfg.beta) {
      CompareRow row;
      row.refinement = r;
      row.n_state = problems.front().num_state();
      row.n_control = problems.front().num_control();
      row.beta = beta;
      try {
        for (HierarchyMode mode : {HierarchyMode::geometric, HierarchyMode::amg}) {
          const auto h = make_hierarchy(cfg, problems, mode, kappa);
          const ControlProblem p = make_control_problem(cfg, problems, h, beta);
          SolveReport rep = solve_control_problem(p, Preconditioner::multilevel, solve_options(cfg));
          if (!rep.converged) row.status = sanitize(to_string(mode) + ": " + rep.message);
          (mode == HierarchyMode::geometric ? row.geometric : row.amg) = std::move(rep);
        }
      } catch (const std::exception& e) {
        row.status = sanitize(e.what());
      }
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

std::vector<KappaRow> run_varying_kappa(const ExperimentConfig& cfg) {
  cfg.validate();
  std::vector<KappaRow> rows;
  const auto problems = build_problems(cfg, cfg.refinements);
  for (double alpha : cfg.alpha) {
    std::shared_ptr<const Hierarchy> h;
    std::string setup_error;
    try {
      h = make_hierarchy(cfg, problems, cfg.mode, make_coefficient(cfg, alpha));
    } catch (const std::exception& e) {
      setup_error = sanitize(e.what());
    }
    for (double beta : cfg.beta) {
      KappaRow row;
      row.alpha = alpha;
      row.beta = beta;
      row.n_state = problems.front().num_state();
      row.n_control = problems.front().num_control();
      if (!h) {
        row.status = setup_error;
        rows.push_back(std::move(row));
        continue;
      }
      try {
        const ControlProblem p = make_control_problem(cfg, problems, h, beta);
        for (Preconditioner pc : preconditioners(cfg)) {
          SolveReport rep = solve_control_problem(p, pc, solve_options(cfg));
          if (!rep.converged) row.status = sanitize(to_string(pc) + ": " + rep.message);
          (pc == Preconditioner::multilevel ? row.multilevel : row.none) = std::move(rep);
        }
      } catch (const std::exception& e) {
        row.status = sanitize(e.what());
      }
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

void write_solve_csv(std::ostream& out, const std::vector<SolveRow>& rows) {
  out << "refinement,n_state,n_control,beta,levels,preconditioner,iterations,relative_residual,verified_residual,"
         "objective,control_error,converged,breakdown,retries,wall_time,status\n";
  for (const SolveRow& row : rows) {
    const SolveReport& r = row.report;
    out << row.refinement << ',' << r.n_state << ',' << r.n_control << ',' << format_real(r.beta) << ','
        << r.levels_used << ',' << to_string(r.preconditioner) << ',' << r.iterations << ','
        << format_real(r.relative_residual) << ',' << format_real(r.verified_residual) << ','
        << format_real(r.objective) << ',' << (r.control_error ? format_real(*r.control_error) : "NA") << ','
        << (r.converged ? 1 : 0) << ',' << (r.breakdown ? 1 : 0) << ',' << r.retries << ','
        << (r.wall_seconds ? format_real(*r.wall_seconds) : "NA") << ',' << row.status << '\n';
  }
}

void write_compare_csv(std::ostream& out, const std::vector<CompareRow>& rows) {
  out << "refinement,n_state,n_control,beta,geometric_levels,geometric_iterations,geometric_converged,"
         "amg_levels,amg_iterations,amg_converged,status\n";
  for (const CompareRow& row : rows) {
    out << row.refinement << ',' << row.n_state << ',' << row.n_control << ',' << format_real(row.beta) << ','
        << opt_int(row.geometric, &SolveReport::levels_used) << ',' << opt_int(row.geometric, &SolveReport::iterations)
        << ',' << opt_bool(row.geometric, &SolveReport::converged) << ','
        << opt_int(row.amg, &SolveReport::levels_used) << ',' << opt_int(row.amg, &SolveReport::iterations) << ','
        << opt_bool(row.amg, &SolveReport::converged) << ',' << row.status << '\n';
  }
}

void write_kappa_csv(std::ostream& out, const std::vector<KappaRow>& rows) {
  out << "alpha,beta,n_state,n_control,levels_requested,levels_used,retries,breakdown,multilevel_iterations,"
         "multilevel_converged,none_iterations,none_converged,status\n";
  for (const KappaRow& row : rows) {
    out << format_real(row.alpha) << ',' << format_real(row.beta) << ',' << row.n_state << ',' << row.n_control << ','
        << opt_int(row.multilevel, &SolveReport::levels_requested) << ','
        << opt_int(row.multilevel, &SolveReport::levels_used) << ','
        << opt_int(row.multilevel, &SolveReport::retries) << ',' << opt_bool(row.multilevel, &SolveReport::breakdown)
        << ',' << opt_int(row.multilevel, &SolveReport::iterations) << ','
        << opt_bool(row.multilevel, &SolveReport::converged) << ',' << opt_int(row.none, &SolveReport::iterations)
        << ',' << opt_bool(row.none, &SolveReport::converged) << ',' << row.status << '\n';
  }
}

int run_experiment(const ExperimentConfig& cfg, std::ostream& out, std::ostream& diagnostics) {
  cfg.validate();
  int failures = 0;
  auto note = [&](const std::string& where, const std::string& status) {
    if (status == "ok") return;
    ++failures;
    diagnostics << where << ": " << status << '\n';
  };
  switch (cfg.command) {
    case Command::solve: {
      const auto rows = run_solve(cfg);
      write_solve_csv(out, rows);
      for (const auto& r : rows) {
        note("refinement " + std::to_string(r.refinement) + " beta " + format_real(r.report.beta), r.status);
        if (r.status == "ok" && r.report.retries > 0)
          diagnostics << "refinement " << r.refinement << " beta " << format_real(r.report.beta) << ": "
                      << r.report.message << "solved with " << r.report.levels_used << " levels\n";
      }
      break;
    }
    case Command::aj_study:
      write_approx_csv(out, run_aj_study(cfg).report);
      break;
    case Command::compare_hierarchies: {
      const auto rows = run_compare_hierarchies(cfg);
      write_compare_csv(out, rows);
      for (const auto& r : rows) note("refinement " + std::to_string(r.refinement), r.status);
      break;
    }
    case Command::varying_kappa: {
      const auto rows = run_varying_kappa(cfg);
      write_kappa_csv(out, rows);
      for (const auto& r : rows) {
        note("alpha " + format_real(r.alpha), r.status);
        if (r.status == "ok" && r.multilevel && r.multilevel->retries > 0)
          diagnostics << "alpha " << format_real(r.alpha) << ": " << r.multilevel->message << "solved with "
                      << r.multilevel->levels_used << " levels\n";
      }
      break;
    }
  }
  return failures == 0 ? 0 : 2;
}

}  // namespace amgopt
