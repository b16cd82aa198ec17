#pragma once

#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "amgopt/analysis.hpp"
#include "amgopt/fem.hpp"
#include "amgopt/hierarchy.hpp"
#include "amgopt/optctl.hpp"

namespace amgopt {

enum class Command { solve, aj_study, compare_hierarchies, varying_kappa };

std::string to_string(Command c);
Command parse_command(const std::string& s);

enum class DesiredState { manufactured, constant };
enum class PreconditionerChoice { none, multilevel, both };

/// Settings for one experiment. Every field has a key of the same name in
/// the key=value config text (see `set`); list values are comma separated.
struct ExperimentConfig {
  Command command = Command::solve;
  int dim = 3;
  int cells_per_side = 2;
  int refinements = 3;
  /// Sweep refinement levels min_refinements..refinements; -1 runs refinements only.
  int min_refinements = -1;
  std::string mesh;  ///< base mesh file; replaces the structured grid when set
  std::vector<double> beta{1e-2};
  std::string kappa = "constant";  ///< constant | ball
  double kappa_value = 1.0;
  std::vector<double> alpha{1.0};
  double ball_radius = 0.25;
  Point ball_center{0.5, 0.5, 0.5};
  std::string dirichlet = "all";
  DesiredState desired_state = DesiredState::manufactured;
  double desired_value = 1.0;
  HierarchyMode mode = HierarchyMode::amg;
  bool aggressive = false;
  std::optional<double> theta;  ///< unset: dimension default
  double omega_factor = 4.0 / 3.0;
  Index coarse_cap = 2000;
  int max_levels = 10;
  int levels = 0;  ///< preconditioner levels; 0 uses all
  int min_levels = 2;
  PreconditionerChoice precond = PreconditionerChoice::multilevel;
  Tolerances tolerances{};
  bool exact_aj = true;
  bool timings = false;
  std::string output = "-";

  /// Defaults for a subcommand.
  static ExperimentConfig defaults(Command c);

  /// Sets one key from text; unknown keys and bad values throw naming the key.
  void set(const std::string& key, const std::string& value);
  /// Reads key=value lines ('#' comments, blank lines allowed).
  void load_text(std::istream& in);
  /// Cross-field checks run before any allocation.
  void validate() const;
  /// All keys with their current values, one key=value per line.
  std::string to_text() const;

  static const std::vector<std::string>& keys();
};

/// Dirichlet faces of the config; "all" means every face of the box in cfg.dim.
FaceMask dirichlet_mask(const ExperimentConfig& cfg);
/// Nested problems for refinement level r, finest first.
std::vector<FeProblem> build_problems(const ExperimentConfig& cfg, int r);
Coefficient make_coefficient(const ExperimentConfig& cfg, double alpha);
HierarchyConfig make_hierarchy_config(const ExperimentConfig& cfg, HierarchyMode mode);
AmgOptions make_inner_options(const ExperimentConfig& cfg);
std::shared_ptr<const Hierarchy> make_hierarchy(const ExperimentConfig& cfg, const std::vector<FeProblem>& problems,
                                                HierarchyMode mode, const Coefficient& kappa);
/// Control problem on the finest of `problems` with the configured desired state.
ControlProblem make_control_problem(const ExperimentConfig& cfg, const std::vector<FeProblem>& problems,
                                    std::shared_ptr<const Hierarchy> hierarchy, double beta);

struct SolveRow {
  int refinement = 0;
  SolveReport report;
  std::string status = "ok";
};

struct CompareRow {
  int refinement = 0;
  Index n_state = 0;
  Index n_control = 0;
  double beta = 0.0;
  std::optional<SolveReport> geometric;
  std::optional<SolveReport> amg;
  std::string status = "ok";
};

struct KappaRow {
  double alpha = 0.0;
  double beta = 0.0;
  Index n_state = 0;
  Index n_control = 0;
  std::optional<SolveReport> multilevel;
  std::optional<SolveReport> none;
  std::string status = "ok";
};

struct AjStudy {
  int refinement = 0;
  ApproxReport report;
};

std::vector<SolveRow> run_solve(const ExperimentConfig& cfg);
AjStudy run_aj_study(const ExperimentConfig& cfg);
std::vector<CompareRow> run_compare_hierarchies(const ExperimentConfig& cfg);
std::vector<KappaRow> run_varying_kappa(const ExperimentConfig& cfg);

void write_solve_csv(std::ostream& out, const std::vector<SolveRow>& rows);
void write_compare_csv(std::ostream& out, const std::vector<CompareRow>& rows);
void write_kappa_csv(std::ostream& out, const std::vector<KappaRow>& rows);

/// Runs the configured subcommand and writes its CSV to `out`. Failed rows are
/// reported on `diagnostics`; the return value is 0 when every row succeeded.
int run_experiment(const ExperimentConfig& cfg, std::ostream& out, std::ostream& diagnostics);

}  // namespace amgopt
