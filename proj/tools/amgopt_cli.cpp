#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "amgopt/amgopt.h"

namespace {

const std::map<std::string, std::string> descriptions{
    {"dim", "spatial dimension (2 or 3)"},
    {"cells_per_side", "cells per side of the base structured grid"},
    {"refinements", "uniform refinements of the base mesh"},
    {"min_refinements", "first refinement of a sweep (-1: only the finest)"},
    {"mesh", "base mesh file replacing the structured grid"},
    {"beta", "regularization weights, comma separated"},
    {"kappa", "coefficient: constant or ball"},
    {"kappa_value", "value of the constant coefficient"},
    {"alpha", "coefficient inside the ball, comma separated"},
    {"ball_radius", "radius of the ball"},
    {"ball_center", "center of the ball as x,y,z"},
    {"dirichlet", "Dirichlet faces, e.g. all or x0,z1"},
    {"desired_state", "manufactured or constant"},
    {"desired_value", "value of a constant desired state"},
    {"mode", "hierarchy: amg or geometric"},
    {"aggressive", "aggressive first AMG coarsening"},
    {"theta", "strength threshold (auto: dimension default)"},
    {"omega_factor", "prolongator smoothing factor"},
    {"coarse_cap", "stop AMG coarsening at this many controls"},
    {"max_levels", "maximum hierarchy levels"},
    {"levels", "levels used by the preconditioner (all or a count)"},
    {"min_levels", "fewest levels tried after a breakdown"},
    {"precond", "none, multilevel or both"},
    {"forward_tol", "state solve tolerance"},
    {"mass_tol", "mass solve tolerance"},
    {"coarse_tol", "coarsest Hessian solve tolerance"},
    {"outer_tol", "outer CG tolerance"},
    {"max_outer_iterations", "outer CG iteration limit"},
    {"exact_aj", "also compute a_j densely where feasible"},
    {"timings", "report wall time instead of NA"},
    {"output", "CSV destination (- for stdout)"},
};

std::string flag_name(std::string key) {
  for (char& c : key)
    if (c == '_') c = '-';
  return "--" + key;
}

std::vector<std::pair<std::string, std::string>> default_settings(const std::string& command) {
  amgopt_config* cfg = nullptr;
  if (amgopt_config_create(command.c_str(), &cfg) != AMGOPT_OK) return {};
  std::size_t needed = 0;
  amgopt_config_dump(cfg, nullptr, 0, &needed);
  std::string text(needed, '\0');
  amgopt_config_dump(cfg, text.data(), text.size(), nullptr);
  amgopt_config_destroy(cfg);
  text.resize(needed > 0 ? needed - 1 : 0);

  std::vector<std::pair<std::string, std::string>> out;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    const auto eq = line.find('=');
    if (eq == std::string::npos || line.compare(0, eq, "command") == 0) continue;
    out.emplace_back(line.substr(0, eq), line.substr(eq + 1));
  }
  return out;
}

struct Subcommand {
  std::string name;
  CLI::App* app = nullptr;
  std::string config_file;
  bool print_config = false;
  std::map<std::string, std::string> values;
  std::map<std::string, bool> flags;
  std::map<std::string, CLI::Option*> options;
};

int report(amgopt_status s) {
  std::cerr << "amgopt: " << amgopt_last_error() << '\n';
  return s == AMGOPT_ROW_FAILURES ? 2 : 1;
}

int run(Subcommand& sub) {
  amgopt_config* raw = nullptr;
  if (amgopt_status s = amgopt_config_create(sub.name.c_str(), &raw); s != AMGOPT_OK) return report(s);
  std::unique_ptr<amgopt_config, void (*)(amgopt_config*)> cfg(raw, amgopt_config_destroy);
  if (!sub.config_file.empty())
    if (amgopt_status s = amgopt_config_load(cfg.get(), sub.config_file.c_str()); s != AMGOPT_OK) return report(s);
  for (const auto& [key, opt] : sub.options) {
    if (opt->count() == 0) continue;
    const auto f = sub.flags.find(key);
    const std::string value = f != sub.flags.end() ? (f->second ? "true" : "false") : sub.values[key];
    if (amgopt_status s = amgopt_config_set(cfg.get(), key.c_str(), value.c_str()); s != AMGOPT_OK) return report(s);
  }
  if (sub.print_config) {
    std::size_t needed = 0;
    amgopt_config_dump(cfg.get(), nullptr, 0, &needed);
    std::string text(needed, '\0');
    amgopt_config_dump(cfg.get(), text.data(), text.size(), nullptr);
    std::cout << text.c_str();
    return 0;
  }
  if (amgopt_status s = amgopt_run(cfg.get()); s != AMGOPT_OK) return report(s);
  return 0;
}

int make_mesh(int dim, int cells, int refinements, const std::string& path) {
  amgopt_mesh* mesh = nullptr;
  if (amgopt_status s = amgopt_mesh_build(dim, cells, &mesh); s != AMGOPT_OK) return report(s);
  for (int i = 0; i < refinements; ++i) {
    amgopt_mesh* finer = nullptr;
    const amgopt_status s = amgopt_mesh_refine(mesh, &finer);
    amgopt_mesh_destroy(mesh);
    if (s != AMGOPT_OK) return report(s);
    mesh = finer;
  }
  int d = 0;
  long nv = 0, ne = 0, nb = 0;
  amgopt_mesh_info(mesh, &d, &nv, &ne, &nb);
  const amgopt_status s = amgopt_mesh_save(mesh, path.c_str());
  amgopt_mesh_destroy(mesh);
  if (s != AMGOPT_OK) return report(s);
  std::cerr << "wrote " << path << ": dim " << d << ", " << nv << " vertices, " << ne << " elements, " << nb
            << " boundary vertices\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multilevel preconditioning of reduced Hessians for elliptic optimal control"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(amgopt_version()));

  const std::vector<std::pair<std::string, std::string>> commands{
      {"solve", "solve the control problem and report iterations and errors"},
      {"aj-study", "estimate the two-grid approximation coefficients a_j"},
      {"compare-hierarchies", "two-grid iterations for geometric and AMG hierarchies"},
      {"varying-kappa", "iterations for a ball-shaped coefficient jump"},
  };
  std::vector<std::unique_ptr<Subcommand>> subs;
  for (const auto& [name, help] : commands) {
    auto sub = std::make_unique<Subcommand>();
    sub->name = name;
    sub->app = app.add_subcommand(name, help);
    sub->app->add_option("--config", sub->config_file, "key=value file; flags override its keys")
        ->check(CLI::ExistingFile);
    sub->app->add_flag("--print-config", sub->print_config, "print the effective settings and exit");
    for (const auto& [key, def] : default_settings(name)) {
      const auto d = descriptions.find(key);
      const std::string desc = d != descriptions.end() ? d->second : key;
      CLI::Option* opt = nullptr;
      if (def == "true" || def == "false") {
        sub->flags[key] = def == "true";
        opt = sub->app->add_flag(flag_name(key) + ",!--no-" + flag_name(key).substr(2), sub->flags[key], desc);
      } else {
        opt = sub->app->add_option(flag_name(key), sub->values[key], desc);
      }
      opt->default_str(def);
      sub->options[key] = opt;
    }
    subs.push_back(std::move(sub));
  }

  int mesh_dim = 2, mesh_cells = 1, mesh_refinements = 0;
  std::string mesh_out;
  CLI::App* mesh_cmd = app.add_subcommand("mesh", "write a structured mesh in the text mesh format");
  mesh_cmd->add_option("--dim", mesh_dim, "spatial dimension (2 or 3)")->capture_default_str();
  mesh_cmd->add_option("--cells-per-side", mesh_cells, "cells per side")->capture_default_str();
  mesh_cmd->add_option("--refinements", mesh_refinements, "uniform refinements")->capture_default_str();
  mesh_cmd->add_option("--output", mesh_out, "mesh file to write")->required();

  CLI11_PARSE(app, argc, argv);

  if (mesh_cmd->parsed()) return make_mesh(mesh_dim, mesh_cells, mesh_refinements, mesh_out);
  for (auto& sub : subs)
    if (sub->app->parsed()) return run(*sub);
  return 1;
}
