#include "amgopt/amgopt.h"

#include <cstring>
#include <fstream>
#include <iostream>
#include <new>
#include <sstream>

#include "amgopt/error.hpp"
#include "amgopt/experiment.hpp"
#include "amgopt/mesh.hpp"

struct amgopt_mesh {
  amgopt::Mesh mesh;
};

struct amgopt_config {
  amgopt::ExperimentConfig config;
};

namespace {

thread_local std::string last_error;

amgopt_status fail(amgopt_status s, const char* what) {
  last_error = what;
  return s;
}

template <typename F>
amgopt_status guarded(F&& f) {
  try {
    last_error.clear();
    return f();
  } catch (const amgopt::Error& e) {
    return fail(static_cast<amgopt_status>(static_cast<int>(e.code())), e.what());
  } catch (const std::bad_alloc&) {
    return fail(AMGOPT_SIZE_LIMIT, "out of memory");
  } catch (const std::exception& e) {
    return fail(AMGOPT_INTERNAL, e.what());
  } catch (...) {
    return fail(AMGOPT_INTERNAL, "unknown error");
  }
}

amgopt_status null_argument(const char* name) {
  last_error = std::string("null argument '") + name + "'";
  return AMGOPT_INVALID_ARGUMENT;
}

}  // namespace

extern "C" {

const char* amgopt_last_error(void) { return last_error.c_str(); }

const char* amgopt_version(void) { return "1.0.0"; }

amgopt_status amgopt_mesh_build(int dim, int cells_per_side, amgopt_mesh** out) {
  if (!out) return null_argument("out");
  return guarded([&] {
    *out = new amgopt_mesh{amgopt::build_structured_mesh(dim, cells_per_side)};
    return AMGOPT_OK;
  });
}

amgopt_status amgopt_mesh_load(const char* path, amgopt_mesh** out) {
  if (!path) return null_argument("path");
  if (!out) return null_argument("out");
  return guarded([&] {
    *out = new amgopt_mesh{amgopt::load_mesh(path)};
    return AMGOPT_OK;
  });
}

amgopt_status amgopt_mesh_save(const amgopt_mesh* mesh, const char* path) {
  if (!mesh) return null_argument("mesh");
  if (!path) return null_argument("path");
  return guarded([&] {
    amgopt::save_mesh(mesh->mesh, path);
    return AMGOPT_OK;
  });
}

amgopt_status amgopt_mesh_refine(const amgopt_mesh* mesh, amgopt_mesh** out) {
  if (!mesh) return null_argument("mesh");
  if (!out) return null_argument("out");
  return guarded([&] {
    *out = new amgopt_mesh{amgopt::refine_uniform(mesh->mesh)};
    return AMGOPT_OK;
  });
}

amgopt_status amgopt_mesh_info(const amgopt_mesh* mesh, int* dim, long* vertices, long* elements,
                               long* boundary_vertices) {
  if (!mesh) return null_argument("mesh");
  return guarded([&] {
    if (dim) *dim = mesh->mesh.dim();
    if (vertices) *vertices = mesh->mesh.num_vertices();
    if (elements) *elements = mesh->mesh.num_elements();
    if (boundary_vertices) *boundary_vertices = static_cast<long>(mesh->mesh.boundary_vertices().size());
    return AMGOPT_OK;
  });
}

void amgopt_mesh_destroy(amgopt_mesh* mesh) { delete mesh; }

amgopt_status amgopt_config_create(const char* command, amgopt_config** out) {
  if (!command) return null_argument("command");
  if (!out) return null_argument("out");
  return guarded([&] {
    *out = new amgopt_config{amgopt::ExperimentConfig::defaults(amgopt::parse_command(command))};
    return AMGOPT_OK;
  });
}

void amgopt_config_destroy(amgopt_config* config) { delete config; }

amgopt_status amgopt_config_set(amgopt_config* config, const char* key, const char* value) {
  if (!config) return null_argument("config");
  if (!key) return null_argument("key");
  if (!value) return null_argument("value");
  return guarded([&] {
    amgopt::ExperimentConfig copy = config->config;
    copy.set(key, value);
    config->config = std::move(copy);
    return AMGOPT_OK;
  });
}

amgopt_status amgopt_config_load(amgopt_config* config, const char* path) {
  if (!config) return null_argument("config");
  if (!path) return null_argument("path");
  return guarded([&] {
    std::ifstream in(path);
    if (!in) throw amgopt::Error(amgopt::ErrorCode::io_error, std::string("cannot open config file '") + path + "'");
    amgopt::ExperimentConfig copy = config->config;
    copy.load_text(in);
    config->config = std::move(copy);
    return AMGOPT_OK;
  });
}

amgopt_status amgopt_config_validate(const amgopt_config* config) {
  if (!config) return null_argument("config");
  return guarded([&] {
    config->config.validate();
    return AMGOPT_OK;
  });
}

amgopt_status amgopt_config_dump(const amgopt_config* config, char* buffer, size_t size, size_t* required) {
  if (!config) return null_argument("config");
  return guarded([&] {
    const std::string text = config->config.to_text();
    if (required) *required = text.size() + 1;
    if (buffer && size > 0) {
      const std::size_t n = std::min(size - 1, text.size());
      std::memcpy(buffer, text.data(), n);
      buffer[n] = '\0';
      if (n < text.size()) return fail(AMGOPT_SIZE_LIMIT, "buffer too small");
    }
    return AMGOPT_OK;
  });
}

amgopt_status amgopt_run(const amgopt_config* config) {
  if (!config) return null_argument("config");
  return guarded([&] {
    const amgopt::ExperimentConfig& cfg = config->config;
    cfg.validate();
    std::ostringstream csv;
    const int rc = amgopt::run_experiment(cfg, csv, std::cerr);
    if (cfg.output == "-") {
      std::cout << csv.str() << std::flush;
    } else {
      std::ofstream out(cfg.output);
      if (!out) throw amgopt::Error(amgopt::ErrorCode::io_error, "cannot write '" + cfg.output + "'");
      out << csv.str();
      if (!out) throw amgopt::Error(amgopt::ErrorCode::io_error, "write to '" + cfg.output + "' failed");
    }
    if (rc != 0) return fail(AMGOPT_ROW_FAILURES, "one or more experiment rows failed");
    return AMGOPT_OK;
  });
}

}  // extern "C"
