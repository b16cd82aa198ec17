#ifndef AMGOPT_H
#define AMGOPT_H

#include <stddef.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(_WIN32)
#define AMGOPT_API __declspec(dllexport)
#else
#define AMGOPT_API __attribute__((visibility("default")))
#endif

typedef enum amgopt_status {
  AMGOPT_OK = 0,
  AMGOPT_INVALID_ARGUMENT = 1,
  AMGOPT_DIMENSION_MISMATCH = 2,
  AMGOPT_PARSE_ERROR = 3,
  AMGOPT_IO_ERROR = 4,
  AMGOPT_SOLVER_FAILURE = 5,
  AMGOPT_SIZE_LIMIT = 6,
  AMGOPT_NOT_SPD = 7,
  /* The experiment ran but at least one row failed. */
  AMGOPT_ROW_FAILURES = 8,
  AMGOPT_INTERNAL = 99
} amgopt_status;

typedef struct amgopt_mesh amgopt_mesh;
typedef struct amgopt_config amgopt_config;

/* Message of the last failed call on this thread; empty after success. */
AMGOPT_API const char* amgopt_last_error(void);
AMGOPT_API const char* amgopt_version(void);

/* Meshes */
AMGOPT_API amgopt_status amgopt_mesh_build(int dim, int cells_per_side, amgopt_mesh** out);
AMGOPT_API amgopt_status amgopt_mesh_load(const char* path, amgopt_mesh** out);
AMGOPT_API amgopt_status amgopt_mesh_save(const amgopt_mesh* mesh, const char* path);
AMGOPT_API amgopt_status amgopt_mesh_refine(const amgopt_mesh* mesh, amgopt_mesh** out);
AMGOPT_API amgopt_status amgopt_mesh_info(const amgopt_mesh* mesh, int* dim, long* vertices, long* elements,
                                          long* boundary_vertices);
AMGOPT_API void amgopt_mesh_destroy(amgopt_mesh* mesh);

/* Experiment configuration: "solve", "aj-study", "compare-hierarchies" or "varying-kappa". */
AMGOPT_API amgopt_status amgopt_config_create(const char* command, amgopt_config** out);
AMGOPT_API void amgopt_config_destroy(amgopt_config* config);
AMGOPT_API amgopt_status amgopt_config_set(amgopt_config* config, const char* key, const char* value);
/* Applies key=value lines from a file. */
AMGOPT_API amgopt_status amgopt_config_load(amgopt_config* config, const char* path);
AMGOPT_API amgopt_status amgopt_config_validate(const amgopt_config* config);
/* Writes all settings as key=value lines. `required` receives the size including the terminator;
 * AMGOPT_SIZE_LIMIT when the buffer is smaller. */
AMGOPT_API amgopt_status amgopt_config_dump(const amgopt_config* config, char* buffer, size_t size, size_t* required);

/* Runs the experiment. The CSV goes to the config's output key ("-" is stdout),
 * per-row diagnostics go to stderr. */
AMGOPT_API amgopt_status amgopt_run(const amgopt_config* config);

#ifdef __cplusplus
}
#endif

#endif
