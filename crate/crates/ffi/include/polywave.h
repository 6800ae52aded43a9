#ifndef POLYWAVE_H
#define POLYWAVE_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum PwStatus {
  PW_STATUS_OK = 0,
  PW_STATUS_NULL_POINTER = 1,
  /**
   * Invalid argument or scenario; matches the CLI's exit code 2.
   */
  PW_STATUS_CONFIG = 2,
  /**
   * Assembly, factorization or time-step failure; matches exit code 3.
   */
  PW_STATUS_SOLVER = 3,
  PW_STATUS_IO = 4,
  PW_STATUS_PANIC = 5,
} PwStatus;

/**
 * A polygonal mesh.
 */
typedef struct PwMesh PwMesh;

/**
 * A discretized scenario with its time stepper and current state.
 */
typedef struct PwSolver PwSolver;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copies the last error message of the calling thread into `buf` (always
 * NUL-terminated when `len > 0`) and returns the full message length in bytes.
 *
 * # Safety
 * `buf` must be null or point to `len` writable bytes.
 */
size_t pw_last_error_message(char *buf, size_t len);

/**
 * Generates a unit-square mesh of family `tria`, `quad`, `hexa` or `voro`.
 *
 * # Safety
 * `family` must be a NUL-terminated string; `out` must be valid for writes.
 */
enum PwStatus pw_mesh_generate(const char *family, size_t n, uint64_t seed, struct PwMesh **out);

/**
 * Builds a hole mesh, `config` being `five` or `eight`.
 *
 * # Safety
 * As [`pw_mesh_generate`].
 */
enum PwStatus pw_mesh_holes(const char *config, size_t n, uint32_t refine, struct PwMesh **out);

/**
 * Cell, edge and vertex counts. Any of the outputs may be null.
 *
 * # Safety
 * `mesh` must be a live handle; non-null outputs must be valid for writes.
 */
enum PwStatus pw_mesh_counts(const struct PwMesh *mesh,
                             size_t *cells,
                             size_t *edges,
                             size_t *vertices);

/**
 * Smallest star-shapedness ratio over the cells.
 *
 * # Safety
 * `mesh` must be a live handle; `out` must be valid for writes.
 */
enum PwStatus pw_mesh_min_quality(const struct PwMesh *mesh, double *out);

/**
 * # Safety
 * `mesh` must be null or a handle not freed before.
 */
void pw_mesh_free(struct PwMesh *mesh);

/**
 * Builds a solver from a scenario in JSON and sets the initial state.
 *
 * # Safety
 * `config_json` must be a NUL-terminated string; `out` must be valid for writes.
 */
enum PwStatus pw_solver_new(const char *config_json, struct PwSolver **out);

/**
 * Advances `steps` time steps. On failure the state is left at the last
 * completed step.
 *
 * # Safety
 * `solver` must be a live handle.
 */
enum PwStatus pw_solver_step(struct PwSolver *solver, size_t steps);

/**
 * Current time and discrete energy `u^T M u + p^T N p`. Either output may be null.
 *
 * # Safety
 * `solver` must be a live handle; non-null outputs must be valid for writes.
 */
enum PwStatus pw_solver_state(const struct PwSolver *solver, double *time, double *energy);

/**
 * Velocity and pressure unknown counts. Either output may be null.
 *
 * # Safety
 * As [`pw_solver_state`].
 */
enum PwStatus pw_solver_dofs(const struct PwSolver *solver, size_t *n_u, size_t *n_p);

/**
 * Discrete pressure at `(x, y)`; `PW_STATUS_CONFIG` outside the mesh.
 *
 * # Safety
 * `solver` must be a live handle; `out` must be valid for writes.
 */
enum PwStatus pw_solver_pressure_at(const struct PwSolver *solver, double x, double y, double *out);

/**
 * # Safety
 * `solver` must be null or a handle not freed before.
 */
void pw_solver_free(struct PwSolver *solver);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* POLYWAVE_H */
