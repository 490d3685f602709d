#ifndef VLASOV_WAVE_H
#define VLASOV_WAVE_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result codes.
 */
typedef enum VwStatus {
  VW_STATUS_OK = 0,
  VW_STATUS_NULL_POINTER = 1,
  VW_STATUS_INVALID_UTF8 = 2,
  VW_STATUS_INVALID_CONFIG = 3,
  VW_STATUS_INVALID_ARGUMENT = 4,
  VW_STATUS_BUFFER_TOO_SMALL = 5,
  /**
   * The run already reached its final step.
   */
  VW_STATUS_FINISHED = 6,
  /**
   * Light-cone contact or another failure while stepping.
   */
  VW_STATUS_RUNTIME = 7,
  VW_STATUS_PANIC = 8,
} VwStatus;

/**
 * Which grid function [`vw_simulation_copy_field`] returns.
 */
typedef enum VwField {
  VW_FIELD_A = 0,
  VW_FIELD_DT_A = 1,
  VW_FIELD_DX_A = 2,
  VW_FIELD_B_PLUS = 3,
  VW_FIELD_B_MINUS = 4,
  VW_FIELD_RHO = 5,
  VW_FIELD_CURRENT = 6,
} VwField;

/**
 * Opaque simulation handle.
 */
typedef struct VwSimulation VwSimulation;

/**
 * Diagnostics of the current time level.
 */
typedef struct VwDiagnostics {
  size_t step;
  double t;
  double mass;
  double kinetic;
  double field;
  double total;
  double p_of_t;
  double sup_dta;
  double sup_dxdta;
  double sup_j;
  double f_max;
  double undershoot;
} VwDiagnostics;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copy the last error message, NUL-terminated and truncated to `len` bytes.
 * Returns the full message length without the terminator.
 *
 * # Safety
 * `buf` must be null or point to `len` writable bytes.
 */
size_t vw_last_error_message(char *buf, size_t len);

/**
 * Library version as a static NUL-terminated string.
 */
const char *vw_version(void);

/**
 * Relativistic velocity `v / √(1 + v²)`.
 */
double vw_v_hat(double v);

/**
 * Build a simulation from configuration text. The grid and initial state
 * are set up; no step is taken.
 *
 * # Safety
 * `config` must be a NUL-terminated string and `out` a writable pointer.
 */
enum VwStatus vw_simulation_new(const char *config, struct VwSimulation **out);

/**
 * Release a handle. Null is ignored.
 *
 * # Safety
 * `sim` must come from [`vw_simulation_new`] and not be used afterwards.
 */
void vw_simulation_free(struct VwSimulation *sim);

/**
 * Advance one step.
 *
 * # Safety
 * `sim` must be a live handle.
 */
enum VwStatus vw_simulation_step(struct VwSimulation *sim);

/**
 * Advance to the final step.
 *
 * # Safety
 * `sim` must be a live handle.
 */
enum VwStatus vw_simulation_run(struct VwSimulation *sim);

/**
 * Node counts `(nx + 1, nv + 1)`, the current step and the total step count.
 *
 * # Safety
 * `sim` must be a live handle; each output pointer may be null.
 */
enum VwStatus vw_simulation_shape(const struct VwSimulation *sim,
                                  size_t *nx_nodes,
                                  size_t *nv_nodes,
                                  size_t *step,
                                  size_t *n_steps);

/**
 * Diagnostics of the current level.
 *
 * # Safety
 * `sim` must be a live handle and `out` writable.
 */
enum VwStatus vw_simulation_diagnostics(const struct VwSimulation *sim, struct VwDiagnostics *out);

/**
 * Copy `f` at the current level, x-major: `f[i * nv_nodes + j]`.
 *
 * # Safety
 * `sim` must be a live handle and `buf` point to `len` writable doubles.
 */
enum VwStatus vw_simulation_copy_distribution(const struct VwSimulation *sim,
                                              double *buf,
                                              size_t len);

/**
 * Copy one grid function of x (length `nx_nodes`).
 *
 * # Safety
 * `sim` must be a live handle and `buf` point to `len` writable doubles.
 */
enum VwStatus vw_simulation_copy_field(const struct VwSimulation *sim,
                                       enum VwField which,
                                       double *buf,
                                       size_t len);

/**
 * Both sides of the division identity at speed `a` for a named test
 * function (`product_bump`, `product_bump_squared`, `offset`, `odd_in_x`,
 * `away_from_rays`).
 *
 * # Safety
 * `preset` must be a NUL-terminated string; `lhs` and `rhs` writable.
 */
enum VwStatus vw_division_pair(double a, const char *preset, double *lhs, double *rhs);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* VLASOV_WAVE_H */
