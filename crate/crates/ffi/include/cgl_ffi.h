#ifndef CGL_FFI_H
#define CGL_FFI_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Number of values in one energy record.
 */
#define CGL_RECORD_FIELDS 8

typedef enum CglStatus {
  CGL_STATUS_OK = 0,
  CGL_STATUS_NULL_POINTER = 1,
  CGL_STATUS_INVALID_ARGUMENT = 2,
  CGL_STATUS_INVALID_GRID = 3,
  CGL_STATUS_GRID_MISMATCH = 4,
  CGL_STATUS_INVALID_FIELD = 5,
  CGL_STATUS_INVALID_PARAMS = 6,
  CGL_STATUS_NO_CONVERGENCE = 7,
  CGL_STATUS_CONFIG = 8,
  CGL_STATUS_IO = 9,
  CGL_STATUS_PANIC = 10,
} CglStatus;

typedef struct CglConfig CglConfig;

typedef struct CglField CglField;

typedef struct CglGrid CglGrid;

typedef struct CglRunResult CglRunResult;

/**
 * Equation coefficients, mirroring `cgl_core::convex::Params`.
 */
typedef struct CglParams {
  double lambda;
  double alpha;
  double beta;
  double gamma;
  double kappa;
  double q;
  double r;
  double epsilon;
  double mu;
} CglParams;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread; empty if none. The
 * pointer stays valid until the next failing call on the same thread.
 */
const char *cgl_last_error_message(void);

/**
 * Creates a grid with `dim` axes; `lengths` and `n` hold `dim` entries.
 *
 * # Safety
 * `lengths` and `n` must point to `dim` readable values; `out` must be writable.
 */
enum CglStatus cgl_grid_new(size_t dim,
                            const double *lengths,
                            const size_t *n,
                            struct CglGrid **out);

/**
 * # Safety
 * `grid` must come from `cgl_grid_new` or be null.
 */
void cgl_grid_free(struct CglGrid *grid);

/**
 * Number of interior points, or 0 for a null handle.
 *
 * # Safety
 * `grid` must be a valid handle or null.
 */
size_t cgl_grid_len(const struct CglGrid *grid);

/**
 * Creates a field from `len` values per component.
 *
 * # Safety
 * `u1` and `u2` must point to `len` readable values; `out` must be writable.
 */
enum CglStatus cgl_field_new(const double *u1, const double *u2, size_t len, struct CglField **out);

/**
 * # Safety
 * `field` must come from this library or be null.
 */
void cgl_field_free(struct CglField *field);

/**
 * # Safety
 * `field` must be a valid handle or null.
 */
size_t cgl_field_len(const struct CglField *field);

/**
 * Copies the components into caller buffers of length `len`, which must
 * equal the field length.
 *
 * # Safety
 * `u1` and `u2` must point to `len` writable values.
 */
enum CglStatus cgl_field_read(const struct CglField *field, double *u1, double *u2, size_t len);

/**
 * Dirichlet energy of `field` on `grid`.
 *
 * # Safety
 * Handles must be valid; `out` must be writable.
 */
enum CglStatus cgl_phi(const struct CglGrid *grid, const struct CglField *field, double *out);

/**
 * `1/r int |U|^r`.
 *
 * # Safety
 * Handles must be valid; `out` must be writable.
 */
enum CglStatus cgl_psi(const struct CglGrid *grid,
                       const struct CglField *field,
                       double r,
                       double *out);

/**
 * `-Delta_h U` as a new field.
 *
 * # Safety
 * Handles must be valid; `out` must be writable.
 */
enum CglStatus cgl_grad_phi(const struct CglGrid *grid,
                            const struct CglField *field,
                            struct CglField **out);

/**
 * `|U|^(r-2) U` as a new field.
 *
 * # Safety
 * `field` must be valid; `out` must be writable.
 */
enum CglStatus cgl_grad_psi(const struct CglField *field, double r, struct CglField **out);

/**
 * `(1 + mu d psi_r)^{-1} U` with default solver settings.
 *
 * # Safety
 * `field` must be valid; `out` must be writable.
 */
enum CglStatus cgl_resolvent_psi(const struct CglField *field,
                                 double r,
                                 double mu,
                                 struct CglField **out);

/**
 * Yosida approximation of `d psi_r` with index `mu`.
 *
 * # Safety
 * `field` must be valid; `out` must be writable.
 */
enum CglStatus cgl_yosida_psi(const struct CglField *field,
                              double r,
                              double mu,
                              struct CglField **out);

/**
 * Moreau envelope of `psi_r` with index `mu`.
 *
 * # Safety
 * Handles must be valid; `out` must be writable.
 */
enum CglStatus cgl_moreau_env_psi(const struct CglGrid *grid,
                                  const struct CglField *field,
                                  double r,
                                  double mu,
                                  double *out);

/**
 * Solves `(Id + mu (lambda + alpha I)(-Delta_h)) V = U`.
 *
 * # Safety
 * Handles must be valid; `out` must be writable.
 */
enum CglStatus cgl_resolvent_phi_complex(const struct CglGrid *grid,
                                         const struct CglField *field,
                                         double mu,
                                         double lambda,
                                         double alpha,
                                         struct CglField **out);

/**
 * Checks `params` against the grid-dimension constraints.
 *
 * # Safety
 * `params` must be readable.
 */
enum CglStatus cgl_params_validate(const struct CglParams *params, size_t dim);

/**
 * Parses a TOML run configuration. Relative file paths inside it resolve
 * against `base_dir`, or the working directory when `base_dir` is null.
 *
 * # Safety
 * `text` must be a NUL-terminated string; `base_dir` NUL-terminated or null.
 */
enum CglStatus cgl_config_parse(const char *text, const char *base_dir, struct CglConfig **out);

/**
 * Loads a configuration file; relative paths resolve against its directory.
 *
 * # Safety
 * `path` must be a NUL-terminated string.
 */
enum CglStatus cgl_config_load(const char *path, struct CglConfig **out);

/**
 * # Safety
 * `config` must come from this library or be null.
 */
void cgl_config_free(struct CglConfig *config);

/**
 * Integrates a configuration. Blow-up is a normal outcome, queried with
 * `cgl_run_blown_up`.
 *
 * # Safety
 * `config` must be valid; `out` must be writable.
 */
enum CglStatus cgl_run(const struct CglConfig *config, struct CglRunResult **out);

/**
 * # Safety
 * `result` must come from `cgl_run` or be null.
 */
void cgl_run_result_free(struct CglRunResult *result);

/**
 * Number of energy records, or 0 for a null handle.
 *
 * # Safety
 * `result` must be valid or null.
 */
size_t cgl_run_record_count(const struct CglRunResult *result);

/**
 * Writes record `index` as `t, l2_sq, phi, psi_q, psi_r, dphi_l2, dpsi_q_l2, combined`
 * into `out`, which must hold `CGL_RECORD_FIELDS` values.
 *
 * # Safety
 * `result` must be valid; `out` must point to `CGL_RECORD_FIELDS` writable values.
 */
enum CglStatus cgl_run_record(const struct CglRunResult *result, size_t index, double *out);

/**
 * 1 if blow-up was detected, 0 otherwise; `t_detect` (if non-null) receives
 * the detection time or NaN.
 *
 * # Safety
 * `result` must be valid or null; `t_detect` writable or null.
 */
int cgl_run_blown_up(const struct CglRunResult *result, double *t_detect);

/**
 * Final recorded state of the run as a new field.
 *
 * # Safety
 * `result` must be valid; `out` must be writable.
 */
enum CglStatus cgl_run_final_field(const struct CglRunResult *result, struct CglField **out);

/**
 * Writes the records as CSV to `path`.
 *
 * # Safety
 * `result` must be valid; `path` NUL-terminated.
 */
enum CglStatus cgl_run_write_csv(const struct CglRunResult *result, const char *path);

/**
 * Runs the law suite; `all_pass` receives 1 iff every law holds.
 *
 * # Safety
 * `all_pass` must be writable.
 */
enum CglStatus cgl_check(size_t samples, uint64_t seed, int *all_pass);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CGL_FFI_H */
