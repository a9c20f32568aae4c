#ifndef NLSAVG_H
#define NLSAVG_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every exported function.
 */
typedef enum NlsavgStatus {
  NLSAVG_STATUS_OK = 0,
  NLSAVG_STATUS_NULL_POINTER = 1,
  NLSAVG_STATUS_CONFIG = 2,
  NLSAVG_STATUS_DOMAIN = 3,
  NLSAVG_STATUS_SHAPE = 4,
  NLSAVG_STATUS_INSUFFICIENT_DATA = 5,
  NLSAVG_STATUS_NUMERICAL = 6,
  NLSAVG_STATUS_IO = 7,
  NLSAVG_STATUS_INVALID_UTF8 = 8,
  NLSAVG_STATUS_BUFFER_TOO_SMALL = 9,
  NLSAVG_STATUS_PANIC = 10,
} NlsavgStatus;

/**
 * Opaque spectral basis handle.
 */
typedef struct NlsavgBasis NlsavgBasis;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failure on this thread, or NULL. The pointer stays
 * valid until the next failing call on the same thread.
 */
const char *nlsavg_last_error_message(void);

/**
 * Library version as a static string.
 */
const char *nlsavg_version(void);

/**
 * Releases a string returned by this library. NULL is ignored.
 *
 * # Safety
 * `s` must come from this library and not have been freed.
 */
void nlsavg_string_free(char *s);

/**
 * Builds a basis from JSON with `grid`, `potential` and `truncation`
 * (a full simulation config is accepted too).
 *
 * # Safety
 * `config_json` must be a valid C string and `out` a writable pointer.
 */
enum NlsavgStatus nlsavg_basis_assemble(const char *config_json, struct NlsavgBasis **out);

/**
 * Reads a basis document produced by [`nlsavg_basis_to_json`].
 *
 * # Safety
 * `json` must be a valid C string and `out` a writable pointer.
 */
enum NlsavgStatus nlsavg_basis_from_json(const char *json, struct NlsavgBasis **out);

/**
 * Frees a basis handle. NULL is ignored.
 *
 * # Safety
 * `basis` must come from this library and not have been freed.
 */
void nlsavg_basis_free(struct NlsavgBasis *basis);

/**
 * Number of retained modes `M`.
 *
 * # Safety
 * `basis` must be a live handle and `out` writable.
 */
enum NlsavgStatus nlsavg_basis_truncation(const struct NlsavgBasis *basis, size_t *out);

/**
 * Copies `λ_1..λ_M` into `out`, which must hold at least `M` values.
 *
 * # Safety
 * `basis` must be a live handle and `out` must point to `len` writable doubles.
 */
enum NlsavgStatus nlsavg_basis_eigenvalues(const struct NlsavgBasis *basis,
                                           double *out,
                                           size_t len);

/**
 * `|v|_p` for mode coefficients given as separate real and imaginary arrays of length `M`.
 *
 * # Safety
 * `re` and `im` must point to `len` readable doubles, `out` must be writable.
 */
enum NlsavgStatus nlsavg_basis_hp_norm(const struct NlsavgBasis *basis,
                                       const double *re,
                                       const double *im,
                                       size_t len,
                                       double p,
                                       double *out);

/**
 * Serialises a basis; free the result with [`nlsavg_string_free`].
 *
 * # Safety
 * `basis` must be a live handle and `out` writable.
 */
enum NlsavgStatus nlsavg_basis_to_json(const struct NlsavgBasis *basis, char **out);

/**
 * Runs a convergence study from a simulation config and returns the report
 * as JSON; free it with [`nlsavg_string_free`]. No files are written.
 *
 * # Safety
 * `config_json` must be a valid C string and `out` writable.
 */
enum NlsavgStatus nlsavg_run_study(const char *config_json, bool xi_only, char **out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* NLSAVG_H */
