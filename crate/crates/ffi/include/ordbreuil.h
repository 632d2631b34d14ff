#ifndef ORDBREUIL_H
#define ORDBREUIL_H

/* Generated by cbindgen. Do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result codes shared by every entry point.
 */
typedef enum OrdbStatus {
  ORDB_STATUS_OK = 0,
  ORDB_STATUS_NULL_POINTER = 1,
  ORDB_STATUS_INVALID_INPUT = 2,
  ORDB_STATUS_GENERICITY = 3,
  ORDB_STATUS_NO_MONODROMY = 4,
  ORDB_STATUS_ASSERTION = 5,
  ORDB_STATUS_NO_CONVERGENCE = 6,
  ORDB_STATUS_BUFFER_TOO_SMALL = 7,
  ORDB_STATUS_PANIC = 8,
} OrdbStatus;

/**
 * Which tangent space to measure.
 */
typedef enum OrdbTangent {
  ORDB_TANGENT_QUASI = 0,
  ORDB_TANGENT_WITH_MONODROMY = 1,
} OrdbTangent;

/**
 * Ordinary rank-three module with mod-p coefficients.
 */
typedef struct OrdbModule OrdbModule;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copies the last error message of this thread into `buf` (NUL terminated).
 * Returns the full message length excluding the terminator.
 *
 * # Safety
 * `buf` must be null or valid for `len` bytes.
 */
uintptr_t ordb_last_error(char *buf, uintptr_t len);

/**
 * Returns 1 when `(p, a0, a1, a2)` satisfies the strong genericity bounds.
 */
int32_t ordb_is_strongly_generic(uint32_t p, uint32_t a0, uint32_t a1, uint32_t a2);

/**
 * Builds an ordinary module. `params` holds
 * `v10, v20, v20p, v21, alpha0, alpha1, alpha2` reduced mod `p`.
 *
 * # Safety
 * `weights` must point to 3 values, `params` to 7, `out` to writable storage.
 */
enum OrdbStatus ordb_module_new(uint32_t p,
                                const uint32_t *weights,
                                const int64_t *params,
                                struct OrdbModule **out);

/**
 * Releases a module; null is ignored.
 *
 * # Safety
 * `m` must come from [`ordb_module_new`] and not be used afterwards.
 */
void ordb_module_free(struct OrdbModule *m);

/**
 * Writes 1 to `out` when the module admits a monodromy operator.
 *
 * # Safety
 * `m` must be a live handle and `out` writable.
 */
enum OrdbStatus ordb_monodromy_exists(const struct OrdbModule *m, int32_t *out);

/**
 * Writes the monodromy polynomials `P10, P21, P20` as three consecutive
 * blocks of `p` coefficients in powers of `u^e` (so `out` needs `3p` slots).
 *
 * # Safety
 * `m` must be a live handle and `out` valid for `len` values.
 */
enum OrdbStatus ordb_monodromy(const struct OrdbModule *m, uint32_t *out, uintptr_t len);

/**
 * Writes the dimension of the requested tangent space.
 *
 * # Safety
 * `m` must be a live handle and `out` writable.
 */
enum OrdbStatus ordb_tangent_dimension(const struct OrdbModule *m,
                                       enum OrdbTangent kind,
                                       uint32_t *out);

/**
 * Writes the Fontaine-Laffaille Frobenius row-major into `frob[9]` and the
 * Hodge-Tate weights into `weights[3]`.
 *
 * # Safety
 * `m` must be a live handle; `frob` and `weights` valid for 9 and 3 values.
 */
enum OrdbStatus ordb_fl_module(const struct OrdbModule *m, uint32_t *frob, uint32_t *weights);

/**
 * Runs a CLI command (`"gauge"`, `"monodromy"`, ...) on a JSON document and
 * returns the machine-format report through `out`, to be released with
 * [`ordb_string_free`]. A report is produced on failure too.
 *
 * # Safety
 * `command` must be a NUL-terminated string, `input` null or NUL-terminated,
 * `out` writable.
 */
enum OrdbStatus ordb_run_json(const char *command, const char *input, uint64_t seed, char **out);

/**
 * Releases a string returned by this library; null is ignored.
 *
 * # Safety
 * `s` must come from this library and not be used afterwards.
 */
void ordb_string_free(char *s);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus

#endif /* ORDBREUIL_H */
