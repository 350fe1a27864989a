#ifndef WEYL_ALF_H
#define WEYL_ALF_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result codes. `WA_OK` is zero; everything else is an error.
 */
typedef enum WaStatus {
  WA_OK = 0,
  WA_NULL_POINTER = 1,
  WA_INVALID_UTF8 = 2,
  WA_CONFIG = 3,
  WA_DOMAIN = 4,
  WA_DECAY_PROBE = 5,
  WA_NOT_ADAPTED = 6,
  WA_NUMERICAL = 7,
  WA_BUFFER_TOO_SMALL = 8,
  WA_PANIC = 9,
} WaStatus;

/**
 * A Weyl structure on a model space.
 */
typedef struct WaWeyl WaWeyl;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Build a Weyl structure from JSON `{"model": …, "metric": …, "lee": …}`.
 *
 * # Safety
 * `json` must be a NUL-terminated string and `out` a valid pointer.
 */
enum WaStatus wa_weyl_new(const char *json, struct WaWeyl **out);

/**
 * Release a handle from `wa_weyl_new`. Null is ignored.
 *
 * # Safety
 * `w` must come from `wa_weyl_new` and not be used afterwards.
 */
void wa_weyl_free(struct WaWeyl *w);

/**
 * Dimension `n = m + 1` of the total space.
 *
 * # Safety
 * `w` must be a live handle and `out` a valid pointer.
 */
enum WaStatus wa_weyl_dim(const struct WaWeyl *w, size_t *out);

/**
 * Frame components `g_ab` at `point` (length `n`) into `out` (length `n²`).
 *
 * # Safety
 * Pointers must be valid for the given lengths.
 */
enum WaStatus wa_metric_at(const struct WaWeyl *w,
                           const double *point,
                           size_t point_len,
                           double *out,
                           size_t out_len);

/**
 * Mass of `Z = Σ z_b X_b` over the given radii: `Q_g` when `conformal` is 0,
 * the conformal mass otherwise. Decay probes gate the computation.
 *
 * # Safety
 * Pointers must be valid for the given lengths.
 */
enum WaStatus wa_mass(const struct WaWeyl *w,
                      const double *z,
                      size_t z_len,
                      const double *radii,
                      size_t radii_len,
                      int conformal,
                      double *out_mass,
                      int *out_converged);

/**
 * Pointwise Bochner residuals for a seeded random weighted 1-form, with the
 * Ricci term entering with `+` and with `−`.
 *
 * # Safety
 * Pointers must be valid for the given lengths.
 */
enum WaStatus wa_bochner_residuals(const struct WaWeyl *w,
                                   const double *point,
                                   size_t point_len,
                                   double weight,
                                   uint64_t alpha_seed,
                                   double *out_plus,
                                   double *out_minus);

/**
 * Run the identity suite for a TOML configuration; `*out_pass` is 1 when
 * every identity passes. `json_out`, when not null, receives the reports as
 * a JSON array to be released with `wa_string_free`.
 *
 * # Safety
 * `config_toml` must be NUL-terminated; output pointers valid or null.
 */
enum WaStatus wa_verify(const char *config_toml, uint64_t seed, int *out_pass, char **json_out);

/**
 * Release a string returned by this library. Null is ignored.
 *
 * # Safety
 * `s` must come from this library and not be used afterwards.
 */
void wa_string_free(char *s);

/**
 * Copy the last error message of this thread into `buf` (NUL-terminated,
 * truncated to `len`). Returns the full message length, 0 when there is none.
 *
 * # Safety
 * `buf` must be valid for `len` bytes or null.
 */
size_t wa_last_error(char *buf, size_t len);

/**
 * Library version as a static NUL-terminated string.
 */
const char *wa_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* WEYL_ALF_H */
