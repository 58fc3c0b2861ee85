#ifndef WAML_H
#define WAML_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

typedef enum {
  WAML_STATUS_OK = 0,
  WAML_STATUS_NULL_ARGUMENT = 1,
  WAML_STATUS_INVALID_UTF8 = 2,
  WAML_STATUS_SYNTAX = 3,
  WAML_STATUS_INVALID_MODEL = 4,
  WAML_STATUS_UNKNOWN_WORLD = 5,
  WAML_STATUS_ARITY_MISMATCH = 6,
  WAML_STATUS_BUDGET_EXCEEDED = 7,
  WAML_STATUS_INVALID_ARGUMENT = 8,
  WAML_STATUS_SCRIPT = 9,
  WAML_STATUS_INTERNAL = 10,
  WAML_STATUS_PANIC = 11,
} WamlStatus;

/**
 * Opaque formula.
 */
typedef struct WamlFormula WamlFormula;

/**
 * Opaque n-model.
 */
typedef struct WamlModel WamlModel;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null. Valid until the
 * next call into the library on the same thread.
 */
const char *waml_last_error(void);

/**
 * Library version as a static string.
 */
const char *waml_version(void);

/**
 * # Safety
 * `s` must be null or a string returned by this library, not yet freed.
 */
void waml_string_free(char *s);

/**
 * # Safety
 * `text` must be a NUL-terminated string; `out` must be writable.
 */
WamlStatus waml_formula_parse(const char *text, WamlFormula **out);

/**
 * Canonical printed form of a formula.
 *
 * # Safety
 * `f` must be a live formula handle; `out` must be writable.
 */
WamlStatus waml_formula_print(const WamlFormula *f, char **out);

/**
 * # Safety
 * `f` must be null or a handle from this library, not yet freed.
 */
void waml_formula_free(WamlFormula *f);

/**
 * Loads a model from `len` bytes of JSON.
 *
 * # Safety
 * `json` must point to `len` readable bytes; `out` must be writable.
 */
WamlStatus waml_model_load_json(const uint8_t *json, size_t len, WamlModel **out);

/**
 * Canonical JSON form of a model.
 *
 * # Safety
 * `m` must be a live model handle; `out` must be writable.
 */
WamlStatus waml_model_save_json(const WamlModel *m, char **out);

/**
 * # Safety
 * `m` must be null or a handle from this library, not yet freed.
 */
void waml_model_free(WamlModel *m);

/**
 * Writes whether `f` holds at `world`.
 *
 * # Safety
 * Handles must be live, `world` NUL-terminated, `out` writable.
 */
WamlStatus waml_check(const WamlModel *m, const char *world, const WamlFormula *f, bool *out);

/**
 * Writes whether `w` and `v` are bisimilar over the comma-separated `letters`.
 *
 * # Safety
 * Handles must be live, strings NUL-terminated, `out` writable.
 */
WamlStatus waml_bisimilar(const WamlModel *left,
                          const char *w,
                          const WamlModel *right,
                          const char *v,
                          const char *letters,
                          bool *out);

/**
 * Writes a formula true at `w` and false at `v`, or null when they are bisimilar.
 *
 * # Safety
 * Handles must be live, strings NUL-terminated, `out` writable.
 */
WamlStatus waml_distinguish(const WamlModel *left,
                            const char *w,
                            const WamlModel *right,
                            const char *v,
                            const char *letters,
                            WamlFormula **out);

/**
 * TPTP `fof` axiom for the standard translation of `f`, free variable grounded to `ground`.
 *
 * # Safety
 * `f` must be live, strings NUL-terminated, `out` writable.
 */
WamlStatus waml_translate_tptp(const WamlFormula *f,
                               size_t arity,
                               const char *name,
                               const char *ground,
                               char **out);

/**
 * Checks a proof script given as JSON. `out_invalid_line` receives 0 when
 * every line is justified, otherwise the 1-based number of the first bad line.
 *
 * # Safety
 * `json` must be NUL-terminated, `out_invalid_line` writable.
 */
WamlStatus waml_proof_check_json(const char *json, size_t *out_invalid_line);

/**
 * Builds and verifies the interpolation counterexample for arity `n`;
 * `sat_bound = 0` skips the corroborating search.
 *
 * # Safety
 * `out_pass` must be writable.
 */
WamlStatus waml_interp_verify(size_t n, size_t sat_bound, bool *out_pass);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* WAML_H */
