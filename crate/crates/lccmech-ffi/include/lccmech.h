/* C ABI for the lccmech geometric mechanics engine. */

#ifndef LCCMECH_H
#define LCCMECH_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result codes. Mirrors the CLI exit codes where a counterpart exists.
typedef enum LccmechStatus {
  // Operation completed and all checks passed.
  LCCMECH_STATUS_OK = 0,
  // Input could not be parsed or violated the model schema.
  LCCMECH_STATUS_INVALID_INPUT = 1,
  // Operation completed but a semantic check failed (report still
  // written to the out-pointer).
  LCCMECH_STATUS_CHECK_FAILED = 2,
  // Structure degenerate at or near every sampled point.
  LCCMECH_STATUS_SINGULAR_POINT = 3,
  // Trajectory hit a singular point mid-run (truncated CSV still
  // written to the out-pointer).
  LCCMECH_STATUS_TRAJECTORY_SINGULAR = 4,
  // A required pointer argument was NULL or not valid UTF-8.
  LCCMECH_STATUS_NULL_POINTER = 5,
} LccmechStatus;

// Opaque compiled model.
typedef struct LccmechModel LccmechModel;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Returns the engine version as a static string (do not free).
const char *lccmech_version(void);

// Returns the last error message raised on this thread, or NULL if none.
// The caller owns the returned string and must release it with
// `lccmech_string_free`.
char *lccmech_last_error(void);

// Releases a string returned by this library. NULL is a no-op.
//
// # Safety
// `s` must be NULL or a pointer previously returned by this library and
// not yet freed.
void lccmech_string_free(char *s);

// Compiles a model from JSON text into an opaque handle.
//
// # Safety
// `json` must be a NUL-terminated string; `out` must be a valid writable
// pointer.
enum LccmechStatus lccmech_model_from_json(const char *json, struct LccmechModel **out);

// Compiles a built-in model (e.g. "oscillator") into an opaque handle.
//
// # Safety
// `name` must be a NUL-terminated string; `out` must be a valid writable
// pointer.
enum LccmechStatus lccmech_model_from_preset(const char *name, struct LccmechModel **out);

// Releases a model handle. NULL is a no-op.
//
// # Safety
// `m` must be NULL or a pointer previously returned by a model
// constructor and not yet freed.
void lccmech_model_free(struct LccmechModel *m);

// Runs structure validation; writes a JSON report to `out_json`.
// `samples == 0` and `seed == 0` select the model defaults.
//
// # Safety
// `m` must be a live model handle and `out_json` a valid writable
// pointer.
enum LccmechStatus lccmech_validate(const struct LccmechModel *m,
                                    size_t samples,
                                    uint64_t seed,
                                    char **out_json);

// Integrates the evolution field; writes a CSV trajectory to `out_csv`.
// `x0`/`x0_len` may be NULL/0 to use the model's initial point;
// `dt <= 0`, `steps == 0`, and `method == NULL` select model defaults.
//
// # Safety
// `m` must be a live model handle; `x0` NULL or valid for `x0_len`
// reads; `method` NULL or NUL-terminated; `out_csv` valid and writable.
enum LccmechStatus lccmech_simulate(const struct LccmechModel *m,
                                    const double *x0,
                                    size_t x0_len,
                                    double dt,
                                    size_t steps,
                                    const char *method,
                                    char **out_csv);

// Evaluates the model's Hamilton-Jacobi candidate; writes a JSON report
// to `out_json`. `regime` may be NULL or "auto" to infer the regime, or
// one of "symplectic", "cosymplectic", "lcc".
//
// # Safety
// `m` must be a live model handle; `regime` NULL or NUL-terminated;
// `out_json` valid and writable.
enum LccmechStatus lccmech_hj_check(const struct LccmechModel *m,
                                    const char *regime,
                                    char **out_json);

// Evaluates the Jacobi bracket of expressions `f` and `g` on a sample
// grid; writes a JSON report (with per-sample values) to `out_json`.
// `samples == 0` and `seed == 0` select the model defaults.
//
// # Safety
// `m` must be a live model handle; `f` and `g` NUL-terminated;
// `out_json` valid and writable.
enum LccmechStatus lccmech_bracket(const struct LccmechModel *m,
                                   const char *f,
                                   const char *g,
                                   size_t samples,
                                   uint64_t seed,
                                   char **out_json);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus

#endif /* LCCMECH_H */
