#ifndef FINMEAS_H
#define FINMEAS_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result of every call.
 */
typedef enum FmStatus {
  FM_STATUS_OK = 0,
  /**
   * The library rejected the request (same meaning as CLI exit 1).
   */
  FM_STATUS_DOMAIN_ERROR = 1,
  /**
   * Malformed input: bad model, unknown name, unparsable value (CLI exit 2).
   */
  FM_STATUS_INPUT_ERROR = 2,
  FM_STATUS_NULL_POINTER = 3,
  FM_STATUS_INVALID_UTF8 = 4,
  FM_STATUS_PANIC = 5,
} FmStatus;

/**
 * Opaque handle to a validated model.
 */
typedef struct FmModel FmModel;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Loads and validates a model file.
 *
 * # Safety
 * `path` must be a NUL-terminated string; `out` must be valid for one write.
 */
enum FmStatus fm_model_load(const char *path, struct FmModel **out);

/**
 * Parses and validates a model from JSON text.
 *
 * # Safety
 * `json` must be a NUL-terminated string; `out` must be valid for one write.
 */
enum FmStatus fm_model_from_json(const char *json, struct FmModel **out);

/**
 * Releases a model; null is ignored.
 *
 * # Safety
 * `model` must be null or a handle not yet freed.
 */
void fm_model_free(struct FmModel *model);

/**
 * Runs one CLI command (arguments after the program name) against the
 * model and stores its report, text or JSON, in `*out`.
 *
 * # Safety
 * `argv` must point to `argc` NUL-terminated strings; `out` must be valid for one write.
 */
enum FmStatus fm_execute(const struct FmModel *model,
                         const char *const *argv,
                         size_t argc,
                         bool json,
                         char **out);

/**
 * Radon-Nikodym density dμ/dν as comma-separated `p/q` values, one per atom.
 *
 * # Safety
 * String arguments must be NUL-terminated; `out` must be valid for one write.
 */
enum FmStatus fm_radon_nikodym(const struct FmModel *model,
                               const char *num,
                               const char *den,
                               char **out);

/**
 * Hutchinson distance H_γ(μ, ν) as a `p/q` string.
 *
 * # Safety
 * String arguments must be NUL-terminated; `out` must be valid for one write.
 */
enum FmStatus fm_hutchinson(const struct FmModel *model,
                            const char *left,
                            const char *right,
                            const char *metric,
                            const char *gamma,
                            char **out);

/**
 * Lévy-Prohorov distance d_P(μ, ν) as a `p/q` string.
 *
 * # Safety
 * String arguments must be NUL-terminated; `out` must be valid for one write.
 */
enum FmStatus fm_prohorov(const struct FmModel *model,
                          const char *left,
                          const char *right,
                          const char *metric,
                          char **out);

/**
 * Validity set of a formula as comma-separated point labels.
 *
 * # Safety
 * String arguments must be NUL-terminated; `out` must be valid for one write.
 */
enum FmStatus fm_validity_set(const struct FmModel *model,
                              const char *kernel,
                              const char *formula,
                              char **out);

/**
 * Releases a string returned by this library; null is ignored.
 *
 * # Safety
 * `s` must be null or a string from this library not yet freed.
 */
void fm_string_free(char *s);

/**
 * Code of the last failure on this thread (e.g. `AbsoluteContinuityViolated`),
 * or null. Valid until the next call on this thread.
 */
const char *fm_last_error_code(void);

/**
 * Message of the last failure on this thread, or null.
 */
const char *fm_last_error_message(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* FINMEAS_H */
