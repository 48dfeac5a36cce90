#ifndef CONSTRUCT_AUDIT_H
#define CONSTRUCT_AUDIT_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result of every call.
 */
typedef enum CaStatus {
  CA_STATUS_OK = 0,
  CA_STATUS_NULL_POINTER = 1,
  CA_STATUS_INVALID_UTF8 = 2,
  CA_STATUS_PARSE = 3,
  CA_STATUS_INVALID_DISTRIBUTION = 4,
  CA_STATUS_INVALID_PARAMETER = 5,
  CA_STATUS_MISSING_CONSTRUCT = 6,
  CA_STATUS_INFEASIBLE = 7,
  CA_STATUS_IO = 8,
  CA_STATUS_INTERNAL = 9,
} CaStatus;

/**
 * Opaque joint distribution over `(Z, Yc, Yo, Yp)`.
 */
typedef struct CaDistribution CaDistribution;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread; empty after a success.
 * The pointer stays valid until the next call on the same thread.
 */
const char *ca_last_error_message(void);

/**
 * Library version as a static string.
 */
const char *ca_version(void);

/**
 * Releases a string returned by this library. Null is ignored.
 *
 * # Safety
 * `s` must come from this library and not be freed twice.
 */
void ca_string_free(char *s);

/**
 * Parses a distribution file (JSON text).
 *
 * # Safety
 * `json` must be a valid C string; `out` must be writable.
 */
enum CaStatus ca_distribution_from_json(const char *json, struct CaDistribution **out);

/**
 * Serializes a distribution with exact probabilities.
 *
 * # Safety
 * `dist` must be a live handle; `out` must be writable.
 */
enum CaStatus ca_distribution_to_json(const struct CaDistribution *dist, char **out);

/**
 * Releases a handle. Null is ignored.
 *
 * # Safety
 * `dist` must come from this library and not be freed twice.
 */
void ca_distribution_free(struct CaDistribution *dist);

/**
 * `tv(Yp | Z=0, Yp | Z=1)` as the nearest double.
 *
 * # Safety
 * `dist` must be a live handle; `out` must be writable.
 */
enum CaStatus ca_output_disparity(const struct CaDistribution *dist, double *out);

/**
 * `tv(Yc | Z=0, Yc | Z=1)` as the nearest double.
 *
 * # Safety
 * `dist` must be a live handle; `out` must be writable.
 */
enum CaStatus ca_construct_disparity(const struct CaDistribution *dist, double *out);

/**
 * Audits `dist`. `options_json` (may be null) is an object with optional
 * keys `tests`, `tau`, `alpha`, `p`, `favorable`, `worldview`, `criteria`,
 * `metric`, `mode` and `seed`, named and valued as on the command line.
 * Writes the JSON report to `report` and, when `passed` is not null,
 * 1 or 0 to `passed`.
 *
 * # Safety
 * Pointers must be valid as described; `report` must be writable.
 */
enum CaStatus ca_audit(const struct CaDistribution *dist,
                       const char *options_json,
                       char **report,
                       int32_t *passed);

/**
 * Earth mover's distance between two laws given as `{"label": p}` JSON.
 * `metric` is `indicator` (also used for null), `numeric`, or metric JSON
 * text. Writes the exact value as a string.
 *
 * # Safety
 * String arguments must be valid C strings or null where allowed; `out`
 * must be writable.
 */
enum CaStatus ca_emd(const char *law_a, const char *law_b, const char *metric, char **out);

/**
 * Builds one of the generators: `optimal-dp` (param `base`: a distribution
 * object), `pp-adversarial` (`yo0`, `yo1`, `epsilon`), `eqodds`, `alpha`
 * (`alpha`, `alpha_prime`), `xor`, `ypz`. Parameters are a JSON object with
 * numbers written as strings; `params_json` may be null when none are needed.
 *
 * # Safety
 * `kind` must be a valid C string, `params_json` a valid C string or null,
 * and `out` writable.
 */
enum CaStatus ca_construct(const char *kind,
                           const char *params_json,
                           uint64_t seed,
                           struct CaDistribution **out);

/**
 * Runs one theorem suite (`T1`..`T11`, `L1`, `TBL`) or `all` in exact mode
 * and writes the JSON list of suite reports. `passed` (nullable) receives 1
 * when no trial failed.
 *
 * # Safety
 * `theorem` must be a valid C string; `out` must be writable.
 */
enum CaStatus ca_verify(const char *theorem,
                        size_t trials,
                        uint64_t seed,
                        char **out,
                        int32_t *passed);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CONSTRUCT_AUDIT_H */
