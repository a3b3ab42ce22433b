#ifndef DQOBS_H
#define DQOBS_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdbool.h>
#include <stddef.h>

typedef enum DqobsStatus {
  DQOBS_STATUS_OK = 0,
  DQOBS_STATUS_NULL_POINTER = 1,
  DQOBS_STATUS_INVALID_UTF8 = 2,
  DQOBS_STATUS_PARSE = 3,
  DQOBS_STATUS_VALIDATION = 4,
  DQOBS_STATUS_NUMERICAL = 5,
  DQOBS_STATUS_IO = 6,
  DQOBS_STATUS_INVALID_ARGUMENT = 7,
  DQOBS_STATUS_PANIC = 8,
} DqobsStatus;

/**
 * Result of a simulation or observability run.
 */
typedef struct DqobsReport DqobsReport;

/**
 * Parsed and validated scenario.
 */
typedef struct DqobsScenario DqobsScenario;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Parses a scenario from a JSON string.
 *
 * # Safety
 * `json` must be a valid NUL-terminated string and `out` a valid pointer.
 */
enum DqobsStatus dqobs_scenario_from_json(const char *json, struct DqobsScenario **out);

/**
 * Reads and parses a scenario file.
 *
 * # Safety
 * `path` must be a valid NUL-terminated string and `out` a valid pointer.
 */
enum DqobsStatus dqobs_scenario_from_file(const char *path, struct DqobsScenario **out);

/**
 * # Safety
 * `s` must come from a `dqobs_scenario_from_*` call and not be freed twice.
 */
void dqobs_scenario_free(struct DqobsScenario *s);

/**
 * Propagates the scenario.
 *
 * # Safety
 * `s` must be a live scenario handle and `out` a valid pointer.
 */
enum DqobsStatus dqobs_simulate(const struct DqobsScenario *s, struct DqobsReport **out);

/**
 * Propagates the scenario and analyses observability at `epochs` epochs,
 * optionally with the empirical Gramian.
 *
 * # Safety
 * `s` must be a live scenario handle and `out` a valid pointer.
 */
enum DqobsStatus dqobs_observability(const struct DqobsScenario *s,
                                     size_t epochs,
                                     double rank_tol,
                                     bool gramian,
                                     struct DqobsReport **out);

/**
 * Number of trajectory rows in the report.
 *
 * # Safety
 * `r` must be a live report handle or null.
 */
size_t dqobs_report_len(const struct DqobsReport *r);

/**
 * Copies row `i` as `[t, q(4), r(3), ω(3), v(3), y(8)]`.
 *
 * # Safety
 * `r` must be a live report handle and `out` point to 22 doubles.
 */
enum DqobsStatus dqobs_report_row(const struct DqobsReport *r, size_t i, double *out);

/**
 * Serializes the report as JSON. Free the string with [`dqobs_string_free`].
 *
 * # Safety
 * `r` must be a live report handle and `out` a valid pointer.
 */
enum DqobsStatus dqobs_report_to_json(const struct DqobsReport *r, char **out);

/**
 * # Safety
 * `r` must come from `dqobs_simulate` or `dqobs_observability`.
 */
void dqobs_report_free(struct DqobsReport *r);

/**
 * # Safety
 * `s` must come from this library.
 */
void dqobs_string_free(char *s);

/**
 * 16×16 observability matrix, row major, for a unit relative state and a
 * unit marker pose.
 *
 * # Safety
 * `state` must point to 16 doubles, `marker` to 8, `out` to 256.
 */
enum DqobsStatus dqobs_observability_matrix(const double *state, const double *marker, double *out);

/**
 * Singular values (descending) and numeric rank of a row-major 16×16
 * matrix at relative tolerance `rank_tol`.
 *
 * # Safety
 * `matrix` must point to 256 doubles, `singular_values` to 16, `rank` to one
 * `size_t`.
 */
enum DqobsStatus dqobs_rank_report(const double *matrix,
                                   double rank_tol,
                                   double *singular_values,
                                   size_t *rank);

/**
 * Marker pose in the camera frame, `q̂_{T/C} q̂_{M/T}`.
 *
 * # Safety
 * `state` must point to 16 doubles, `marker` and `out` to 8.
 */
enum DqobsStatus dqobs_measure(const double *state, const double *marker, double *out);

/**
 * Dual quaternion product `a b`; no unit requirement.
 *
 * # Safety
 * `a`, `b` and `out` must each point to 8 doubles.
 */
enum DqobsStatus dqobs_dqmul(const double *a, const double *b, double *out);

/**
 * Message for the last failure on this thread, or null. Valid until the
 * next call into the library from the same thread.
 */
const char *dqobs_last_error_message(void);

/**
 * Library version as a static string.
 */
const char *dqobs_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* DQOBS_H */
