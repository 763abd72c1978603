/* C interface to the friedrichs resonance solver. */

#ifndef FRIEDRICHS_H
#define FRIEDRICHS_H

/* Generated by cbindgen from friedrichs-capi; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status of a C-API call. Values above `FR_OK` match the process exit
 * codes of the `friedrichs` binary where a correspondence exists.
 */
typedef enum fr_status {
  /**
   * The call succeeded and every requested check passed.
   */
  FR_OK = 0,
  /**
   * A pointer argument was null or otherwise unusable.
   */
  FR_INVALID_ARGUMENT = 1,
  /**
   * The configuration did not parse or describes an invalid model.
   */
  FR_INVALID_CONFIG = 2,
  /**
   * The run finished but at least one check or hypothesis failed;
   * a report is still available.
   */
  FR_CERTIFICATION_FAILED = 3,
  /**
   * A fixed-point solve exhausted its iteration budget; a report is
   * still available.
   */
  FR_NO_CONVERGENCE = 4,
  /**
   * An internal invariant broke. Treat the library state as poisoned.
   */
  FR_PANIC = 5,
} fr_status;

/**
 * Completed run: the report JSON plus the summary fields needed to
 * branch without parsing it.
 */
typedef struct fr_report fr_report;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Run a JSON configuration and store the resulting report in
 * `out_report`.
 *
 * On `FR_OK`, `FR_CERTIFICATION_FAILED` and `FR_NO_CONVERGENCE` a report
 * is written to `out_report`; on any other status it is set to null and
 * [`fr_last_error_message`] explains what happened.
 *
 * # Safety
 * `config_json` must be a valid NUL-terminated string and `out_report`
 * a valid pointer for the duration of the call.
 */
enum fr_status fr_run_json(const char *config_json, struct fr_report **out_report);

/**
 * Copy of the report JSON; release it with [`fr_string_free`]. Null if
 * `report` is null.
 *
 * # Safety
 * `report` must be null or a pointer produced by [`fr_run_json`] that
 * has not been freed.
 */
char *fr_report_json(const struct fr_report *report);

/**
 * Exit code the CLI would have returned for this run; `-1` for null.
 *
 * # Safety
 * `report` must be null or a live pointer from [`fr_run_json`].
 */
int fr_report_exit_code(const struct fr_report *report);

/**
 * Whether every requested check passed; `false` for null.
 *
 * # Safety
 * `report` must be null or a live pointer from [`fr_run_json`].
 */
bool fr_report_pass(const struct fr_report *report);

/**
 * Release a report. Null is ignored.
 *
 * # Safety
 * `report` must be null or a pointer from [`fr_run_json`], passed here
 * exactly once.
 */
void fr_report_free(struct fr_report *report);

/**
 * Copy of the most recent error message on this thread, or null if the
 * last call succeeded. Release it with [`fr_string_free`].
 */
char *fr_last_error_message(void);

/**
 * Release a string obtained from this library. Null is ignored.
 *
 * # Safety
 * `s` must be null or a string pointer from [`fr_report_json`] or
 * [`fr_last_error_message`], passed here exactly once.
 */
void fr_string_free(char *s);

/**
 * Library version as a static string; do not free.
 */
const char *fr_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* FRIEDRICHS_H */
