#ifndef CHEMOREPEL_H
#define CHEMOREPEL_H

/* Generated by cbindgen from chemorepel-capi; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Bumped on any change to the exported symbols or their semantics.
 */
#define CRP_ABI_VERSION 1

/**
 * Outcome of a fallible entry point.
 */
typedef enum CrpStatus {
  CRP_STATUS_OK = 0,
  /**
   * A required pointer argument was null.
   */
  CRP_STATUS_NULL_ARGUMENT = 1,
  /**
   * A string argument was not valid UTF-8.
   */
  CRP_STATUS_UTF8 = 2,
  /**
   * The config text failed to parse.
   */
  CRP_STATUS_PARSE = 3,
  /**
   * The config parsed but violates a documented constraint.
   */
  CRP_STATUS_VALIDATION = 4,
  /**
   * The numerics failed before any report could be produced.
   */
  CRP_STATUS_NUMERICAL = 5,
  /**
   * A file could not be read or written.
   */
  CRP_STATUS_IO = 6,
  /**
   * A panic was caught at the boundary; state may be inconsistent.
   */
  CRP_STATUS_INTERNAL = 7,
} CrpStatus;

/**
 * Opaque parsed scenario configuration.
 */
typedef struct CrpConfig CrpConfig;

/**
 * Opaque scenario report; check strings stay valid until it is freed.
 */
typedef struct CrpReport CrpReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * ABI revision of this library; compare against `CRP_ABI_VERSION` in the
 * header the caller was compiled with.
 */
uint32_t crp_abi_version(void);

/**
 * Message of the last failure on this thread, empty if none yet. The
 * pointer stays valid until the next failing call on the same thread.
 */
const char *crp_last_error_message(void);

/**
 * Parse a configuration from a NUL-terminated string.
 *
 * # Safety
 * `text` must point to a NUL-terminated buffer and `out` to writable
 * storage for one pointer.
 */
enum CrpStatus crp_config_parse(const char *text, struct CrpConfig **out);

/**
 * Read and parse a configuration file.
 *
 * # Safety
 * `path` must point to a NUL-terminated buffer and `out` to writable
 * storage for one pointer.
 */
enum CrpStatus crp_config_from_file(const char *path, struct CrpConfig **out);

/**
 * Override the seed of a random initial family; configs without one are
 * left unchanged.
 *
 * # Safety
 * `cfg` must be a live handle from a `crp_config_*` constructor.
 */
enum CrpStatus crp_config_set_seed(struct CrpConfig *cfg, uint64_t seed);

/**
 * Redirect all output files of the run.
 *
 * # Safety
 * `cfg` must be a live handle and `dir` a NUL-terminated buffer.
 */
enum CrpStatus crp_config_set_output_dir(struct CrpConfig *cfg, const char *dir);

/**
 * Release a configuration handle. Null is a no-op.
 *
 * # Safety
 * `cfg` must be a handle from a `crp_config_*` constructor, not yet freed.
 */
void crp_config_free(struct CrpConfig *cfg);

/**
 * Run the scenario and hand back the report. Output files (report.txt,
 * CSV series) are written into the configured directory as a side effect.
 *
 * # Safety
 * `cfg` must be a live handle and `out` writable storage for one pointer.
 */
enum CrpStatus crp_run(const struct CrpConfig *cfg, struct CrpReport **out);

/**
 * Number of graded checks in the report; 0 for null.
 *
 * # Safety
 * `report` must be null or a live handle from `crp_run`.
 */
uintptr_t crp_report_check_count(const struct CrpReport *report);

/**
 * Name of check `idx`, valid until the report is freed; null when out of
 * range.
 *
 * # Safety
 * `report` must be null or a live handle from `crp_run`.
 */
const char *crp_report_check_name(const struct CrpReport *report, uintptr_t idx);

/**
 * Verdict of check `idx`: 0 pass, 1 fail, 2 inconclusive, -1 out of range.
 *
 * # Safety
 * `report` must be null or a live handle from `crp_run`.
 */
int crp_report_check_verdict(const struct CrpReport *report, uintptr_t idx);

/**
 * Measured value of check `idx`; NaN when out of range.
 *
 * # Safety
 * `report` must be null or a live handle from `crp_run`.
 */
double crp_report_check_value(const struct CrpReport *report, uintptr_t idx);

/**
 * Tolerance of check `idx`; NaN when out of range.
 *
 * # Safety
 * `report` must be null or a live handle from `crp_run`.
 */
double crp_report_check_tol(const struct CrpReport *report, uintptr_t idx);

/**
 * Process exit code the CLI would use: 0 all pass, 1 a check failed,
 * 3 numerical abort; -1 for null.
 *
 * # Safety
 * `report` must be null or a live handle from `crp_run`.
 */
int crp_report_exit_code(const struct CrpReport *report);

/**
 * Full plain-text report; free with `crp_string_free`. Null on null input
 * or allocation failure.
 *
 * # Safety
 * `report` must be null or a live handle from `crp_run`.
 */
char *crp_report_render(const struct CrpReport *report);

/**
 * Release a string from `crp_report_render`. Null is a no-op.
 *
 * # Safety
 * `s` must come from `crp_report_render`, not yet freed.
 */
void crp_string_free(char *s);

/**
 * Release a report handle. Null is a no-op.
 *
 * # Safety
 * `report` must be a handle from `crp_run`, not yet freed.
 */
void crp_report_free(struct CrpReport *report);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CHEMOREPEL_H */
