#ifndef RTC_H
#define RTC_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum RtcEngine {
  RTC_ENGINE_EXPLICIT = 0,
  RTC_ENGINE_BMC = 1,
  RTC_ENGINE_KIND = 2,
} RtcEngine;

typedef enum RtcLowering {
  RTC_LOWERING_OBSERVER = 0,
  RTC_LOWERING_CONSTRAINT = 1,
  RTC_LOWERING_SIDE_CONDITION = 2,
} RtcLowering;

/**
 * Result of every call. Values below 3 mirror the verdicts of `rtc check`.
 */
typedef enum RtcStatus {
  RTC_STATUS_OK = 0,
  RTC_STATUS_FALSIFIED = 1,
  RTC_STATUS_UNKNOWN = 2,
  RTC_STATUS_NULL_ARGUMENT = 3,
  RTC_STATUS_INVALID_UTF8 = 4,
  RTC_STATUS_PARSE = 5,
  RTC_STATUS_USAGE = 6,
  RTC_STATUS_TOOL = 7,
  RTC_STATUS_PANIC = 8,
} RtcStatus;

/**
 * A parsed program or component system.
 */
typedef struct RtcModel RtcModel;

/**
 * Options for [`rtc_check`]. Zero fields take the defaults: k = 8, horizon
 * 5, solver from `RTC_SOLVER` or `z3` on the path.
 */
typedef struct RtcCheckOptions {
  enum RtcEngine engine;
  size_t k;
  size_t horizon;
  /**
   * Nullable path to an SMT-LIB solver.
   */
  const char *solver;
  /**
   * Discharge assumptions with the weak rule instead of the ordered one.
   */
  bool weak_assumptions;
} RtcCheckOptions;

/**
 * Version string of the library. Static, never freed.
 */
const char *rtc_version(void);

/**
 * Message of the last failed call on this thread, or null. Valid until the
 * next call on the same thread.
 */
const char *rtc_last_error(void);

/**
 * # Safety
 * `s` must come from this library or be null.
 */
void rtc_string_free(char *s);

/**
 * Parses and elaborates `source`.
 *
 * # Safety
 * `source` must be a NUL-terminated string, `out` a writable pointer.
 */
enum RtcStatus rtc_model_parse(const char *source, struct RtcModel **out);

/**
 * # Safety
 * `m` must come from [`rtc_model_parse`] or be null.
 */
void rtc_model_free(struct RtcModel *m);

/**
 * True when the model is a component system.
 *
 * # Safety
 * `m` must be a live model or null.
 */
bool rtc_model_is_system(const struct RtcModel *m);

/**
 * The model printed in the core language, patterns lowered.
 *
 * # Safety
 * `m` must be a live model, `out` a writable pointer.
 */
enum RtcStatus rtc_model_to_core(const struct RtcModel *m, char **out);

/**
 * SMT-LIB script for one property. `property` may be null for the first.
 * `engine` is `RTC_ENGINE_BMC` or `RTC_ENGINE_KIND`.
 *
 * # Safety
 * `m` must be a live model, `property` null or a string, `out` writable.
 */
enum RtcStatus rtc_emit_smt(const struct RtcModel *m,
                            const char *property,
                            enum RtcEngine engine,
                            size_t k,
                            char **out);

/**
 * Discharges every property of a program, or every obligation of a system.
 * Returns the combined verdict and, when `report` is not null, a JSON report
 * with `obligations` and `summary`.
 *
 * # Safety
 * `m` must be a live model, `opts` null or valid, `report` null or writable.
 */
enum RtcStatus rtc_check(const struct RtcModel *m,
                         const struct RtcCheckOptions *opts,
                         char **report);

/**
 * Checks a JSON trace against the model's constraints and calendar.
 * Returns `RTC_STATUS_OK` when admissible. Otherwise returns
 * `RTC_STATUS_FALSIFIED`, writes the failing step to `step` when it is not
 * null, and leaves the violation in [`rtc_last_error`].
 *
 * # Safety
 * `m` must be a live model, `trace_json` a string, `step` null or writable.
 */
enum RtcStatus rtc_trace_admissible(const struct RtcModel *m, const char *trace_json, size_t *step);

/**
 * Lowers a single pattern, e.g. `"whenever a occurs b occurs during [0.0, 5.0]"`,
 * into core-language text: fresh variables, definitions, constraints and
 * the property if any.
 *
 * # Safety
 * `pattern` must be a string, `out` writable.
 */
enum RtcStatus rtc_pattern_lower(const char *pattern, enum RtcLowering mode, char **out);

#endif  /* RTC_H */
