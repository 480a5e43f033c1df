#ifndef LOSFLOW_H
#define LOSFLOW_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum LfStatus {
  LF_STATUS_OK = 0,
  LF_STATUS_NULL_POINTER = 1,
  LF_STATUS_INVALID_ARGUMENT = 2,
  LF_STATUS_CONFIG = 3,
  LF_STATUS_DATA = 4,
  LF_STATUS_INVARIANT = 5,
  LF_STATUS_PANIC = 6,
  LF_STATUS_NOT_FOUND = 7,
} LfStatus;

typedef struct LfReport LfReport;

/**
 * Scenario plus the patients queued for a run.
 */
typedef struct LfSimulator LfSimulator;

/**
 * Classification metrics with LS as the positive class.
 */
typedef struct LfMetricReport {
  double accuracy;
  double precision_ls;
  double precision_ss;
  double recall_ls;
  double recall_ss;
  double f1_ls;
  double f1_ss;
  double f1_weighted;
  /**
   * Nonzero when any ratio had a zero denominator.
   */
  int any_undefined;
} LfMetricReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failure on this thread, or null. The pointer stays
 * valid until the next failing call on the same thread.
 */
const char *lf_last_error(void);

/**
 * Releases a string returned by this library. Null is ignored.
 *
 * # Safety
 * `s` must come from this library and not have been freed.
 */
void lf_string_free(char *s);

/**
 * Creates a simulator from a scenario JSON document.
 *
 * # Safety
 * `scenario_json` must be a valid C string; `out` must be writable.
 */
enum LfStatus lf_simulator_new(const char *scenario_json, struct LfSimulator **out);

/**
 * Queues one patient. Labels are nonzero for LS, zero for SS.
 *
 * # Safety
 * `sim` must be a live handle and `encounter_id` a valid C string.
 */
enum LfStatus lf_simulator_add_patient(struct LfSimulator *sim,
                                       const char *encounter_id,
                                       double arrival_time,
                                       double los_hours,
                                       int true_ls,
                                       int predicted_ls);

/**
 * Number of queued patients, or 0 for a null handle.
 *
 * # Safety
 * `sim` must be null or a live handle.
 */
size_t lf_simulator_patient_count(const struct LfSimulator *sim);

/**
 * Runs the queued patients. The simulator may be run again.
 *
 * # Safety
 * `sim` must be a live handle; `out` must be writable.
 */
enum LfStatus lf_simulator_run(const struct LfSimulator *sim, struct LfReport **out);

/**
 * # Safety
 * `sim` must be null or a live handle, not used afterwards.
 */
void lf_simulator_free(struct LfSimulator *sim);

/**
 * Reads a report metric by snake_case name (e.g. `total_sterilizations`).
 * `*defined` is 0 when the metric does not apply to the run.
 *
 * # Safety
 * `report` must be a live handle, `name` a valid C string, outputs writable.
 */
enum LfStatus lf_report_metric(const struct LfReport *report,
                               const char *name,
                               double *value,
                               int *defined);

/**
 * Serialises the full report as JSON; free with [`lf_string_free`].
 *
 * # Safety
 * `report` must be a live handle; `out` must be writable.
 */
enum LfStatus lf_report_to_json(const struct LfReport *report, char **out);

/**
 * # Safety
 * `report` must be null or a live handle, not used afterwards.
 */
void lf_report_free(struct LfReport *report);

/**
 * # Safety
 * `out` must be writable.
 */
enum LfStatus lf_metric_report(uint64_t tp,
                               uint64_t tn,
                               uint64_t fp,
                               uint64_t fn_,
                               struct LfMetricReport *out);

/**
 * ROC AUC of `scores` against labels (nonzero = LS), ties averaged.
 *
 * # Safety
 * `scores` and `labels` must point to `n` readable elements; `out` writable.
 */
enum LfStatus lf_auc(const double *scores, const int *labels, size_t n, double *out);

/**
 * Library version as a static string.
 */
const char *lf_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* LOSFLOW_H */
