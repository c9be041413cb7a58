/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#ifndef KIEVAL_H
#define KIEVAL_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result code of every call.
typedef enum KievalStatus {
  KIEVAL_STATUS_OK = 0,
  KIEVAL_STATUS_NULL_POINTER = 1,
  KIEVAL_STATUS_INVALID_UTF8 = 2,
  KIEVAL_STATUS_PARSE_ERROR = 3,
  KIEVAL_STATUS_SCHEMA_ERROR = 4,
  KIEVAL_STATUS_UNPAIRED_DOCUMENT = 5,
  KIEVAL_STATUS_MISSING_CONFIDENCE = 6,
  KIEVAL_STATUS_INVALID_ARGUMENT = 7,
  KIEVAL_STATUS_PANIC = 8,
} KievalStatus;

typedef enum KievalNormalization {
  KIEVAL_NORMALIZATION_NONE = 0,
  KIEVAL_NORMALIZATION_TRIM = 1,
  KIEVAL_NORMALIZATION_CASEFOLD = 2,
  KIEVAL_NORMALIZATION_TRIM_CASEFOLD = 3,
} KievalNormalization;

// A parsed dataset.
typedef struct KievalDataset KievalDataset;

// The result of `kieval_evaluate`.
typedef struct KievalReport KievalReport;

// Options for parsing a dataset.
typedef struct KievalParseOptions {
  // One of the `KievalNormalization` values.
  uint32_t normalization;
  // Infer a missing `group_type` from a shared entity-type prefix.
  bool infer_group_type;
} KievalParseOptions;

// Options for evaluation and sweeps.
typedef struct KievalEvalOptions {
  // Treat a document present on only one side as empty on the other
  // instead of failing with `KIEVAL_STATUS_UNPAIRED_DOCUMENT`.
  bool missing_doc_empty;
  // Worker threads; 0 uses the default pool.
  size_t threads;
} KievalEvalOptions;

// Headline scores. `kieval_group_f1` is meaningful only when
// `group_applicable` is true.
typedef struct KievalScores {
  double legacy_entity_f1;
  double kieval_entity_f1;
  double kieval_group_f1;
  bool group_applicable;
  double kieval_aligned;
} KievalScores;

typedef struct KievalCounts {
  size_t documents;
  size_t tp;
  size_t fp;
  size_t fn_;
  size_t subs;
  size_t add;
  size_t del;
  size_t error;
} KievalCounts;

typedef struct KievalSweepPoint {
  double tau;
  double auto_rate;
  double kieval_aligned_tau;
  size_t reviewed;
  size_t subs_tau;
  size_t del_tau;
  size_t add;
  size_t n_pr_star;
} KievalSweepPoint;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Parses dataset JSON (NUL-terminated UTF-8). `options` may be null for the
// defaults. On success `*out` owns a new dataset.
//
// # Safety
// `json` must be a valid NUL-terminated string, `options` null or valid,
// and `out` a valid pointer to writable storage.
enum KievalStatus kieval_dataset_parse(const char *json,
                                       const struct KievalParseOptions *options,
                                       struct KievalDataset **out);

// Number of documents in `dataset`; 0 for null.
//
// # Safety
// `dataset` must be null or a live handle from `kieval_dataset_parse`.
size_t kieval_dataset_len(const struct KievalDataset *dataset);

// # Safety
// `dataset` must be null or a live handle; it is invalid afterwards.
void kieval_dataset_free(struct KievalDataset *dataset);

// Evaluates `pred` against `gt`. Normalization settings are taken from `gt`.
// `options` may be null. On success `*out` owns a new report.
//
// # Safety
// Dataset handles must be live, `options` null or valid, `out` writable.
enum KievalStatus kieval_evaluate(const struct KievalDataset *gt,
                                  const struct KievalDataset *pred,
                                  const struct KievalEvalOptions *options,
                                  struct KievalReport **out);

// # Safety
// `report` must be a live handle and `out` writable.
enum KievalStatus kieval_report_scores(const struct KievalReport *report, struct KievalScores *out);

// # Safety
// `report` must be a live handle and `out` writable.
enum KievalStatus kieval_report_counts(const struct KievalReport *report, struct KievalCounts *out);

// Full JSON report, per-document section included, without a timestamp.
// Release the string with `kieval_string_free`.
//
// # Safety
// `report` must be a live handle and `out` writable.
enum KievalStatus kieval_report_to_json(const struct KievalReport *report, char **out);

// # Safety
// `report` must be null or a live handle; it is invalid afterwards.
void kieval_report_free(struct KievalReport *report);

// Review sweep over the `n_taus` thresholds in `taus` (strictly increasing,
// within [0, 1]). Writes `n_taus` points to `out_points`.
//
// # Safety
// Dataset handles must be live, `taus` readable and `out_points` writable
// for `n_taus` elements, `options` null or valid.
enum KievalStatus kieval_sweep(const struct KievalDataset *gt,
                               const struct KievalDataset *pred,
                               const struct KievalEvalOptions *options,
                               const double *taus,
                               size_t n_taus,
                               struct KievalSweepPoint *out_points);

// # Safety
// `s` must be null or a string returned by this library.
void kieval_string_free(char *s);

// Message for the last failed call on this thread, or null. Valid until the
// next call on the same thread.
const char *kieval_last_error_message(void);

const char *kieval_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* KIEVAL_H */
