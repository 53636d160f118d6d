#ifndef MH_METRICS_H
#define MH_METRICS_H

/* Generated by cbindgen from the mh-metrics-ffi crate; edit there, not here. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// How counts are turned into cell probabilities.
typedef enum {
  // Sample proportions, smoothed only when a cut sits on the boundary.
  MH_ESTIMATOR_AUTO = 0,
  // Sample proportions, never smoothed.
  MH_ESTIMATOR_SAMPLE = 1,
  // Dirichlet-smoothed proportions; see the `alpha` argument.
  MH_ESTIMATOR_BAYES = 2,
} MhEstimator;

// Result of every fallible call in this library.
typedef enum {
  // The call succeeded.
  MH_STATUS_OK = 0,
  // A required pointer argument was null.
  MH_STATUS_NULL_POINTER = 1,
  // The input could not be parsed or violates a precondition.
  MH_STATUS_INPUT_ERROR = 2,
  // The measure or interval is undefined for this table.
  MH_STATUS_UNDEFINED = 3,
  // An output could not be produced.
  MH_STATUS_IO_ERROR = 4,
  // A string argument was not valid UTF-8.
  MH_STATUS_UTF8_ERROR = 5,
  // An internal invariant failed; file a bug.
  MH_STATUS_INTERNAL_ERROR = 6,
} MhStatus;

// Opaque table of counts.
typedef struct MhTable MhTable;

// A point estimate with its large-sample interval.
//
// When `degenerate` is nonzero the table is at marginal homogeneity at
// some cut: `estimate` is still valid but `se`, `ci_low`, and `ci_high`
// are NaN. `alpha` is NaN unless `used_bayes` is nonzero.
typedef struct {
  // Point estimate of the measure.
  double estimate;
  // Standard error, or NaN when degenerate.
  double se;
  // Lower interval end, or NaN when degenerate.
  double ci_low;
  // Upper interval end, or NaN when degenerate.
  double ci_high;
  // Confidence level the interval was built at.
  double level;
  // Smoothing weight that was applied, or NaN.
  double alpha;
  // Total count behind the estimate.
  uint64_t n;
  // 1 when the interval is unavailable because the table sits at
  // marginal homogeneity at some cut.
  uint8_t degenerate;
  // 1 when smoothed proportions were used.
  uint8_t used_bayes;
} MhInterval;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message describing the most recent failure on this thread, or null when
// the last call succeeded. The pointer is valid until the next call into
// this library from the same thread; do not free it.
const char *mh_last_error_message(void);

// Parses a square table of counts from CSV text (one row per line, an
// optional header line is detected and skipped).
//
// On success writes a table handle to `out`; release it with
// `mh_table_free`.
//
// # Safety
// `text` must point to a NUL-terminated byte string and `out` must be
// valid for one pointer write.
MhStatus mh_table_parse_csv(const char *text, MhTable **out);

// Builds a table from a row-major `r x r` grid of counts.
//
// # Safety
// `counts` must point to `r * r` readable `uint64_t` values and `out`
// must be valid for one pointer write.
MhStatus mh_table_from_counts(const uint64_t *counts, size_t r, MhTable **out);

// Releases a table handle. Passing null is a no-op.
//
// # Safety
// `table` must be a handle produced by this library that has not been
// freed yet, or null.
void mh_table_free(MhTable *table);

// Number of categories of the table, or 0 for a null handle.
//
// # Safety
// `table` must be a live handle from this library, or null.
size_t mh_table_dim(const MhTable *table);

// Total count of the table, or 0 for a null handle.
//
// # Safety
// `table` must be a live handle from this library, or null.
uint64_t mh_table_total(const MhTable *table);

// Computes the summary measure of departure from marginal homogeneity,
// in `[0, 1]`.
//
// # Safety
// `table` must be a live handle from this library and `out` must be valid
// for one `double` write.
MhStatus mh_gamma(const MhTable *table, MhEstimator estimator, double alpha, double *out);

// Computes the point estimate and its large-sample confidence interval.
//
// Returns `MhStatus::Ok` with `out->degenerate = 1` (and NaN interval
// fields) when the table sits exactly at marginal homogeneity at some cut.
//
// # Safety
// `table` must be a live handle from this library and `out` must be valid
// for one `MhInterval` write.
MhStatus mh_confidence_interval(const MhTable *table,
                                MhEstimator estimator,
                                double alpha,
                                double level,
                                MhInterval *out);

// Produces the full analysis report as a JSON string.
//
// On success `*out` receives a NUL-terminated string owned by the caller;
// release it with `mh_string_free`.
//
// # Safety
// `table` must be a live handle from this library and `out` must be valid
// for one pointer write.
MhStatus mh_analyze_json(const MhTable *table,
                         MhEstimator estimator,
                         double alpha,
                         double level,
                         char **out);

// Renders the per-cut panel grid as an SVG string with the default style.
//
// A table with no off-diagonal mass still renders: every panel shows
// "n/a". On success `*out` receives a NUL-terminated string owned by the
// caller; release it with `mh_string_free`.
//
// # Safety
// `table` must be a live handle from this library and `out` must be valid
// for one pointer write.
MhStatus mh_render_svg(const MhTable *table, MhEstimator estimator, double alpha, char **out);

// Population value of the measure for a latent bivariate normal scenario
// with standard margins, shift `d`, and correlation `rho`, discretized at
// `cutoffs`. Passing `cutoffs = NULL` with `n_cutoffs = 0` selects the
// default five cut points.
//
// # Safety
// `cutoffs` must point to `n_cutoffs` readable doubles (or be null with
// `n_cutoffs = 0`) and `out` must be valid for one `double` write.
MhStatus mh_true_measure(double d,
                         double rho,
                         const double *cutoffs,
                         size_t n_cutoffs,
                         double *out);

// Releases a string produced by this library. Passing null is a no-op.
//
// # Safety
// `s` must be a string produced by this library that has not been freed
// yet, or null.
void mh_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* MH_METRICS_H */
