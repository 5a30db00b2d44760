#ifndef HRLOAD_H
#define HRLOAD_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum HrlStatus {
  HRL_STATUS_OK = 0,
  HRL_STATUS_NULL_POINTER = 1,
  HRL_STATUS_INVALID_ARGUMENT = 2,
  HRL_STATUS_INSUFFICIENT_DATA = 3,
  HRL_STATUS_DEGENERATE = 4,
  HRL_STATUS_NON_FINITE = 5,
  HRL_STATUS_PARSE = 6,
  HRL_STATUS_SCHEMA = 7,
  HRL_STATUS_BUFFER_TOO_SMALL = 8,
  HRL_STATUS_PANIC = 9,
} HrlStatus;

typedef enum HrlRegion {
  HRL_REGION_INFEASIBLE = 0,
  HRL_REGION_NEAR_NORMAL = 1,
  HRL_REGION_NEAR_UNIFORM = 2,
  HRL_REGION_BETA_REGION = 3,
  HRL_REGION_OTHER = 4,
} HrlRegion;

// Result of a resampling run.
typedef struct HrlCloud HrlCloud;

// Trained activity model.
typedef struct HrlModel HrlModel;

// Streaming accumulator over every pushed value.
typedef struct HrlMoments HrlMoments;

// Fixed-length sliding window.
typedef struct HrlWindow HrlWindow;

typedef struct HrlSummary {
  uint64_t n;
  double mean;
  double std;
  double skewness;
  // Non-excess kurtosis (3 for a normal distribution).
  double kurtosis;
} HrlSummary;

typedef struct HrlPoint {
  double beta1;
  double beta2;
} HrlPoint;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Library version as a static NUL-terminated string.
const char *hrl_version(void);

// Copies the calling thread's last error message into `buf` (NUL
// terminated, truncated to `len - 1` bytes). Returns the full message
// length, so a return value `>= len` means truncation.
//
// # Safety
// `buf` must point to `len` writable bytes or be NULL with `len == 0`.
size_t hrl_last_error_message(char *buf, size_t len);

// Beat interval in ms to heart rate in bpm, rounded half up.
//
// # Safety
// `out_bpm` must be a valid pointer.
enum HrlStatus hrl_hb_to_hr(double hb_ms, uint32_t *out_bpm);

// Heart rate in bpm to beat interval in ms.
//
// # Safety
// `out_ms` must be a valid pointer.
enum HrlStatus hrl_hr_to_hb(uint32_t hr_bpm, double *out_ms);

// Two-pass moments of `len` values.
//
// # Safety
// `data` must point to `len` doubles; `out_summary` must be valid.
enum HrlStatus hrl_batch_moments(const double *data, size_t len, struct HrlSummary *out_summary);

// # Safety
// `out_handle` must be a valid pointer.
enum HrlStatus hrl_moments_new(struct HrlMoments **out_handle);

// # Safety
// `handle` must come from [`hrl_moments_new`] and not be used afterwards.
void hrl_moments_free(struct HrlMoments *handle);

// Pushes `len` values. Stops at the first non-finite value, leaving the
// earlier ones applied.
//
// # Safety
// `handle` must be live; `data` must point to `len` doubles.
enum HrlStatus hrl_moments_push(struct HrlMoments *handle, const double *data, size_t len);

// Folds `other` into `handle`; `other` is left unchanged.
//
// # Safety
// Both handles must be live.
enum HrlStatus hrl_moments_merge(struct HrlMoments *handle, const struct HrlMoments *other);

// # Safety
// `handle` must be live; `out_summary` must be valid.
enum HrlStatus hrl_moments_summary(const struct HrlMoments *handle, struct HrlSummary *out_summary);

// # Safety
// `out_handle` must be a valid pointer.
enum HrlStatus hrl_window_new(size_t capacity, struct HrlWindow **out_handle);

// # Safety
// `handle` must come from [`hrl_window_new`] and not be used afterwards.
void hrl_window_free(struct HrlWindow *handle);

// Pushes one value. When the window was full, the evicted value is
// written to `out_evicted` and `out_did_evict` is set to 1; either output
// may be NULL.
//
// # Safety
// `handle` must be live; non-NULL outputs must be valid.
enum HrlStatus hrl_window_push(struct HrlWindow *handle,
                               double value,
                               double *out_evicted,
                               int32_t *out_did_evict);

// # Safety
// `handle` must be live; `out_summary` must be valid.
enum HrlStatus hrl_window_summary(const struct HrlWindow *handle, struct HrlSummary *out_summary);

// Places a summary on the plane.
//
// # Safety
// Both pointers must be valid.
enum HrlStatus hrl_to_pearson(const struct HrlSummary *summary, struct HrlPoint *out_point);

// Distance to the normal landmark.
double hrl_metric1(struct HrlPoint point);

// Distance to the uniform landmark.
double hrl_metric2(struct HrlPoint point);

// # Safety
// `out_region` must be valid.
enum HrlStatus hrl_classify_region(struct HrlPoint point, double tol, enum HrlRegion *out_region);

// Resamples `len` values `trials` times. `subsample == 0` resamples at the
// input size. The result is identical for every `workers` value.
//
// # Safety
// `data` must point to `len` doubles; `out_handle` must be valid.
enum HrlStatus hrl_bootstrap(const double *data,
                             size_t len,
                             size_t trials,
                             size_t subsample,
                             uint64_t seed,
                             size_t workers,
                             struct HrlCloud **out_handle);

// # Safety
// `handle` must come from [`hrl_bootstrap`] and not be used afterwards.
void hrl_cloud_free(struct HrlCloud *handle);

// Number of non-degenerate trials; 0 for a NULL handle.
//
// # Safety
// `handle` must be live or NULL.
size_t hrl_cloud_len(const struct HrlCloud *handle);

// Copies the cloud points into `buf`, which must hold at least
// [`hrl_cloud_len`] entries.
//
// # Safety
// `handle` must be live; `buf` must point to `cap` writable points.
enum HrlStatus hrl_cloud_points(const struct HrlCloud *handle, struct HrlPoint *buf, size_t cap);

// # Safety
// `handle` must be live; outputs must be valid. `out_degenerate` may be NULL.
enum HrlStatus hrl_cloud_centroid(const struct HrlCloud *handle,
                                  struct HrlPoint *out_centroid,
                                  size_t *out_degenerate);

// Parses a model artifact from a NUL-terminated JSON string.
//
// # Safety
// `json` must be a valid C string; `out_handle` must be valid.
enum HrlStatus hrl_model_load_json(const char *json, struct HrlModel **out_handle);

// # Safety
// `handle` must come from [`hrl_model_load_json`] and not be used afterwards.
void hrl_model_free(struct HrlModel *handle);

// Number of raw features the model expects; 0 for a NULL handle.
//
// # Safety
// `handle` must be live or NULL.
size_t hrl_model_input_dim(const struct HrlModel *handle);

// Predicted activity code (real valued) for one raw feature row.
//
// # Safety
// `handle` must be live; `features` must point to `len` doubles.
enum HrlStatus hrl_model_predict(const struct HrlModel *handle,
                                 const double *features,
                                 size_t len,
                                 double *out_prediction);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* HRLOAD_H */
