#ifndef OIA_H
#define OIA_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/*
 Result code of every call.
 */
typedef enum OiaStatus {
  OIA_STATUS_OK = 0,
  OIA_STATUS_NULL_POINTER = 1,
  OIA_STATUS_INVALID_ARGUMENT = 2,
  OIA_STATUS_DEGENERATE_CHANNEL = 3,
  OIA_STATUS_SHAPE_MISMATCH = 4,
  OIA_STATUS_LAMBERT_DOMAIN = 5,
  OIA_STATUS_TOO_FEW_USERS = 6,
  OIA_STATUS_ODD_BIT_SPLIT = 7,
  OIA_STATUS_BITS_OVERFLOW = 8,
  OIA_STATUS_UNKNOWN_EXPERIMENT = 9,
  OIA_STATUS_CONFIG = 10,
  OIA_STATUS_IO = 11,
  OIA_STATUS_PANIC = 12,
} OiaStatus;

/*
 Opaque experiment handle.
 */
typedef struct OiaExperiment OiaExperiment;

/*
 Complex number laid out as two doubles.
 */
typedef struct OiaComplex {
  double re;
  double im;
} OiaComplex;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Message of the last failed call on this thread; empty if none. The
 pointer stays valid until the next failing call on the same thread.
 */
const char *oia_last_error_message(void);

/*
 Library version as a static NUL-terminated string.
 */
const char *oia_version(void);

/*
 Creates a handle with the registered defaults of `experiment`.

 # Safety
 `experiment` must be a NUL-terminated string; `out` must be writable.
 */
enum OiaStatus oia_experiment_new(const char *experiment, struct OiaExperiment **out);

/*
 Creates a handle from config text (`key = value` lines). `experiment`
 may be null when the text names it.

 # Safety
 String arguments must be NUL-terminated or (for `experiment`) null;
 `out` must be writable.
 */
enum OiaStatus oia_experiment_from_config(const char *experiment,
                                          const char *config,
                                          struct OiaExperiment **out);

/*
 # Safety
 `h` must come from `oia_experiment_new`/`oia_experiment_from_config`.
 */
enum OiaStatus oia_experiment_set_seed(struct OiaExperiment *h, uint64_t seed);

/*
 # Safety
 `h` must be a live handle.
 */
enum OiaStatus oia_experiment_set_trials(struct OiaExperiment *h, size_t trials);

/*
 Runs the experiment and writes its CSV to `path` (temp file + rename).

 # Safety
 `h` must be a live handle and `path` a NUL-terminated string.
 */
enum OiaStatus oia_experiment_run_to_csv(struct OiaExperiment *h, const char *path);

/*
 Releases a handle. Null is ignored.

 # Safety
 `h` must be null or a live handle, not used afterwards.
 */
void oia_experiment_free(struct OiaExperiment *h);

/*
 1-bit feedback threshold. `method` is one of `closed_form_d1`,
 `lambert`, `asymptotic`, `numeric`.

 # Safety
 `method` must be NUL-terminated; `out` writable.
 */
enum OiaStatus oia_threshold(const char *method, size_t nr, size_t d, uint64_t k, double *out);

/*
 Lambert W on branch 0 or -1.

 # Safety
 `out` must be writable.
 */
enum OiaStatus oia_lambert_w(int32_t branch, double z, double *out);

/*
 # Safety
 `out` must be writable.
 */
enum OiaStatus oia_ball_volume(size_t n, size_t d, double *out);

/*
 # Safety
 `out` must be writable.
 */
enum OiaStatus oia_metric_cdf(double x, size_t n, size_t d, double *out);

/*
 # Safety
 `out` must be writable.
 */
enum OiaStatus oia_outage_probability(double x, uint64_t k, size_t n, size_t d, double *out);

/*
 # Safety
 `out` must be writable.
 */
enum OiaStatus oia_expected_metric_one_bit(double x, uint64_t k, size_t n, size_t d, double *out);

/*
 Squared chordal distance between the column spans of two `n × d`
 column-major matrices (any full-rank bases).

 # Safety
 `a` and `b` must each point to `n * d` values; `out` writable.
 */
enum OiaStatus oia_chordal_distance_sq(const struct OiaComplex *a,
                                       const struct OiaComplex *b,
                                       size_t n,
                                       size_t d,
                                       double *out);

/*
 FLOPs per cell for `scheme` (`oia_1bit`, `ia_joint`, `ia_individual`).
 `second` is `d` for OIA and `nt` for IA.

 # Safety
 `scheme` must be NUL-terminated; `out` writable.
 */
enum OiaStatus oia_flops(const char *scheme,
                         uint64_t nr,
                         uint64_t second,
                         uint32_t n_bits,
                         uint64_t *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* OIA_H */
