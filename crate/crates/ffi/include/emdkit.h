#ifndef EMDKIT_H
#define EMDKIT_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum EmdkitStatus {
  EMDKIT_STATUS_OK = 0,
  EMDKIT_STATUS_NULL_POINTER = 1,
  EMDKIT_STATUS_INVALID_ARGUMENT = 2,
  EMDKIT_STATUS_INSUFFICIENT_DATA = 3,
  EMDKIT_STATUS_NO_ENVELOPE = 4,
  EMDKIT_STATUS_RANK_DEFICIENT = 5,
  EMDKIT_STATUS_UNDEFINED_RATIO = 6,
  EMDKIT_STATUS_OUT_OF_RANGE = 7,
  EMDKIT_STATUS_PANIC = 8,
} EmdkitStatus;

typedef enum EmdkitVariant {
  EMDKIT_VARIANT_EMD = 0,
  EMDKIT_VARIANT_EEMD = 1,
  EMDKIT_VARIANT_EPEMD = 2,
  EMDKIT_VARIANT_MEMD = 3,
  EMDKIT_VARIANT_EPMEMD = 4,
  EMDKIT_VARIANT_OIMF = 5,
  EMDKIT_VARIANT_FOIMF = 6,
  EMDKIT_VARIANT_ROIMF = 7,
  EMDKIT_VARIANT_FOUIMF = 8,
  EMDKIT_VARIANT_ROUIMF = 9,
} EmdkitVariant;

/**
 * Opaque decomposition handle; keeps the input signal for reporting.
 */
typedef struct EmdkitDecomposition EmdkitDecomposition;

/**
 * Sifting and ensemble parameters. Fill with [`emdkit_options_default`].
 */
typedef struct EmdkitOptions {
  double sd_threshold;
  size_t max_sift_iterations;
  /**
   * Zero means no limit.
   */
  size_t max_imfs;
  double noise_stddev_ratio;
  size_t ensemble_size;
  uint64_t seed;
} EmdkitOptions;

typedef struct EmdkitOrthoSummary {
  double io_total;
  double pee;
  double signal_energy;
  double total_component_energy;
  double reconstruction_error;
} EmdkitOrthoSummary;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message describing the last failure on this thread, or null. The pointer
 * stays valid until the next failing call on the same thread.
 */
const char *emdkit_last_error(void);

/**
 * NUL-terminated library version.
 */
const char *emdkit_version(void);

/**
 * # Safety
 * `out` must be null or point to writable storage for one `EmdkitOptions`.
 */
enum EmdkitStatus emdkit_options_default(struct EmdkitOptions *out);

/**
 * Decomposes `len` samples taken at `sample_rate` Hz. `options` may be
 * null for defaults. On success `*out` receives a new handle.
 *
 * # Safety
 * `samples` must point to `len` readable doubles, `options` must be null
 * or valid, and `out` must be a valid pointer.
 */
enum EmdkitStatus emdkit_decompose(const double *samples,
                                   size_t len,
                                   double sample_rate,
                                   enum EmdkitVariant variant,
                                   const struct EmdkitOptions *options,
                                   struct EmdkitDecomposition **out);

/**
 * # Safety
 * `handle` must be null or a pointer returned by [`emdkit_decompose`] that
 * has not been freed.
 */
void emdkit_decomposition_free(struct EmdkitDecomposition *handle);

/**
 * Number of IMFs (the residue is not counted).
 *
 * # Safety
 * `handle` must be null or a live handle.
 */
size_t emdkit_decomposition_imf_count(const struct EmdkitDecomposition *handle);

/**
 * Samples per component.
 *
 * # Safety
 * `handle` must be null or a live handle.
 */
size_t emdkit_decomposition_len(const struct EmdkitDecomposition *handle);

/**
 * Constant split off by the mean-removed orderings; zero otherwise.
 *
 * # Safety
 * `handle` must be null or a live handle.
 */
double emdkit_decomposition_dc_constant(const struct EmdkitDecomposition *handle);

/**
 * Copies component `index` into `out`. Indices below the IMF count select
 * IMFs; the index equal to it selects the residue.
 *
 * # Safety
 * `handle` must be a live handle and `out` must point to `out_len`
 * writable doubles.
 */
enum EmdkitStatus emdkit_decomposition_copy_component(const struct EmdkitDecomposition *handle,
                                                      size_t index,
                                                      double *out,
                                                      size_t out_len);

/**
 * Leakage summary of the decomposition against its input.
 *
 * # Safety
 * `handle` must be a live handle and `out` a valid pointer.
 */
enum EmdkitStatus emdkit_decomposition_ortho_summary(const struct EmdkitDecomposition *handle,
                                                     struct EmdkitOrthoSummary *out);

/**
 * Instantaneous amplitude and frequency (Hz) of `len` samples. Either
 * output may be null; non-null outputs must hold `len` doubles.
 *
 * # Safety
 * `samples` must point to `len` readable doubles; non-null outputs must
 * point to `len` writable doubles.
 */
enum EmdkitStatus emdkit_analytic_signal(const double *samples,
                                         size_t len,
                                         double sample_rate,
                                         double *amplitude,
                                         double *inst_freq);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* EMDKIT_H */
