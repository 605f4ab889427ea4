#ifndef MELODIC_H
#define MELODIC_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum MelodicStatus {
  MELODIC_STATUS_OK = 0,
  MELODIC_STATUS_NULL_POINTER = 1,
  MELODIC_STATUS_INVALID_ARGUMENT = 2,
  MELODIC_STATUS_NUMERICAL = 3,
  MELODIC_STATUS_BUFFER_TOO_SMALL = 4,
  MELODIC_STATUS_PANIC = 5,
} MelodicStatus;

/**
 * Predictors and binary responses prepared for fitting.
 */
typedef struct MelodicDataset MelodicDataset;

/**
 * A fitted model together with the metadata needed for prediction.
 */
typedef struct MelodicFit MelodicFit;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or null. The pointer stays
 * valid until the next call into the library from the same thread.
 */
const char *melodic_last_error(void);

/**
 * Build a dataset from an `n × p` predictor matrix and an `n × r` matrix of
 * 0/1 responses. Predictors are centered, and scaled to unit variance when
 * `standardize` is true.
 *
 * # Safety
 * `x` must point to `n * p` doubles, `y` to `n * r` bytes and `out` to writable storage.
 */
enum MelodicStatus melodic_dataset_new(const double *x,
                                       size_t n,
                                       size_t p,
                                       const uint8_t *y,
                                       size_t r,
                                       bool standardize,
                                       struct MelodicDataset **out);

/**
 * # Safety
 * `dataset` must come from `melodic_dataset_new` and not be used afterwards.
 */
void melodic_dataset_free(struct MelodicDataset *dataset);

/**
 * Fit an `m`-dimensional model. `assignment` is either null (unconstrained)
 * or an `r × m` row-major 0/1 matrix tying responses to dimensions. A
 * `max_iter` of zero or a non-positive `tol` keeps the defaults.
 *
 * # Safety
 * `dataset` must be a live handle, `assignment` null or `r * m` bytes, `out` writable.
 */
enum MelodicStatus melodic_fit(const struct MelodicDataset *dataset,
                               size_t m,
                               const uint8_t *assignment_matrix,
                               double tol,
                               size_t max_iter,
                               uint64_t seed,
                               struct MelodicFit **out);

/**
 * # Safety
 * `fit` must come from `melodic_fit` and not be used afterwards.
 */
void melodic_fit_free(struct MelodicFit *fit);

/**
 * Summary numbers of a fit; any output pointer may be null.
 *
 * # Safety
 * `fit` must be a live handle; non-null outputs must be writable.
 */
enum MelodicStatus melodic_fit_summary(const struct MelodicFit *fit,
                                       double *deviance,
                                       size_t *iterations,
                                       bool *converged);

/**
 * Shape of the fitted model; any output pointer may be null.
 *
 * # Safety
 * `fit` must be a live handle; non-null outputs must be writable.
 */
enum MelodicStatus melodic_fit_shape(const struct MelodicFit *fit, size_t *p, size_t *r, size_t *m);

/**
 * Copy `B` (`p × m`), `K` and `L` (both `r × m`) into row-major buffers of
 * the given lengths.
 *
 * # Safety
 * `fit` must be a live handle and each buffer must hold its stated length.
 */
enum MelodicStatus melodic_fit_copy_params(const struct MelodicFit *fit,
                                           double *b,
                                           size_t b_len,
                                           double *k,
                                           size_t k_len,
                                           double *l,
                                           size_t l_len);

/**
 * Probability of category 1 for each response, for one subject given on the
 * original predictor scale.
 *
 * # Safety
 * `x` must hold `p` doubles and `probabilities` room for `r` doubles.
 */
enum MelodicStatus melodic_fit_predict(const struct MelodicFit *fit,
                                       const double *x,
                                       size_t p,
                                       double *probabilities,
                                       size_t r);

/**
 * The fit as a JSON document. Release the string with `melodic_string_free`.
 *
 * # Safety
 * `fit` must be a live handle and `out` writable.
 */
enum MelodicStatus melodic_fit_to_json(const struct MelodicFit *fit, char **out);

/**
 * # Safety
 * `s` must come from this library and not be used afterwards.
 */
void melodic_string_free(char *s);

/**
 * Number of free parameters; `assignment` is null or an `r × m` 0/1 matrix.
 *
 * # Safety
 * `assignment` must be null or hold `r * m` bytes; `out` must be writable.
 */
enum MelodicStatus melodic_count_parameters(size_t p,
                                            size_t r,
                                            size_t m,
                                            const uint8_t *assignment_matrix,
                                            size_t *out);

/**
 * AIC and BIC from a deviance, parameter count and sample size.
 *
 * # Safety
 * `aic` and `bic` must be writable.
 */
enum MelodicStatus melodic_information_criteria(double deviance,
                                                size_t n_params,
                                                size_t n,
                                                double *aic,
                                                double *bic);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* MELODIC_H */
