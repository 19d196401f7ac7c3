#ifndef PUTARGETS_H
#define PUTARGETS_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes shared by every entry point.
 */
typedef enum PtStatus {
  PT_STATUS_OK = 0,
  PT_STATUS_NULL_POINTER = 1,
  PT_STATUS_VALIDATION = 2,
  PT_STATUS_BUDGET = 3,
  PT_STATUS_NOT_CONVERGED = 4,
  PT_STATUS_SCHEDULE_TOO_SHORT = 5,
  PT_STATUS_INSUFFICIENT = 6,
  PT_STATUS_PANIC = 7,
} PtStatus;

/**
 * Opaque dyadic histogram of the Bernoulli convolution.
 */
typedef struct PtHistogram PtHistogram;

/**
 * Opaque Cantor measure on codings.
 */
typedef struct PtMeasure PtMeasure;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copies the last error message of this thread into `buf` (NUL-terminated,
 * truncated to `len − 1` bytes). Returns the full message length.
 *
 * # Safety
 * `buf` must be null or point to `len` writable bytes.
 */
size_t pt_last_error(char *buf, size_t len);

/**
 * Closed-form dimension value of case 1, 2 or 3.
 *
 * # Safety
 * Out-pointers must be null or valid for writes.
 */
enum PtStatus pt_dim_formula(uint8_t case_index, double lambda, double gamma, double *out_value);

/**
 * Depth-`k` cylinders meeting `[x − ρλ^k, x + ρλ^k]`.
 *
 * # Safety
 * Out-pointers must be null or valid for writes.
 */
enum PtStatus pt_count_nk(double x, double rho, size_t k, double lambda, uint64_t *out_count);

/**
 * Depth-`k` prefixes of λ-expansions of `x`.
 *
 * # Safety
 * Out-pointers must be null or valid for writes.
 */
enum PtStatus pt_count_expansions(double x, double lambda, size_t k, uint64_t *out_count);

/**
 * `min |P(λ)|` over nonzero `{0, ±1}` polynomials of degree `n`.
 *
 * # Safety
 * Out-pointers must be null or valid for writes.
 */
enum PtStatus pt_min_poly_value(double lambda, size_t n, double *out_value);

/**
 * Builds the level-`level` histogram; `iterations == 0` picks the default.
 *
 * # Safety
 * Out-pointers must be null or valid for writes.
 */
enum PtStatus pt_histogram_new(double lambda,
                               uint32_t level,
                               size_t iterations,
                               struct PtHistogram **out_handle);

/**
 * # Safety
 * `h` must be null or a handle from [`pt_histogram_new`] not yet freed.
 */
void pt_histogram_free(struct PtHistogram *h);

/**
 * Number of bins, `2^level`.
 *
 * # Safety
 * Pointers must be null or valid.
 */
enum PtStatus pt_histogram_bins(const struct PtHistogram *h, size_t *out_bins);

/**
 * Copies `min(len, bins)` bin masses into `masses`.
 *
 * # Safety
 * `masses` must hold `len` writable doubles.
 */
enum PtStatus pt_histogram_masses(const struct PtHistogram *h, double *masses, size_t len);

/**
 * `ν([0, x])` with mass spread uniformly inside bins.
 *
 * # Safety
 * Pointers must be null or valid.
 */
enum PtStatus pt_histogram_cdf(const struct PtHistogram *h, double x, double *out_value);

/**
 * Empirical uniform lower exponent over all dyadic levels.
 *
 * # Safety
 * Pointers must be null or valid.
 */
enum PtStatus pt_histogram_frostman(const struct PtHistogram *h, double *out_value);

/**
 * Builds the case-`case_index` measure for centre `z` (0/1 bytes) and the
 * explicit return times `returns` with growth factor `growth`.
 *
 * # Safety
 * Array arguments must hold the stated number of elements.
 */
enum PtStatus pt_measure_new(uint8_t case_index,
                             double lambda,
                             double gamma,
                             const uint8_t *z,
                             size_t z_len,
                             const size_t *returns,
                             size_t returns_len,
                             size_t growth,
                             struct PtMeasure **out_handle);

/**
 * # Safety
 * `m` must be null or a handle from [`pt_measure_new`] not yet freed.
 */
void pt_measure_free(struct PtMeasure *m);

/**
 * Deepest coding length the schedule determines.
 *
 * # Safety
 * Pointers must be null or valid.
 */
enum PtStatus pt_measure_coverage(const struct PtMeasure *m, size_t *out_depth);

/**
 * Mass of the cylinder of `w`.
 *
 * # Safety
 * `w` must hold `len` bytes.
 */
enum PtStatus pt_measure_weight(const struct PtMeasure *m,
                                const uint8_t *w,
                                size_t len,
                                double *out_value);

/**
 * Writes a `μ`-random coding of length `depth` into `digits`.
 *
 * # Safety
 * `digits` must hold `depth` writable bytes.
 */
enum PtStatus pt_measure_sample(const struct PtMeasure *m,
                                size_t depth,
                                uint64_t seed,
                                uint8_t *digits);

/**
 * Bounds on `μ(Q(π(x), R))`, the cube of side `2R`.
 *
 * # Safety
 * `x` must hold `len` bytes; out-pointers must be null or valid.
 */
enum PtStatus pt_measure_ball(const struct PtMeasure *m,
                              const uint8_t *x,
                              size_t len,
                              double radius,
                              double *out_lower,
                              double *out_upper);

/**
 * Stratified Monte Carlo estimate of the `t`-energy at coding depth `depth`.
 *
 * # Safety
 * Out-pointers must be null or valid.
 */
enum PtStatus pt_measure_energy(const struct PtMeasure *m,
                                double t,
                                size_t pairs,
                                size_t depth,
                                uint64_t seed,
                                double *out_mean,
                                double *out_std_error);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* PUTARGETS_H */
