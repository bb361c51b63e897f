/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#ifndef PDC_H
#define PDC_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum PdcStatus {
  PDC_STATUS_OK = 0,
  PDC_STATUS_NULL_POINTER = 1,
  PDC_STATUS_INVALID_ARGUMENT = 2,
  PDC_STATUS_PARSE = 3,
  PDC_STATUS_DIMENSION_MISMATCH = 4,
  PDC_STATUS_ZERO_KERNEL = 5,
  PDC_STATUS_NOT_NORMALIZED = 6,
  PDC_STATUS_GAMMA_OUT_OF_RANGE = 7,
  PDC_STATUS_DEGENERATE_SERIES = 8,
  PDC_STATUS_EFFICIENCY_OUT_OF_RANGE = 9,
  PDC_STATUS_NUMERICAL = 10,
  PDC_STATUS_IO = 11,
  PDC_STATUS_BUFFER_TOO_SMALL = 12,
  PDC_STATUS_PANIC = 13,
} PdcStatus;

/**
 * Photon-number distribution handle.
 */
typedef struct PdcPnd PdcPnd;

/**
 * Schmidt spectrum handle.
 */
typedef struct PdcSpectrum PdcSpectrum;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a NUL-terminated string with static lifetime.
 */
const char *pdc_version(void);

/**
 * Message of the last failed call on this thread, or null. The pointer stays
 * valid until the next failing call on the same thread.
 */
const char *pdc_last_error(void);

/**
 * Spectrum of a Gaussian SDF by SVD on a `grid × grid` sampling.
 *
 * # Safety
 * `out` must be valid for writes.
 */
enum PdcStatus pdc_spectrum_gaussian_svd(double sigma_x2,
                                         double sigma_y2,
                                         double theta,
                                         size_t grid,
                                         double eps_lambda,
                                         struct PdcSpectrum **out);

/**
 * Closed-form spectrum of a Gaussian SDF.
 *
 * # Safety
 * `out` must be valid for writes.
 */
enum PdcStatus pdc_spectrum_gaussian_mehler(double sigma_x2,
                                            double sigma_y2,
                                            double theta,
                                            double eps_lambda,
                                            struct PdcSpectrum **out);

/**
 * Spectrum of a tabulated kernel (`.csv` or `.json`), normalized first
 * unless `normalize` is false.
 *
 * # Safety
 * `path` must be a NUL-terminated string; `out` must be valid for writes.
 */
enum PdcStatus pdc_spectrum_from_kernel_file(const char *path,
                                             bool normalize,
                                             double eps_lambda,
                                             struct PdcSpectrum **out);

/**
 * Spectrum from explicit weights (sorted internally, sum at most one).
 *
 * # Safety
 * `values` must point to `len` readable doubles; `out` must be valid for writes.
 */
enum PdcStatus pdc_spectrum_from_eigenvalues(const double *values,
                                             size_t len,
                                             struct PdcSpectrum **out);

/**
 * Number of kept modes; 0 for a null handle.
 *
 * # Safety
 * `s` must be null or a live spectrum handle.
 */
size_t pdc_spectrum_len(const struct PdcSpectrum *s);

/**
 * Copies the eigenvalues, largest first, into `buf`.
 *
 * # Safety
 * `s` must be a live handle; `buf` must be valid for `len` writes.
 */
enum PdcStatus pdc_spectrum_eigenvalues(const struct PdcSpectrum *s, double *buf, size_t len);

/**
 * Schmidt number `1/Σλ²`; NaN for a null handle.
 *
 * # Safety
 * `s` must be null or a live spectrum handle.
 */
double pdc_spectrum_schmidt_number(const struct PdcSpectrum *s);

/**
 * Weight discarded by the eigenvalue cutoff; NaN for a null handle.
 *
 * # Safety
 * `s` must be null or a live spectrum handle.
 */
double pdc_spectrum_residual(const struct PdcSpectrum *s);

/**
 * # Safety
 * `s` must be null or a handle not yet freed.
 */
void pdc_spectrum_free(struct PdcSpectrum *s);

/**
 * Coupling constant giving mean photon number `mean`.
 *
 * # Safety
 * `s` must be a live handle; `out` must be valid for writes.
 */
enum PdcStatus pdc_solve_coupling(const struct PdcSpectrum *s, double mean, double *out);

/**
 * Single-beam distribution, truncated once the remaining mass is below `tail`.
 *
 * # Safety
 * `s` must be a live handle; `out` must be valid for writes.
 */
enum PdcStatus pdc_pnd_from_spectrum(const struct PdcSpectrum *s,
                                     double coupling,
                                     double tail,
                                     struct PdcPnd **out);

/**
 * Single-beam distribution on `0..=n_max`.
 *
 * # Safety
 * `s` must be a live handle; `out` must be valid for writes.
 */
enum PdcStatus pdc_pnd_from_spectrum_nmax(const struct PdcSpectrum *s,
                                          double coupling,
                                          size_t n_max,
                                          struct PdcPnd **out);

/**
 * Distribution from explicit probabilities and tail bound.
 *
 * # Safety
 * `probs` must point to `len` readable doubles; `out` must be valid for writes.
 */
enum PdcStatus pdc_pnd_from_probs(const double *probs,
                                  size_t len,
                                  double tail,
                                  struct PdcPnd **out);

/**
 * Thermal law with the given mean on `0..=n_max`.
 *
 * # Safety
 * `out` must be valid for writes.
 */
enum PdcStatus pdc_reference_thermal(double mean, size_t n_max, struct PdcPnd **out);

/**
 * Poisson law with the given mean on `0..=n_max`.
 *
 * # Safety
 * `out` must be valid for writes.
 */
enum PdcStatus pdc_reference_poisson(double mean, size_t n_max, struct PdcPnd **out);

/**
 * Number of stored probabilities (`n_max + 1`); 0 for a null handle.
 *
 * # Safety
 * `p` must be null or a live distribution handle.
 */
size_t pdc_pnd_len(const struct PdcPnd *p);

/**
 * Copies `p(0..=n_max)` into `buf`.
 *
 * # Safety
 * `p` must be a live handle; `buf` must be valid for `len` writes.
 */
enum PdcStatus pdc_pnd_probs(const struct PdcPnd *p, double *buf, size_t len);

/**
 * Bound on the mass beyond `n_max`; NaN for a null handle.
 *
 * # Safety
 * `p` must be null or a live distribution handle.
 */
double pdc_pnd_tail(const struct PdcPnd *p);

/**
 * Mean over the stored support; NaN for a null handle.
 *
 * # Safety
 * `p` must be null or a live distribution handle.
 */
double pdc_pnd_mean(const struct PdcPnd *p);

/**
 * # Safety
 * `p` must be null or a handle not yet freed.
 */
void pdc_pnd_free(struct PdcPnd *p);

/**
 * Binomial thinning with detection efficiency `eta`.
 *
 * # Safety
 * `p` must be a live handle; `out` must be valid for writes.
 */
enum PdcStatus pdc_pnd_apply_loss(const struct PdcPnd *p, double eta, struct PdcPnd **out);

/**
 * Non-negative least-squares estimate of the distribution before loss.
 * `residual` may be null.
 *
 * # Safety
 * `measured` must be a live handle; `out` must be valid for writes and
 * `residual` null or valid for writes.
 */
enum PdcStatus pdc_pnd_invert_loss(const struct PdcPnd *measured,
                                   double eta,
                                   size_t n_max,
                                   struct PdcPnd **out,
                                   double *residual);

/**
 * Joint signal+idler distribution (odd entries zero).
 *
 * # Safety
 * `p` must be a live handle; `out` must be valid for writes.
 */
enum PdcStatus pdc_pnd_joint(const struct PdcPnd *p, struct PdcPnd **out);

/**
 * `Σ|p1(n) - p2(n)|`.
 *
 * # Safety
 * `p1`, `p2` must be live handles; `out` must be valid for writes.
 */
enum PdcStatus pdc_variational_distance(const struct PdcPnd *p1,
                                        const struct PdcPnd *p2,
                                        double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* PDC_H */
