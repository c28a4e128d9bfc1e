#ifndef CHERNOFF_LAB_H
#define CHERNOFF_LAB_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Exact semigroup used as reference by [`cl_sup_error`].
 */
typedef enum ClOracleKind {
  CL_ORACLE_KIND_TRANSLATION = 0,
  CL_ORACLE_KIND_HEAT_SPECTRAL = 1,
  CL_ORACLE_KIND_HEAT_QUADRATURE = 2,
} ClOracleKind;

/**
 * Status code returned by every function.
 */
typedef enum ClStatus {
  CL_STATUS_OK = 0,
  CL_STATUS_NULL_POINTER = 1,
  CL_STATUS_INVALID_UTF8 = 2,
  CL_STATUS_CONSTRUCTION = 3,
  CL_STATUS_EVALUATION = 4,
  CL_STATUS_RESOURCE = 5,
  CL_STATUS_DOMAIN = 6,
  CL_STATUS_CONFIGURATION = 7,
  CL_STATUS_DEGENERATE_FIT = 8,
  CL_STATUS_USAGE = 9,
  CL_STATUS_IO = 10,
  CL_STATUS_BUFFER_TOO_SMALL = 11,
  CL_STATUS_PANIC = 12,
} ClStatus;

/**
 * Opaque handle to a Chernoff family.
 */
typedef struct ClFamily ClFamily;

/**
 * Opaque handle to a finite shift mixture.
 */
typedef struct ClMixture ClMixture;

/**
 * Least-squares fit of `log error = c - p log n`.
 */
typedef struct ClRateFit {
  double exponent;
  double log_intercept;
  double r_squared;
  uint64_t n_min;
  uint64_t n_max;
  size_t points;
} ClRateFit;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copies the last error message of this thread into `buf` as a
 * NUL-terminated string, truncating to `cap - 1` bytes. Returns the full
 * message length in bytes, excluding the terminator. `buf` may be null to
 * query the length.
 *
 * # Safety
 * `buf` must be null or point to `cap` writable bytes.
 */
size_t cl_last_error_message(char *buf, size_t cap);

/**
 * Builds a mixture from `len` offsets and weights.
 *
 * # Safety
 * `offsets` and `weights` must point to `len` readable doubles; `out` must be
 * writable.
 */
enum ClStatus cl_mixture_new(const double *offsets,
                             const double *weights,
                             size_t len,
                             struct ClMixture **out_mixture);

/**
 * Releases a mixture. Null is ignored.
 *
 * # Safety
 * `m` must be null or a handle from this library that was not freed yet.
 */
void cl_mixture_free(struct ClMixture *m);

/**
 * Number of atoms, or 0 for a null handle.
 *
 * # Safety
 * `m` must be null or a live handle.
 */
size_t cl_mixture_len(const struct ClMixture *m);

/**
 * Copies the atoms, sorted by offset, into caller buffers of length `cap`.
 *
 * # Safety
 * `m` must be a live handle; `offsets` and `weights` must point to `cap`
 * writable doubles.
 */
enum ClStatus cl_mixture_atoms(const struct ClMixture *m,
                               double *offsets,
                               double *weights,
                               size_t cap);

/**
 * Composition `a * b`.
 *
 * # Safety
 * `a` and `b` must be live handles; `out_mixture` must be writable.
 */
enum ClStatus cl_mixture_convolve(const struct ClMixture *a,
                                  const struct ClMixture *b,
                                  struct ClMixture **out_mixture);

/**
 * n-fold composition, `n >= 1`.
 *
 * # Safety
 * `m` must be a live handle; `out_mixture` must be writable.
 */
enum ClStatus cl_mixture_power(const struct ClMixture *m,
                               uint64_t n,
                               struct ClMixture **out_mixture);

/**
 * Evaluates `(M f)(x)` for a catalog function such as `"sine:1"`.
 *
 * # Safety
 * `m` must be a live handle, `function` a NUL-terminated string and
 * `out_value` writable.
 */
enum ClStatus cl_mixture_apply(const struct ClMixture *m,
                               const char *function,
                               double x,
                               double *out_value);

/**
 * Raw moment `sum w s^k`.
 *
 * # Safety
 * `m` must be a live handle and `out_value` writable.
 */
enum ClStatus cl_mixture_moment(const struct ClMixture *m, uint32_t k, double *out_value);

/**
 * Sup-norm operator norm `sum |w|`.
 *
 * # Safety
 * `m` must be a live handle and `out_value` writable.
 */
enum ClStatus cl_mixture_operator_norm(const struct ClMixture *m, double *out_value);

/**
 * Characteristic function `sum w e^{iks}`.
 *
 * # Safety
 * `m` must be a live handle; `out_re` and `out_im` must be writable.
 */
enum ClStatus cl_mixture_charfn(const struct ClMixture *m,
                                double k,
                                double *out_re,
                                double *out_im);

/**
 * Parses a family spec such as `"heat_S"` or `"quadratic_shift:1"`. `a` is
 * the diffusion coefficient used by the heat families.
 *
 * # Safety
 * `spec` must be a NUL-terminated string and `out_family` writable.
 */
enum ClStatus cl_family_new(const char *spec, double a, struct ClFamily **out_family);

/**
 * Releases a family. Null is ignored.
 *
 * # Safety
 * `f` must be null or a handle from this library that was not freed yet.
 */
void cl_family_free(struct ClFamily *f);

/**
 * The mixture `G(t)`.
 *
 * # Safety
 * `f` must be a live handle and `out_mixture` writable.
 */
enum ClStatus cl_family_build(const struct ClFamily *f, double t, struct ClMixture **out_mixture);

/**
 * The mixture `G(t/n)^n`.
 *
 * # Safety
 * `f` must be a live handle and `out_mixture` writable.
 */
enum ClStatus cl_family_chernoff_power(const struct ClFamily *f,
                                       double t,
                                       uint64_t n,
                                       struct ClMixture **out_mixture);

/**
 * `max_x |G(t/n)^n f(x) - T(t) f(x)|` over `points` equispaced points of
 * `[x_min, x_max]`. `a` is the oracle's diffusion coefficient and `nodes`
 * its quadrature size; both are ignored where they do not apply.
 *
 * # Safety
 * `family` must be a live handle, `function` a NUL-terminated string and
 * `out_value` writable.
 */
enum ClStatus cl_sup_error(const struct ClFamily *family,
                           const char *function,
                           enum ClOracleKind oracle,
                           double a,
                           size_t nodes,
                           double t,
                           uint64_t n,
                           double x_min,
                           double x_max,
                           size_t points,
                           double *out_value);

/**
 * Fits `error ~ C n^-p` to the pairs with `n >= n_min_cut`.
 *
 * # Safety
 * `ns` and `errors` must point to `len` readable values; `out_fit` must be
 * writable.
 */
enum ClStatus cl_fit_power_law(const uint64_t *ns,
                               const double *errors,
                               size_t len,
                               uint64_t n_min_cut,
                               struct ClRateFit *out_fit);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CHERNOFF_LAB_H */
