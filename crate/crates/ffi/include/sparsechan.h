#ifndef SPARSECHAN_H
#define SPARSECHAN_H

/* Generated by cbindgen from crates/ffi. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum ScStatus {
  SC_STATUS_OK = 0,
  SC_STATUS_NULL_POINTER = 1,
  SC_STATUS_INVALID_ARGUMENT = 2,
  SC_STATUS_NUMERICAL = 3,
  SC_STATUS_PANIC = 4,
} ScStatus;

typedef enum ScPrior {
  SC_PRIOR_BESSEL_K = 0,
  SC_PRIOR_RVM = 1,
  /**
   * Laplace hierarchy with rate 1.
   */
  SC_PRIOR_LAPLACE = 2,
} ScPrior;

/**
 * Delay-grid dictionary, `M` frequencies by `L` delays.
 */
typedef struct ScDictionary ScDictionary;

/**
 * Output of one greedy estimation run.
 */
typedef struct ScSblResult ScSblResult;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread; empty after a success.
 * The pointer stays valid until the next call on this thread.
 */
const char *sc_last_error_message(void);

/**
 * Builds `exp(-j 2 pi f_m tau_l)` for the given frequencies (Hz) and delays (s).
 *
 * # Safety
 * `freqs` and `taus` must point to `n_freqs` and `n_taus` doubles; `out` must be writable.
 */
enum ScStatus sc_dictionary_new(const double *freqs,
                                size_t n_freqs,
                                const double *taus,
                                size_t n_taus,
                                struct ScDictionary **out);

/**
 * # Safety
 * `dict` must come from [`sc_dictionary_new`] and not be used afterwards. Null is ignored.
 */
void sc_dictionary_free(struct ScDictionary *dict);

/**
 * Greedy evidence maximization of `y = Phi alpha + noise`.
 *
 * `y_re`/`y_im` hold the `m` pilot observations. A positive `fixed_lambda`
 * pins the noise precision; zero or negative estimates it.
 *
 * # Safety
 * `dict` must be a live handle, `y_re`/`y_im` must point to `m` doubles, `out` must be writable.
 */
enum ScStatus sc_fast_sbl_run(const struct ScDictionary *dict,
                              const double *y_re,
                              const double *y_im,
                              size_t m,
                              enum ScPrior prior,
                              double fixed_lambda,
                              struct ScSblResult **out);

/**
 * # Safety
 * `res` must come from [`sc_fast_sbl_run`] and not be used afterwards. Null is ignored.
 */
void sc_result_free(struct ScSblResult *res);

/**
 * Grid size `L` of the estimate.
 *
 * # Safety
 * `res` must be a live handle and `len` writable.
 */
enum ScStatus sc_result_len(const struct ScSblResult *res, size_t *len);

/**
 * Copies the posterior mean over the grid into `re`/`im`, which hold `len` doubles.
 *
 * # Safety
 * `res` must be a live handle; `re` and `im` must be writable for `len` doubles.
 */
enum ScStatus sc_result_alpha(const struct ScSblResult *res, double *re, double *im, size_t len);

/**
 * # Safety
 * `res` must be a live handle and `lambda` writable.
 */
enum ScStatus sc_result_lambda(const struct ScSblResult *res, double *lambda);

/**
 * Applied add / delete / re-estimate actions and the active-set size.
 *
 * # Safety
 * `res` must be a live handle; the output pointers must be writable.
 */
enum ScStatus sc_result_iterations(const struct ScSblResult *res,
                                   size_t *iterations,
                                   size_t *support_size,
                                   bool *converged);

/**
 * Maximizer of the per-basis objective for sparsity `s`, quality `q2 = |q|^2`
 * and prior `(epsilon, eta)`. `has_root` is false when no positive
 * stationary point improves on deleting the basis; `gamma` is then 0.
 *
 * # Safety
 * `gamma` and `has_root` must be writable.
 */
enum ScStatus sc_solve_gamma_cubic(double s,
                                   double q2,
                                   double epsilon,
                                   double eta,
                                   double *gamma,
                                   bool *has_root);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SPARSECHAN_H */
