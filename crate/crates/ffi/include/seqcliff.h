#ifndef SEQCLIFF_H
#define SEQCLIFF_H

/* Generated by cbindgen from crates/ffi/src. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/*
 Result codes.
 */
typedef enum SeqcliffStatus {
  SEQCLIFF_STATUS_OK = 0,
  SEQCLIFF_STATUS_NULL_POINTER = 1,
  SEQCLIFF_STATUS_INVALID_UTF8 = 2,
  SEQCLIFF_STATUS_PARAMETER = 3,
  SEQCLIFF_STATUS_VALIDATION = 4,
  SEQCLIFF_STATUS_SIZE = 5,
  SEQCLIFF_STATUS_DOMAIN = 6,
  SEQCLIFF_STATUS_FIT = 7,
  SEQCLIFF_STATUS_NUMERIC = 8,
  SEQCLIFF_STATUS_CONFIG = 9,
  SEQCLIFF_STATUS_IO = 10,
  SEQCLIFF_STATUS_EMPTY_INPUT = 11,
  SEQCLIFF_STATUS_PANIC = 12,
} SeqcliffStatus;

/*
 Task families for [`seqcliff_task_generate`].
 */
typedef enum SeqcliffTaskKind {
  SEQCLIFF_TASK_KIND_CYCLIC = 0,
  SEQCLIFF_TASK_KIND_ADDITION = 1,
  SEQCLIFF_TASK_KIND_PAULI = 2,
} SeqcliffTaskKind;

/*
 Fitting method for [`seqcliff_fit`].
 */
typedef enum SeqcliffFitMethod {
  SEQCLIFF_FIT_METHOD_TRANSFORMED = 0,
  SEQCLIFF_FIT_METHOD_BINOMIAL_ML = 1,
} SeqcliffFitMethod;

/*
 Opaque scaling-law fit.
 */
typedef struct SeqcliffFit SeqcliffFit;

/*
 Opaque Pauli string.
 */
typedef struct SeqcliffPauliString SeqcliffPauliString;

/*
 Opaque task instance with its input and expected answer.
 */
typedef struct SeqcliffTask SeqcliffTask;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Message of the last failure on this thread; empty if none. Valid until
 the next failing call on the same thread.
 */
const char *seqcliff_last_error(void);

/*
 Releases a string returned by this library. Null is ignored.

 # Safety
 `s` must come from this library and not have been freed.
 */
void seqcliff_string_free(char *s);

/*
 Parses a canonical Pauli string such as `"+i XZ"`.

 # Safety
 `text` must be a valid C string; `out` must be writable.
 */
enum SeqcliffStatus seqcliff_pauli_parse(const char *text, struct SeqcliffPauliString **out);

/*
 Product `a × b` of two strings of equal length.

 # Safety
 `a` and `b` must be live handles; `out` must be writable.
 */
enum SeqcliffStatus seqcliff_pauli_mul(const struct SeqcliffPauliString *a,
                                       const struct SeqcliffPauliString *b,
                                       struct SeqcliffPauliString **out);

/*
 Canonical rendering; free with [`seqcliff_string_free`]. Null on a null handle.

 # Safety
 `p` must be null or a live handle.
 */
char *seqcliff_pauli_to_string(const struct SeqcliffPauliString *p);

/*
 # Safety
 `p` must be null or a handle from this library that has not been freed.
 */
void seqcliff_pauli_free(struct SeqcliffPauliString *p);

/*
 Generates an instance. `alphabet_size` is used by the cyclic task only.

 # Safety
 `out` must be writable.
 */
enum SeqcliffStatus seqcliff_task_generate(enum SeqcliffTaskKind kind,
                                           size_t n,
                                           uint64_t seed,
                                           uint32_t alphabet_size,
                                           struct SeqcliffTask **out);

/*
 Task input, borrowed from the handle.

 # Safety
 `t` must be null or a live handle.
 */
const char *seqcliff_task_input(const struct SeqcliffTask *t);

/*
 Expected answer, borrowed from the handle.

 # Safety
 `t` must be null or a live handle.
 */
const char *seqcliff_task_expected(const struct SeqcliffTask *t);

/*
 Scores a free-text response against the instance.

 # Safety
 `t` must be a live handle, `response` a valid C string, outputs writable.
 */
enum SeqcliffStatus seqcliff_task_judge(const struct SeqcliffTask *t,
                                        const char *response,
                                        bool *strict,
                                        bool *relaxed);

/*
 # Safety
 `t` must be null or a handle from this library that has not been freed.
 */
void seqcliff_task_free(struct SeqcliffTask *t);

/*
 `exp(-β₀ n α^(n-1))`.

 # Safety
 `out` must be writable.
 */
enum SeqcliffStatus seqcliff_sar_empirical(double n, double alpha, double beta0, double *out);

/*
 `1 + ln(1/β₀)/ln α`; domain error unless `α > 1`.

 # Safety
 `out` must be writable.
 */
enum SeqcliffStatus seqcliff_nstar_closed(double alpha, double beta0, double *out);

/*
 Length where the law crosses 1/2.

 # Safety
 `out` must be writable.
 */
enum SeqcliffStatus seqcliff_nstar_half(double alpha, double beta0, double *out);

/*
 Fits the law to `len` points given as parallel arrays.

 # Safety
 The three arrays must hold `len` elements; `out` must be writable.
 */
enum SeqcliffStatus seqcliff_fit(const double *n,
                                 const double *sar,
                                 const double *trials,
                                 size_t len,
                                 enum SeqcliffFitMethod method,
                                 bool clip_saturated,
                                 struct SeqcliffFit **out);

/*
 Fitted `α`; NaN on a null handle.

 # Safety
 `f` must be null or a live handle.
 */
double seqcliff_fit_alpha(const struct SeqcliffFit *f);

/*
 Fitted `β₀`; NaN on a null handle.

 # Safety
 `f` must be null or a live handle.
 */
double seqcliff_fit_beta0(const struct SeqcliffFit *f);

/*
 Standard error of `ln α`; NaN on a null handle.

 # Safety
 `f` must be null or a live handle.
 */
double seqcliff_fit_log_alpha_se(const struct SeqcliffFit *f);

/*
 Half-accuracy length of the fit; NaN when undefined.

 # Safety
 `f` must be null or a live handle.
 */
double seqcliff_fit_nstar_half(const struct SeqcliffFit *f);

/*
 Number of points the fit used.

 # Safety
 `f` must be null or a live handle.
 */
size_t seqcliff_fit_points_used(const struct SeqcliffFit *f);

/*
 # Safety
 `f` must be null or a handle from this library that has not been freed.
 */
void seqcliff_fit_free(struct SeqcliffFit *f);

/*
 `1/4 + 3/4 ((3 - 4p)/3)^n`.

 # Safety
 `out` must be writable.
 */
enum SeqcliffStatus seqcliff_phase_chain_success(double p_phi, uint32_t n, double *out);

/*
 Accuracy of the noisy Pauli agent.

 # Safety
 `out` must be writable.
 */
enum SeqcliffStatus seqcliff_pauli_sar_theory(double p_sigma,
                                              double p_phi,
                                              uint32_t n,
                                              double *out);

/*
 Geometric-mean SAR over `realizations` coupling draws, with the standard
 error of its log. Either output may be null.

 # Safety
 Non-null outputs must be writable.
 */
enum SeqcliffStatus seqcliff_sk_disorder_avg(size_t n,
                                             double j0,
                                             double h,
                                             size_t realizations,
                                             uint64_t master_seed,
                                             double *sar_geo,
                                             double *stderr_log);

/*
 Truncated small-coupling series; `order` is 2 or 4.

 # Safety
 `out` must be writable.
 */
enum SeqcliffStatus seqcliff_sk_perturbative(size_t n,
                                             double j0,
                                             double h,
                                             uint32_t order,
                                             double *out);

/*
 `(j0, h) → (α, β₀)`.

 # Safety
 Outputs must be writable.
 */
enum SeqcliffStatus seqcliff_params_to_empirical(double j0, double h, double *alpha, double *beta0);

/*
 `θ exp(-β₀ n α^(n/k - 1))`.

 # Safety
 `out` must be writable.
 */
enum SeqcliffStatus seqcliff_sar_dc(double n,
                                    size_t k,
                                    double alpha,
                                    double beta0,
                                    double theta,
                                    double *out);

/*
 Log gain of splitting into `k` segments.

 # Safety
 `out` must be writable.
 */
enum SeqcliffStatus seqcliff_gain(double n,
                                  size_t k,
                                  double alpha,
                                  double beta0,
                                  double theta,
                                  double *out);

/*
 Length beyond which `k` segments are guaranteed to help.

 # Safety
 `out` must be writable.
 */
enum SeqcliffStatus seqcliff_n_dc_bound(size_t k,
                                        double alpha,
                                        double beta0,
                                        double theta,
                                        double *out);

/*
 `1 + k ln(1/β₀)/ln α`.

 # Safety
 `out` must be writable.
 */
enum SeqcliffStatus seqcliff_nstar_extended(size_t k, double alpha, double beta0, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SEQCLIFF_H */
