#ifndef GINIBRE_GAP_H
#define GINIBRE_GAP_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Status codes returned by every fallible call.
typedef enum GgStatus {
  GG_STATUS_OK = 0,
  GG_STATUS_INVALID_PARAMETER = 1,
  GG_STATUS_POLE = 2,
  GG_STATUS_TRUNCATION = 3,
  GG_STATUS_CONTOUR_NON_DECAY = 4,
  GG_STATUS_NEAR_RESONANCE = 5,
  GG_STATUS_SINGULAR_OPERATOR = 6,
  GG_STATUS_NOT_CONVERGED = 7,
  GG_STATUS_STEP_COLLAPSE = 8,
  GG_STATUS_CONSERVATION_DRIFT = 9,
  GG_STATUS_SEED_TOO_LARGE = 10,
  GG_STATUS_UNSUPPORTED = 11,
  GG_STATUS_NULL_POINTER = 12,
  GG_STATUS_PANIC = 13,
} GgStatus;

// Evaluation route of the Q functions.
typedef enum GgRoute {
  GG_ROUTE_AUTO = 0,
  GG_ROUTE_SERIES = 1,
  GG_ROUTE_CONTOUR = 2,
} GgRoute;

// Opaque ensemble handle.
typedef struct GgEnsemble GgEnsemble;

// Opaque kernel evaluator handle.
typedef struct GgKernel GgKernel;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Library version as a static NUL-terminated string.
const char *gg_version(void);

// Copies the calling thread's last error message into `buf` (NUL-terminated,
// truncated to `cap`) and returns its full length without the NUL.
//
// # Safety
// `buf` must be null or valid for `cap` bytes.
size_t gg_last_error(char *buf, size_t cap);

// Creates an ensemble with M factors, n particles, exponents ν₁..ν_M and
// thinning λ ∈ [0, 1].
//
// # Safety
// `nu` must be valid for `nu_len` reads; `out` must be writable.
enum GgStatus gg_ensemble_new(size_t m,
                              size_t n,
                              const double *nu,
                              size_t nu_len,
                              double lambda,
                              struct GgEnsemble **out);

// Releases an ensemble; null is ignored.
//
// # Safety
// `ens` must come from `gg_ensemble_new` and not be used afterwards.
void gg_ensemble_free(struct GgEnsemble *ens);

// E(0; (0, s)) by the Fredholm determinant. `tol <= 0` selects the default.
//
// # Safety
// Pointers must be valid; `est_error` may be null.
enum GgStatus gg_gap_probability(const struct GgEnsemble *ens,
                                 double s,
                                 double tol,
                                 double *value,
                                 double *est_error);

// E(0; J) for J = (a₁, a₂) ∪ (a₃, a₄) ∪ ⋯ given by `2k` increasing endpoints.
//
// # Safety
// `endpoints` must be valid for `len` reads; `est_error` may be null.
enum GgStatus gg_gap_probability_union(const struct GgEnsemble *ens,
                                       const double *endpoints,
                                       size_t len,
                                       double tol,
                                       double *value,
                                       double *est_error);

// τ(s) = E(0; (0, s)) at increasing positive `s_grid` points by integrating
// the isomonodromic flow. `tol <= 0` selects the default.
//
// # Safety
// `s_grid` and `tau` must be valid for `len` elements.
enum GgStatus gg_gap_dynamics(const struct GgEnsemble *ens,
                              const double *s_grid,
                              size_t len,
                              double tol,
                              double *tau);

// Creates a kernel evaluator for the ensemble.
//
// # Safety
// `ens` must be valid; `out` must be writable.
enum GgStatus gg_kernel_new(const struct GgEnsemble *ens,
                            enum GgRoute route,
                            struct GgKernel **out);

// Releases a kernel evaluator; null is ignored.
//
// # Safety
// `k` must come from `gg_kernel_new` and not be used afterwards.
void gg_kernel_free(struct GgKernel *k);

// K_n(x, y) in the integrable form.
//
// # Safety
// `k` must be valid; `value` must be writable.
enum GgStatus gg_kernel_eval(const struct GgKernel *k, double x, double y, double *value);

// K_n(x, y) as the finite biorthogonal sum.
//
// # Safety
// `k` must be valid; `value` must be writable.
enum GgStatus gg_kernel_eval_sum(const struct GgKernel *k, double x, double y, double *value);

// Monte Carlo estimate of E(0; (0, s)) at λ = 1 for integer ν, with
// binomial standard errors.
//
// # Safety
// `s_grid`, `estimates` and `std_errors` must be valid for `len` elements.
enum GgStatus gg_mc_gap(const struct GgEnsemble *ens,
                        size_t samples,
                        uint64_t seed,
                        const double *s_grid,
                        size_t len,
                        double *estimates,
                        double *std_errors);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* GINIBRE_GAP_H */
