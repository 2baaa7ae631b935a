#ifndef HFPQUAD_H
#define HFPQUAD_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum HfpApproach {
  HFP_APPROACH_SIMPLE = 0,
  HFP_APPROACH_ADVANCED = 1,
} HfpApproach;

// Rule selection for `hfp_t_hat`.
typedef enum HfpRulePath {
  HFP_RULE_PATH_COMPACT = 0,
  HFP_RULE_PATH_GENERIC = 1,
  // Compact when the `(m, s)` pair has a tabulated rule.
  HFP_RULE_PATH_PREFERRED = 2,
} HfpRulePath;

// Result code of every fallible call.
typedef enum HfpStatus {
  HFP_STATUS_OK = 0,
  HFP_STATUS_INVALID_ARGUMENT = 1,
  HFP_STATUS_NULL_POINTER = 2,
  HFP_STATUS_DOMAIN = 3,
  HFP_STATUS_MISSING_DERIVATIVES = 4,
  HFP_STATUS_UNSUPPORTED_RULE = 5,
  HFP_STATUS_EVALUATION_FAILED = 6,
  HFP_STATUS_NOT_CONVERGED = 7,
  HFP_STATUS_SINGULAR_SYSTEM = 8,
  HFP_STATUS_INSUFFICIENT_DATA = 9,
  HFP_STATUS_IO = 10,
  HFP_STATUS_PANIC = 11,
} HfpStatus;

// Opaque integrand `f(x) = g(x)/(x - t)^m` on `[a, b]`.
typedef struct HfpIntegrand HfpIntegrand;

// Opaque integral-equation kernel.
typedef struct HfpKernel HfpKernel;

// Opaque collocation solution.
typedef struct HfpSolution HfpSolution;

// `g(x)`; must be safe to call from several threads at once.
typedef double (*HfpScalarFn)(double x, void *user);

// `U(t, x)` of the kernel `U(t, x)·θ_3(x - t)`.
typedef double (*HfpKernelFn)(double t, double x, void *user);

// Writes `U_k(t, t)`, `k = 0..3`, into `out[0..4]`.
typedef void (*HfpDiagonalFn)(double t, double *out, void *user);

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the last failed call on this thread, or NULL. Valid until the
// next call into this library on the same thread.
const char *hfp_last_error_message(void);

// Static, NUL-terminated name of a status code.
const char *hfp_status_name(enum HfpStatus status);

// Integrand from a callback for `g`. `derivs` may be NULL when
// `deriv_count` is 0; otherwise it holds `g^(k)(t)`, `k < deriv_count`.
//
// # Safety
// `g` must stay callable with `user` for the lifetime of the handle;
// `derivs` must point to `deriv_count` readable doubles; `out` must be writable.
enum HfpStatus hfp_integrand_new(uint32_t m,
                                 double t,
                                 double a,
                                 double b,
                                 HfpScalarFn g,
                                 void *user,
                                 const double *derivs,
                                 size_t deriv_count,
                                 struct HfpIntegrand **out);

// `θ_m(x - t)·poisson_u(η, 2πx/T)` on the period around `t`, derivatives attached.
//
// # Safety
// `out` must be writable.
enum HfpStatus hfp_integrand_new_poisson(uint32_t m,
                                         double t,
                                         double period,
                                         double eta,
                                         struct HfpIntegrand **out);

// # Safety
// `integrand` must come from an `hfp_integrand_new*` call and not be freed twice.
void hfp_integrand_free(struct HfpIntegrand *integrand);

// `T̂^(s)_{m,n}`, `m` taken from the integrand.
//
// # Safety
// `integrand` must be a live handle; `out` must be writable.
enum HfpStatus hfp_t_hat(const struct HfpIntegrand *integrand,
                         uint32_t s,
                         size_t n,
                         enum HfpRulePath path,
                         double *out);

// `ζ(j)` for even `j >= 2`, `j = 0`, or `j = 3`.
//
// # Safety
// `out` must be writable.
enum HfpStatus hfp_zeta(int64_t j, double *out);

// `K(n)·u·n²`.
double hfp_roundoff_floor(double g_norm,
                          double gp_norm,
                          double gppp_norm,
                          double period,
                          size_t n,
                          double u);

// # Safety
// `out` must be writable.
enum HfpStatus hfp_poisson_u(double eta, double x, double *out);

// Closed-form value of the `m = 3`, `T = 2π` Poisson case.
//
// # Safety
// `out` must be writable.
enum HfpStatus hfp_exact_supersingular(double eta, double t, double *out);

// `D_n^{(k)}(y)`, `k <= 3`, `n` even.
//
// # Safety
// `out` must be writable.
enum HfpStatus hfp_dirichlet_kernel_deriv(uint32_t k,
                                          size_t n,
                                          double y,
                                          double period,
                                          double *out);

// Kernel from callbacks. `diag` may be NULL; the advanced approach then fails.
//
// # Safety
// The callbacks must stay callable with `user` for the lifetime of the
// handle, from any thread; `out` must be writable.
enum HfpStatus hfp_kernel_new(double a,
                              double b,
                              HfpKernelFn u,
                              HfpDiagonalFn diag,
                              void *user,
                              struct HfpKernel **out);

// `U(t, x) = (y/sin(πy/T))³ cos(πy/T)` with `y = x - t`, i.e. the kernel
// `cos(πy/T)/sin³(πy/T)`, on `[a, b]`.
//
// # Safety
// `out` must be writable.
enum HfpStatus hfp_kernel_new_cos_over_sin_cubed(double a, double b, struct HfpKernel **out);

// # Safety
// `kernel` must come from an `hfp_kernel_new*` call and not be freed twice.
void hfp_kernel_free(struct HfpKernel *kernel);

// Solves `λφ(t) + ∫̄ K(t, x) φ(x) dx = w(t)`.
//
// # Safety
// `kernel` must be a live handle; `w` must be callable with `user` from any
// thread during the call; `out` must be writable.
enum HfpStatus hfp_solve_ie(const struct HfpKernel *kernel,
                            HfpScalarFn w,
                            void *user,
                            double lambda,
                            size_t n,
                            enum HfpApproach approach,
                            struct HfpSolution **out);

// Solves with the right-hand side manufactured from `φ = poisson_u(η, ·)`.
//
// # Safety
// `kernel` must be a live handle; `out` must be writable.
enum HfpStatus hfp_solve_ie_manufactured(const struct HfpKernel *kernel,
                                         double eta,
                                         double lambda,
                                         size_t n,
                                         enum HfpApproach approach,
                                         struct HfpSolution **out);

// Number of collocation nodes, 0 for NULL.
//
// # Safety
// `solution` must be NULL or a live handle.
size_t hfp_solution_len(const struct HfpSolution *solution);

// Nodes, `hfp_solution_len` entries, owned by the handle.
//
// # Safety
// `solution` must be NULL or a live handle.
const double *hfp_solution_grid(const struct HfpSolution *solution);

// `φ̂` at the nodes, owned by the handle.
//
// # Safety
// `solution` must be NULL or a live handle.
const double *hfp_solution_values(const struct HfpSolution *solution);

// `max |K̂φ̂ - w|`, NaN for NULL.
//
// # Safety
// `solution` must be NULL or a live handle.
double hfp_solution_residual(const struct HfpSolution *solution);

// 1-norm condition number, NaN for NULL.
//
// # Safety
// `solution` must be NULL or a live handle.
double hfp_solution_condition(const struct HfpSolution *solution);

// # Safety
// `solution` must come from an `hfp_solve_ie*` call and not be freed twice.
void hfp_solution_free(struct HfpSolution *solution);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* HFPQUAD_H */
