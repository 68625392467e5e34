/* C interface for the nsbf perturbed-Bessel solver. */

#ifndef NSBF_H
#define NSBF_H

/* Generated by cbindgen from crates/nsbf-ffi; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Boundary condition selector for [`nsbf_eigenvalues`].
 */
typedef enum NsbfBoundary {
  NSBF_BOUNDARY_DIRICHLET = 0,
  NSBF_BOUNDARY_NEUMANN = 1,
  NSBF_BOUNDARY_ROBIN = 2,
} NsbfBoundary;

/**
 * Kernel selector for [`nsbf_kernel`].
 */
typedef enum NsbfKernel {
  /**
   * Transmutation kernel of the solution representation.
   */
  NSBF_KERNEL_K = 0,
  /**
   * Kernel of the derivative representation.
   */
  NSBF_KERNEL_K1 = 1,
  /**
   * Fourier-side kernel (defined on `|t| <= x`).
   */
  NSBF_KERNEL_R = 2,
} NsbfKernel;

/**
 * Status code returned by every FFI entry point.
 */
typedef enum NsbfStatus {
  /**
   * Success.
   */
  NSBF_STATUS_OK = 0,
  /**
   * A pointer argument was null.
   */
  NSBF_STATUS_NULL_POINTER = 1,
  /**
   * An argument was out of range or inconsistent.
   */
  NSBF_STATUS_INVALID_ARGUMENT = 2,
  /**
   * The problem definition itself is invalid.
   */
  NSBF_STATUS_INVALID_PROBLEM = 3,
  /**
   * A numerical stage overflowed or failed to converge.
   */
  NSBF_STATUS_NUMERICAL = 4,
  /**
   * The output buffer was too small; nothing was written.
   */
  NSBF_STATUS_BUFFER_TOO_SMALL = 5,
  /**
   * Unexpected internal failure.
   */
  NSBF_STATUS_INTERNAL = 6,
} NsbfStatus;

/**
 * Opaque solver handle: one problem with its coefficient families built and
 * truncation orders selected.
 */
typedef struct NsbfSolver NsbfSolver;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the most recent failure on this thread, or an empty string.
 * The pointer stays valid until the next failing call on the same thread.
 */
const char *nsbf_last_error_message(void);

/**
 * Creates a solver for the power potential `q(x) = c x^p` on `(0, b]`
 * (use `c = 0` for the free equation). `mesh` is the number of uniform
 * subintervals (a multiple of 5, e.g. 5000); `max_order` bounds the
 * coefficient families (the working truncations are selected
 * automatically, see [`nsbf_solver_orders`]).
 *
 * # Safety
 * `out` must be a valid pointer; the handle must be released with
 * [`nsbf_solver_free`].
 */
enum NsbfStatus nsbf_solver_new_power(double ell,
                                      double b,
                                      double c,
                                      double p,
                                      size_t mesh,
                                      size_t max_order,
                                      struct NsbfSolver **out);

/**
 * Creates a solver from potential samples on the uniform mesh: `values`
 * must hold `mesh + 1` node values `q(i b / mesh)`. `q0_finite` declares
 * whether the limit of `q` at zero is finite; when it is not, the
 * derivative-side truncation is selected from the coefficient tail instead
 * of the verification identity.
 *
 * # Safety
 * `values` must point to `mesh + 1` readable doubles and `out` must be a
 * valid pointer; the handle must be released with [`nsbf_solver_free`].
 */
enum NsbfStatus nsbf_solver_new_sampled(double ell,
                                        double b,
                                        const double *values,
                                        size_t mesh,
                                        bool q0_finite,
                                        size_t max_order,
                                        struct NsbfSolver **out);

/**
 * Releases a solver handle. A null handle is ignored.
 *
 * # Safety
 * `solver` must be a handle returned by a constructor, released once.
 */
void nsbf_solver_free(struct NsbfSolver *solver);

/**
 * Reports the automatically selected truncation orders: `n1` terms the
 * solution series, `n2` the derivative series.
 *
 * # Safety
 * All pointers must be valid (output pointers may be null to skip a field).
 */
enum NsbfStatus nsbf_solver_orders(const struct NsbfSolver *solver, size_t *n1, size_t *n2);

/**
 * Evaluates the regular solution `u(omega_i, x)` and its derivative for a
 * batch of frequencies at a fixed `x` in `(0, b]`. Either output array may
 * be null to skip that quantity; a non-null array must hold `count`
 * doubles.
 *
 * # Safety
 * `solver` must be a live handle; `omegas` must point to `count` readable
 * doubles; non-null output arrays must have space for `count` doubles.
 */
enum NsbfStatus nsbf_evaluate(const struct NsbfSolver *solver,
                              double x,
                              const double *omegas,
                              size_t count,
                              double *u_out,
                              double *du_out);

/**
 * Computes the eigenvalues below `omega_max` for the given boundary
 * condition (`robin_a`, `robin_c` are read only for the Robin case).
 * `scan_step <= 0` selects the default step. Up to `capacity` eigenvalues
 * are written to `out` in increasing order and their number is stored in
 * `found`; if more were found than fit, `NSBF_STATUS_BUFFER_TOO_SMALL` is
 * returned with `found` set to the required size and `out` untouched.
 *
 * # Safety
 * `solver`, `out` (with space for `capacity` doubles) and `found` must be
 * valid pointers.
 */
enum NsbfStatus nsbf_eigenvalues(const struct NsbfSolver *solver,
                                 enum NsbfBoundary boundary,
                                 double robin_a,
                                 double robin_c,
                                 double omega_max,
                                 double scan_step,
                                 double *out,
                                 size_t capacity,
                                 size_t *found);

/**
 * Evaluates one kernel slice `kernel(x, t_i)` at the selected truncation
 * order; `t` and `values` must hold `count` doubles. For the K and K1
 * kernels `t_i` must lie in `[0, x]`; the Fourier-side kernel accepts
 * `[-x, x]`.
 *
 * # Safety
 * `solver`, `t` (readable, `count` doubles) and `values` (writable,
 * `count` doubles) must be valid pointers.
 */
enum NsbfStatus nsbf_kernel(const struct NsbfSolver *solver,
                            enum NsbfKernel kind,
                            double x,
                            const double *t,
                            size_t count,
                            double *values);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* NSBF_H */
