#ifndef FGS_H
#define FGS_H

/* Generated by cbindgen; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum FgsStatus {
  FGS_STATUS_OK = 0,
  FGS_STATUS_NULL_POINTER = 1,
  FGS_STATUS_INVALID_PARAMETER = 2,
  FGS_STATUS_RANGE = 3,
  FGS_STATUS_SHAPE = 4,
  FGS_STATUS_DEGREE_POSITIVITY = 5,
  FGS_STATUS_INDEFINITE = 6,
  FGS_STATUS_NUMERICAL = 7,
  FGS_STATUS_IO = 8,
  FGS_STATUS_PANIC = 9,
} FgsStatus;

typedef enum FgsKernel {
  FGS_KERNEL_GAUSSIAN = 0,
  FGS_KERNEL_LAPLACIAN_RBF = 1,
  FGS_KERNEL_MULTIQUADRIC = 2,
  FGS_KERNEL_INVERSE_MULTIQUADRIC = 3,
} FgsKernel;

/**
 * Eigenvalues (descending) with column-major eigenvectors.
 */
typedef struct FgsEigenpairs FgsEigenpairs;

/**
 * Normalized adjacency operator `D^{-1/2} W D^{-1/2}` over a fixed node set.
 */
typedef struct FgsOperator FgsOperator;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copies the calling thread's last error message into `buf` (NUL-terminated,
 * truncated to `len - 1` bytes). Returns the full message length without the
 * terminator, so a caller can size the buffer with a first call using `len = 0`.
 *
 * # Safety
 * `buf` must be valid for `len` bytes or null with `len == 0`.
 */
uintptr_t fgs_last_error_message(char *buf, uintptr_t len);

/**
 * Builds the fast operator for `n` nodes stored row-major (`n * dim` values),
 * with bandwidth `bandwidth` and window cutoff `cutoff`.
 *
 * # Safety
 * `nodes` must point to `n * dim` doubles and `out` must be writable.
 */
enum FgsStatus fgs_operator_new(const double *nodes,
                                uintptr_t n,
                                uintptr_t dim,
                                enum FgsKernel kernel,
                                double param,
                                uintptr_t bandwidth,
                                uintptr_t cutoff,
                                struct FgsOperator **out);

/**
 * Same as [`fgs_operator_new`] but with direct O(n^2) kernel sums.
 *
 * # Safety
 * `nodes` must point to `n * dim` doubles and `out` must be writable.
 */
enum FgsStatus fgs_operator_new_exact(const double *nodes,
                                      uintptr_t n,
                                      uintptr_t dim,
                                      enum FgsKernel kernel,
                                      double param,
                                      struct FgsOperator **out);

/**
 * # Safety
 * `op` must come from `fgs_operator_new*` and not be used afterwards. Null is a no-op.
 */
void fgs_operator_free(struct FgsOperator *op);

/**
 * Number of nodes, or 0 for a null handle.
 *
 * # Safety
 * `op` must be a live handle or null.
 */
uintptr_t fgs_operator_len(const struct FgsOperator *op);

/**
 * `y = D^{-1/2} W D^{-1/2} x`, both of length `fgs_operator_len(op)`.
 *
 * # Safety
 * `x` and `y` must each hold `fgs_operator_len(op)` doubles.
 */
enum FgsStatus fgs_operator_apply(const struct FgsOperator *op, const double *x, double *y);

/**
 * `y = (I - D^{-1/2} W D^{-1/2}) x`.
 *
 * # Safety
 * `x` and `y` must each hold `fgs_operator_len(op)` doubles.
 */
enum FgsStatus fgs_operator_apply_laplacian(const struct FgsOperator *op,
                                            const double *x,
                                            double *y);

/**
 * Copies the computed degrees into `out`.
 *
 * # Safety
 * `out` must hold `fgs_operator_len(op)` doubles.
 */
enum FgsStatus fgs_operator_degrees(const struct FgsOperator *op, double *out);

/**
 * The `k` largest eigenpairs of the normalized adjacency operator via Lanczos.
 * `max_iter = 0` selects the default iteration cap.
 *
 * # Safety
 * `op` must be a live handle and `out` writable.
 */
enum FgsStatus fgs_eigs_largest(const struct FgsOperator *op,
                                uintptr_t k,
                                uintptr_t max_iter,
                                uint64_t seed,
                                struct FgsEigenpairs **out);

/**
 * # Safety
 * `pairs` must be a live handle or null.
 */
uintptr_t fgs_eigenpairs_count(const struct FgsEigenpairs *pairs);

/**
 * # Safety
 * `pairs` must be a live handle or null.
 */
uintptr_t fgs_eigenpairs_dim(const struct FgsEigenpairs *pairs);

/**
 * Copies eigenvalues (`count` doubles) and, if `vectors` is non-null, the
 * column-major eigenvectors (`dim * count` doubles).
 *
 * # Safety
 * Buffers must be sized as above.
 */
enum FgsStatus fgs_eigenpairs_copy(const struct FgsEigenpairs *pairs,
                                   double *values,
                                   double *vectors);

/**
 * # Safety
 * `pairs` must come from `fgs_eigs_largest` and not be used afterwards. Null is a no-op.
 */
void fgs_eigenpairs_free(struct FgsEigenpairs *pairs);

/**
 * Solves `(I + beta L_s) u = f` by CG and writes `u`. `iterations` may be null.
 * Returns `Numerical` if the cap is hit before `tol`; `u` still holds the last iterate.
 *
 * # Safety
 * `f` and `u` must each hold `fgs_operator_len(op)` doubles.
 */
enum FgsStatus fgs_kernel_ssl(const struct FgsOperator *op,
                              const double *f,
                              double beta,
                              double tol,
                              uintptr_t max_iter,
                              double *u,
                              uintptr_t *iterations);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* FGS_H */
