#ifndef FROLOV_H
#define FROLOV_H

/* Generated by cbindgen from the frolov-capi crate; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

// Rule randomization selector.
typedef enum FrolovMode {
  FROLOV_MODE_DETERMINISTIC = 0,
  FROLOV_MODE_DILATED = 1,
  FROLOV_MODE_DILATED_SHIFTED = 2,
} FrolovMode;

// Result codes of every fallible entry point.
typedef enum FrolovStatus {
  FROLOV_STATUS_OK = 0,
  FROLOV_STATUS_NULL_POINTER = 1,
  FROLOV_STATUS_INVALID_UTF8 = 2,
  FROLOV_STATUS_INVALID_ARGUMENT = 3,
  FROLOV_STATUS_UNKNOWN_FUNCTION = 4,
  FROLOV_STATUS_DOMAIN_ERROR = 5,
  FROLOV_STATUS_IO_ERROR = 6,
} FrolovStatus;

// Opaque generator-matrix handle.
typedef struct FrolovMatrixHandle FrolovMatrixHandle;

// Validation summary of a generator matrix.
typedef struct FrolovValidation {
  int64_t search_radius;
  double min_product;
  uint32_t box_trials;
  double max_excess;
  bool valid;
} FrolovValidation;

// One quadrature estimate.
typedef struct FrolovEstimate {
  double value;
  uint64_t node_count;
} FrolovEstimate;

// User integrand: x has `dim` coordinates; `ctx` is passed through verbatim.
typedef double (*FrolovIntegrand)(const double *x, uintptr_t dim, void *ctx);

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Latest error message on this thread, or NULL when no call has failed yet.
const char *frolov_last_error(void);

// Build a generator matrix from a named construction ("frolov-poly" or
// "chebyshev") in the given dimension.
//
// # Safety
// `construction` must be a valid NUL-terminated string and `out` a valid
// pointer.
enum FrolovStatus frolov_matrix_create(const char *construction,
                                       uintptr_t dim,
                                       struct FrolovMatrixHandle **out);

// Load a matrix from the JSON cache format.
//
// # Safety
// `path` must be a valid NUL-terminated string and `out` a valid pointer.
enum FrolovStatus frolov_matrix_load(const char *path, struct FrolovMatrixHandle **out);

// Write a validated matrix to the JSON cache format.
//
// # Safety
// `handle` must come from this library and `path` be a valid string.
enum FrolovStatus frolov_matrix_save(const struct FrolovMatrixHandle *handle, const char *path);

// Release a matrix handle.
//
// # Safety
// `handle` must come from this library and not be used afterwards.
void frolov_matrix_free(struct FrolovMatrixHandle *handle);

// Dimension of the generator matrix, 0 on a null handle.
//
// # Safety
// `handle` must come from this library.
uintptr_t frolov_matrix_dim(const struct FrolovMatrixHandle *handle);

// |det B|, NaN on a null handle.
//
// # Safety
// `handle` must come from this library.
double frolov_matrix_det_abs(const struct FrolovMatrixHandle *handle);

// Maximum absolute column sum of B, NaN on a null handle.
//
// # Safety
// `handle` must come from this library.
double frolov_matrix_col_norm1(const struct FrolovMatrixHandle *handle);

// Run the finite validation sweep (product condition to `radius`, point
// counts on `box_trials` random boxes) and report the outcome.
//
// # Safety
// `handle` and `out` must be valid pointers.
enum FrolovStatus frolov_matrix_validate(struct FrolovMatrixHandle *handle,
                                         int64_t radius,
                                         uint32_t box_trials,
                                         uint64_t seed,
                                         struct FrolovValidation *out);

// Integrate a named benchmark function ("tent", "poly-bump:r=K",
// "smooth-bump", "boundary-poly").
//
// # Safety
// `handle`, `function`, and `out` must be valid pointers.
enum FrolovStatus frolov_integrate(const struct FrolovMatrixHandle *handle,
                                   const char *function,
                                   double n,
                                   enum FrolovMode mode,
                                   bool transformed,
                                   uint64_t seed,
                                   struct FrolovEstimate *out);

// Integrate a caller-supplied function over the box [support_lo, support_hi]
// (each of length `dim`). With `transformed` set, the integrand is read on
// the unit cube through the smooth warp; `exact_integral_hint` is only used
// to report nothing and may be 0.
//
// # Safety
// All pointers must be valid; the callback must tolerate any x inside the
// support box.
enum FrolovStatus frolov_integrate_callback(const struct FrolovMatrixHandle *handle,
                                            FrolovIntegrand integrand,
                                            void *ctx,
                                            const double *support_lo,
                                            const double *support_hi,
                                            bool boundary_nonvanishing,
                                            double n,
                                            enum FrolovMode mode,
                                            bool transformed,
                                            uint64_t seed,
                                            struct FrolovEstimate *out);

// The smooth warp psi(x): 0 below 0, 1 above 1, a C-infinity diffeomorphism
// of (0,1) in between. Every call shares one precomputed table.
double frolov_warp(double x);

// Derivative of the warp, psi'(x) = h(x) / c_h.
double frolov_warp_derivative(double x);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* FROLOV_H */
