#ifndef CHEBOTAREV_H
#define CHEBOTAREV_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Endpoints of the continuum.
 */
#define CHEB_ROLE_C 0

/**
 * Branch points.
 */
#define CHEB_ROLE_D 1

/**
 * Tangency points.
 */
#define CHEB_ROLE_Z 2

typedef enum ChebStatus {
  CHEB_STATUS_OK = 0,
  CHEB_STATUS_NULL_POINTER = 1,
  CHEB_STATUS_INVALID_ARGUMENT = 2,
  CHEB_STATUS_PARSE = 3,
  CHEB_STATUS_NO_CONVERGENCE = 4,
  CHEB_STATUS_DEGENERATE = 5,
  CHEB_STATUS_NUMERICAL = 6,
  CHEB_STATUS_PANIC = 7,
} ChebStatus;

/**
 * A polynomial with complex coefficients.
 */
typedef struct ChebPoly ChebPoly;

/**
 * A solved problem specification.
 */
typedef struct ChebSolution ChebSolution;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or null. Valid until the
 * next call into the library from the same thread.
 */
const char *cheb_last_error_message(void);

/**
 * Builds a polynomial from `len` ascending coefficients. `im` may be null
 * for real coefficients.
 *
 * # Safety
 * `re` (and `im` when non-null) must point to `len` readable doubles;
 * `out` must be writable.
 */
enum ChebStatus cheb_poly_new(const double *re,
                              const double *im,
                              size_t len,
                              struct ChebPoly **out_poly);

/**
 * # Safety
 * `poly` must come from this library and not be used afterwards; null is ignored.
 */
void cheb_poly_free(struct ChebPoly *poly);

/**
 * # Safety
 * `poly` must be a live handle and `degree` writable.
 */
enum ChebStatus cheb_poly_degree(const struct ChebPoly *poly, size_t *degree);

/**
 * # Safety
 * `poly` must be a live handle; `out_re` and `out_im` writable.
 */
enum ChebStatus cheb_poly_eval(const struct ChebPoly *poly,
                               double re,
                               double im,
                               double *out_re,
                               double *out_im);

/**
 * Logarithmic capacity of the inverse image of `[-1, 1]`.
 *
 * # Safety
 * `poly` must be a live handle and `cap` writable.
 */
enum ChebStatus cheb_poly_capacity(const struct ChebPoly *poly, double *cap);

/**
 * Whether the inverse image of `[-1, 1]` is connected, at the default
 * tolerance.
 *
 * # Safety
 * `poly` must be a live handle and `connected` writable.
 */
enum ChebStatus cheb_poly_is_connected(const struct ChebPoly *poly, bool *connected);

/**
 * Parses a problem specification (JSON, nul-terminated) and solves it from
 * its default starting point.
 *
 * # Safety
 * `spec_json` must be a valid C string and `out_solution` writable.
 */
enum ChebStatus cheb_solve_json(const char *spec_json, struct ChebSolution **out_solution);

/**
 * # Safety
 * `solution` must come from this library and not be used afterwards; null is ignored.
 */
void cheb_solution_free(struct ChebSolution *solution);

/**
 * # Safety
 * `solution` must be a live handle and `value` writable.
 */
enum ChebStatus cheb_solution_residual(const struct ChebSolution *solution, double *value);

/**
 * # Safety
 * `solution` must be a live handle and `value` writable.
 */
enum ChebStatus cheb_solution_capacity(const struct ChebSolution *solution, double *value);

/**
 * Number of points with the given `CHEB_ROLE_*`.
 *
 * # Safety
 * `solution` must be a live handle and `count` writable.
 */
enum ChebStatus cheb_solution_point_count(const struct ChebSolution *solution,
                                          uint32_t role,
                                          size_t *count);

/**
 * # Safety
 * `solution` must be a live handle; `out_re` and `out_im` writable.
 */
enum ChebStatus cheb_solution_point(const struct ChebSolution *solution,
                                    uint32_t role,
                                    size_t index,
                                    double *out_re,
                                    double *out_im);

/**
 * A new polynomial handle holding the solution's `T`.
 *
 * # Safety
 * `solution` must be a live handle and `out_poly` writable.
 */
enum ChebStatus cheb_solution_poly(const struct ChebSolution *solution, struct ChebPoly **out_poly);

/**
 * The solution as JSON; release with [`cheb_string_free`].
 *
 * # Safety
 * `solution` must be a live handle and `out_json` writable.
 */
enum ChebStatus cheb_solution_to_json(const struct ChebSolution *solution, char **out_json);

/**
 * # Safety
 * `s` must be a string returned by this library, not freed before; null is ignored.
 */
void cheb_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CHEBOTAREV_H */
