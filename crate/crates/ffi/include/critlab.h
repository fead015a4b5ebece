#ifndef CRITLAB_H
#define CRITLAB_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result codes.
 */
typedef enum CritlabStatus {
  CRITLAB_STATUS_OK = 0,
  CRITLAB_STATUS_NULL_POINTER = 1,
  CRITLAB_STATUS_INVALID_ARGUMENT = 2,
  CRITLAB_STATUS_INVALID_DISTRIBUTION = 3,
  /**
   * The solver hit its sweep cap; the output handle is still valid.
   */
  CRITLAB_STATUS_NOT_CONVERGED = 4,
  CRITLAB_STATUS_NUMERICAL = 5,
  CRITLAB_STATUS_IO = 6,
  /**
   * A Rust panic was caught at the boundary.
   */
  CRITLAB_STATUS_INTERNAL = 7,
} CritlabStatus;

/**
 * An owned set of critical points with solver diagnostics.
 */
typedef struct CritlabCriticalSet CritlabCriticalSet;

/**
 * An owned set of roots.
 */
typedef struct CritlabRoots CritlabRoots;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *critlab_version(void);

/**
 * Message of the last failed call on this thread, or NULL. The pointer is
 * valid until the next critlab call on the same thread.
 */
const char *critlab_last_error_message(void);

/**
 * Wraps `len` roots given as coordinate arrays.
 *
 * # Safety
 * `re` and `im` must each point to `len` doubles; `out` must be writable.
 */
enum CritlabStatus critlab_roots_new(const double *re,
                                     const double *im,
                                     size_t len,
                                     struct CritlabRoots **out);

/**
 * Draws `n` i.i.d. roots from a distribution given as JSON, e.g.
 * `{"family": "gaussian", "params": {"center": [0, 0], "scale": 1}}`.
 *
 * # Safety
 * `spec_json` must be a NUL-terminated string; `out` must be writable.
 */
enum CritlabStatus critlab_roots_sample(const char *spec_json,
                                        size_t n,
                                        uint64_t seed,
                                        struct CritlabRoots **out);

/**
 * Number of roots; 0 for a NULL handle.
 *
 * # Safety
 * `roots` must be NULL or a live handle.
 */
size_t critlab_roots_len(const struct CritlabRoots *roots);

/**
 * Copies up to `capacity` roots into `re`/`im`; `*written` receives the count.
 *
 * # Safety
 * `roots` must be a live handle; `re`/`im` must hold `capacity` doubles.
 */
enum CritlabStatus critlab_roots_get(const struct CritlabRoots *roots,
                                     double *re,
                                     double *im,
                                     size_t capacity,
                                     size_t *written);

/**
 * `log|L_n(z)|` with `L_n = P'/P`; `-inf` at critical points, `+inf` at roots.
 *
 * # Safety
 * `roots` must be a live handle; `out` must be writable.
 */
enum CritlabStatus critlab_log_abs_l(const struct CritlabRoots *roots,
                                     double re,
                                     double im,
                                     double *out);

/**
 * Frees a root handle; NULL is ignored.
 *
 * # Safety
 * `roots` must be NULL or a handle not yet freed.
 */
void critlab_roots_free(struct CritlabRoots *roots);

/**
 * Solves for the `n - 1` critical points. Returns
 * `CRITLAB_STATUS_NOT_CONVERGED` with a valid handle when the sweep cap
 * was hit.
 *
 * # Safety
 * `roots` must be a live handle; `out` must be writable.
 */
enum CritlabStatus critlab_critical_points(const struct CritlabRoots *roots,
                                           struct CritlabCriticalSet **out);

/**
 * Number of critical points; 0 for a NULL handle.
 *
 * # Safety
 * `crits` must be NULL or a live handle.
 */
size_t critlab_critical_set_len(const struct CritlabCriticalSet *crits);

/**
 * Whether the solve converged.
 *
 * # Safety
 * `crits` must be NULL or a live handle.
 */
bool critlab_critical_set_converged(const struct CritlabCriticalSet *crits);

/**
 * Largest per-point residual.
 *
 * # Safety
 * `crits` must be NULL or a live handle.
 */
double critlab_critical_set_max_residual(const struct CritlabCriticalSet *crits);

/**
 * Copies up to `capacity` critical points into `re`/`im`.
 *
 * # Safety
 * `crits` must be a live handle; `re`/`im` must hold `capacity` doubles.
 */
enum CritlabStatus critlab_critical_set_get(const struct CritlabCriticalSet *crits,
                                            double *re,
                                            double *im,
                                            size_t capacity,
                                            size_t *written);

/**
 * Frees a critical-set handle; NULL is ignored.
 *
 * # Safety
 * `crits` must be NULL or a handle not yet freed.
 */
void critlab_critical_set_free(struct CritlabCriticalSet *crits);

/**
 * W1 distance between two uniform point clouds. Exact when
 * `len_a * len_b` is small enough, sliced otherwise (seeded by `seed`);
 * `*exact` reports which.
 *
 * # Safety
 * Coordinate arrays must hold their stated lengths; `out` must be
 * writable; `exact` may be NULL.
 */
enum CritlabStatus critlab_wasserstein1(const double *a_re,
                                        const double *a_im,
                                        size_t len_a,
                                        const double *b_re,
                                        const double *b_im,
                                        size_t len_b,
                                        uint64_t seed,
                                        double *out,
                                        bool *exact);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CRITLAB_H */
