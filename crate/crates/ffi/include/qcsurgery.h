#ifndef QCSURGERY_H
#define QCSURGERY_H

/* Generated by cbindgen; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status code for a successful call.
 */
#define QCS_OK 0

/**
 * A null pointer was passed where a value was required.
 */
#define QCS_NULL_ARGUMENT 1

/**
 * The callee panicked; treat the handle as poisoned.
 */
#define QCS_PANIC 2

/**
 * Invalid argument outside the core error taxonomy.
 */
#define QCS_BAD_ARGUMENT 3

/**
 * Opaque blend-map handle.
 */
typedef struct QcsBlend QcsBlend;

/**
 * Opaque rational map handle.
 */
typedef struct QcsMap QcsMap;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copies the last error message for this thread into `buf` (NUL
 * terminated, truncated to `cap` bytes) and returns the full length.
 *
 * # Safety
 * `buf` must point to at least `cap` writable bytes, or be null (then
 * only the length is returned).
 */
uintptr_t qcs_last_error(char *buf, uintptr_t cap);

/**
 * Library version as a static NUL-terminated string.
 */
const char *qcs_version(void);

/**
 * Builds a polynomial map from complex coefficients in ascending degree
 * order. On success writes a heap handle to `out`.
 *
 * # Safety
 * `coeff_re` and `coeff_im` must point to `len` readable doubles each;
 * `out` must be a valid destination pointer.
 */
int32_t qcs_map_new_poly(const double *coeff_re,
                         const double *coeff_im,
                         uintptr_t len,
                         struct QcsMap **out);

/**
 * Frees a map handle; null is ignored.
 *
 * # Safety
 * `map` must be a handle returned by this library, not yet freed.
 */
void qcs_map_free(struct QcsMap *map);

/**
 * Degree of the map, or 0 for a null handle.
 *
 * # Safety
 * `map` must be a live handle from this library or null.
 */
uint32_t qcs_map_degree(const struct QcsMap *map);

/**
 * Evaluates the map at re + i im.
 *
 * # Safety
 * `map` must be a live handle; `out_re`, `out_im` must be writable.
 */
int32_t qcs_map_eval(const struct QcsMap *map,
                     double re,
                     double im,
                     double *out_re,
                     double *out_im);

/**
 * Escape census: writes the number of finite critical points whose
 * orbits reach the escape radius within the horizon.
 *
 * # Safety
 * `map` must be a live handle; `out_count` must be writable.
 */
int32_t qcs_map_escape_census(const struct QcsMap *map,
                              uintptr_t horizon,
                              double escape_radius,
                              uint32_t *out_count);

/**
 * Iterates an orbit, writing up to `capacity` interleaved re/im pairs.
 * `out_len` receives the number of pairs written; `out_escaped` is 1 when
 * the orbit left the escape radius (its last written sample is the escape
 * iterate when it fits the capacity).
 *
 * # Safety
 * `out_points` must hold `2 * capacity` doubles; `out_len` and
 * `out_escaped` must be writable; `map` must be a live handle.
 */
int32_t qcs_map_orbit(const struct QcsMap *map,
                      double re,
                      double im,
                      uintptr_t horizon,
                      double escape_radius,
                      double *out_points,
                      uintptr_t capacity,
                      uintptr_t *out_len,
                      int32_t *out_escaped);

/**
 * Green's function of the basin of infinity at re + i im (polynomials).
 *
 * # Safety
 * `map` must be a live handle; `out` must be writable.
 */
int32_t qcs_map_green(const struct QcsMap *map,
                      double re,
                      double im,
                      uintptr_t horizon,
                      double *out);

/**
 * Modulus of the round ring {p < |z| < q}.
 *
 * # Safety
 * `out` must be writable.
 */
int32_t qcs_round_modulus(double p, double q, double *out);

/**
 * Builds the radial blend map for the ring parameter p.
 *
 * # Safety
 * `out` must be a valid destination pointer.
 */
int32_t qcs_blend_new(double p, uintptr_t resolution, struct QcsBlend **out);

/**
 * Frees a blend handle; null is ignored.
 *
 * # Safety
 * `blend` must be a handle returned by this library, not yet freed.
 */
void qcs_blend_free(struct QcsBlend *blend);

/**
 * Dilatation sup-norm of a blend.
 *
 * # Safety
 * `blend` must be a live handle; `out` must be writable.
 */
int32_t qcs_blend_sup_norm(const struct QcsBlend *blend, double *out);

/**
 * Evaluates the blend at re + i im.
 *
 * # Safety
 * `blend` must be a live handle; `out_re`, `out_im` must be writable.
 */
int32_t qcs_blend_eval(const struct QcsBlend *blend,
                       double re,
                       double im,
                       double *out_re,
                       double *out_im);

/**
 * Runs the instability experiment from a flat key = value configuration
 * string. `out_dir` may be null for an in-memory run. On success,
 * `out_outcome` is 0 (all depths certified), 2 (hypotheses not
 * applicable), or 1 (some depth failed); `out_s_before` receives the
 * escape count of the input map.
 *
 * # Safety
 * `config_text` must be a NUL-terminated string; `out_dir` likewise or
 * null; the out pointers must be writable.
 */
int32_t qcs_experiment_run(const char *config_text,
                           const char *out_dir,
                           int32_t *out_outcome,
                           uint32_t *out_s_before);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* QCSURGERY_H */
