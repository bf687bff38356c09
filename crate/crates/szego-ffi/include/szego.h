#ifndef SZEGO_H
#define SZEGO_H

/* Generated by cbindgen from src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum SzegoStatus {
  SZEGO_STATUS_OK = 0,
  SZEGO_STATUS_NULL_POINTER = 1,
  /**
   * Rejected input; see the library's validation errors.
   */
  SZEGO_STATUS_INVALID = 2,
  /**
   * A computation ran but its result could not be certified.
   */
  SZEGO_STATUS_NUMERICAL = 3,
  SZEGO_STATUS_BUFFER_TOO_SMALL = 4,
  SZEGO_STATUS_PANIC = 5,
} SzegoStatus;

/**
 * Opaque spectral data ((s_r), (Ψ_r)).
 */
typedef struct SzegoSpectral SzegoSpectral;

/**
 * Opaque truncated Hardy-space symbol.
 */
typedef struct SzegoSymbol SzegoSymbol;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or NULL. Valid until the
 * next call into the library from the same thread.
 */
const char *szego_last_error(void);

/**
 * Symbol with coefficients re[k] + i·im[k], k < n. `im` may be NULL.
 *
 * # Safety
 * `re` must point to `n` doubles, `im` to `n` doubles or be NULL.
 */
enum SzegoStatus szego_symbol_new(const double *re,
                                  const double *im,
                                  uintptr_t n,
                                  struct SzegoSymbol **out);

/**
 * # Safety
 * `sym` must come from this library and not be used afterwards.
 */
void szego_symbol_free(struct SzegoSymbol *sym);

/**
 * Number of stored modes; 0 for NULL.
 *
 * # Safety
 * `sym` must be NULL or a live handle.
 */
uintptr_t szego_symbol_len(const struct SzegoSymbol *sym);

/**
 * Copy the coefficients into `re` and `im`, each of capacity `cap`.
 *
 * # Safety
 * `re` and `im` must point to `cap` writable doubles.
 */
enum SzegoStatus szego_symbol_coeffs(const struct SzegoSymbol *sym,
                                     double *re,
                                     double *im,
                                     uintptr_t cap);

/**
 * ‖u‖_{H^s}.
 *
 * # Safety
 * `sym` must be a live handle and `out` writable.
 */
enum SzegoStatus szego_symbol_sobolev_norm(const struct SzegoSymbol *sym, double s, double *out);

/**
 * Parse {"coeffs": [[re, im], ...]}.
 *
 * # Safety
 * `json` must be a NUL-terminated string.
 */
enum SzegoStatus szego_symbol_from_json(const char *json, struct SzegoSymbol **out);

/**
 * JSON text, released with [`szego_string_free`].
 *
 * # Safety
 * `sym` must be a live handle and `out` writable.
 */
enum SzegoStatus szego_symbol_to_json(const struct SzegoSymbol *sym, char **out);

/**
 * Spectral data with degree-zero products e^{−i·angles[r]}.
 *
 * # Safety
 * `s` and `angles` must point to `n` doubles.
 */
enum SzegoStatus szego_spectral_new(const double *s,
                                    const double *angles,
                                    uintptr_t n,
                                    struct SzegoSpectral **out);

/**
 * Parse {"s": [...], "psi": [{"angle": ..., "zeros": [[re, im], ...]}, ...]}.
 *
 * # Safety
 * `json` must be a NUL-terminated string.
 */
enum SzegoStatus szego_spectral_from_json(const char *json, struct SzegoSpectral **out);

/**
 * # Safety
 * `sd` must be a live handle and `out` writable.
 */
enum SzegoStatus szego_spectral_to_json(const struct SzegoSpectral *sd, char **out);

/**
 * # Safety
 * `sd` must come from this library and not be used afterwards.
 */
void szego_spectral_free(struct SzegoSpectral *sd);

/**
 * Number of singular values; 0 for NULL.
 *
 * # Safety
 * `sd` must be NULL or a live handle.
 */
uintptr_t szego_spectral_len(const struct SzegoSpectral *sd);

/**
 * Copy s_1 > … > s_n and the angles ψ_r into buffers of capacity `cap`.
 * `angles` may be NULL.
 *
 * # Safety
 * `s` (and `angles` when non-NULL) must point to `cap` writable doubles.
 */
enum SzegoStatus szego_spectral_values(const struct SzegoSpectral *sd,
                                       double *s,
                                       double *angles,
                                       uintptr_t cap);

/**
 * Forward transform. Non-positive tolerances select the defaults.
 *
 * # Safety
 * `sym` must be a live handle and `out` writable.
 */
enum SzegoStatus szego_forward(const struct SzegoSymbol *sym,
                               double tol_cluster,
                               double tol_dominance,
                               struct SzegoSpectral **out);

/**
 * Inverse transform on an `m`-point grid, truncated to `n_out` modes.
 *
 * # Safety
 * `sd` must be a live handle and `out` writable.
 */
enum SzegoStatus szego_inverse(const struct SzegoSpectral *sd,
                               uintptr_t m,
                               uintptr_t n_out,
                               struct SzegoSymbol **out);

/**
 * Spectral data of the cubic Szegő flow at time `t`.
 *
 * # Safety
 * `sd` must be a live handle and `out` writable.
 */
enum SzegoStatus szego_evolve_exact(const struct SzegoSpectral *sd,
                                    double t,
                                    struct SzegoSpectral **out);

/**
 * Best rank-k Hankel approximation r and its error ‖H_{u−r}‖.
 *
 * # Safety
 * `sym` must be a live handle; `out` and `err` writable (`err` may be NULL).
 */
enum SzegoStatus szego_best_rank_approx(const struct SzegoSymbol *sym,
                                        uintptr_t k,
                                        uintptr_t m,
                                        uintptr_t n_out,
                                        struct SzegoSymbol **out,
                                        double *err);

/**
 * # Safety
 * `s` must come from a `_to_json` call and not be used afterwards.
 */
void szego_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SZEGO_H */
