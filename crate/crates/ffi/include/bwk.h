#ifndef BWK_H
#define BWK_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum BwkStatus {
  BWK_STATUS_OK = 0,
  BWK_STATUS_NULL_POINTER = 1,
  BWK_STATUS_INVALID_UTF8 = 2,
  BWK_STATUS_DIMENSION = 3,
  BWK_STATUS_INVALID_INPUT = 4,
  BWK_STATUS_VALIDATION = 5,
  BWK_STATUS_SOLVER_FAILURE = 6,
  BWK_STATUS_CONTRACT_VIOLATION = 7,
  BWK_STATUS_GENERATION_FAILURE = 8,
  BWK_STATUS_IO = 9,
  BWK_STATUS_SERIALIZATION = 10,
  BWK_STATUS_PANIC = 11,
} BwkStatus;

typedef enum BwkLpStatus {
  BWK_LP_STATUS_OPTIMAL = 0,
  BWK_LP_STATUS_INFEASIBLE = 1,
  BWK_LP_STATUS_UNBOUNDED = 2,
} BwkLpStatus;

typedef enum BwkPolicy {
  BWK_POLICY_TWO_PHASE = 0,
  BWK_POLICY_ONE_PHASE = 1,
  BWK_POLICY_STATIC_LP = 2,
  BWK_POLICY_UNIFORM = 3,
} BwkPolicy;

/**
 * Opaque problem instance.
 */
typedef struct BwkInstance BwkInstance;

/**
 * Scalar diagnostics; undefined quantities are NaN.
 */
typedef struct BwkDiagnostics {
  double opt_lp_per_t;
  double delta;
  double sigma;
  double chi;
  double theta;
  bool nondegenerate;
  size_t num_optimal_arms;
  size_t num_binding;
} BwkDiagnostics;

typedef struct BwkEpisodeSummary {
  size_t tau;
  double total_reward;
  /**
   * `OPT_LP − total_reward`.
   */
  double regret;
  /**
   * Step at which identification finished, or -1.
   */
  int64_t phase1_end;
} BwkEpisodeSummary;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or NULL. Valid until the
 * next call into the library on the same thread.
 */
const char *bwk_last_error_message(void);

/**
 * Releases a string returned by the library. NULL is ignored.
 *
 * # Safety
 * `s` must come from this library and not have been freed.
 */
void bwk_string_free(char *s);

/**
 * Solves `max cᵀx s.t. Ax ≤ b, x ≥ 0`. `a` is row-major `k × n`; `x_out`
 * and `y_out` receive `n` and `k` values and may be NULL.
 *
 * # Safety
 * Every non-NULL pointer must be valid for the stated length.
 */
enum BwkStatus bwk_solve_lp(size_t n,
                            size_t k,
                            const double *c,
                            const double *a,
                            const double *b,
                            enum BwkLpStatus *status_out,
                            double *objective_out,
                            double *x_out,
                            double *y_out);

/**
 * Builds an instance from the real arms and resources; the time row and the
 * null arm are added. `c` is row-major `d_raw × m_raw`.
 *
 * # Safety
 * `mu` must hold `m_raw` values, `c` `d_raw·m_raw` values; `out` must be
 * writable.
 */
enum BwkStatus bwk_instance_new(size_t m_raw,
                                size_t d_raw,
                                const double *mu,
                                const double *c,
                                double b,
                                bool deterministic,
                                struct BwkInstance **out);

/**
 * Parses an instance from its JSON file format.
 *
 * # Safety
 * `json` must be a NUL-terminated string; `out` must be writable.
 */
enum BwkStatus bwk_instance_from_json(const char *json, struct BwkInstance **out);

/**
 * Built-in fixture 1 or 2.
 *
 * # Safety
 * `out` must be writable.
 */
enum BwkStatus bwk_instance_fixture(uint32_t which, struct BwkInstance **out);

/**
 * Draws a random non-degenerate instance.
 *
 * # Safety
 * `out` must be writable.
 */
enum BwkStatus bwk_instance_generate(size_t m_raw,
                                     size_t d_raw,
                                     double b,
                                     uint64_t seed,
                                     struct BwkInstance **out);

/**
 * # Safety
 * `inst` must come from this library and not have been freed. NULL is ignored.
 */
void bwk_instance_free(struct BwkInstance *inst);

/**
 * Number of arms and resources, both including the added null arm and time row.
 *
 * # Safety
 * `inst` must be a live handle; `m` and `d` writable.
 */
enum BwkStatus bwk_instance_dims(const struct BwkInstance *inst, size_t *m, size_t *d);

/**
 * Serialises the instance; free the result with [`bwk_string_free`].
 *
 * # Safety
 * `inst` must be a live handle; `out` writable.
 */
enum BwkStatus bwk_instance_to_json(const struct BwkInstance *inst, char **out);

/**
 * Scalar LP diagnostics at horizon `horizon`.
 *
 * # Safety
 * `inst` must be a live handle; `out` writable.
 */
enum BwkStatus bwk_diagnostics(const struct BwkInstance *inst,
                               size_t horizon,
                               double tol,
                               struct BwkDiagnostics *out);

/**
 * Full diagnostics as JSON; free the result with [`bwk_string_free`].
 *
 * # Safety
 * `inst` must be a live handle; `out` writable.
 */
enum BwkStatus bwk_diagnostics_json(const struct BwkInstance *inst,
                                    size_t horizon,
                                    double tol,
                                    char **out);

/**
 * Runs one seeded episode with default estimator settings.
 *
 * # Safety
 * `inst` must be a live handle; `out` writable.
 */
enum BwkStatus bwk_run_episode(const struct BwkInstance *inst,
                               enum BwkPolicy policy,
                               size_t horizon,
                               uint64_t seed,
                               struct BwkEpisodeSummary *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* BWK_H */
