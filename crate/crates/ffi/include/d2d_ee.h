#ifndef D2D_EE_H
#define D2D_EE_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

typedef enum D2dEePolicy {
  D2D_EE_POLICY_STRICT = 0,
  D2D_EE_POLICY_DROP_INFEASIBLE = 1,
} D2dEePolicy;

typedef enum D2dEeRateMode {
  D2D_EE_RATE_MODE_NO_CU_LOSS = 0,
  D2D_EE_RATE_MODE_CU_LOSS = 1,
} D2dEeRateMode;

typedef enum D2dEeStatus {
  D2D_EE_STATUS_OK = 0,
  D2D_EE_STATUS_NULL_POINTER = 1,
  D2D_EE_STATUS_INVALID_ARGUMENT = 2,
  D2D_EE_STATUS_INVALID_CONFIG = 3,
  D2D_EE_STATUS_DEGENERATE = 4,
  D2D_EE_STATUS_INFEASIBLE = 5,
  D2D_EE_STATUS_NOT_CONVERGED = 6,
  D2D_EE_STATUS_TOO_LARGE = 7,
  D2D_EE_STATUS_IO = 8,
  D2D_EE_STATUS_PARSE = 9,
  D2D_EE_STATUS_BUFFER_TOO_SMALL = 10,
  D2D_EE_STATUS_PANIC = 11,
} D2dEeStatus;

/**
 * Opaque random drop.
 */
typedef struct D2dEeScenario D2dEeScenario;

/**
 * Opaque solver result.
 */
typedef struct D2dEeSolution D2dEeSolution;

/**
 * Mirror of the library cell configuration.
 */
typedef struct D2dEeCellConfig {
  double cell_radius_m;
  double kappa;
  double chi;
  double shadowing_sigma_db;
  double noise_psd_dbm_per_hz;
  double rb_bandwidth_hz;
  uint32_t n_cu;
  uint32_t n_rb;
  uint32_t n_d2d;
  double p_max_w;
  double p_b_over_n0_db;
  double tau_w;
  double gamma_bps;
  double p_c_w;
  double d2d_distance_m;
} D2dEeCellConfig;

typedef struct D2dEeSolverConfig {
  /**
   * Threshold on |F| per Hz.
   */
  double epsilon;
  uint32_t max_iterations;
  /**
   * A [`D2dEeRateMode`] value.
   */
  uint32_t mode;
  /**
   * A [`D2dEePolicy`] value.
   */
  uint32_t policy;
} D2dEeSolverConfig;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *d2d_ee_version(void);

/**
 * Message for the last failed call on this thread; empty after a success.
 * The pointer stays valid until the next call into this library on the
 * same thread.
 */
const char *d2d_ee_last_error_message(void);

/**
 * # Safety
 * `out` must be null or point to writable memory for one config.
 */
enum D2dEeStatus d2d_ee_cell_config_default(struct D2dEeCellConfig *out);

/**
 * # Safety
 * `out` must be null or point to writable memory for one config.
 */
enum D2dEeStatus d2d_ee_solver_config_default(struct D2dEeSolverConfig *out);

/**
 * Draws a scenario. On success `*out` receives a handle to release with
 * [`d2d_ee_scenario_free`].
 *
 * # Safety
 * `config` must be null or point to a valid config; `out` must be null or
 * writable.
 */
enum D2dEeStatus d2d_ee_scenario_generate(const struct D2dEeCellConfig *config,
                                          uint64_t seed,
                                          struct D2dEeScenario **out);

/**
 * # Safety
 * `scenario` must be null or a handle from [`d2d_ee_scenario_generate`]
 * that has not been freed.
 */
void d2d_ee_scenario_free(struct D2dEeScenario *scenario);

/**
 * Number of D2D pairs in the scenario, 0 for a null handle.
 *
 * # Safety
 * `scenario` must be null or a live handle.
 */
uintptr_t d2d_ee_scenario_n_pairs(const struct D2dEeScenario *scenario);

/**
 * Runs the Dinkelbach solver on a scenario.
 *
 * # Safety
 * `scenario` and `config` must be null or valid; `out` must be null or
 * writable.
 */
enum D2dEeStatus d2d_ee_solve(const struct D2dEeScenario *scenario,
                              const struct D2dEeSolverConfig *config,
                              struct D2dEeSolution **out);

/**
 * # Safety
 * `solution` must be null or a handle from [`d2d_ee_solve`] that has not
 * been freed.
 */
void d2d_ee_solution_free(struct D2dEeSolution *solution);

/**
 * Energy efficiency in bits/s per watt; NaN for a null handle.
 *
 * # Safety
 * `solution` must be null or a live handle.
 */
double d2d_ee_solution_ee(const struct D2dEeSolution *solution);

/**
 * Number of inner solves performed; 0 for a null handle.
 *
 * # Safety
 * `solution` must be null or a live handle.
 */
uintptr_t d2d_ee_solution_iterations(const struct D2dEeSolution *solution);

/**
 * Copies the RB index of each pair into `rb_of_pair` (-1 for unserved
 * pairs) and the transmit powers into `powers_w`. Either output may be
 * null. Both must hold `len` elements, and `len` must be at least the
 * number of pairs.
 *
 * # Safety
 * Non-null outputs must be writable for `len` elements.
 */
enum D2dEeStatus d2d_ee_solution_allocation(const struct D2dEeSolution *solution,
                                            int64_t *rb_of_pair,
                                            double *powers_w,
                                            uintptr_t len);

/**
 * Distinct real roots of `a x^3 + b x^2 + c x + d`, ascending. `roots` must
 * hold 3 values; `*count` receives how many were written.
 *
 * # Safety
 * `roots` must be null or writable for 3 values; `count` must be null or
 * writable.
 */
enum D2dEeStatus d2d_ee_cubic_real_roots(double a,
                                         double b,
                                         double c,
                                         double d,
                                         double *roots,
                                         uintptr_t *count);

/**
 * Maximum-weight assignment of `rows` pairs to `cols` RBs from a row-major
 * utility matrix; `policy` is a [`D2dEePolicy`] value. Writes each row's
 * column (-1 if dropped) to `col_of_row` (`rows` elements) and the
 * objective to `total`.
 *
 * # Safety
 * `utilities` must be readable for `rows * cols` values; `col_of_row`
 * writable for `rows` values; `total` null or writable.
 */
enum D2dEeStatus d2d_ee_max_weight_assignment(const double *utilities,
                                              uintptr_t rows,
                                              uintptr_t cols,
                                              uint32_t policy,
                                              int64_t *col_of_row,
                                              double *total);

/**
 * Runs an experiment described by flat `key = value` text (the CLI config
 * format) and writes the CSV to its `output_path`.
 *
 * # Safety
 * `config_text` must be null or a NUL-terminated string.
 */
enum D2dEeStatus d2d_ee_run_experiment(const char *config_text);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* D2D_EE_H */
