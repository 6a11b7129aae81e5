#ifndef RINGSWARM_H
#define RINGSWARM_H

/* Generated by cbindgen from ringswarm-ffi; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Collision-avoidance wrapper selector.
 */
typedef enum RsStrategy {
  RS_STRATEGY_NONE = 0,
  RS_STRATEGY_POTENTIAL = 1,
  RS_STRATEGY_GYRO = 2,
  RS_STRATEGY_CBC = 3,
  RS_STRATEGY_ORCA = 4,
} RsStrategy;

/**
 * Status codes returned by the API.
 */
typedef enum RsStatus {
  RS_STATUS_OK = 0,
  RS_STATUS_NULL_POINTER = 1,
  RS_STATUS_INVALID_CONFIG = 2,
  /**
   * An output buffer had the wrong length.
   */
  RS_STATUS_BAD_LENGTH = 3,
  /**
   * The simulation aborted (non-finite state) or an internal fault was
   * caught at the boundary.
   */
  RS_STATUS_RUNTIME_ABORT = 4,
} RsStatus;

/**
 * Opaque incremental simulation handle.
 */
typedef struct RsSim RsSim;

/**
 * Plain-old-data simulation configuration.
 */
typedef struct RsSimConfig {
  /**
   * Number of agents.
   */
  uint64_t n;
  /**
   * Attraction gain (1/s^2).
   */
  double alpha;
  /**
   * Speed regulation gain (s/m^2).
   */
  double beta;
  /**
   * Set-point speed (m/s).
   */
  double v0;
  /**
   * Attraction sensing delay (s).
   */
  double t_d;
  /**
   * Agent radius (m).
   */
  double r;
  /**
   * Local sensing radius (m).
   */
  double l_r;
  /**
   * Cautiousness parameter.
   */
  double c_r;
  /**
   * Acceleration cap (m/s^2).
   */
  double a_max;
  enum RsStrategy strategy;
  /**
   * Seed for the initial headings.
   */
  uint64_t seed;
  /**
   * Total simulated time (s).
   */
  double t_total;
  /**
   * Metric window at the end of the run (s).
   */
  double t_measure;
  /**
   * Timestep upper bound (s).
   */
  double dt_cap;
  /**
   * Steps between metric samples.
   */
  uint32_t record_stride;
  /**
   * Collision detection and respawns.
   */
  bool collisions_enabled;
} RsSimConfig;

/**
 * Summary of a completed run.
 */
typedef struct RsRunSummary {
  /**
   * Ring quality over the measurement window.
   */
  double lambda;
  double mean_fatness;
  double mean_tangentness;
  /**
   * Integration step used (s).
   */
  double dt;
  uint64_t steps;
  uint64_t collisions;
  uint64_t qp_infeasible;
  uint64_t brakes;
  uint64_t barrier_breaches;
  uint64_t lp_fallbacks;
  uint64_t clip_saturations;
  /**
   * Largest post-clip input magnitude observed.
   */
  double max_input_norm;
} RsRunSummary;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Default configuration: the baseline swarm with avoidance disabled.
 */
struct RsSimConfig rs_config_default(void);

/**
 * Create a simulation. Returns NULL when `config` is NULL or invalid.
 *
 * # Safety
 * `config` must be NULL or point to a valid `RsSimConfig`.
 */
struct RsSim *rs_sim_new(const struct RsSimConfig *config);

/**
 * Destroy a simulation handle. NULL is ignored.
 *
 * # Safety
 * `sim` must be NULL or a pointer returned by `rs_sim_new`, not yet freed.
 */
void rs_sim_free(struct RsSim *sim);

/**
 * Advance the simulation by `steps` integration steps.
 *
 * # Safety
 * `sim` must be NULL or a live handle from `rs_sim_new`.
 */
enum RsStatus rs_sim_step(struct RsSim *sim, uint64_t steps);

/**
 * Simulated time (s) of the current state.
 *
 * # Safety
 * `sim` must be NULL or a live handle; NULL yields NaN.
 */
double rs_sim_time(const struct RsSim *sim);

/**
 * Integration step (s).
 *
 * # Safety
 * `sim` must be NULL or a live handle; NULL yields NaN.
 */
double rs_sim_dt(const struct RsSim *sim);

/**
 * Steps in a full run of `t_total`.
 *
 * # Safety
 * `sim` must be NULL or a live handle; NULL yields 0.
 */
uint64_t rs_sim_steps_total(const struct RsSim *sim);

/**
 * Number of agents.
 *
 * # Safety
 * `sim` must be NULL or a live handle; NULL yields 0.
 */
uint64_t rs_sim_agent_count(const struct RsSim *sim);

/**
 * Collisions resolved so far.
 *
 * # Safety
 * `sim` must be NULL or a live handle; NULL yields 0.
 */
uint64_t rs_sim_collisions(const struct RsSim *sim);

/**
 * Copy agent positions into `out` as interleaved x,y pairs; `len` must be
 * `2 * agent_count`.
 *
 * # Safety
 * `sim` must be NULL or a live handle; `out` must be NULL or point to at
 * least `len` writable doubles.
 */
enum RsStatus rs_sim_positions(const struct RsSim *sim, double *out, uintptr_t len);

/**
 * Copy agent velocities; same layout as `rs_sim_positions`.
 *
 * # Safety
 * As for `rs_sim_positions`.
 */
enum RsStatus rs_sim_velocities(const struct RsSim *sim, double *out, uintptr_t len);

/**
 * Instantaneous fatness and tangentness of the current state.
 *
 * # Safety
 * `sim` must be NULL or a live handle; `fatness` and `tangentness` must be
 * NULL or valid for writing one double each.
 */
enum RsStatus rs_sim_metrics_now(const struct RsSim *sim, double *fatness, double *tangentness);

/**
 * Run a full simulation to completion and fill `out` with the summary.
 *
 * # Safety
 * `config` and `out` must be NULL or valid pointers to their types.
 */
enum RsStatus rs_run_summary(const struct RsSimConfig *config, struct RsRunSummary *out);

/**
 * Library version as a static NUL-terminated string.
 */
const char *rs_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* RINGSWARM_H */
