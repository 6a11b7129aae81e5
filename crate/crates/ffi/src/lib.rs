//! C ABI for the ringswarm simulator.
//!
//! A simulation is created from a plain-old-data config, driven through an
//! opaque `RsSim` handle, and queried for state and metrics. Every function
//! is safe to call with NULL handles (an error status is returned) and no
//! Rust panic crosses the boundary.

use std::panic::{catch_unwind, AssertUnwindSafe};

use ringswarm::metrics::metrics_step;
use ringswarm::sim::{run, Engine, SimConfig};
use ringswarm::{Strategy, SwarmParams};

/// Status codes returned by the API.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RsStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidConfig = 2,
    /// An output buffer had the wrong length.
    BadLength = 3,
    /// The simulation aborted (non-finite state) or an internal fault was
    /// caught at the boundary.
    RuntimeAbort = 4,
}

/// Collision-avoidance wrapper selector.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RsStrategy {
    None = 0,
    Potential = 1,
    Gyro = 2,
    Cbc = 3,
    Orca = 4,
}

impl From<RsStrategy> for Strategy {
    fn from(s: RsStrategy) -> Strategy {
        match s {
            RsStrategy::None => Strategy::None,
            RsStrategy::Potential => Strategy::Potential,
            RsStrategy::Gyro => Strategy::Gyro,
            RsStrategy::Cbc => Strategy::Cbc,
            RsStrategy::Orca => Strategy::Orca,
        }
    }
}

/// Plain-old-data simulation configuration.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct RsSimConfig {
    /// Number of agents.
    pub n: u64,
    /// Attraction gain (1/s^2).
    pub alpha: f64,
    /// Speed regulation gain (s/m^2).
    pub beta: f64,
    /// Set-point speed (m/s).
    pub v0: f64,
    /// Attraction sensing delay (s).
    pub t_d: f64,
    /// Agent radius (m).
    pub r: f64,
    /// Local sensing radius (m).
    pub l_r: f64,
    /// Cautiousness parameter.
    pub c_r: f64,
    /// Acceleration cap (m/s^2).
    pub a_max: f64,
    pub strategy: RsStrategy,
    /// Seed for the initial headings.
    pub seed: u64,
    /// Total simulated time (s).
    pub t_total: f64,
    /// Metric window at the end of the run (s).
    pub t_measure: f64,
    /// Timestep upper bound (s).
    pub dt_cap: f64,
    /// Steps between metric samples.
    pub record_stride: u32,
    /// Collision detection and respawns.
    pub collisions_enabled: bool,
}

impl RsSimConfig {
    fn to_config(self) -> SimConfig {
        SimConfig {
            params: SwarmParams {
                n: self.n as usize,
                alpha: self.alpha,
                beta: self.beta,
                v0: self.v0,
                t_d: self.t_d,
                r: self.r,
                l_r: self.l_r,
                c_r: self.c_r,
                a_max: self.a_max,
            },
            strategy: self.strategy.into(),
            seed: self.seed,
            t_total: self.t_total,
            t_measure: self.t_measure,
            dt_cap: self.dt_cap,
            record_stride: self.record_stride,
            snapshot_times: Vec::new(),
            collisions_enabled: self.collisions_enabled,
        }
    }
}

/// Summary of a completed run.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct RsRunSummary {
    /// Ring quality over the measurement window.
    pub lambda: f64,
    pub mean_fatness: f64,
    pub mean_tangentness: f64,
    /// Integration step used (s).
    pub dt: f64,
    pub steps: u64,
    pub collisions: u64,
    pub qp_infeasible: u64,
    pub brakes: u64,
    pub barrier_breaches: u64,
    pub lp_fallbacks: u64,
    pub clip_saturations: u64,
    /// Largest post-clip input magnitude observed.
    pub max_input_norm: f64,
}

/// Opaque incremental simulation handle.
pub struct RsSim {
    engine: Engine,
}

/// Default configuration: the baseline swarm with avoidance disabled.
#[no_mangle]
pub extern "C" fn rs_config_default() -> RsSimConfig {
    RsSimConfig {
        n: 20,
        alpha: 0.001,
        beta: 1.0,
        v0: 0.12,
        t_d: 2.5,
        r: 0.15,
        l_r: 1.0,
        c_r: 1.0,
        a_max: 0.6,
        strategy: RsStrategy::None,
        seed: 0,
        t_total: 12_000.0,
        t_measure: 2_000.0,
        dt_cap: 0.015,
        record_stride: 10,
        collisions_enabled: true,
    }
}

/// Create a simulation. Returns NULL when `config` is NULL or invalid.
///
/// # Safety
/// `config` must be NULL or point to a valid `RsSimConfig`.
#[no_mangle]
pub unsafe extern "C" fn rs_sim_new(config: *const RsSimConfig) -> *mut RsSim {
    if config.is_null() {
        return std::ptr::null_mut();
    }
    let cfg = (*config).to_config();
    match catch_unwind(AssertUnwindSafe(|| Engine::new(&cfg))) {
        Ok(Ok(engine)) => Box::into_raw(Box::new(RsSim { engine })),
        _ => std::ptr::null_mut(),
    }
}

/// Destroy a simulation handle. NULL is ignored.
///
/// # Safety
/// `sim` must be NULL or a pointer returned by `rs_sim_new`, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn rs_sim_free(sim: *mut RsSim) {
    if !sim.is_null() {
        drop(Box::from_raw(sim));
    }
}

/// Advance the simulation by `steps` integration steps.
///
/// # Safety
/// `sim` must be NULL or a live handle from `rs_sim_new`.
#[no_mangle]
pub unsafe extern "C" fn rs_sim_step(sim: *mut RsSim, steps: u64) -> RsStatus {
    let Some(sim) = sim.as_mut() else {
        return RsStatus::NullPointer;
    };
    let result = catch_unwind(AssertUnwindSafe(|| {
        for _ in 0..steps {
            if sim.engine.advance().is_err() {
                return RsStatus::RuntimeAbort;
            }
        }
        RsStatus::Ok
    }));
    result.unwrap_or(RsStatus::RuntimeAbort)
}

/// Simulated time (s) of the current state.
///
/// # Safety
/// `sim` must be NULL or a live handle; NULL yields NaN.
#[no_mangle]
pub unsafe extern "C" fn rs_sim_time(sim: *const RsSim) -> f64 {
    match sim.as_ref() {
        Some(sim) => sim.engine.time(),
        None => f64::NAN,
    }
}

/// Integration step (s).
///
/// # Safety
/// `sim` must be NULL or a live handle; NULL yields NaN.
#[no_mangle]
pub unsafe extern "C" fn rs_sim_dt(sim: *const RsSim) -> f64 {
    match sim.as_ref() {
        Some(sim) => sim.engine.dt(),
        None => f64::NAN,
    }
}

/// Steps in a full run of `t_total`.
///
/// # Safety
/// `sim` must be NULL or a live handle; NULL yields 0.
#[no_mangle]
pub unsafe extern "C" fn rs_sim_steps_total(sim: *const RsSim) -> u64 {
    match sim.as_ref() {
        Some(sim) => sim.engine.steps_total(),
        None => 0,
    }
}

/// Number of agents.
///
/// # Safety
/// `sim` must be NULL or a live handle; NULL yields 0.
#[no_mangle]
pub unsafe extern "C" fn rs_sim_agent_count(sim: *const RsSim) -> u64 {
    match sim.as_ref() {
        Some(sim) => sim.engine.state().len() as u64,
        None => 0,
    }
}

/// Collisions resolved so far.
///
/// # Safety
/// `sim` must be NULL or a live handle; NULL yields 0.
#[no_mangle]
pub unsafe extern "C" fn rs_sim_collisions(sim: *const RsSim) -> u64 {
    match sim.as_ref() {
        Some(sim) => sim.engine.collision_events().len() as u64,
        None => 0,
    }
}

unsafe fn copy_xy(src: &[ringswarm::Vec2], out: *mut f64, len: usize) -> RsStatus {
    if out.is_null() {
        return RsStatus::NullPointer;
    }
    if len != 2 * src.len() {
        return RsStatus::BadLength;
    }
    for (k, v) in src.iter().enumerate() {
        *out.add(2 * k) = v.x;
        *out.add(2 * k + 1) = v.y;
    }
    RsStatus::Ok
}

/// Copy agent positions into `out` as interleaved x,y pairs; `len` must be
/// `2 * agent_count`.
///
/// # Safety
/// `sim` must be NULL or a live handle; `out` must be NULL or point to at
/// least `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn rs_sim_positions(
    sim: *const RsSim,
    out: *mut f64,
    len: usize,
) -> RsStatus {
    let Some(sim) = sim.as_ref() else {
        return RsStatus::NullPointer;
    };
    copy_xy(&sim.engine.state().positions, out, len)
}

/// Copy agent velocities; same layout as `rs_sim_positions`.
///
/// # Safety
/// As for `rs_sim_positions`.
#[no_mangle]
pub unsafe extern "C" fn rs_sim_velocities(
    sim: *const RsSim,
    out: *mut f64,
    len: usize,
) -> RsStatus {
    let Some(sim) = sim.as_ref() else {
        return RsStatus::NullPointer;
    };
    copy_xy(&sim.engine.state().velocities, out, len)
}

/// Instantaneous fatness and tangentness of the current state.
///
/// # Safety
/// `sim` must be NULL or a live handle; `fatness` and `tangentness` must be
/// NULL or valid for writing one double each.
#[no_mangle]
pub unsafe extern "C" fn rs_sim_metrics_now(
    sim: *const RsSim,
    fatness: *mut f64,
    tangentness: *mut f64,
) -> RsStatus {
    let Some(sim) = sim.as_ref() else {
        return RsStatus::NullPointer;
    };
    if fatness.is_null() || tangentness.is_null() {
        return RsStatus::NullPointer;
    }
    let state = sim.engine.state();
    let (phi, tau, _) = metrics_step(&state.positions, &state.velocities);
    *fatness = phi;
    *tangentness = tau;
    RsStatus::Ok
}

/// Run a full simulation to completion and fill `out` with the summary.
///
/// # Safety
/// `config` and `out` must be NULL or valid pointers to their types.
#[no_mangle]
pub unsafe extern "C" fn rs_run_summary(
    config: *const RsSimConfig,
    out: *mut RsRunSummary,
) -> RsStatus {
    if config.is_null() || out.is_null() {
        return RsStatus::NullPointer;
    }
    let cfg = (*config).to_config();
    if cfg.validate().is_err() {
        return RsStatus::InvalidConfig;
    }
    let result = catch_unwind(AssertUnwindSafe(|| run(&cfg)));
    match result {
        Ok(Ok(r)) => {
            let d = &r.diagnostics;
            *out = RsRunSummary {
                lambda: r.lambda,
                mean_fatness: r.mean_fatness,
                mean_tangentness: r.mean_tangentness,
                dt: r.dt,
                steps: r.steps,
                collisions: r.collisions(),
                qp_infeasible: d.avoidance.qp_infeasible,
                brakes: d.avoidance.brakes,
                barrier_breaches: d.avoidance.barrier_breaches,
                lp_fallbacks: d.avoidance.lp_fallbacks,
                clip_saturations: d.clip_saturations,
                max_input_norm: d.max_input_norm,
            };
            RsStatus::Ok
        }
        _ => RsStatus::RuntimeAbort,
    }
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn rs_version() -> *const std::os::raw::c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const _
}
