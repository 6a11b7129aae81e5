//! Fixed-step deterministic simulation loop.
//!
//! Each step, from one synchronous pre-step state: record positions into the
//! delay buffer, compute every agent's desired input from the delayed
//! all-to-all positions, filter it through the selected avoidance wrapper
//! using non-delayed local neighbors, clip to the acceleration cap, then
//! integrate (semi-implicit Euler: velocity first, position with the new
//! velocity). Collisions are detected at step boundaries and resolved by
//! respawning the pair in a safe corner.

use serde::{Deserialize, Serialize};

use crate::avoid::{self, AvoidanceDiagnostics, AvoidanceRequest, Strategy};
use crate::delay::DelayBuffer;
use crate::error::Error;
use crate::metrics::{metrics_step, ring_quality, MetricsSample};
use crate::rng;
use crate::swarm::{desired_control, neighbor_set_into, NeighborView, SwarmParams, SwarmState};
use crate::vec2::{clip, Vec2};

/// Stream tag for initial-heading draws.
const HEADING_STREAM: u64 = 0x1;

/// Everything needed to run one simulation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub params: SwarmParams,
    pub strategy: Strategy,
    pub seed: u64,
    /// Total simulated time (s).
    pub t_total: f64,
    /// Metric measurement window at the end of the run (s).
    pub t_measure: f64,
    /// Upper bound on the integration step (s).
    pub dt_cap: f64,
    /// Steps between metric samples inside the measurement window.
    pub record_stride: u32,
    /// Times (s) at which to export full state snapshots.
    pub snapshot_times: Vec<f64>,
    /// Collision detection toggle; disabling reproduces the idealized
    /// pass-through swarm.
    pub collisions_enabled: bool,
}

impl SimConfig {
    /// Default horizons: stabilize then measure a 2000 s window. The force
    /// wrappers settle more slowly and get the longer run.
    pub fn new(params: SwarmParams, strategy: Strategy, seed: u64) -> Self {
        SimConfig {
            params,
            strategy,
            seed,
            t_total: default_t_total(strategy),
            t_measure: 2_000.0,
            dt_cap: 0.015,
            record_stride: 10,
            snapshot_times: Vec::new(),
            collisions_enabled: true,
        }
    }

    /// Integration step: no agent may cross more than half a body length per
    /// step at the assumed top speed `2 v0`.
    pub fn dt(&self) -> f64 {
        compute_dt(self.params.r, self.params.v0, self.dt_cap)
    }

    pub fn validate(&self) -> Result<(), Error> {
        self.params.validate()?;
        if !(self.t_total.is_finite() && self.t_total > 0.0) {
            return Err(Error::InvalidConfig("t_total must be positive".into()));
        }
        if !(self.t_measure.is_finite() && self.t_measure > 0.0) {
            return Err(Error::InvalidConfig("t_measure must be positive".into()));
        }
        if self.t_measure > self.t_total {
            return Err(Error::InvalidConfig(
                "t_measure must not exceed t_total".into(),
            ));
        }
        if !(self.dt_cap.is_finite() && self.dt_cap > 0.0) {
            return Err(Error::InvalidConfig("dt_cap must be positive".into()));
        }
        if self.record_stride == 0 {
            return Err(Error::InvalidConfig("record_stride must be positive".into()));
        }
        if self.t_measure < self.record_stride as f64 * self.dt() {
            return Err(Error::InvalidConfig(
                "measurement window shorter than one record stride".into(),
            ));
        }
        if self.snapshot_times.iter().any(|t| !t.is_finite() || *t < 0.0) {
            return Err(Error::InvalidConfig(
                "snapshot times must be finite and nonnegative".into(),
            ));
        }
        Ok(())
    }
}

/// Default total simulated time per strategy.
pub fn default_t_total(strategy: Strategy) -> f64 {
    match strategy {
        Strategy::Potential | Strategy::Gyro => 32_000.0,
        _ => 12_000.0,
    }
}

/// Timestep rule. Point agents cannot overlap, so `r = 0` falls back to the
/// cap.
pub fn compute_dt(r: f64, v0: f64, dt_cap: f64) -> f64 {
    debug_assert!(v0 > 0.0);
    if r == 0.0 {
        return dt_cap;
    }
    (r / (2.0 * v0)).min(dt_cap)
}

/// A collision resolved by respawning both agents.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CollisionEvent {
    pub time: f64,
    pub i: usize,
    pub j: usize,
}

/// Full swarm state exported at a requested time.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectorySnapshot {
    pub t: f64,
    pub positions: Vec<Vec2>,
    pub velocities: Vec<Vec2>,
}

/// Counters accumulated over a run.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct RunDiagnostics {
    pub avoidance: AvoidanceDiagnostics,
    /// Steps on which the final acceleration clip was binding for an agent.
    pub clip_saturations: u64,
    /// Agents hitting the degenerate metric convention inside the window.
    pub degenerate_metric_agents: u64,
    /// Largest post-clip input magnitude observed.
    pub max_input_norm: f64,
}

/// Result of one simulation run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub dt: f64,
    pub steps: u64,
    pub samples: Vec<MetricsSample>,
    pub mean_fatness: f64,
    pub mean_tangentness: f64,
    pub lambda: f64,
    pub collision_events: Vec<CollisionEvent>,
    pub diagnostics: RunDiagnostics,
    pub snapshots: Vec<TrajectorySnapshot>,
    pub final_state: SwarmState,
}

impl RunOutput {
    pub fn collisions(&self) -> u64 {
        self.collision_events.len() as u64
    }
}

/// Place agents on a spiral lattice with spacing `max(5r, l_r)` and give
/// every agent speed `v0` at a heading drawn from the seeded counter
/// generator.
pub fn init_spiral(params: &SwarmParams, seed: u64) -> SwarmState {
    // spacing floor keeps the degenerate r = l_r = 0 corner collision-free
    let spacing = (5.0 * params.r).max(params.l_r).max(1e-3);
    let n = params.n;
    let mut state = SwarmState::with_capacity(n);

    let b = spacing / std::f64::consts::TAU;
    let mut theta = std::f64::consts::TAU;
    for k in 0..n {
        let pos = if k == 0 {
            Vec2::ZERO
        } else {
            let rho = b * theta;
            let p = Vec2::from_polar(rho, theta);
            theta += spacing / rho;
            p
        };
        state.positions.push(pos);
        let heading = std::f64::consts::TAU * rng::unit_f64(seed, HEADING_STREAM, k as u64);
        state.velocities.push(Vec2::from_polar(params.v0, heading));
    }
    state
}

/// Detect pairs closer than `2r`, respawn them in the safe corner, and emit
/// events. Pairs sharing an agent with an earlier pair this boundary are
/// skipped and re-checked next step. Returns the number of pairs resolved.
pub fn detect_and_respawn(
    state: &mut SwarmState,
    r: f64,
    t: f64,
    events: &mut Vec<CollisionEvent>,
) -> usize {
    if r <= 0.0 {
        return 0;
    }
    let n = state.len();
    let threshold = 2.0 * r;
    let mut pairs: Vec<(usize, usize)> = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            if (state.positions[i] - state.positions[j]).norm() < threshold {
                pairs.push((i, j));
            }
        }
    }
    if pairs.is_empty() {
        return 0;
    }

    // safe corner frozen before any relocation
    let mut r_safe = Vec2::new(f64::INFINITY, f64::INFINITY);
    for p in &state.positions {
        r_safe.x = r_safe.x.min(p.x);
        r_safe.y = r_safe.y.min(p.y);
    }

    let mut respawned = vec![false; n];
    let mut k = 0u64;
    let mut processed = 0;
    for (i, j) in pairs {
        if respawned[i] || respawned[j] {
            continue;
        }
        let near = 4.0 + 8.0 * k as f64;
        let far = 8.0 + 8.0 * k as f64;
        state.positions[i] = r_safe - Vec2::new(near * r, near * r);
        state.positions[j] = r_safe - Vec2::new(far * r, far * r);
        state.velocities[i] = Vec2::ZERO;
        state.velocities[j] = Vec2::ZERO;
        state.respawns[i] += 1;
        state.respawns[j] += 1;
        respawned[i] = true;
        respawned[j] = true;
        events.push(CollisionEvent { time: t, i, j });
        k += 1;
        processed += 1;
    }
    processed
}

/// Incremental simulation: one `SimConfig` plus evolving state. Drives both
/// the batch `run` entry point and external step-wise bindings.
#[derive(Debug, Clone)]
pub struct Engine {
    config: SimConfig,
    dt: f64,
    steps_total: u64,
    step: u64,
    state: SwarmState,
    delay: DelayBuffer,
    diagnostics: RunDiagnostics,
    events: Vec<CollisionEvent>,
    delayed: Vec<Vec2>,
    inputs: Vec<Vec2>,
    view: NeighborView,
}

impl Engine {
    /// Spiral-initialized engine.
    pub fn new(config: &SimConfig) -> Result<Self, Error> {
        config.validate()?;
        let state = init_spiral(&config.params, config.seed);
        Self::from_state(config, state)
    }

    /// Engine with explicit initial conditions (the pairwise studies).
    pub fn with_state(config: &SimConfig, state: SwarmState) -> Result<Self, Error> {
        config.validate()?;
        if state.len() != config.params.n {
            return Err(Error::InvalidConfig(format!(
                "initial state has {} agents, config says {}",
                state.len(),
                config.params.n
            )));
        }
        if !state.is_finite() {
            return Err(Error::InvalidConfig("initial state must be finite".into()));
        }
        Self::from_state(config, state)
    }

    fn from_state(config: &SimConfig, state: SwarmState) -> Result<Self, Error> {
        let dt = config.dt();
        let n = config.params.n;
        Ok(Engine {
            config: config.clone(),
            dt,
            steps_total: (config.t_total / dt).round() as u64,
            step: 0,
            state,
            delay: DelayBuffer::new(config.params.t_d, dt),
            diagnostics: RunDiagnostics::default(),
            events: Vec::new(),
            delayed: Vec::with_capacity(n),
            inputs: vec![Vec2::ZERO; n],
            view: NeighborView::default(),
        })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// Completed steps.
    pub fn step_index(&self) -> u64 {
        self.step
    }

    /// Steps in a full run of `t_total`.
    pub fn steps_total(&self) -> u64 {
        self.steps_total
    }

    pub fn time(&self) -> f64 {
        self.step as f64 * self.dt
    }

    pub fn config(&self) -> &SimConfig {
        &self.config
    }

    pub fn state(&self) -> &SwarmState {
        &self.state
    }

    pub fn diagnostics(&self) -> &RunDiagnostics {
        &self.diagnostics
    }

    pub fn collision_events(&self) -> &[CollisionEvent] {
        &self.events
    }

    /// Advance one step (control, integration, collision handling).
    pub fn advance(&mut self) -> Result<(), Error> {
        let params = self.config.params;
        let n = params.n;

        self.delayed.clear();
        let snapshot = self.delay.record_and_query(&self.state.positions);
        self.delayed.extend_from_slice(snapshot);

        for i in 0..n {
            let u_des = desired_control(
                i,
                &self.state.positions,
                &self.state.velocities,
                &self.delayed,
                &params,
            );
            neighbor_set_into(
                i,
                &self.state.positions,
                &self.state.velocities,
                params.l_r,
                &mut self.view,
            );
            let req = AvoidanceRequest {
                u_des,
                pos: self.state.positions[i],
                vel: self.state.velocities[i],
                neighbors: &self.view,
                params: &params,
                dt: self.dt,
                self_index: i,
            };
            let u = avoid::apply(self.config.strategy, &req, &mut self.diagnostics.avoidance);
            let u_act = clip(u, params.a_max);
            if u.norm() > params.a_max {
                self.diagnostics.clip_saturations += 1;
            }
            let mag = u_act.norm();
            if mag > self.diagnostics.max_input_norm {
                self.diagnostics.max_input_norm = mag;
            }
            self.inputs[i] = u_act;
        }

        for i in 0..n {
            self.state.velocities[i] += self.inputs[i] * self.dt;
            self.state.positions[i] += self.state.velocities[i] * self.dt;
        }

        self.step += 1;
        let t_now = self.time();
        if !self.state.is_finite() {
            let agent = (0..n)
                .find(|&i| {
                    !self.state.positions[i].is_finite() || !self.state.velocities[i].is_finite()
                })
                .unwrap_or(0);
            return Err(Error::NonFiniteState { t: t_now, agent });
        }

        if self.config.collisions_enabled {
            detect_and_respawn(&mut self.state, params.r, t_now, &mut self.events);
        }
        Ok(())
    }
}

/// Run one simulation to completion.
pub fn run(config: &SimConfig) -> Result<RunOutput, Error> {
    let mut engine = Engine::new(config)?;
    let dt = engine.dt();
    let steps = engine.steps_total();
    let measure_start = config.t_total - config.t_measure;

    // snapshot boundaries: 0 is the initial state
    let snapshot_steps: Vec<u64> = config
        .snapshot_times
        .iter()
        .map(|t| ((t / dt).round() as u64).min(steps))
        .collect();
    let mut snapshots: Vec<TrajectorySnapshot> = Vec::new();
    let maybe_snapshot =
        |boundary: u64, state: &SwarmState, out: &mut Vec<TrajectorySnapshot>| {
            for (idx, &s) in snapshot_steps.iter().enumerate() {
                if s == boundary {
                    out.push(TrajectorySnapshot {
                        t: config.snapshot_times[idx],
                        positions: state.positions.clone(),
                        velocities: state.velocities.clone(),
                    });
                }
            }
        };
    maybe_snapshot(0, engine.state(), &mut snapshots);

    let mut samples: Vec<MetricsSample> = Vec::new();
    let mut degenerate: u64 = 0;

    for step in 0..steps {
        engine.advance()?;
        let t_now = (step + 1) as f64 * dt;
        if t_now >= measure_start - 1e-9 && (step + 1) % config.record_stride as u64 == 0 {
            let state = engine.state();
            let (phi, tau, degen) = metrics_step(&state.positions, &state.velocities);
            degenerate += degen as u64;
            samples.push(MetricsSample {
                t: t_now,
                fatness: phi,
                tangentness: tau,
            });
        }
        maybe_snapshot(step + 1, engine.state(), &mut snapshots);
    }

    let count = samples.len().max(1) as f64;
    let mean_fatness = samples.iter().map(|s| s.fatness).sum::<f64>() / count;
    let mean_tangentness = samples.iter().map(|s| s.tangentness).sum::<f64>() / count;
    let lambda = ring_quality(mean_fatness, mean_tangentness);

    let mut diagnostics = *engine.diagnostics();
    diagnostics.degenerate_metric_agents = degenerate;

    let events = engine.collision_events().to_vec();
    Ok(RunOutput {
        dt,
        steps,
        samples,
        mean_fatness,
        mean_tangentness,
        lambda,
        collision_events: events,
        diagnostics,
        snapshots,
        final_state: engine.state().clone(),
    })
}

/// Run a two-agent encounter from explicit initial conditions, tracking the
/// minimum pair separation. Used by the pairwise-safety studies.
pub fn run_pair_encounter(
    config: &SimConfig,
    positions: [Vec2; 2],
    velocities: [Vec2; 2],
) -> Result<f64, Error> {
    let mut cfg = config.clone();
    cfg.params.n = 2;

    let mut state = SwarmState::with_capacity(2);
    state.positions.extend_from_slice(&positions);
    state.velocities.extend_from_slice(&velocities);

    let mut engine = Engine::with_state(&cfg, state)?;
    let mut min_dist = (positions[0] - positions[1]).norm();
    for _ in 0..engine.steps_total() {
        engine.advance()?;
        let s = engine.state();
        let dist = (s.positions[0] - s.positions[1]).norm();
        if dist < min_dist {
            min_dist = dist;
        }
    }
    Ok(min_dist)
}
