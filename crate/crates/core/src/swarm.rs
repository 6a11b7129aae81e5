//! Swarm state, neighbor queries, and the delayed-attraction controller.

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::vec2::Vec2;

/// Model and controller parameters for one swarm.
///
/// `c_r` is the per-strategy cautiousness: a force multiplier for the
/// potential/gyro fields, the barrier approach factor for CBC, and the
/// planning horizon in seconds for ORCA.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SwarmParams {
    /// Number of agents.
    pub n: usize,
    /// Attraction gain toward delayed positions (1/s^2).
    pub alpha: f64,
    /// Speed regulation gain (s/m^2).
    pub beta: f64,
    /// Set-point speed (m/s).
    pub v0: f64,
    /// Sensing delay for the all-to-all attraction term (s).
    pub t_d: f64,
    /// Physical agent radius (m).
    pub r: f64,
    /// Local (non-delayed) sensing radius (m).
    pub l_r: f64,
    /// Cautiousness of the collision-avoidance wrapper.
    pub c_r: f64,
    /// Acceleration cap (m/s^2).
    pub a_max: f64,
}

impl SwarmParams {
    /// Safety distance enforced by CBC and ORCA: agent diameter plus 5%.
    pub fn safety_distance(&self) -> f64 {
        2.1 * self.r
    }

    /// Speed bound assumed by the timestep rule and the CBC sensing bound.
    pub fn v_max(&self) -> f64 {
        2.0 * self.v0
    }

    pub fn validate(&self) -> Result<(), Error> {
        if self.n < 1 {
            return Err(Error::InvalidConfig("n must be at least 1".into()));
        }
        let finite = [
            self.alpha, self.beta, self.v0, self.t_d, self.r, self.l_r, self.c_r, self.a_max,
        ]
        .iter()
        .all(|v| v.is_finite());
        if !finite {
            return Err(Error::InvalidConfig("parameters must be finite".into()));
        }
        if self.alpha < 0.0 || self.beta < 0.0 || self.t_d < 0.0 || self.r < 0.0 || self.l_r < 0.0
        {
            return Err(Error::InvalidConfig(
                "alpha, beta, t_d, r, l_r must be nonnegative".into(),
            ));
        }
        if self.v0 <= 0.0 {
            return Err(Error::InvalidConfig("v0 must be positive".into()));
        }
        if self.c_r < 0.0 {
            return Err(Error::InvalidConfig("c_r must be nonnegative".into()));
        }
        if self.a_max <= 0.0 {
            return Err(Error::InvalidConfig("a_max must be positive".into()));
        }
        Ok(())
    }
}

impl Default for SwarmParams {
    /// The fixed parameter set used throughout the sweep studies.
    fn default() -> Self {
        SwarmParams {
            n: 20,
            alpha: 0.001,
            beta: 1.0,
            v0: 0.12,
            t_d: 2.5,
            r: 0.15,
            l_r: 1.0,
            c_r: 1.0,
            a_max: 0.6,
        }
    }
}

/// Per-agent dynamic state.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct AgentState {
    pub pos: Vec2,
    pub vel: Vec2,
    /// Times this agent has been respawned after a collision.
    pub respawns: u64,
}

/// Positions and velocities of all agents, struct-of-arrays.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SwarmState {
    pub positions: Vec<Vec2>,
    pub velocities: Vec<Vec2>,
    pub respawns: Vec<u64>,
}

impl SwarmState {
    pub fn with_capacity(n: usize) -> Self {
        SwarmState {
            positions: Vec::with_capacity(n),
            velocities: Vec::with_capacity(n),
            respawns: vec![0; n],
        }
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn agent(&self, i: usize) -> AgentState {
        AgentState {
            pos: self.positions[i],
            vel: self.velocities[i],
            respawns: self.respawns[i],
        }
    }

    pub fn is_finite(&self) -> bool {
        self.positions.iter().all(|p| p.is_finite())
            && self.velocities.iter().all(|v| v.is_finite())
    }
}

/// Non-delayed states of the agents within sensing range, self excluded,
/// ordered by ascending agent index.
#[derive(Debug, Clone, Default)]
pub struct NeighborView {
    pub entries: Vec<(Vec2, Vec2)>,
}

impl NeighborView {
    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    /// Entry closest to `pos`; first such entry (lowest index) on ties.
    pub fn nearest(&self, pos: Vec2) -> Option<(Vec2, Vec2)> {
        let mut best: Option<((Vec2, Vec2), f64)> = None;
        for &(p, v) in &self.entries {
            let d2 = (p - pos).norm_sq();
            if best.map_or(true, |(_, bd2)| d2 < bd2) {
                best = Some(((p, v), d2));
            }
        }
        best.map(|(e, _)| e)
    }
}

/// Collect the agents within `l_r` of agent `self_index` (boundary inclusive)
/// into `out`, reusing its storage.
pub fn neighbor_set_into(
    self_index: usize,
    positions: &[Vec2],
    velocities: &[Vec2],
    l_r: f64,
    out: &mut NeighborView,
) {
    out.entries.clear();
    let p_i = positions[self_index];
    for j in 0..positions.len() {
        if j == self_index {
            continue;
        }
        if (p_i - positions[j]).norm() <= l_r {
            out.entries.push((positions[j], velocities[j]));
        }
    }
}

/// Convenience allocating form of [`neighbor_set_into`].
pub fn neighbor_set(
    self_index: usize,
    positions: &[Vec2],
    velocities: &[Vec2],
    l_r: f64,
) -> NeighborView {
    let mut view = NeighborView::default();
    neighbor_set_into(self_index, positions, velocities, l_r, &mut view);
    view
}

/// Desired (pre-avoidance) control input for agent `self_index`:
/// a speed-regulation term toward `v0` plus mean attraction toward the
/// delayed positions of all other agents.
pub fn desired_control(
    self_index: usize,
    positions: &[Vec2],
    velocities: &[Vec2],
    delayed_positions: &[Vec2],
    params: &SwarmParams,
) -> Vec2 {
    let n = positions.len();
    let pos = positions[self_index];
    let vel = velocities[self_index];

    let speed_term = params.beta * (params.v0 * params.v0 - vel.norm_sq()) * vel;

    if n < 2 {
        return speed_term;
    }
    let mut attraction = Vec2::ZERO;
    for j in 0..n {
        if j != self_index {
            attraction += delayed_positions[j] - pos;
        }
    }
    speed_term + attraction * (params.alpha / (n - 1) as f64)
}
