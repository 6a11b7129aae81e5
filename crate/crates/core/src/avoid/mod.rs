//! Collision-avoidance wrappers: each strategy converts the desired input
//! into a safer one given the local neighbor view. The acceleration cap is
//! applied downstream by the engine, not here.

pub mod cbc;
pub mod field;
pub mod orca;
pub mod qp;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::swarm::{NeighborView, SwarmParams};
use crate::vec2::Vec2;

/// Which collision-avoidance wrapper to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Strategy {
    None,
    Potential,
    Gyro,
    Cbc,
    Orca,
}

impl Strategy {
    pub const ALL: [Strategy; 5] = [
        Strategy::None,
        Strategy::Potential,
        Strategy::Gyro,
        Strategy::Cbc,
        Strategy::Orca,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Strategy::None => "none",
            Strategy::Potential => "potential",
            Strategy::Gyro => "gyro",
            Strategy::Cbc => "cbc",
            Strategy::Orca => "orca",
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s {
            "none" => Ok(Strategy::None),
            "potential" => Ok(Strategy::Potential),
            "gyro" => Ok(Strategy::Gyro),
            "cbc" => Ok(Strategy::Cbc),
            "orca" => Ok(Strategy::Orca),
            other => Err(Error::UnknownStrategy(other.to_string())),
        }
    }
}

/// Everything a wrapper may look at when filtering one agent's input.
#[derive(Debug, Clone)]
pub struct AvoidanceRequest<'a> {
    pub u_des: Vec2,
    pub pos: Vec2,
    pub vel: Vec2,
    pub neighbors: &'a NeighborView,
    pub params: &'a SwarmParams,
    pub dt: f64,
    /// Own index; used only for deterministic symmetry breaking.
    pub self_index: usize,
}

/// Per-step safety-filter diagnostics, accumulated by the engine.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AvoidanceDiagnostics {
    /// CBC quadratic programs with an empty feasible polygon.
    pub qp_infeasible: u64,
    /// CBC brake fallbacks (infeasible QP or breached barrier).
    pub brakes: u64,
    /// Neighbor pairs observed inside the safety distance.
    pub barrier_breaches: u64,
    /// ORCA velocity programs that fell back to the least-violating velocity.
    pub lp_fallbacks: u64,
    /// CBC constraint bounds clamped near the barrier singularity.
    pub b_clamps: u64,
}

impl AvoidanceDiagnostics {
    pub fn merge(&mut self, other: &AvoidanceDiagnostics) {
        self.qp_infeasible += other.qp_infeasible;
        self.brakes += other.brakes;
        self.barrier_breaches += other.barrier_breaches;
        self.lp_fallbacks += other.lp_fallbacks;
        self.b_clamps += other.b_clamps;
    }
}

/// Pass-through baseline: collision avoidance disabled.
pub fn avoid_none(req: &AvoidanceRequest) -> Vec2 {
    req.u_des
}

/// Run the selected wrapper. Diagnostics accumulate into `diag`.
pub fn apply(strategy: Strategy, req: &AvoidanceRequest, diag: &mut AvoidanceDiagnostics) -> Vec2 {
    match strategy {
        Strategy::None => avoid_none(req),
        Strategy::Potential => field::avoid_potential(req),
        Strategy::Gyro => field::avoid_gyro(req),
        Strategy::Cbc => cbc::avoid_cbc(req, diag),
        Strategy::Orca => orca::avoid_orca(req, diag),
    }
}
