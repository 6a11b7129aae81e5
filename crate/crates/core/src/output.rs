//! Delimited-text and JSON exporters.
//!
//! All float formatting uses Rust's shortest round-trip representation, so
//! identical runs produce byte-identical files.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::Serialize;

use crate::error::Error;
use crate::sim::{RunOutput, SimConfig};

/// Metric series: `t,fatness,tangentness` per sample.
pub fn metrics_csv(out: &RunOutput) -> String {
    let mut s = String::with_capacity(32 * out.samples.len() + 32);
    s.push_str("t,fatness,tangentness\n");
    for sample in &out.samples {
        let _ = writeln!(s, "{},{},{}", sample.t, sample.fatness, sample.tangentness);
    }
    s
}

/// Trajectory snapshots: `time,index,x,y,vx,vy`, one record per
/// (snapshot time, agent).
pub fn trajectory_csv(out: &RunOutput) -> String {
    let mut s = String::from("time,index,x,y,vx,vy\n");
    for snap in &out.snapshots {
        for i in 0..snap.positions.len() {
            let p = snap.positions[i];
            let v = snap.velocities[i];
            let _ = writeln!(s, "{},{},{},{},{},{}", snap.t, i, p.x, p.y, v.x, v.y);
        }
    }
    s
}

/// Machine-readable run summary.
#[derive(Debug, Serialize)]
pub struct RunSummary<'a> {
    pub strategy: &'a str,
    pub seed: u64,
    pub dt: f64,
    pub steps: u64,
    pub lambda: f64,
    pub mean_fatness: f64,
    pub mean_tangentness: f64,
    pub collisions: u64,
    pub qp_infeasible: u64,
    pub brakes: u64,
    pub barrier_breaches: u64,
    pub lp_fallbacks: u64,
    pub b_clamps: u64,
    pub clip_saturations: u64,
    pub degenerate_metric_agents: u64,
    pub max_input_norm: f64,
}

pub fn summary_json(config: &SimConfig, out: &RunOutput) -> String {
    let d = &out.diagnostics;
    let summary = RunSummary {
        strategy: config.strategy.as_str(),
        seed: config.seed,
        dt: out.dt,
        steps: out.steps,
        lambda: out.lambda,
        mean_fatness: out.mean_fatness,
        mean_tangentness: out.mean_tangentness,
        collisions: out.collisions(),
        qp_infeasible: d.avoidance.qp_infeasible,
        brakes: d.avoidance.brakes,
        barrier_breaches: d.avoidance.barrier_breaches,
        lp_fallbacks: d.avoidance.lp_fallbacks,
        b_clamps: d.avoidance.b_clamps,
        clip_saturations: d.clip_saturations,
        degenerate_metric_agents: d.degenerate_metric_agents,
        max_input_norm: d.max_input_norm,
    };
    let mut s = serde_json::to_string_pretty(&summary).expect("summary serializes");
    s.push('\n');
    s
}

pub fn write_atomic(path: &Path, contents: &str) -> Result<(), Error> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent)?;
        }
    }
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, contents)?;
    fs::rename(&tmp, path)?;
    Ok(())
}
