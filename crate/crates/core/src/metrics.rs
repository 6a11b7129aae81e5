//! Ring-quality metrics.
//!
//! Fatness: `1 - r_min^2 / r_max^2` over agent distances from the swarm
//! centroid (0 = thin ring, 1 = filled disc). Tangentness: mean |radial
//! unit . velocity unit| (0 = perfectly tangential motion). Ring quality:
//! `lambda = 1 - max(mean fatness, mean tangentness)` over the measurement
//! window.

use serde::{Deserialize, Serialize};

use crate::vec2::Vec2;

/// One metric sample at a step boundary.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricsSample {
    pub t: f64,
    pub fatness: f64,
    pub tangentness: f64,
}

/// Instantaneous fatness and tangentness, plus the number of agents that hit
/// a degenerate convention (at the centroid exactly, or at rest: their
/// tangentness summand counts as worst-case 1).
pub fn metrics_step(positions: &[Vec2], velocities: &[Vec2]) -> (f64, f64, u32) {
    let n = positions.len();
    assert!(n >= 1, "metrics need at least one agent");

    let mut mu = Vec2::ZERO;
    for &p in positions {
        mu += p;
    }
    let mu = mu / n as f64;

    let mut r_min = f64::INFINITY;
    let mut r_max: f64 = 0.0;
    let mut tau_sum = 0.0;
    let mut degenerate = 0u32;
    for i in 0..n {
        let radial = positions[i] - mu;
        let rad = radial.norm();
        r_min = r_min.min(rad);
        r_max = r_max.max(rad);
        let speed = velocities[i].norm();
        if rad == 0.0 || speed == 0.0 {
            tau_sum += 1.0;
            degenerate += 1;
        } else {
            tau_sum += (radial.dot(velocities[i]) / (rad * speed)).abs();
        }
    }

    let fatness = if r_max == 0.0 {
        1.0
    } else {
        1.0 - (r_min * r_min) / (r_max * r_max)
    };
    let tangentness = tau_sum / n as f64;
    (fatness, tangentness, degenerate)
}

/// Ring quality from window-averaged fatness and tangentness.
pub fn ring_quality(mean_fatness: f64, mean_tangentness: f64) -> f64 {
    1.0 - mean_fatness.max(mean_tangentness)
}
