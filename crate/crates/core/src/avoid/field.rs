//! Force-based avoidance: exponential potential repulsion and the
//! gyroscopic steering force. Both share the magnitude profile
//! `U(d) = 2 (c_r / l_r) exp(-2 d / l_r)`.

use crate::vec2::{crossz, rot90, sgnz, Vec2};

use super::AvoidanceRequest;

/// Repulsion magnitude at separation `d`.
pub fn repulsion_magnitude(d: f64, c_r: f64, l_r: f64) -> f64 {
    2.0 * (c_r / l_r) * (-2.0 * d / l_r).exp()
}

/// Deterministic direction for exactly coincident agents.
fn coincident_direction(self_index: usize) -> Vec2 {
    if self_index % 2 == 0 {
        Vec2::new(1.0, 0.0)
    } else {
        Vec2::new(-1.0, 0.0)
    }
}

/// Potential-field wrapper: add one repulsive force per neighbor, directed
/// away from it, with magnitude `U(d)`.
pub fn avoid_potential(req: &AvoidanceRequest) -> Vec2 {
    if req.neighbors.is_empty() || req.params.l_r <= 0.0 {
        return req.u_des;
    }
    let mut u = req.u_des;
    for &(p_j, _) in &req.neighbors.entries {
        let away = req.pos - p_j;
        let d = away.norm();
        let dir = if d == 0.0 {
            coincident_direction(req.self_index)
        } else {
            away / d
        };
        u += dir * repulsion_magnitude(d, req.params.c_r, req.params.l_r);
    }
    u
}

/// Gyroscopic wrapper: steer orthogonally to the current velocity, away from
/// the nearest neighbor, with magnitude `U(d)`. A perfect head-on encounter
/// steers left (`sgnz(0) = 1` with a CCW normal). At rest the steering
/// direction is undefined and the input passes through.
pub fn avoid_gyro(req: &AvoidanceRequest) -> Vec2 {
    if req.neighbors.is_empty() || req.params.l_r <= 0.0 {
        return req.u_des;
    }
    let speed = req.vel.norm();
    if speed == 0.0 {
        return req.u_des;
    }
    let (p_star, _) = req.neighbors.nearest(req.pos).expect("nonempty neighbors");
    let d = (req.pos - p_star).norm();
    let side = sgnz(crossz(p_star - req.pos, req.vel));
    req.u_des + rot90(req.vel / speed) * side * repulsion_magnitude(d, req.params.c_r, req.params.l_r)
}
