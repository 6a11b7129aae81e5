//! Optimal reciprocal collision avoidance.
//!
//! Per neighbor, the set of relative velocities colliding within `c_r`
//! seconds is a disc of radius `D_s/c_r` (centered on the relative position
//! scaled by `1/c_r`) plus its outward shadow cone. The smallest adjustment
//! `u` taking the current relative velocity out of that set defines a
//! half-plane of permitted velocities through `vel + u/2`: each agent takes
//! half the correction and assumes the other takes the rest. Agents already
//! overlapping use a cutoff at the integration step instead of the horizon,
//! which demands the penetration resolve within one step.
//!
//! The safe velocity is the feasible point of all half-planes, capped at the
//! set-point speed, closest to the preferred velocity; when the intersection
//! is empty the least-violating velocity in the speed disc is used instead.

use crate::vec2::{crossz, rot90, Vec2};

use super::{AvoidanceDiagnostics, AvoidanceRequest};

/// A linear velocity constraint. Permitted velocities satisfy
/// `(v - point) . normal >= 0`; `normal` is unit length.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HalfPlane {
    pub point: Vec2,
    pub normal: Vec2,
}

impl HalfPlane {
    /// Signed violation of `v`: positive on the forbidden side.
    pub fn violation(&self, v: Vec2) -> f64 {
        (self.point - v).dot(self.normal)
    }
}

/// Deterministic direction for exactly coincident agents, keyed on own index.
fn tie_break_direction(self_index: usize) -> Vec2 {
    if self_index % 2 == 0 {
        Vec2::new(1.0, 0.0)
    } else {
        Vec2::new(-1.0, 0.0)
    }
}

/// Build the permitted-velocity half-plane induced by one neighbor.
///
/// `horizon` is the planning horizon (the cautiousness `c_r`); `dt` is the
/// integration step used for the penetration cutoff; `self_index` only breaks
/// the exact-coincidence tie.
pub fn orca_halfplane(
    pos_i: Vec2,
    vel_i: Vec2,
    pos_j: Vec2,
    vel_j: Vec2,
    d_s: f64,
    horizon: f64,
    dt: f64,
    self_index: usize,
) -> HalfPlane {
    debug_assert!(horizon > 0.0 && dt > 0.0);
    let rel_pos = pos_j - pos_i;
    let rel_vel = vel_i - vel_j;
    let dist_sq = rel_pos.norm_sq();
    let r_sq = d_s * d_s;

    let direction;
    let u;

    if dist_sq > r_sq {
        // No overlap: project the relative velocity onto the boundary of the
        // velocity obstacle truncated at the horizon.
        let w = rel_vel - rel_pos / horizon;
        let w_len_sq = w.norm_sq();
        let dot1 = w.dot(rel_pos);
        if dot1 < 0.0 && dot1 * dot1 > r_sq * w_len_sq {
            // nearest boundary point lies on the cutoff circle
            let w_len = w_len_sq.sqrt();
            let unit_w = w / w_len;
            direction = Vec2::new(unit_w.y, -unit_w.x);
            u = unit_w * (d_s / horizon - w_len);
        } else {
            // nearest boundary point lies on a shadow leg
            let leg = (dist_sq - r_sq).sqrt();
            direction = if crossz(rel_pos, w) > 0.0 {
                Vec2::new(
                    rel_pos.x * leg - rel_pos.y * d_s,
                    rel_pos.x * d_s + rel_pos.y * leg,
                ) / dist_sq
            } else {
                -Vec2::new(
                    rel_pos.x * leg + rel_pos.y * d_s,
                    -rel_pos.x * d_s + rel_pos.y * leg,
                ) / dist_sq
            };
            u = direction * rel_vel.dot(direction) - rel_vel;
        }
    } else {
        // Overlap: push the relative velocity out of the disc that resolves
        // the penetration within one integration step.
        let w = rel_vel - rel_pos / dt;
        let w_len = w.norm();
        let unit_w = if w_len == 0.0 {
            tie_break_direction(self_index)
        } else {
            w / w_len
        };
        direction = Vec2::new(unit_w.y, -unit_w.x);
        u = unit_w * (d_s / dt - w_len);
    }

    HalfPlane {
        point: vel_i + u * 0.5,
        normal: rot90(direction),
    }
}

/// Closest point to `v_pref` in the intersection of `planes` with the closed
/// speed disc, by incremental half-plane insertion. Returns the fallback
/// least-violating velocity (and `true`) when the intersection is empty.
pub fn solve_velocity_lp(v_pref: Vec2, planes: &[HalfPlane], speed_cap: f64) -> (Vec2, bool) {
    debug_assert!(speed_cap > 0.0);
    let mut result = if v_pref.norm() > speed_cap {
        v_pref.normalized() * speed_cap
    } else {
        v_pref
    };
    for k in 0..planes.len() {
        if planes[k].violation(result) > 0.0 {
            match optimize_on_boundary(v_pref, &planes[..k], &planes[k], speed_cap) {
                Some(v) => result = v,
                None => return (fallback_safest(v_pref, planes, speed_cap), true),
            }
        }
    }
    (result, false)
}

/// 1D subproblem: closest point to `v_pref` on the boundary of `plane`,
/// within the disc and all `prev` planes. `None` when that segment is empty.
fn optimize_on_boundary(
    v_pref: Vec2,
    prev: &[HalfPlane],
    plane: &HalfPlane,
    speed_cap: f64,
) -> Option<Vec2> {
    let p = plane.point;
    let d = Vec2::new(plane.normal.y, -plane.normal.x);

    let along = p.dot(d);
    let disc = along * along + speed_cap * speed_cap - p.norm_sq();
    if disc < 0.0 {
        return None; // boundary line misses the speed disc entirely
    }
    let sq = disc.sqrt();
    let mut t_left = -along - sq;
    let mut t_right = -along + sq;

    for other in prev {
        let denom = d.dot(other.normal);
        let numer = (other.point - p).dot(other.normal);
        if denom.abs() <= 1e-12 {
            if numer > 0.0 {
                return None; // parallel and entirely on the forbidden side
            }
            continue;
        }
        let t = numer / denom;
        if denom > 0.0 {
            t_left = t_left.max(t);
        } else {
            t_right = t_right.min(t);
        }
        if t_left > t_right {
            return None;
        }
    }

    let t = d.dot(v_pref - p).clamp(t_left, t_right);
    Some(p + d * t)
}

/// Largest signed violation of any plane at `v`.
fn max_violation(v: Vec2, planes: &[HalfPlane]) -> f64 {
    planes
        .iter()
        .map(|pl| pl.violation(v))
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Velocity in the closed speed disc minimizing the maximum signed plane
/// violation. The objective is piecewise linear and convex, so the minimum
/// sits at an equal-violation point of three planes, on the disc boundary
/// where two violations tie, or at the disc point deepest into a single
/// plane; all candidates are enumerated and the best evaluated exactly.
pub fn fallback_safest(v_pref: Vec2, planes: &[HalfPlane], speed_cap: f64) -> Vec2 {
    if planes.is_empty() {
        return if v_pref.norm() > speed_cap {
            v_pref.normalized() * speed_cap
        } else {
            v_pref
        };
    }

    // Drop planes dominated everywhere on the disc: j dominates k when
    // c_j - c_k >= cap * |n_j - n_k| (then viol_j >= viol_k for every |v| <=
    // cap). Crowded scenes produce many near-parallel planes, and pruning
    // them keeps the cubic candidate enumeration cheap without changing the
    // exact optimum.
    let all_offsets: Vec<f64> = planes.iter().map(|pl| pl.point.dot(pl.normal)).collect();
    let mut keep: Vec<usize> = Vec::with_capacity(planes.len());
    'cand: for k in 0..planes.len() {
        for j in 0..planes.len() {
            if j == k {
                continue;
            }
            let gap = all_offsets[j] - all_offsets[k];
            let sep = speed_cap * (planes[j].normal - planes[k].normal).norm();
            let dominates = gap > sep || (gap == sep && j < k);
            if dominates {
                continue 'cand;
            }
        }
        keep.push(k);
    }
    // the objective over all planes equals the objective over the kept set
    let active: Vec<HalfPlane> = keep.iter().map(|&k| planes[k]).collect();
    let offsets: Vec<f64> = keep.iter().map(|&k| all_offsets[k]).collect();
    let inside = |v: Vec2| v.norm() <= speed_cap * (1.0 + 1e-12);

    let mut best: Option<(Vec2, f64)> = None;
    let mut consider = |v: Vec2| {
        if inside(v) {
            let f = max_violation(v, planes);
            if best.map_or(true, |(_, bf)| f < bf) {
                best = Some((v, f));
            }
        }
    };

    let m = active.len();

    // deepest disc point against each plane alone
    for pl in &active {
        consider(pl.normal * speed_cap);
    }

    // equal-violation line of a pair, intersected with the disc boundary
    for i in 0..m {
        for j in (i + 1)..m {
            let n = active[j].normal - active[i].normal;
            let c = offsets[j] - offsets[i];
            for v in line_circle_points(n, c, speed_cap) {
                consider(v);
            }
        }
    }

    // equal-violation point of a triple
    for i in 0..m {
        for j in (i + 1)..m {
            for k in (j + 1)..m {
                let a1 = active[j].normal - active[i].normal;
                let b1 = offsets[j] - offsets[i];
                let a2 = active[k].normal - active[i].normal;
                let b2 = offsets[k] - offsets[i];
                let det = crossz(a1, a2);
                if det.abs() <= 1e-12 {
                    continue;
                }
                consider(Vec2::new(
                    (b1 * a2.y - b2 * a1.y) / det,
                    (a1.x * b2 - a2.x * b1) / det,
                ));
            }
        }
    }

    // interior ties of antiparallel pairs: the whole midline is optimal, so
    // pick its point nearest the preferred velocity
    for i in 0..m {
        for j in (i + 1)..m {
            let n = active[j].normal - active[i].normal;
            let n_len_sq = n.norm_sq();
            if n_len_sq <= 1e-12 {
                continue;
            }
            let c = offsets[j] - offsets[i];
            let v = v_pref - n * ((v_pref.dot(n) - c) / n_len_sq);
            consider(v);
        }
    }

    match best {
        Some((v, _)) => v,
        // all candidates outside the disc only in pathological geometry
        None => v_pref.normalized() * speed_cap,
    }
}

/// Points on `n . v = c` with `|v| = radius`.
fn line_circle_points(n: Vec2, c: f64, radius: f64) -> Vec<Vec2> {
    let n_sq = n.norm_sq();
    if n_sq <= 1e-24 {
        return Vec::new();
    }
    let foot = n * (c / n_sq);
    let chord = radius * radius - foot.norm_sq();
    if chord < 0.0 {
        return Vec::new();
    }
    let d = rot90(n) * (chord / n_sq).sqrt();
    vec![foot + d, foot - d]
}

/// ORCA wrapper: build one half-plane per neighbor (ascending index), pick
/// the safe velocity closest to `vel + dt * u_des`, and convert back to an
/// acceleration. The engine's acceleration clip still applies downstream.
pub fn avoid_orca(req: &AvoidanceRequest, diag: &mut AvoidanceDiagnostics) -> Vec2 {
    let params = req.params;
    let d_s = params.safety_distance();
    let planes: Vec<HalfPlane> = req
        .neighbors
        .entries
        .iter()
        .map(|&(p_j, v_j)| {
            orca_halfplane(
                req.pos,
                req.vel,
                p_j,
                v_j,
                d_s,
                params.c_r,
                req.dt,
                req.self_index,
            )
        })
        .collect();
    let v_pref = req.vel + req.u_des * req.dt;
    let (v_safe, fell_back) = solve_velocity_lp(v_pref, &planes, params.v0);
    if fell_back {
        diag.lp_fallbacks += 1;
    }
    if v_safe == v_pref {
        // avoid round-trip rounding when no correction was needed
        return req.u_des;
    }
    (v_safe - req.vel) / req.dt
}
