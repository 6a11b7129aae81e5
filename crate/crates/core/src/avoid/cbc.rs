//! Control-barrier-certificate safety filter.
//!
//! Per neighbor j, the barrier value is `B = 1/h` with
//!
//! ```text
//! h = (dp . dv)/|dp| + sqrt(4 a_max (|dp| - D_s)),
//! dp = p_i - p_j,  dv = v_i - v_j,
//! ```
//!
//! which diverges as the pair approaches the safety distance `D_s` faster
//! than maximum braking can absorb. The certificate `dB/dt <= 1/(c_r B)` is
//! equivalent (for h > 0) to `dh/dt >= -h^3/c_r`; differentiating h along the
//! dynamics with the neighbor's input taken as zero gives a constraint linear
//! in this agent's input u:
//!
//! ```text
//! dh/dt = (dp . u)/|dp| + |dv|^2/|dp| - (dp . dv)^2/|dp|^3
//!         + 2 a_max (dp . dv) / (|dp| sqrt(4 a_max (|dp| - D_s)))
//! ```
//!
//! so `a . u <= b` with `a = -dp/|dp|` and `b` collecting the drift terms
//! plus `h^3/c_r`. One constraint per neighbor feeds a small exact QP; when
//! the QP is infeasible or a barrier is already breached the agent brakes.

use crate::vec2::Vec2;

use super::qp::{solve_qp, LinearConstraint, QpSolution};
use super::{AvoidanceDiagnostics, AvoidanceRequest};

/// Right-hand sides are clamped here near the barrier singularity so the QP
/// never sees non-finite input.
pub const B_CLAMP: f64 = 1e12;

/// Relative state and barrier value for one agent pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BarrierPair {
    pub dp: Vec2,
    pub dv: Vec2,
    pub h: f64,
    /// Barrier value `B = 1/h`.
    pub barrier: f64,
}

/// Outcome of evaluating the barrier for one pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BarrierTerms {
    Pair(BarrierPair),
    /// Separation at or below `D_s`: the barrier domain is violated and the
    /// caller must brake.
    Breached,
}

pub fn barrier_terms(
    pos_i: Vec2,
    vel_i: Vec2,
    pos_j: Vec2,
    vel_j: Vec2,
    a_max: f64,
    d_s: f64,
) -> BarrierTerms {
    let dp = pos_i - pos_j;
    let dv = vel_i - vel_j;
    let dist = dp.norm();
    if dist <= d_s {
        return BarrierTerms::Breached;
    }
    let h = dp.dot(dv) / dist + (4.0 * a_max * (dist - d_s)).sqrt();
    BarrierTerms::Pair(BarrierPair {
        dp,
        dv,
        h,
        barrier: 1.0 / h,
    })
}

/// Linearize the certificate for one pair into `a . u <= b`.
///
/// Returns the constraint and whether `b` had to be clamped at the
/// singularity.
pub fn cbc_constraint(pair: &BarrierPair, c_r: f64, a_max: f64) -> (LinearConstraint, bool) {
    let dist = pair.dp.norm();
    let closing = pair.dp.dot(pair.dv) / dist;
    // radical term of h; strictly positive away from the barrier
    let rad = pair.h - closing;
    let a = -pair.dp / dist;
    let b = pair.h.powi(3) / c_r + pair.dv.norm_sq() / dist - closing * closing / dist
        + 2.0 * a_max * closing / rad;
    if !b.is_finite() || b.abs() > B_CLAMP {
        let clamped = if b.is_nan() { B_CLAMP } else { b.clamp(-B_CLAMP, B_CLAMP) };
        (LinearConstraint::new(a, clamped), true)
    } else {
        (LinearConstraint::new(a, b), false)
    }
}

/// Smallest sensing radius for which the certificate can guarantee safety.
pub fn cbc_min_sensing_radius(c_r: f64, a_max: f64, v_max: f64, d_s: f64) -> f64 {
    let t = (4.0 * c_r * a_max).cbrt() + 2.0 * v_max;
    d_s + t * t / (4.0 * a_max)
}

/// CBC wrapper: minimally-invasive QP over the per-neighbor certificates and
/// the input box; brakes on breach or infeasibility.
pub fn avoid_cbc(req: &AvoidanceRequest, diag: &mut AvoidanceDiagnostics) -> Vec2 {
    let params = req.params;
    let d_s = params.safety_distance();
    let mut constraints: Vec<LinearConstraint> = Vec::with_capacity(req.neighbors.len());
    let mut breached = false;
    for &(p_j, v_j) in &req.neighbors.entries {
        match barrier_terms(req.pos, req.vel, p_j, v_j, params.a_max, d_s) {
            BarrierTerms::Breached => {
                diag.barrier_breaches += 1;
                breached = true;
            }
            BarrierTerms::Pair(pair) => {
                let (c, clamped) = cbc_constraint(&pair, params.c_r, params.a_max);
                if clamped {
                    diag.b_clamps += 1;
                }
                constraints.push(c);
            }
        }
    }
    if breached {
        diag.brakes += 1;
        return -req.vel;
    }
    match solve_qp(req.u_des, &constraints, params.a_max) {
        QpSolution::Feasible(u) => u,
        QpSolution::Infeasible => {
            diag.qp_infeasible += 1;
            diag.brakes += 1;
            -req.vel
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::Counter;
    use crate::swarm::{NeighborView, SwarmParams};
    use proptest::prelude::*;

    fn pair(dp: Vec2, dv: Vec2, a_max: f64, d_s: f64) -> BarrierPair {
        match barrier_terms(dp, dv, Vec2::ZERO, Vec2::ZERO, a_max, d_s) {
            BarrierTerms::Pair(p) => p,
            BarrierTerms::Breached => panic!("unexpected breach"),
        }
    }

    #[test]
    fn barrier_hand_value() {
        let p = pair(Vec2::new(3.0, 0.0), Vec2::new(-1.0, 0.0), 0.6, 0.315);
        assert!((p.h - 1.5385).abs() < 1e-4, "h = {}", p.h);
        assert!((p.barrier - 0.6500).abs() < 1e-4, "B = {}", p.barrier);
    }

    #[test]
    fn stationary_pair_is_safe() {
        let p = pair(Vec2::new(3.0, 0.0), Vec2::ZERO, 0.6, 0.315);
        let expect = (4.0f64 * 0.6 * (3.0 - 0.315)).sqrt();
        assert!((p.h - expect).abs() < 1e-12);
        assert!(p.h > 0.0);
    }

    #[test]
    fn touching_boundary_reduces_to_closing_speed() {
        // just above D_s the radical vanishes and h approaches dp.dv/|dp|
        let d_s = 0.315;
        let p = pair(Vec2::new(d_s + 1e-12, 0.0), Vec2::new(0.1, 0.0), 0.6, d_s);
        assert!((p.h - 0.1).abs() < 1e-5, "h = {}", p.h);
    }

    #[test]
    fn at_or_below_safety_distance_is_breached() {
        let out = barrier_terms(
            Vec2::new(0.315, 0.0),
            Vec2::ZERO,
            Vec2::ZERO,
            Vec2::ZERO,
            0.6,
            0.315,
        );
        assert_eq!(out, BarrierTerms::Breached);
    }

    #[test]
    fn stationary_constraint_accepts_zero_input() {
        let p = pair(Vec2::new(1.0, 0.0), Vec2::ZERO, 0.6, 0.315);
        let (c, clamped) = cbc_constraint(&p, 1.0, 0.6);
        assert!(!clamped);
        let expect = p.h.powi(3);
        assert!((c.b - expect).abs() < 1e-12);
        assert!(c.b > 0.0, "u = 0 feasible");
    }

    #[test]
    fn separating_far_pair_is_inactive() {
        let p = pair(Vec2::new(5.0, 0.0), Vec2::new(1.0, 0.0), 0.6, 0.315);
        let (c, _) = cbc_constraint(&p, 1.0, 0.6);
        // largest |a . u| over the box is sqrt(2) * 0.6
        assert!(c.b > 10.0, "b = {}", c.b);
    }

    #[test]
    fn head_on_constraint_is_enforced_with_equality() {
        let p = pair(Vec2::new(1.0, 0.0), Vec2::new(-0.24, 0.0), 0.6, 0.315);
        let (c, _) = cbc_constraint(&p, 100.0, 0.6);
        assert!(c.b < 0.0, "u_des = 0 must violate, b = {}", c.b);
        let u = solve_qp(Vec2::ZERO, &[c], 0.6).feasible().unwrap();
        assert!((c.a.dot(u) - c.b).abs() < 1e-9, "active at optimum");
        assert!(u.x > 0.0, "pushes i away from j");
    }

    #[test]
    fn cautiousness_only_scales_the_h3_term() {
        let p = pair(Vec2::new(0.8, 0.4), Vec2::new(-0.1, 0.05), 0.6, 0.315);
        let (c1, _) = cbc_constraint(&p, 1.0, 0.6);
        let (c2, _) = cbc_constraint(&p, 1e15, 0.6);
        let drift = c1.b - p.h.powi(3);
        assert!((c2.b - drift).abs() < 1e-10);
        assert_eq!(c1.a, c2.a);
    }

    #[test]
    fn near_singularity_clamps_b() {
        // vanishing safety margin with a closing pair drives b toward -inf
        let p = pair(Vec2::new(1e-30, 0.0), Vec2::new(-1.0, 0.0), 0.6, 0.0);
        let (c, clamped) = cbc_constraint(&p, 1.0, 0.6);
        assert!(clamped);
        assert!(c.b.is_finite());
        assert_eq!(c.b, -B_CLAMP);

        // microscopic cautiousness blows the h^3/c_r term up instead
        let far = pair(Vec2::new(5.0, 0.0), Vec2::ZERO, 0.6, 0.315);
        let (c, clamped) = cbc_constraint(&far, 1e-16, 0.6);
        assert!(clamped);
        assert_eq!(c.b, B_CLAMP);
    }

    #[test]
    fn min_sensing_radius_hand_value() {
        let r = cbc_min_sensing_radius(1.0, 0.6, 0.24, 0.315);
        assert!((r - 1.694).abs() < 1e-3, "r = {r}");
    }

    #[test]
    fn min_sensing_radius_zero_cr_limit() {
        let v_max = 0.24;
        let a_max = 0.6;
        let r = cbc_min_sensing_radius(0.0, a_max, v_max, 0.315);
        assert!((r - (0.315 + v_max * v_max / a_max)).abs() < 1e-12);
    }

    fn req_with<'a>(
        neighbors: &'a NeighborView,
        params: &'a SwarmParams,
        u_des: Vec2,
        vel: Vec2,
    ) -> AvoidanceRequest<'a> {
        AvoidanceRequest {
            u_des,
            pos: Vec2::ZERO,
            vel,
            neighbors,
            params,
            dt: 0.015,
            self_index: 0,
        }
    }

    #[test]
    fn avoid_cbc_empty_neighbors_returns_u_des() {
        let params = SwarmParams::default();
        let view = NeighborView::default();
        let mut diag = AvoidanceDiagnostics::default();
        let u_des = Vec2::new(0.01, -0.02);
        let req = req_with(&view, &params, u_des, Vec2::new(0.12, 0.0));
        assert_eq!(avoid_cbc(&req, &mut diag), u_des);
        assert_eq!(diag, AvoidanceDiagnostics::default());
    }

    #[test]
    fn avoid_cbc_distant_neighbor_leaves_u_des_exact() {
        let params = SwarmParams::default();
        let view = NeighborView {
            entries: vec![(Vec2::new(0.9, 0.0), Vec2::new(0.01, 0.0))],
        };
        let mut diag = AvoidanceDiagnostics::default();
        let u_des = Vec2::new(0.002, 0.001);
        let req = req_with(&view, &params, u_des, Vec2::new(0.05, 0.0));
        let out = avoid_cbc(&req, &mut diag);
        assert_eq!(out, u_des, "minimally invasive when already safe");
    }

    #[test]
    fn avoid_cbc_brakes_on_breach() {
        let params = SwarmParams::default(); // D_s = 0.315
        let view = NeighborView {
            entries: vec![(Vec2::new(0.3, 0.0), Vec2::ZERO)],
        };
        let mut diag = AvoidanceDiagnostics::default();
        let vel = Vec2::new(0.12, 0.03);
        let req = req_with(&view, &params, Vec2::new(0.01, 0.0), vel);
        assert_eq!(avoid_cbc(&req, &mut diag), -vel);
        assert_eq!(diag.barrier_breaches, 1);
        assert_eq!(diag.brakes, 1);
    }

    #[test]
    fn avoid_cbc_brakes_on_infeasible_qp() {
        // three fast closers at 120 degree spacing produce constraints whose
        // normals span the plane with strongly negative bounds
        let params = SwarmParams::default();
        let mut entries = Vec::new();
        for k in 0..3 {
            let theta = 2.0 * std::f64::consts::PI * k as f64 / 3.0;
            let dir = Vec2::from_polar(1.0, theta);
            entries.push((dir * 0.4, -dir * 1.0));
        }
        let view = NeighborView { entries };
        let mut diag = AvoidanceDiagnostics::default();
        let vel = Vec2::new(0.0, 0.01);
        let req = req_with(&view, &params, Vec2::ZERO, vel);
        assert_eq!(avoid_cbc(&req, &mut diag), -vel);
        assert_eq!(diag.qp_infeasible, 1);
        assert_eq!(diag.brakes, 1);
        assert_eq!(diag.barrier_breaches, 0);
    }

    /// Analytic dB/dt under input `u` (neighbor input zero), for
    /// finite-difference validation.
    fn db_dt_analytic(p: &BarrierPair, u: Vec2, a_max: f64) -> f64 {
        let dist = p.dp.norm();
        let closing = p.dp.dot(p.dv) / dist;
        let rad = p.h - closing;
        let h_dot = p.dp.dot(u) / dist + p.dv.norm_sq() / dist - closing * closing / dist
            + 2.0 * a_max * closing / rad;
        -h_dot / (p.h * p.h)
    }

    fn barrier_value(dp: Vec2, dv: Vec2, a_max: f64, d_s: f64) -> f64 {
        let dist = dp.norm();
        1.0 / (dp.dot(dv) / dist + (4.0 * a_max * (dist - d_s)).sqrt())
    }

    proptest! {
        /// The linearized constraint must reproduce finite differences of B
        /// along the pair dynamics.
        #[test]
        fn constraint_matches_finite_difference(seed in 0u64..300) {
            let mut rng = Counter::new(seed, 17);
            let a_max = 0.6;
            let d_s = 0.315;
            let dist = rng.next_range(d_s + 0.1, 5.0);
            let theta = rng.next_range(0.0, std::f64::consts::TAU);
            let dp = Vec2::from_polar(dist, theta);
            let dv = Vec2::new(rng.next_range(-0.3, 0.3), rng.next_range(-0.3, 0.3));
            let u = Vec2::new(rng.next_range(-0.6, 0.6), rng.next_range(-0.6, 0.6));
            let p = pair(dp, dv, a_max, d_s);
            prop_assume!(p.h.abs() > 0.05);

            let eps = 1e-6;
            let b_plus = barrier_value(dp + dv * eps, dv + u * eps, a_max, d_s);
            let b_minus = barrier_value(dp - dv * eps, dv - u * eps, a_max, d_s);
            let fd = (b_plus - b_minus) / (2.0 * eps);
            let analytic = db_dt_analytic(&p, u, a_max);
            prop_assume!(fd.abs() > 1e-8);
            let rel = ((analytic - fd) / fd).abs();
            prop_assert!(rel < 1e-4, "rel {rel}, fd {fd}, analytic {analytic}");
        }

        #[test]
        fn min_sensing_radius_increases_with_cautiousness(
            c1 in 1e-5..1e4f64, factor in 1.01..100.0f64,
        ) {
            let lo = cbc_min_sensing_radius(c1, 0.6, 0.24, 0.315);
            let hi = cbc_min_sensing_radius(c1 * factor, 0.6, 0.24, 0.315);
            prop_assert!(hi > lo);
        }
    }
}
