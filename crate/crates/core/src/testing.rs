//! Test-support oracles and instance generators.
//!
//! Everything here validates solver output from first principles: dense
//! scans plus derivative-free pattern refinement, using only feasibility
//! checks and objective comparisons. None of it shares code with the
//! solvers it checks. Exposed as a public module so integration suites can
//! reuse it; not part of the simulation API.

use crate::avoid::orca::HalfPlane;
use crate::avoid::qp::LinearConstraint;
use crate::rng::Counter;
use crate::vec2::Vec2;

/// Compass (pattern) search: descend `objective` over `feasible` points from
/// `start`, halving the step when no probe direction improves. Besides 16
/// fixed compass directions, `extra_dirs` supplies position-dependent probes
/// (boundary tangents); without them the search stalls on the tangentially
/// flat valleys of distance objectives.
pub fn compass_refine<F, G, E>(
    start: Vec2,
    objective: F,
    feasible: G,
    extra_dirs: E,
    step0: f64,
    step_min: f64,
) -> Vec2
where
    F: Fn(Vec2) -> f64,
    G: Fn(Vec2) -> bool,
    E: Fn(Vec2) -> Vec<Vec2>,
{
    let compass: Vec<Vec2> = (0..16)
        .map(|k| Vec2::from_polar(1.0, k as f64 * std::f64::consts::TAU / 16.0))
        .collect();
    let mut x = start;
    let mut fx = objective(x);
    let mut h = step0;
    let mut budget = 500_000u32;
    while h > step_min && budget > 0 {
        budget -= 1;
        let mut best: Option<(Vec2, f64)> = None;
        let mut probe = |y: Vec2| {
            if feasible(y) {
                let fy = objective(y);
                if fy < fx && best.map_or(true, |(_, bf)| fy < bf) {
                    best = Some((y, fy));
                }
            }
        };
        for d in &compass {
            probe(x + *d * h);
        }
        for d in extra_dirs(x) {
            let n = d.norm();
            if n > 0.0 {
                probe(x + d * (h / n));
                probe(x - d * (h / n));
            }
        }
        // arc probes: straight tangent steps exit a circular boundary, so
        // walk along origin-centered arcs as well
        let radius = x.norm();
        if radius > 0.0 {
            let theta = h / radius.max(h);
            let (sin, cos) = theta.sin_cos();
            probe(Vec2::new(cos * x.x - sin * x.y, sin * x.x + cos * x.y));
            probe(Vec2::new(cos * x.x + sin * x.y, -sin * x.x + cos * x.y));
        }
        match best {
            Some((y, fy)) => {
                x = y;
                fx = fy;
            }
            None => h *= 0.5,
        }
    }
    x
}

fn scan_square<F, G>(
    center: Vec2,
    half_width: f64,
    step: f64,
    objective: &F,
    feasible: &G,
) -> Option<Vec2>
where
    F: Fn(Vec2) -> f64,
    G: Fn(Vec2) -> bool,
{
    let n = (2.0 * half_width / step).round() as i64;
    let mut best: Option<(Vec2, f64)> = None;
    for ix in 0..=n {
        let x = center.x - half_width + step * ix as f64;
        for iy in 0..=n {
            let y = center.y - half_width + step * iy as f64;
            let u = Vec2::new(x, y);
            if feasible(u) {
                let f = objective(u);
                if best.map_or(true, |(_, bf)| f < bf) {
                    best = Some((u, f));
                }
            }
        }
    }
    best.map(|(u, _)| u)
}

/// Dense grid scan at `step` followed by compass refinement with the given
/// boundary-tangent probes.
pub fn scan_and_refine<F, G, E>(
    center: Vec2,
    half_width: f64,
    step: f64,
    objective: F,
    feasible: G,
    extra_dirs: E,
) -> Option<Vec2>
where
    F: Fn(Vec2) -> f64,
    G: Fn(Vec2) -> bool,
    E: Fn(Vec2) -> Vec<Vec2>,
{
    let coarse = scan_square(center, half_width, step, &objective, &feasible)?;
    Some(compass_refine(coarse, objective, feasible, extra_dirs, step, 1e-9))
}

/// Independent optimum for the box QP: minimize `|u - target|` subject to
/// the linear constraints and the infinity-norm box.
pub fn qp_grid_oracle(
    target: Vec2,
    constraints: &[LinearConstraint],
    box_bound: f64,
    step: f64,
) -> Option<Vec2> {
    let feasible = |u: Vec2| {
        u.x.abs() <= box_bound
            && u.y.abs() <= box_bound
            && constraints.iter().all(|c| c.a.dot(u) <= c.b)
    };
    let tangents: Vec<Vec2> = constraints
        .iter()
        .map(|c| crate::vec2::rot90(c.a))
        .collect();
    scan_and_refine(
        Vec2::ZERO,
        box_bound,
        step,
        |u| (u - target).norm_sq(),
        feasible,
        move |_| tangents.clone(),
    )
}

/// Independent optimum for the velocity program: closest point to `v_pref`
/// in the intersection of the half-planes with the closed speed disc.
pub fn lp_disc_oracle(
    v_pref: Vec2,
    planes: &[HalfPlane],
    speed_cap: f64,
    step: f64,
) -> Option<Vec2> {
    let feasible = |v: Vec2| {
        v.norm() <= speed_cap && planes.iter().all(|pl| pl.violation(v) <= 0.0)
    };
    let tangents: Vec<Vec2> = planes.iter().map(|pl| crate::vec2::rot90(pl.normal)).collect();
    scan_and_refine(
        Vec2::ZERO,
        speed_cap,
        step,
        |v| (v - v_pref).norm_sq(),
        feasible,
        move |v: Vec2| {
            let mut d = tangents.clone();
            d.push(crate::vec2::rot90(v)); // disc-boundary tangent
            d
        },
    )
}

/// Independent minimax value: the smallest achievable worst plane violation
/// within the speed disc.
pub fn minimax_disc_oracle(planes: &[HalfPlane], speed_cap: f64, step: f64) -> (Vec2, f64) {
    let objective = |v: Vec2| {
        planes
            .iter()
            .map(|pl| pl.violation(v))
            .fold(f64::NEG_INFINITY, f64::max)
    };
    // ridge directions: equal-violation lines of plane pairs
    let mut ridges: Vec<Vec2> = Vec::new();
    for i in 0..planes.len() {
        for j in (i + 1)..planes.len() {
            let d = crate::vec2::rot90(planes[i].normal - planes[j].normal);
            if d.norm() > 1e-9 {
                ridges.push(d);
            }
        }
    }
    let v = scan_and_refine(
        Vec2::ZERO,
        speed_cap,
        step,
        objective,
        |v: Vec2| v.norm() <= speed_cap,
        move |v: Vec2| {
            let mut d = ridges.clone();
            d.push(crate::vec2::rot90(v));
            d
        },
    )
    .expect("disc always contains samples");
    (v, objective(v))
}

/// Random robustly-feasible QP instance: every constraint keeps a margin
/// around a witness point, so coarse scans always find feasible samples.
/// Normals near-antiparallel to an earlier normal (or near a box normal)
/// are rejected; they would create needle wedges below the probe-cone
/// resolution of the oracle refinement.
pub fn random_feasible_qp_instance(
    rng: &mut Counter,
    box_bound: f64,
    max_constraints: usize,
) -> (Vec2, Vec<LinearConstraint>) {
    let min_sep = 30f64.to_radians();
    let witness = Vec2::new(
        rng.next_range(-0.5 * box_bound, 0.5 * box_bound),
        rng.next_range(-0.5 * box_bound, 0.5 * box_bound),
    );
    let m = (rng.next_u64() % (max_constraints as u64 + 1)) as usize;
    let mut normals: Vec<Vec2> = Vec::with_capacity(m);
    let mut constraints = Vec::with_capacity(m);
    while constraints.len() < m {
        let theta = rng.next_range(0.0, std::f64::consts::TAU);
        let a = Vec2::from_polar(1.0, theta);
        let near_cardinal = a.x.abs().min(a.y.abs()).asin() < min_sep;
        let near_antiparallel = normals.iter().any(|n: &Vec2| n.dot(a) < -min_sep.cos());
        if near_cardinal || near_antiparallel {
            continue;
        }
        normals.push(a);
        let margin = rng.next_range(0.05, 0.8 * box_bound);
        constraints.push(LinearConstraint::new(a, a.dot(witness) + margin));
    }
    let target = Vec2::new(
        rng.next_range(-2.0 * box_bound, 2.0 * box_bound),
        rng.next_range(-2.0 * box_bound, 2.0 * box_bound),
    );
    (target, constraints)
}

/// Random velocity-program instance whose feasible region contains a
/// witness with slack. Near-antiparallel normal pairs are rejected for the
/// same reason as in the QP generator: needle wedges defeat any
/// sampling-based oracle.
pub fn random_feasible_lp_instance(
    rng: &mut Counter,
    speed_cap: f64,
    max_planes: usize,
) -> (Vec2, Vec<HalfPlane>) {
    let min_sep = 30f64.to_radians();
    let witness = Vec2::from_polar(
        rng.next_range(0.0, 0.8 * speed_cap),
        rng.next_range(0.0, std::f64::consts::TAU),
    );
    let m = (rng.next_u64() % (max_planes as u64 + 1)) as usize;
    let mut planes: Vec<HalfPlane> = Vec::with_capacity(m);
    while planes.len() < m {
        let normal = Vec2::from_polar(1.0, rng.next_range(0.0, std::f64::consts::TAU));
        if planes.iter().any(|p| p.normal.dot(normal) < -min_sep.cos()) {
            continue;
        }
        let slack = rng.next_range(0.01, 0.5 * speed_cap);
        planes.push(HalfPlane {
            point: witness - normal * slack,
            normal,
        });
    }
    let v_pref = Vec2::new(
        rng.next_range(-2.5 * speed_cap, 2.5 * speed_cap),
        rng.next_range(-2.5 * speed_cap, 2.5 * speed_cap),
    );
    (v_pref, planes)
}

/// Random jointly-infeasible plane triple: three normals spread around the
/// circle whose boundaries all sit beyond the achievable disc directions.
pub fn random_infeasible_plane_triple(rng: &mut Counter, speed_cap: f64) -> Vec<HalfPlane> {
    let base = rng.next_range(0.0, std::f64::consts::TAU);
    (0..3)
        .map(|k| {
            let theta = base
                + k as f64 * 2.0 * std::f64::consts::PI / 3.0
                + rng.next_range(-0.3, 0.3);
            let normal = Vec2::from_polar(1.0, theta);
            HalfPlane {
                point: normal * rng.next_range(0.5 * speed_cap, 3.0 * speed_cap),
                normal,
            }
        })
        .collect()
}
