//! Exact minimum-norm-correction solver for two-variable quadratic programs
//!
//! ```text
//! minimize   |u - target|^2
//! subject to a_k . u <= b_k         (one per neighbor)
//!            |u|_inf  <= box        (encoded as four linear constraints)
//! ```
//!
//! With two unknowns the optimum is the target itself, the projection onto a
//! single violated constraint boundary, or a vertex where two boundaries
//! cross, so exhaustive candidate enumeration is exact and deterministic.

use crate::vec2::Vec2;

/// One linear inequality `a . u <= b`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearConstraint {
    pub a: Vec2,
    pub b: f64,
}

impl LinearConstraint {
    pub fn new(a: Vec2, b: f64) -> Self {
        LinearConstraint { a, b }
    }

    fn violation(&self, u: Vec2) -> f64 {
        self.a.dot(u) - self.b
    }

    fn satisfied(&self, u: Vec2) -> bool {
        self.violation(u) <= 1e-9 * self.b.abs().max(1.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum QpSolution {
    Feasible(Vec2),
    Infeasible,
}

impl QpSolution {
    pub fn feasible(self) -> Option<Vec2> {
        match self {
            QpSolution::Feasible(u) => Some(u),
            QpSolution::Infeasible => None,
        }
    }
}

/// Box bound as four half-plane constraints, fixed order.
fn box_constraints(bound: f64) -> [LinearConstraint; 4] {
    [
        LinearConstraint::new(Vec2::new(1.0, 0.0), bound),
        LinearConstraint::new(Vec2::new(-1.0, 0.0), bound),
        LinearConstraint::new(Vec2::new(0.0, 1.0), bound),
        LinearConstraint::new(Vec2::new(0.0, -1.0), bound),
    ]
}

/// Solve the box-constrained QP. `constraints` may be empty; `box_bound`
/// must be positive.
pub fn solve_qp(target: Vec2, constraints: &[LinearConstraint], box_bound: f64) -> QpSolution {
    debug_assert!(box_bound > 0.0);

    // Degenerate rows: a = 0 encodes "0 <= b".
    let mut all: Vec<LinearConstraint> = Vec::with_capacity(constraints.len() + 4);
    for c in constraints {
        if c.a.norm_sq() == 0.0 {
            if c.b < 0.0 {
                return QpSolution::Infeasible;
            }
            continue;
        }
        all.push(*c);
    }
    all.extend_from_slice(&box_constraints(box_bound));

    let feasible_all = |u: Vec2| all.iter().all(|c| c.satisfied(u));

    // Unconstrained minimizer. Returning the target bitwise keeps the filter
    // minimally invasive.
    if feasible_all(target) {
        return QpSolution::Feasible(target);
    }

    // The feasible set lies inside every violated half-plane, so the optimal
    // objective is at least the largest single-constraint projection
    // distance; when that projection is feasible it is the optimum.
    let mut worst: Option<(usize, f64)> = None;
    for (k, c) in all.iter().enumerate() {
        let d = c.violation(target) / c.a.norm();
        if d > 0.0 && worst.map_or(true, |(_, wd)| d > wd) {
            worst = Some((k, d));
        }
    }
    if let Some((k, _)) = worst {
        let u = project_onto_boundary(target, &all[k]);
        if feasible_all(u) {
            return QpSolution::Feasible(u);
        }
    }

    let mut best: Option<(Vec2, f64)> = None;
    let mut consider = |u: Vec2| {
        if feasible_all(u) {
            let obj = (u - target).norm_sq();
            if best.map_or(true, |(_, b)| obj < b) {
                best = Some((u, obj));
            }
        }
    };

    for c in &all {
        if c.violation(target) > 0.0 {
            consider(project_onto_boundary(target, c));
        }
    }
    for k in 0..all.len() {
        for l in (k + 1)..all.len() {
            if let Some(v) = boundary_intersection(&all[k], &all[l]) {
                consider(v);
            }
        }
    }

    match best {
        Some((u, _)) => QpSolution::Feasible(u),
        None => {
            // No candidate survived; confirm emptiness with a phase-1 LP
            // before declaring the polygon infeasible.
            match least_violation_point(&all) {
                Some((u, t)) if t <= 1e-9 => QpSolution::Feasible(u),
                _ => QpSolution::Infeasible,
            }
        }
    }
}

/// Euclidean projection of `u` onto the line `a . x = b`.
fn project_onto_boundary(u: Vec2, c: &LinearConstraint) -> Vec2 {
    u - c.a * (c.violation(u) / c.a.norm_sq())
}

/// Intersection point of two boundary lines, if they are not parallel.
fn boundary_intersection(c1: &LinearConstraint, c2: &LinearConstraint) -> Option<Vec2> {
    let det = c1.a.x * c2.a.y - c1.a.y * c2.a.x;
    let scale = c1.a.norm() * c2.a.norm();
    if det.abs() <= 1e-12 * scale.max(1e-300) {
        return None;
    }
    Some(Vec2::new(
        (c1.b * c2.a.y - c2.b * c1.a.y) / det,
        (c1.a.x * c2.b - c2.a.x * c1.b) / det,
    ))
}

/// Phase-1 check: minimize t subject to `a_k . u - t <= b_k`. Returns the
/// minimizing `(u, t)`; `t <= 0` certifies a nonempty polygon. The optimum
/// sits where three constraints are tight, so triples are enumerated.
fn least_violation_point(all: &[LinearConstraint]) -> Option<(Vec2, f64)> {
    let mut best: Option<(Vec2, f64)> = None;
    let m = all.len();
    for i in 0..m {
        for j in (i + 1)..m {
            for k in (j + 1)..m {
                if let Some((u, t)) = tight_triple(&all[i], &all[j], &all[k]) {
                    let worst = all
                        .iter()
                        .map(|c| c.violation(u))
                        .fold(f64::NEG_INFINITY, f64::max);
                    if worst <= t + 1e-9 * t.abs().max(1.0)
                        && best.map_or(true, |(_, bt)| t < bt)
                    {
                        best = Some((u, t));
                    }
                }
            }
        }
    }
    best
}

/// Solve `a_i . u - t = b_i` for three constraints (3x3 linear system).
fn tight_triple(
    c1: &LinearConstraint,
    c2: &LinearConstraint,
    c3: &LinearConstraint,
) -> Option<(Vec2, f64)> {
    // Subtracting rows eliminates t.
    let a12 = c1.a - c2.a;
    let a13 = c1.a - c3.a;
    let b12 = c1.b - c2.b;
    let b13 = c1.b - c3.b;
    let det = a12.x * a13.y - a12.y * a13.x;
    if det.abs() <= 1e-12 {
        return None;
    }
    let u = Vec2::new((b12 * a13.y - b13 * a12.y) / det, (a12.x * b13 - a13.x * b12) / det);
    let t = c1.a.dot(u) - c1.b;
    Some((u, t))
}
