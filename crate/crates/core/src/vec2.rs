//! Planar vector primitives shared by every module.
//!
//! Convention: `rot90` is a *counterclockwise* quarter turn. Together with
//! `sgnz(0) = 1` this makes the gyroscopic steering break head-on symmetry
//! to the left; the choice is arbitrary but must stay consistent.

use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

/// Tolerance for "is zero" comparisons unless a caller overrides it.
pub const ZERO_TOL: f64 = 1e-12;

/// A 2D vector of `f64` components (meters or meters/second by context).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const ZERO: Vec2 = Vec2 { x: 0.0, y: 0.0 };

    pub const fn new(x: f64, y: f64) -> Self {
        Vec2 { x, y }
    }

    pub fn dot(self, other: Vec2) -> f64 {
        self.x * other.x + self.y * other.y
    }

    pub fn norm_sq(self) -> f64 {
        self.dot(self)
    }

    pub fn norm(self) -> f64 {
        self.norm_sq().sqrt()
    }

    /// Unit vector along `self`, or zero if `self` is zero.
    pub fn normalized(self) -> Vec2 {
        let n = self.norm();
        if n == 0.0 {
            Vec2::ZERO
        } else {
            self / n
        }
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    /// Polar constructor: magnitude `r` at angle `theta` (radians, CCW from +x).
    pub fn from_polar(r: f64, theta: f64) -> Vec2 {
        Vec2::new(r * theta.cos(), r * theta.sin())
    }
}

/// Clip the magnitude of `x` to `a`: returns `x` when `|x| < a`, otherwise
/// `a * x / |x|`. Direction is preserved; the zero vector is a fixed point.
pub fn clip(x: Vec2, a: f64) -> Vec2 {
    debug_assert!(a >= 0.0);
    let n = x.norm();
    if n < a || n == 0.0 {
        x
    } else {
        x * (a / n)
    }
}

/// Counterclockwise quarter turn: (x, y) -> (-y, x).
pub fn rot90(v: Vec2) -> Vec2 {
    Vec2::new(-v.y, v.x)
}

/// Scalar z component of the 3D cross product of two in-plane vectors.
pub fn crossz(a: Vec2, b: Vec2) -> f64 {
    a.x * b.y - a.y * b.x
}

/// Sign function with `sgnz(0) = 1`.
pub fn sgnz(x: f64) -> f64 {
    if x == 0.0 {
        1.0
    } else {
        x.signum()
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    fn add(self, rhs: Vec2) -> Vec2 {
        Vec2::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl AddAssign for Vec2 {
    fn add_assign(&mut self, rhs: Vec2) {
        self.x += rhs.x;
        self.y += rhs.y;
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, rhs: Vec2) -> Vec2 {
        Vec2::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl Neg for Vec2 {
    type Output = Vec2;
    fn neg(self) -> Vec2 {
        Vec2::new(-self.x, -self.y)
    }
}

impl Mul<f64> for Vec2 {
    type Output = Vec2;
    fn mul(self, rhs: f64) -> Vec2 {
        Vec2::new(self.x * rhs, self.y * rhs)
    }
}

impl Mul<Vec2> for f64 {
    type Output = Vec2;
    fn mul(self, rhs: Vec2) -> Vec2 {
        rhs * self
    }
}

impl Div<f64> for Vec2 {
    type Output = Vec2;
    fn div(self, rhs: f64) -> Vec2 {
        Vec2::new(self.x / rhs, self.y / rhs)
    }
}
