//! Angle helpers and platform-independent trigonometry.
//!
//! Everything that feeds the simulator state goes through `libm` so that a
//! given seed produces the same floating point trajectory on every target,
//! independent of the system math library.

use std::f64::consts::{PI, TAU};

#[inline]
pub fn sin(x: f64) -> f64 {
    libm::sin(x)
}

#[inline]
pub fn cos(x: f64) -> f64 {
    libm::cos(x)
}

#[inline]
pub fn tan(x: f64) -> f64 {
    libm::tan(x)
}

#[inline]
pub fn atan(x: f64) -> f64 {
    libm::atan(x)
}

#[inline]
pub fn atan2(y: f64, x: f64) -> f64 {
    libm::atan2(y, x)
}

#[inline]
pub fn hypot(x: f64, y: f64) -> f64 {
    libm::hypot(x, y)
}

/// Wraps an angle into `[0, 2π)`.
pub fn normalize_angle(theta: f64) -> f64 {
    let mut t = theta % TAU;
    if t < 0.0 {
        t += TAU;
    }
    // `-tiny % TAU + TAU` rounds to exactly TAU.
    if t >= TAU {
        t = 0.0;
    }
    t
}

/// Signed smallest difference `a - b`, in `(-π, π]`.
pub fn angle_diff(a: f64, b: f64) -> f64 {
    let mut d = (a - b) % TAU;
    if d > PI {
        d -= TAU;
    } else if d <= -PI {
        d += TAU;
    }
    d
}

/// Unit forward vector for heading `theta`.
///
/// Heading 0 faces +y and angles grow counter-clockwise, so the egocentric
/// frame (right, forward) coincides with the world frame (x, y) at `theta = 0`.
#[inline]
pub fn forward(theta: f64) -> (f64, f64) {
    (-sin(theta), cos(theta))
}

/// Unit vector pointing to the agent's right for heading `theta`.
#[inline]
pub fn right(theta: f64) -> (f64, f64) {
    (cos(theta), sin(theta))
}

/// Rotates an egocentric offset (right, forward) into world axes.
#[inline]
pub fn ego_to_world(theta: f64, right_m: f64, forward_m: f64) -> (f64, f64) {
    let (c, s) = (cos(theta), sin(theta));
    (right_m * c - forward_m * s, right_m * s + forward_m * c)
}

/// Heading that faces along the world vector `(dx, dy)`.
#[inline]
pub fn bearing(dx: f64, dy: f64) -> f64 {
    normalize_angle(atan2(-dx, dy))
}
