//! Helpers for angles on the circle.

use std::f64::consts::{PI, TAU};

/// Reduces an angle to `[0, 2π)`.
pub fn reduce(angle: f64) -> f64 {
    let r = angle.rem_euclid(TAU);
    // rem_euclid rounds tiny negative inputs up to exactly 2π
    if r >= TAU {
        0.0
    } else {
        r
    }
}

/// Wraps an angle to `(−π, π]`.
pub fn wrap(angle: f64) -> f64 {
    let r = reduce(angle);
    if r > PI {
        r - TAU
    } else {
        r
    }
}

/// Shortest arc length between two angles, in `[0, π]`.
pub fn distance(a: f64, b: f64) -> f64 {
    wrap(b - a).abs()
}

/// Point halfway along the shortest arc from `a` to `b`, wrapped to `(−π, π]`.
pub fn midpoint(a: f64, b: f64) -> f64 {
    wrap(a + wrap(b - a) / 2.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reduce_stays_in_range() {
        assert_eq!(reduce(-1e-300), 0.0);
        assert_eq!(reduce(TAU), 0.0);
        assert!((reduce(-0.64) - (TAU - 0.64)).abs() < 1e-15);
    }

    #[test]
    fn wrap_is_half_open() {
        assert_eq!(wrap(PI), PI);
        assert!((wrap(-PI) - PI).abs() < 1e-15);
        assert!((wrap(TAU - 0.1) + 0.1).abs() < 1e-15);
    }

    #[test]
    fn midpoint_crosses_zero() {
        assert!((midpoint(-0.1, 0.3) - 0.1).abs() < 1e-15);
        assert!((midpoint(PI - 0.1, -PI + 0.1) - PI).abs() < 1e-12);
        assert!((distance(0.1, TAU - 0.1) - 0.2).abs() < 1e-12);
    }
}
