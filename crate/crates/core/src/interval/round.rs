//! Directed rounding for the four basic operations.
//!
//! The round-to-nearest result is corrected by one step toward the requested
//! direction when the exact error term (recovered with an error-free
//! transformation) shows the rounded value landed on the wrong side.

/// Below this magnitude FMA residuals may themselves be inexact, so we
/// nudge unconditionally.
const TINY: f64 = 1e-290;

#[inline]
fn two_sum_err(a: f64, b: f64, s: f64) -> f64 {
    let bb = s - a;
    (a - (s - bb)) + (b - bb)
}

pub fn add_down(a: f64, b: f64) -> f64 {
    let s = a + b;
    if !s.is_finite() {
        return if s.is_nan() { f64::NEG_INFINITY } else { s };
    }
    if two_sum_err(a, b, s) < 0.0 {
        s.next_down()
    } else {
        s
    }
}

pub fn add_up(a: f64, b: f64) -> f64 {
    let s = a + b;
    if !s.is_finite() {
        return if s.is_nan() { f64::INFINITY } else { s };
    }
    if two_sum_err(a, b, s) > 0.0 {
        s.next_up()
    } else {
        s
    }
}

pub fn sub_down(a: f64, b: f64) -> f64 {
    add_down(a, -b)
}

pub fn sub_up(a: f64, b: f64) -> f64 {
    add_up(a, -b)
}

pub fn mul_down(a: f64, b: f64) -> f64 {
    let p = a * b;
    if p.is_nan() {
        // 0 * inf: the only way an enclosure bound can produce NaN here
        return 0.0;
    }
    if !p.is_finite() {
        return p;
    }
    if p != 0.0 && p.abs() < TINY {
        return p.next_down();
    }
    if p == 0.0 && a != 0.0 && b != 0.0 {
        // underflow to zero
        return if (a < 0.0) != (b < 0.0) { -f64::MIN_POSITIVE } else { 0.0 };
    }
    let e = a.mul_add(b, -p);
    if e < 0.0 {
        p.next_down()
    } else {
        p
    }
}

pub fn mul_up(a: f64, b: f64) -> f64 {
    -mul_down(-a, b)
}

pub fn div_down(a: f64, b: f64) -> f64 {
    let q = a / b;
    if !q.is_finite() {
        return if q.is_nan() { f64::NEG_INFINITY } else { q };
    }
    if q != 0.0 && q.abs() < TINY || (q == 0.0 && a != 0.0) {
        return q.next_down();
    }
    // a = q*b + r exactly, so a/b = q + r/b
    let r = -q.mul_add(b, -a);
    if (r < 0.0) != (b < 0.0) && r != 0.0 {
        q.next_down()
    } else {
        q
    }
}

pub fn div_up(a: f64, b: f64) -> f64 {
    -div_down(-a, b)
}

/// Moves `x` down by `n` ulps.
pub fn widen_down(x: f64, n: u32) -> f64 {
    (0..n).fold(x, |v, _| v.next_down())
}

/// Moves `x` up by `n` ulps.
pub fn widen_up(x: f64, n: u32) -> f64 {
    (0..n).fold(x, |v, _| v.next_up())
}
