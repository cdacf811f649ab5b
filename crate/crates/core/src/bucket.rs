//! Geometric bucketing of processing times.
//!
//! A value `x > 0` falls in bucket `u` when `(1+δ)^u <= x < (1+δ)^(u+1)`.
//! The float logarithm gives a first guess; the defining inequality is then
//! checked directly and the guess nudged until it holds, so values sitting
//! next to a bucket boundary are never misassigned by log rounding.

/// `(1+δ)^u` evaluated with `powi`.
#[inline]
pub fn power(delta: f64, u: i64) -> f64 {
    (1.0 + delta).powi(u as i32)
}

/// Bucket of a real value `x > 0`; negative for `x < 1`.
pub fn floor_log(x: f64, delta: f64) -> i64 {
    debug_assert!(x > 0.0 && delta > 0.0);
    let base = 1.0 + delta;
    let mut u = (x.ln() / base.ln()).floor() as i64;
    while power(delta, u) > x {
        u -= 1;
    }
    while power(delta, u + 1) <= x {
        u += 1;
    }
    u
}

/// Bucket of an integer processing time `p >= 1`. Always `>= 0`.
pub fn bucket_index(p: u64, delta: f64) -> i64 {
    debug_assert!(p >= 1);
    if p == 1 {
        return 0;
    }
    floor_log(p as f64, delta)
}

/// Upper representative of a non-top bucket, `(1+δ)^(u+1)`.
#[inline]
pub fn rounded_value(u: i64, delta: f64) -> f64 {
    power(delta, u + 1)
}

/// Floor of an accumulated real, treating values within `1e-9` below an
/// integer as that integer.
pub fn snap_floor(x: f64) -> u64 {
    let r = x.round();
    let v = if (x - r).abs() < 1e-9 { r } else { x.floor() };
    v.max(0.0) as u64
}
