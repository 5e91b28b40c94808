//! Directed rounding on top of round-to-nearest.
//!
//! Sums and products use error-free transformations: the exact rounding error
//! is recovered, so the result is moved by one ulp only when the nearest
//! representable value lies on the wrong side of the true value. Quotients,
//! square roots and library transcendentals are widened unconditionally.

// Below this magnitude an fma residual may itself be inexact.
const FMA_SAFE: f64 = 1.0e-290;

#[inline]
fn two_sum_err(a: f64, b: f64, s: f64) -> f64 {
    let bb = s - a;
    (a - (s - bb)) + (b - bb)
}

#[inline]
pub fn add_down(a: f64, b: f64) -> f64 {
    let s = a + b;
    if !s.is_finite() {
        return s;
    }
    if two_sum_err(a, b, s) < 0.0 {
        s.next_down()
    } else {
        s
    }
}

#[inline]
pub fn add_up(a: f64, b: f64) -> f64 {
    let s = a + b;
    if !s.is_finite() {
        return s;
    }
    if two_sum_err(a, b, s) > 0.0 {
        s.next_up()
    } else {
        s
    }
}

#[inline]
pub fn sub_down(a: f64, b: f64) -> f64 {
    add_down(a, -b)
}

#[inline]
pub fn sub_up(a: f64, b: f64) -> f64 {
    add_up(a, -b)
}

#[inline]
pub fn mul_down(a: f64, b: f64) -> f64 {
    if a == 0.0 || b == 0.0 {
        return 0.0;
    }
    let p = a * b;
    if !p.is_finite() {
        return p;
    }
    if p.abs() < FMA_SAFE {
        return p.next_down();
    }
    if a.mul_add(b, -p) < 0.0 {
        p.next_down()
    } else {
        p
    }
}

#[inline]
pub fn mul_up(a: f64, b: f64) -> f64 {
    if a == 0.0 || b == 0.0 {
        return 0.0;
    }
    let p = a * b;
    if !p.is_finite() {
        return p;
    }
    if p.abs() < FMA_SAFE {
        return p.next_up();
    }
    if a.mul_add(b, -p) > 0.0 {
        p.next_up()
    } else {
        p
    }
}

#[inline]
pub fn div_down(a: f64, b: f64) -> f64 {
    if a == 0.0 {
        return 0.0;
    }
    (a / b).next_down()
}

#[inline]
pub fn div_up(a: f64, b: f64) -> f64 {
    if a == 0.0 {
        return 0.0;
    }
    (a / b).next_up()
}

#[inline]
fn sqrt_is_exact(a: f64, r: f64) -> bool {
    a == 0.0 || (a >= FMA_SAFE && r.is_finite() && r.mul_add(r, -a) == 0.0)
}

#[inline]
pub fn sqrt_down(a: f64) -> f64 {
    let r = a.sqrt();
    if sqrt_is_exact(a, r) {
        r
    } else {
        r.next_down().max(0.0)
    }
}

#[inline]
pub fn sqrt_up(a: f64) -> f64 {
    let r = a.sqrt();
    if sqrt_is_exact(a, r) {
        r
    } else {
        r.next_up()
    }
}

#[inline]
pub fn widen_down(x: f64, ulps: u32) -> f64 {
    (0..ulps).fold(x, |v, _| v.next_down())
}

#[inline]
pub fn widen_up(x: f64, ulps: u32) -> f64 {
    (0..ulps).fold(x, |v, _| v.next_up())
}

/// x^k for x >= 0, rounded down.
pub fn powi_nonneg_down(x: f64, k: u32) -> f64 {
    debug_assert!(x >= 0.0);
    let mut acc = 1.0;
    for _ in 0..k {
        acc = mul_down(acc, x);
    }
    acc
}

/// x^k for x >= 0, rounded up.
pub fn powi_nonneg_up(x: f64, k: u32) -> f64 {
    debug_assert!(x >= 0.0);
    let mut acc = 1.0;
    for _ in 0..k {
        acc = mul_up(acc, x);
    }
    acc
}
