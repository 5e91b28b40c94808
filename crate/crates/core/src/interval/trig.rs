//! Interval sine and cosine from truncated Taylor partial sums.
//!
//! For x >= 0 the partial sums of the sine series alternate around sin x: the
//! sum through term index K is an upper bound when K is even and a lower bound
//! when K is odd (repeated integration of cos t <= 1). The same holds for the
//! cosine series for every real x. Degree n uses K = 2n for the upper and
//! K = 2n + 1 for the lower partial sum. Partial sums are themselves evaluated
//! in interval arithmetic, so rounding is covered.

use super::Interval;

pub const DEFAULT_TRIG_DEGREE: u32 = 4;

/// Largest double below pi.
pub const PI_LO: f64 = std::f64::consts::PI;
/// Smallest double above pi.
pub const PI_HI: f64 = 3.141_592_653_589_793_6;

const HALF_PI_LO: f64 = PI_LO / 2.0;
const HALF_PI_HI: f64 = PI_HI / 2.0;

/// Enclosure of sum_{k=0}^{last} (-1)^k x^(2k+offset) / (2k+offset)!.
fn partial_sum(x: f64, last: u32, offset: u32) -> Interval {
    let xi = Interval::point(x);
    let x2 = xi.sqr();
    let mut term = if offset == 1 { xi } else { Interval::ONE };
    let mut sum = term;
    for k in 1..=last {
        let a = 2 * k + offset;
        let denom = Interval::point(f64::from(a) * f64::from(a - 1));
        term = (term * x2).div(denom).expect("factorial ratio is positive");
        sum = if k % 2 == 1 { sum - term } else { sum + term };
    }
    sum
}

fn sin_lower_nonneg(x: f64, n: u32) -> f64 {
    partial_sum(x, 2 * n + 1, 1).lo()
}

fn sin_upper_nonneg(x: f64, n: u32) -> f64 {
    partial_sum(x, 2 * n, 1).hi()
}

/// Lower bound on sin x.
fn s_lo(x: f64, n: u32) -> f64 {
    if x >= 0.0 {
        sin_lower_nonneg(x, n)
    } else {
        -sin_upper_nonneg(-x, n)
    }
}

/// Upper bound on sin x.
fn s_hi(x: f64, n: u32) -> f64 {
    if x >= 0.0 {
        sin_upper_nonneg(x, n)
    } else {
        -sin_lower_nonneg(-x, n)
    }
}

/// Lower bound on cos x.
fn c_lo(x: f64, n: u32) -> f64 {
    partial_sum(x.abs(), 2 * n + 1, 0).lo()
}

/// Upper bound on cos x.
fn c_hi(x: f64, n: u32) -> f64 {
    partial_sum(x.abs(), 2 * n, 0).hi()
}

fn clamp_unit(lo: f64, hi: f64) -> Interval {
    Interval::raw(lo.max(-1.0), hi.min(1.0))
}

fn within(w: Interval, lo: f64, hi: f64) -> bool {
    lo <= w.lo() && w.hi() <= hi
}

pub(super) fn iv_sin(w: Interval, degree: u32) -> Interval {
    let n = degree.max(1);
    if !w.is_finite() {
        return Interval::UNIT_SYM;
    }
    let (a, b) = (w.lo(), w.hi());
    if within(w, -HALF_PI_LO, HALF_PI_LO) {
        clamp_unit(s_lo(a, n), s_hi(b, n))
    } else if within(w, HALF_PI_HI, PI_LO) {
        clamp_unit(s_lo(b, n), s_hi(a, n))
    } else if within(w, 0.0, PI_LO) {
        clamp_unit(s_lo(a, n).min(s_lo(b, n)), 1.0)
    } else if within(w, -PI_LO, 0.0) {
        -iv_sin(-w, degree)
    } else {
        Interval::UNIT_SYM
    }
}

pub(super) fn iv_cos(w: Interval, degree: u32) -> Interval {
    let n = degree.max(1);
    if !w.is_finite() {
        return Interval::UNIT_SYM;
    }
    let (a, b) = (w.lo(), w.hi());
    if within(w, 0.0, PI_LO) {
        clamp_unit(c_lo(b, n), c_hi(a, n))
    } else if within(w, -PI_LO, 0.0) {
        iv_cos(-w, degree)
    } else if within(w, -HALF_PI_LO, HALF_PI_LO) {
        clamp_unit(c_lo(a, n).min(c_lo(b, n)), 1.0)
    } else {
        Interval::UNIT_SYM
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn iv(lo: f64, hi: f64) -> Interval {
        Interval::new(lo, hi).unwrap()
    }

    #[test]
    fn pi_constants_bracket_pi() {
        assert_eq!(PI_LO.next_up(), PI_HI);
        // pi = 3.14159265358979323846...; the double nearest pi lies below it.
        assert!(PI_LO < PI_HI);
        assert_eq!(format!("{:.20}", PI_LO), "3.14159265358979311600");
        assert_eq!(format!("{:.20}", PI_HI), "3.14159265358979356009");
    }

    #[test]
    fn sin_of_zero_is_tight() {
        let s = iv(0.0, 0.0).sin(4);
        assert!(s.contains(0.0) && s.width() <= 1e-12);
    }

    #[test]
    fn cos_fallback_on_wide_input() {
        assert_eq!(iv(-10.0, 10.0).cos(4), iv(-1.0, 1.0));
        assert_eq!(iv(-10.0, 10.0).sin(4), iv(-1.0, 1.0));
    }

    #[test]
    fn sin_half_contains_reference() {
        let s = iv(0.5, 0.5).sin(4);
        assert!(s.contains(0.479_425_538_604_203));
        assert!(s.width() < 1e-14);
    }

    #[test]
    fn monotone_branches() {
        let s = iv(2.0, 3.0).sin(4);
        assert!(s.contains(2f64.sin()) && s.contains(3f64.sin()));
        assert!(s.hi() < 0.95);
        let s = iv(1.0, 2.0).sin(4);
        assert_eq!(s.hi(), 1.0);
        let c = iv(1.0, 2.0).cos(4);
        assert!(c.contains(1f64.cos()) && c.contains(2f64.cos()));
        let c = iv(-3.0, -1.0).cos(4);
        assert!(c.contains((-2f64).cos()) && c.hi() < 0.55);
        let c = iv(-0.5, 1.0).cos(4);
        assert_eq!(c.hi(), 1.0);
        assert!(c.lo() <= 1f64.cos());
        let s = iv(-3.0, -2.0).sin(4);
        assert!(s.contains((-2.5f64).sin()) && s.hi() < 0.0);
    }

    #[test]
    fn degree_one_is_still_sound() {
        for &x in &[0.1, 0.7, 1.5, 2.5, 3.1, -1.2, -2.9] {
            assert!(iv(x, x).sin(1).contains(x.sin()), "sin {x}");
            assert!(iv(x, x).cos(1).contains(x.cos()), "cos {x}");
        }
    }
}
