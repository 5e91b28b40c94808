//! Closed real intervals with outward rounding, elementary-function
//! extensions, boxes and the refined (slab-subdivided) evaluation.

mod boxes;
mod refine;
pub(crate) mod round;
mod trig;

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use thiserror::Error;

pub use boxes::{IBox, SplitError};
pub(crate) use boxes::{bisect_dim, widest_dim_masked};
pub use refine::{refined_eval, refined_eval_box, refined_eval_masked};
pub use trig::{PI_HI, PI_LO, DEFAULT_TRIG_DEGREE};

use round::*;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum IntervalError {
    #[error("invalid interval [{lo}, {hi}]")]
    Invalid { lo: f64, hi: f64 },
    #[error("division by an interval containing zero: [{lo}, {hi}]")]
    DivisionByZeroInterval { lo: f64, hi: f64 },
    #[error("{op} undefined on [{lo}, {hi}]")]
    DomainError { op: &'static str, lo: f64, hi: f64 },
}

/// `lo <= hi`. Endpoints are finite except after overflow, which every
/// evaluator reports as an error before the value escapes.
#[derive(Clone, Copy, PartialEq)]
pub struct Interval {
    lo: f64,
    hi: f64,
}

impl fmt::Debug for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{:?}, {:?}]", self.lo, self.hi)
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lo, self.hi)
    }
}

impl Interval {
    pub const ZERO: Interval = Interval { lo: 0.0, hi: 0.0 };
    pub const ONE: Interval = Interval { lo: 1.0, hi: 1.0 };
    pub const UNIT_SYM: Interval = Interval { lo: -1.0, hi: 1.0 };

    pub fn new(lo: f64, hi: f64) -> Result<Self, IntervalError> {
        if lo.is_finite() && hi.is_finite() && lo <= hi {
            Ok(Interval { lo, hi })
        } else {
            Err(IntervalError::Invalid { lo, hi })
        }
    }

    pub fn point(x: f64) -> Self {
        debug_assert!(x.is_finite());
        Interval { lo: x, hi: x }
    }

    /// Caller guarantees `lo <= hi` (possibly infinite after overflow).
    #[inline]
    pub(crate) fn raw(lo: f64, hi: f64) -> Self {
        debug_assert!(!(lo > hi), "raw interval [{lo}, {hi}]");
        Interval { lo, hi }
    }

    #[inline]
    pub fn lo(&self) -> f64 {
        self.lo
    }

    #[inline]
    pub fn hi(&self) -> f64 {
        self.hi
    }

    #[inline]
    pub fn is_finite(&self) -> bool {
        self.lo.is_finite() && self.hi.is_finite()
    }

    /// Upper bound on `hi - lo`.
    pub fn width(&self) -> f64 {
        sub_up(self.hi, self.lo)
    }

    /// A point of the interval close to its center.
    pub fn mid(&self) -> f64 {
        let m = 0.5 * self.lo + 0.5 * self.hi;
        m.clamp(self.lo, self.hi)
    }

    /// Largest absolute value.
    pub fn mag(&self) -> f64 {
        self.lo.abs().max(self.hi.abs())
    }

    /// Smallest absolute value.
    pub fn mig(&self) -> f64 {
        if self.contains(0.0) {
            0.0
        } else {
            self.lo.abs().min(self.hi.abs())
        }
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    pub fn contains_zero(&self) -> bool {
        self.contains(0.0)
    }

    pub fn is_subset(&self, other: &Interval) -> bool {
        other.lo <= self.lo && self.hi <= other.hi
    }

    pub fn hull(&self, other: &Interval) -> Interval {
        Interval::raw(self.lo.min(other.lo), self.hi.max(other.hi))
    }

    pub fn intersect(&self, other: &Interval) -> Option<Interval> {
        let lo = self.lo.max(other.lo);
        let hi = self.hi.min(other.hi);
        (lo <= hi).then(|| Interval::raw(lo, hi))
    }

    pub fn div(self, rhs: Interval) -> Result<Interval, IntervalError> {
        if rhs.contains_zero() {
            return Err(IntervalError::DivisionByZeroInterval { lo: rhs.lo, hi: rhs.hi });
        }
        let (a, b) = (self, rhs);
        let cands = [(a.lo, b.lo), (a.lo, b.hi), (a.hi, b.lo), (a.hi, b.hi)];
        let lo = cands.iter().map(|&(x, y)| div_down(x, y)).fold(f64::INFINITY, f64::min);
        let hi = cands.iter().map(|&(x, y)| div_up(x, y)).fold(f64::NEG_INFINITY, f64::max);
        Ok(Interval::raw(lo, hi))
    }

    pub fn sqr(self) -> Interval {
        let (m, g) = (self.mag(), self.mig());
        Interval::raw(mul_down(g, g), mul_up(m, m))
    }

    pub fn pow_int(self, k: u32) -> Interval {
        match k {
            0 => Interval::ONE,
            1 => self,
            2 => self.sqr(),
            _ if k % 2 == 0 => {
                Interval::raw(powi_nonneg_down(self.mig(), k), powi_nonneg_up(self.mag(), k))
            }
            _ => {
                let lo = if self.lo >= 0.0 {
                    powi_nonneg_down(self.lo, k)
                } else {
                    -powi_nonneg_up(-self.lo, k)
                };
                let hi = if self.hi >= 0.0 {
                    powi_nonneg_up(self.hi, k)
                } else {
                    -powi_nonneg_down(-self.hi, k)
                };
                Interval::raw(lo, hi)
            }
        }
    }

    pub fn abs(self) -> Interval {
        Interval::raw(self.mig(), self.mag())
    }

    pub fn sqrt(self) -> Result<Interval, IntervalError> {
        if self.lo < 0.0 {
            return Err(IntervalError::DomainError { op: "sqrt", lo: self.lo, hi: self.hi });
        }
        Ok(Interval::raw(sqrt_down(self.lo), sqrt_up(self.hi)))
    }

    pub fn exp(self) -> Interval {
        let lo = if self.lo == 0.0 { 1.0 } else { widen_down(self.lo.exp(), 2).max(0.0) };
        let hi = if self.hi == 0.0 { 1.0 } else { widen_up(self.hi.exp(), 2) };
        Interval::raw(lo, hi)
    }

    pub fn sin(self, degree: u32) -> Interval {
        trig::iv_sin(self, degree)
    }

    pub fn cos(self, degree: u32) -> Interval {
        trig::iv_cos(self, degree)
    }
}

impl Add for Interval {
    type Output = Interval;
    #[inline]
    fn add(self, rhs: Interval) -> Interval {
        Interval::raw(add_down(self.lo, rhs.lo), add_up(self.hi, rhs.hi))
    }
}

impl Sub for Interval {
    type Output = Interval;
    #[inline]
    fn sub(self, rhs: Interval) -> Interval {
        Interval::raw(sub_down(self.lo, rhs.hi), sub_up(self.hi, rhs.lo))
    }
}

impl Neg for Interval {
    type Output = Interval;
    #[inline]
    fn neg(self) -> Interval {
        Interval::raw(-self.hi, -self.lo)
    }
}

impl Mul for Interval {
    type Output = Interval;
    #[inline]
    fn mul(self, rhs: Interval) -> Interval {
        let (a, b) = (self, rhs);
        if a.lo >= 0.0 && b.lo >= 0.0 {
            return Interval::raw(mul_down(a.lo, b.lo), mul_up(a.hi, b.hi));
        }
        let cands = [(a.lo, b.lo), (a.lo, b.hi), (a.hi, b.lo), (a.hi, b.hi)];
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for (x, y) in cands {
            lo = lo.min(mul_down(x, y));
            hi = hi.max(mul_up(x, y));
        }
        Interval::raw(lo, hi)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn iv(lo: f64, hi: f64) -> Interval {
        Interval::new(lo, hi).unwrap()
    }

    #[test]
    fn arithmetic_examples() {
        assert_eq!(iv(1.0, 2.0) + iv(3.0, 4.0), iv(4.0, 6.0));
        assert_eq!(iv(-1.0, 2.0) * iv(3.0, 4.0), iv(-4.0, 8.0));
        assert_eq!(iv(1.0, 2.0) - iv(3.0, 4.0), iv(-3.0, -1.0));
        assert_eq!(-iv(1.0, 2.0), iv(-2.0, -1.0));
        assert!(matches!(
            iv(1.0, 1.0).div(iv(-1.0, 1.0)),
            Err(IntervalError::DivisionByZeroInterval { .. })
        ));
        let q = iv(1.0, 2.0).div(iv(4.0, 8.0)).unwrap();
        assert!(q.contains(0.125) && q.contains(0.5));
    }

    #[test]
    fn elementary_examples() {
        assert_eq!(iv(-2.0, 1.0).sqr(), iv(0.0, 4.0));
        assert_eq!(iv(-3.0, 2.0).abs(), iv(0.0, 3.0));
        assert_eq!(iv(2.0, 3.0).pow_int(3), iv(8.0, 27.0));
        assert_eq!(iv(-3.0, -2.0).pow_int(3), iv(-27.0, -8.0));
        assert_eq!(iv(-3.0, 2.0).pow_int(4), iv(0.0, 81.0));
        assert_eq!(iv(4.0, 9.0).sqrt().unwrap(), iv(2.0, 3.0));
        assert!(matches!(iv(-1.0, 4.0).sqrt(), Err(IntervalError::DomainError { .. })));
        let e = iv(0.0, 1.0).exp();
        assert_eq!(e.lo(), 1.0);
        assert!(e.contains(std::f64::consts::E));
    }

    #[test]
    fn constructor_rejects_bad_endpoints() {
        assert!(Interval::new(2.0, 1.0).is_err());
        assert!(Interval::new(f64::NAN, 1.0).is_err());
        assert!(Interval::new(0.0, f64::INFINITY).is_err());
    }

    #[test]
    fn hull_and_intersection() {
        let a = iv(0.0, 2.0);
        let b = iv(1.0, 3.0);
        assert_eq!(a.hull(&b), iv(0.0, 3.0));
        assert_eq!(a.intersect(&b), Some(iv(1.0, 2.0)));
        assert_eq!(a.intersect(&iv(5.0, 6.0)), None);
    }
}
