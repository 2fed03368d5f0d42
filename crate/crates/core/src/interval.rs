//! Outward-rounded interval arithmetic over `f64`.
//!
//! Every basic operation returns an interval that contains the exact real
//! result of applying the operation to any pair of represented reals. Sums and
//! products use error-free transformations (two-sum, fused multiply-add), so a
//! result that happens to be exact in floating point stays a point interval;
//! otherwise the bound is moved one ulp in the direction of the rounding error.
//! Transcendental functions are widened by two ulps on each side, which covers
//! the error of the platform `exp`/`ln`.

use std::fmt;
use std::iter::Sum;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

/// A closed interval `[lo, hi]` of finite reals.
#[derive(Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    lo: f64,
    hi: f64,
}

fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    let err = (a - (s - bb)) + (b - bb);
    (s, err)
}

pub(crate) fn add_down(a: f64, b: f64) -> f64 {
    let (s, e) = two_sum(a, b);
    if !s.is_finite() || e >= 0.0 {
        s
    } else {
        s.next_down()
    }
}

pub(crate) fn add_up(a: f64, b: f64) -> f64 {
    let (s, e) = two_sum(a, b);
    if !s.is_finite() || e <= 0.0 {
        s
    } else {
        s.next_up()
    }
}

fn mul_down(a: f64, b: f64) -> f64 {
    let p = a * b;
    if !p.is_finite() {
        return p;
    }
    let e = a.mul_add(b, -p);
    if e >= 0.0 {
        p
    } else {
        p.next_down()
    }
}

fn mul_up(a: f64, b: f64) -> f64 {
    let p = a * b;
    if !p.is_finite() {
        return p;
    }
    let e = a.mul_add(b, -p);
    if e <= 0.0 {
        p
    } else {
        p.next_up()
    }
}

fn div_down(a: f64, b: f64) -> f64 {
    let q = a / b;
    if !q.is_finite() {
        return q;
    }
    // a - q*b is exact; its sign relative to b gives the rounding direction.
    let r = (-q).mul_add(b, a);
    if r == 0.0 || (r > 0.0) == (b > 0.0) {
        q
    } else {
        q.next_down()
    }
}

fn div_up(a: f64, b: f64) -> f64 {
    let q = a / b;
    if !q.is_finite() {
        return q;
    }
    let r = (-q).mul_add(b, a);
    if r == 0.0 || (r < 0.0) == (b > 0.0) {
        q
    } else {
        q.next_up()
    }
}

fn widen_ulps(x: f64, ulps: u32) -> (f64, f64) {
    let (mut lo, mut hi) = (x, x);
    for _ in 0..ulps {
        lo = lo.next_down();
        hi = hi.next_up();
    }
    (lo, hi)
}

impl Interval {
    /// Builds `[lo, hi]`.
    ///
    /// Panics if the bounds are not finite or out of order; use
    /// [`Interval::try_new`] for untrusted input.
    pub fn new(lo: f64, hi: f64) -> Self {
        Self::try_new(lo, hi).unwrap_or_else(|| panic!("invalid interval [{lo}, {hi}]"))
    }

    pub fn try_new(lo: f64, hi: f64) -> Option<Self> {
        if lo.is_finite() && hi.is_finite() && lo <= hi {
            Some(Self { lo, hi })
        } else {
            None
        }
    }

    pub fn point(x: f64) -> Self {
        Self::new(x, x)
    }

    pub const ZERO: Interval = Interval { lo: 0.0, hi: 0.0 };
    pub const ONE: Interval = Interval { lo: 1.0, hi: 1.0 };
    pub const UNIT: Interval = Interval { lo: 0.0, hi: 1.0 };

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn mid(&self) -> f64 {
        if self.lo == self.hi {
            self.lo
        } else {
            self.lo * 0.5 + self.hi * 0.5
        }
    }

    /// Width, rounded up.
    pub fn width(&self) -> f64 {
        add_up(self.hi, -self.lo)
    }

    pub fn is_point(&self) -> bool {
        self.lo == self.hi
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    pub fn contains_interval(&self, other: &Interval) -> bool {
        self.lo <= other.lo && other.hi <= self.hi
    }

    pub fn intersects(&self, other: &Interval) -> bool {
        self.lo <= other.hi && other.lo <= self.hi
    }

    pub fn intersect(&self, other: &Interval) -> Option<Interval> {
        Interval::try_new(self.lo.max(other.lo), self.hi.min(other.hi))
    }

    pub fn hull(&self, other: &Interval) -> Interval {
        Interval::new(self.lo.min(other.lo), self.hi.max(other.hi))
    }

    /// Distance between the two sets; zero when they intersect.
    pub fn gap(&self, other: &Interval) -> f64 {
        if self.intersects(other) {
            0.0
        } else if self.hi < other.lo {
            add_down(other.lo, -self.hi)
        } else {
            add_down(self.lo, -other.hi)
        }
    }

    /// Enlarges by `r >= 0` on both sides.
    pub fn widen(&self, r: f64) -> Interval {
        debug_assert!(r >= 0.0);
        Interval::new(add_down(self.lo, -r), add_up(self.hi, r))
    }

    /// `[lo, hi]` joined with `[lo, hi + r]`, for one-sided remainders.
    pub fn extend_up(&self, r: f64) -> Interval {
        debug_assert!(r >= 0.0);
        Interval::new(self.lo, add_up(self.hi, r))
    }

    pub fn abs_max(&self) -> f64 {
        self.lo.abs().max(self.hi.abs())
    }

    /// Element-wise maximum of two interval-valued quantities.
    pub fn max(&self, other: &Interval) -> Interval {
        Interval::new(self.lo.max(other.lo), self.hi.max(other.hi))
    }

    pub fn min(&self, other: &Interval) -> Interval {
        Interval::new(self.lo.min(other.lo), self.hi.min(other.hi))
    }

    /// Multiplication by a non-negative scalar.
    pub fn scale(&self, c: f64) -> Interval {
        debug_assert!(c >= 0.0);
        Interval::new(mul_down(self.lo, c), mul_up(self.hi, c))
    }

    /// Quotient; `None` when the divisor contains zero.
    pub fn checked_div(&self, rhs: &Interval) -> Option<Interval> {
        if rhs.lo <= 0.0 && rhs.hi >= 0.0 {
            return None;
        }
        let cands_lo = [
            div_down(self.lo, rhs.lo),
            div_down(self.lo, rhs.hi),
            div_down(self.hi, rhs.lo),
            div_down(self.hi, rhs.hi),
        ];
        let cands_hi = [
            div_up(self.lo, rhs.lo),
            div_up(self.lo, rhs.hi),
            div_up(self.hi, rhs.lo),
            div_up(self.hi, rhs.hi),
        ];
        Interval::try_new(
            cands_lo.iter().copied().fold(f64::INFINITY, f64::min),
            cands_hi.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        )
    }

    pub fn exp(&self) -> Interval {
        let lo = if self.lo == 0.0 {
            1.0
        } else {
            widen_ulps(self.lo.exp(), 2).0.max(0.0)
        };
        let hi = if self.hi == 0.0 {
            1.0
        } else {
            widen_ulps(self.hi.exp(), 2).1
        };
        Interval::try_new(lo, hi).unwrap_or_else(|| panic!("exp overflow on {self:?}"))
    }

    /// Natural logarithm; `None` unless the interval is strictly positive.
    pub fn ln(&self) -> Option<Interval> {
        if self.lo <= 0.0 {
            return None;
        }
        let lo = if self.lo == 1.0 {
            0.0
        } else {
            widen_ulps(self.lo.ln(), 2).0
        };
        let hi = if self.hi == 1.0 {
            0.0
        } else {
            widen_ulps(self.hi.ln(), 2).1
        };
        Interval::try_new(lo, hi)
    }

    pub fn powi(&self, n: u32) -> Interval {
        let mut acc = Interval::ONE;
        for _ in 0..n {
            acc = acc * *self;
        }
        acc
    }

    /// `x^(1/k)` for a non-negative interval.
    pub fn root(&self, k: u32) -> Interval {
        assert!(k >= 1 && self.lo >= 0.0, "root of {self:?}");
        if k == 1 {
            return *self;
        }
        let kk = Interval::point(k as f64);
        let part = |x: f64, upper: bool| -> f64 {
            if x == 0.0 {
                return 0.0;
            }
            let e = Interval::point(x)
                .ln()
                .and_then(|l| l.checked_div(&kk))
                .expect("positive")
                .exp();
            if upper {
                e.hi
            } else {
                e.lo
            }
        };
        Interval::new(part(self.lo, false), part(self.hi, true))
    }

    /// Range of `-p ln p` over the interval, which must lie in `[0, 1]`.
    pub fn neg_xlogx(&self) -> Interval {
        debug_assert!(self.lo >= 0.0 && self.hi <= 1.0 + 1e-12);
        let f = |p: f64| -> Interval {
            if p <= 0.0 || p >= 1.0 {
                return Interval::ZERO;
            }
            let x = Interval::point(p);
            -(x * x.ln().expect("positive"))
        };
        let a = f(self.lo);
        let b = f(self.hi.min(1.0));
        let mut out = a.hull(&b);
        let peak = std::f64::consts::E.recip();
        if self.contains(peak) {
            // -p ln p attains 1/e at p = 1/e.
            out = out.hull(&Interval::new(peak.next_down(), peak.next_up()));
        }
        Interval::new(out.lo.max(0.0), out.hi)
    }
}

impl Add for Interval {
    type Output = Interval;
    fn add(self, rhs: Interval) -> Interval {
        Interval::new(add_down(self.lo, rhs.lo), add_up(self.hi, rhs.hi))
    }
}

impl Sub for Interval {
    type Output = Interval;
    fn sub(self, rhs: Interval) -> Interval {
        Interval::new(add_down(self.lo, -rhs.hi), add_up(self.hi, -rhs.lo))
    }
}

impl Neg for Interval {
    type Output = Interval;
    fn neg(self) -> Interval {
        Interval::new(-self.hi, -self.lo)
    }
}

impl Mul for Interval {
    type Output = Interval;
    fn mul(self, rhs: Interval) -> Interval {
        let lo = [
            mul_down(self.lo, rhs.lo),
            mul_down(self.lo, rhs.hi),
            mul_down(self.hi, rhs.lo),
            mul_down(self.hi, rhs.hi),
        ]
        .into_iter()
        .fold(f64::INFINITY, f64::min);
        let hi = [
            mul_up(self.lo, rhs.lo),
            mul_up(self.lo, rhs.hi),
            mul_up(self.hi, rhs.lo),
            mul_up(self.hi, rhs.hi),
        ]
        .into_iter()
        .fold(f64::NEG_INFINITY, f64::max);
        Interval::new(lo, hi)
    }
}

impl Add<f64> for Interval {
    type Output = Interval;
    fn add(self, rhs: f64) -> Interval {
        self + Interval::point(rhs)
    }
}

impl Mul<f64> for Interval {
    type Output = Interval;
    fn mul(self, rhs: f64) -> Interval {
        self * Interval::point(rhs)
    }
}

impl Sum for Interval {
    fn sum<I: Iterator<Item = Interval>>(iter: I) -> Interval {
        iter.fold(Interval::ZERO, |a, b| a + b)
    }
}

impl<'a> Sum<&'a Interval> for Interval {
    fn sum<I: Iterator<Item = &'a Interval>>(iter: I) -> Interval {
        iter.fold(Interval::ZERO, |a, b| a + *b)
    }
}

impl fmt::Debug for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{:e}, {:e}]", self.lo, self.hi)
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lo, self.hi)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn exact_operations_stay_points() {
        assert_eq!(Interval::ZERO + Interval::ZERO, Interval::ZERO);
        assert_eq!(Interval::ZERO.exp(), Interval::ONE);
        assert_eq!(Interval::ONE.ln().unwrap(), Interval::ZERO);
        assert_eq!(
            Interval::point(2.0) * Interval::point(3.0),
            Interval::point(6.0)
        );
        assert!((Interval::point(0.5) + Interval::point(0.25)).is_point());
    }

    #[test]
    fn inexact_sum_is_widened() {
        let s = Interval::point(0.1) + Interval::point(0.2);
        assert!(!s.is_point());
        assert!(s.width() <= 1e-16);
    }

    #[test]
    fn division_by_interval_containing_zero_is_refused() {
        assert!(Interval::ONE
            .checked_div(&Interval::new(-1.0, 1.0))
            .is_none());
        assert!(Interval::ONE.checked_div(&Interval::ZERO).is_none());
        let q = Interval::ONE.checked_div(&Interval::point(3.0)).unwrap();
        assert!(q.contains(1.0 / 3.0) && !q.is_point());
    }

    #[test]
    fn neg_xlogx_covers_peak() {
        let r = Interval::new(0.2, 0.5).neg_xlogx();
        assert!(r.contains(std::f64::consts::E.recip()));
        assert_eq!(Interval::ONE.neg_xlogx(), Interval::ZERO);
    }

    #[test]
    fn root_inverts_power() {
        let x = Interval::point(7.0);
        let r = x.powi(5).root(5);
        assert!(r.contains(7.0));
        assert!(r.width() < 1e-13);
    }

    proptest! {
        // Exact rationals a/2^k and b/2^k let the test compare against
        // high-precision references computed in i128.
        #[test]
        fn sum_and_product_contain_exact(a in -1_000_000i64..1_000_000, b in -1_000_000i64..1_000_000, k in 0u32..40) {
            let scale = (1u64 << k) as f64;
            let (x, y) = (a as f64 / scale, b as f64 / scale);
            let s = Interval::point(x) + Interval::point(y);
            prop_assert!(s.contains(x + y));
            let p = Interval::point(x) * Interval::point(y);
            let exact = (a as i128) * (b as i128);
            prop_assert!(p.lo() * scale * scale <= exact as f64 + 1.0);
            prop_assert!(p.hi() * scale * scale >= exact as f64 - 1.0);
        }

        #[test]
        fn exp_ln_round_trip_contains(x in -30.0f64..30.0) {
            let e = Interval::point(x).exp();
            let back = e.ln().unwrap();
            prop_assert!(back.contains(x));
        }

        #[test]
        fn refinement_is_monotone(lo in -10.0f64..10.0, w in 0.0f64..5.0, t in 0.0f64..1.0) {
            let outer = Interval::new(lo, lo + w);
            let inner_lo = lo + t * w * 0.5;
            let inner = Interval::new(inner_lo, inner_lo + w * 0.25);
            prop_assert!(outer.exp().contains_interval(&inner.exp()));
            prop_assert!((outer + outer).contains_interval(&(inner + inner)));
        }
    }
}
