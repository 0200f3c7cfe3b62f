//! Minimal double-double arithmetic (about 106 significant bits).
//!
//! Only what the hyperbolic first integrals need: add, sub, mul, div and
//! exp. The hyperbolic integrals combine terms of size cosh²(βx) that cancel
//! down to O(1), so plain f64 loses roughly 2|βx|/ln 10 digits there.

use std::ops::{Add, Div, Mul, Neg, Sub};

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Dd {
    pub hi: f64,
    pub lo: f64,
}

const LN2: Dd = Dd { hi: std::f64::consts::LN_2, lo: 2.3190468138462996e-17 };

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

impl Dd {
    pub const ONE: Dd = Dd { hi: 1.0, lo: 0.0 };

    pub fn from_f64(v: f64) -> Dd {
        Dd { hi: v, lo: 0.0 }
    }

    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    /// Multiplication by a power of two; exact.
    fn ldexp(self, k: i32) -> Dd {
        let s = 2f64.powi(k);
        Dd { hi: self.hi * s, lo: self.lo * s }
    }

    pub fn recip(self) -> Dd {
        Dd::ONE / self
    }

    pub fn exp(self) -> Dd {
        if self.hi > 709.78 {
            return Dd::from_f64(f64::INFINITY);
        }
        if self.hi < -745.2 {
            return Dd::from_f64(0.0);
        }
        const SQUARINGS: i32 = 10;
        let k = (self.hi / LN2.hi).round();
        let r = (self - LN2 * k).ldexp(-SQUARINGS);

        // e^r - 1 by Taylor series; |r| < 4e-4 so 12 terms reach 1e-40.
        let mut term = r;
        let mut sum = r;
        for n in 2..=12 {
            term = term * r / Dd::from_f64(n as f64);
            sum = sum + term;
        }
        // (1 + s)^2 - 1 = s·(s + 2), keeping the small part explicit.
        for _ in 0..SQUARINGS {
            sum = sum * (sum + Dd::from_f64(2.0));
        }
        (sum + Dd::ONE).ldexp(k as i32)
    }
}

impl Add for Dd {
    type Output = Dd;
    fn add(self, o: Dd) -> Dd {
        let (s, e) = two_sum(self.hi, o.hi);
        let (t, f) = two_sum(self.lo, o.lo);
        let (s, e) = quick_two_sum(s, e + t);
        let (hi, lo) = quick_two_sum(s, e + f);
        Dd { hi, lo }
    }
}

impl Neg for Dd {
    type Output = Dd;
    fn neg(self) -> Dd {
        Dd { hi: -self.hi, lo: -self.lo }
    }
}

impl Sub for Dd {
    type Output = Dd;
    fn sub(self, o: Dd) -> Dd {
        self + (-o)
    }
}

impl Mul for Dd {
    type Output = Dd;
    fn mul(self, o: Dd) -> Dd {
        let (p, e) = two_prod(self.hi, o.hi);
        let e = e + (self.hi * o.lo + self.lo * o.hi);
        let (hi, lo) = quick_two_sum(p, e);
        Dd { hi, lo }
    }
}

impl Mul<f64> for Dd {
    type Output = Dd;
    fn mul(self, o: f64) -> Dd {
        self * Dd::from_f64(o)
    }
}

impl Div for Dd {
    type Output = Dd;
    fn div(self, o: Dd) -> Dd {
        let q1 = self.hi / o.hi;
        let r = self - o * q1;
        let q2 = r.hi / o.hi;
        let r = r - o * q2;
        let q3 = r.hi / o.hi;
        let (hi, lo) = quick_two_sum(q1, q2);
        Dd { hi, lo } + Dd::from_f64(q3)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    // Reference splits computed with 50-digit arithmetic.
    const E: Dd = Dd { hi: std::f64::consts::E, lo: 1.4456468917292502e-16 };
    const EXP_10_5: Dd = Dd { hi: 36315.502674246636, lo: 1.577797006387782e-12 };
    const EXP_M7_25: Dd = Dd { hi: 0.000710174388842549, lo: 3.546078199295509e-20 };

    fn rel_err(got: Dd, want: Dd) -> f64 {
        ((got - want).to_f64() / want.to_f64()).abs()
    }

    #[test]
    fn exp_matches_reference() {
        assert!(rel_err(Dd::ONE.exp(), E) < 1e-30);
        assert!(rel_err(Dd::from_f64(10.5).exp(), EXP_10_5) < 1e-30);
        assert!(rel_err(Dd::from_f64(-7.25).exp(), EXP_M7_25) < 1e-30);
    }

    #[test]
    fn exp_of_zero_and_limits() {
        assert_eq!(Dd::from_f64(0.0).exp(), Dd::ONE);
        assert!(Dd::from_f64(800.0).exp().hi.is_infinite());
        assert_eq!(Dd::from_f64(-800.0).exp().hi, 0.0);
    }

    #[test]
    fn exp_times_reciprocal_is_one() {
        for x in [-20.0, -3.3, 0.1, 7.0, 28.0] {
            let e = Dd::from_f64(x).exp();
            let one = e * e.recip();
            assert!((one - Dd::ONE).to_f64().abs() < 1e-30, "x = {x}");
        }
    }

    #[test]
    fn division_is_double_double_accurate() {
        let third = Dd::ONE / Dd::from_f64(3.0);
        let back = third * Dd::from_f64(3.0);
        assert!((back - Dd::ONE).to_f64().abs() < 1e-31);
    }
}
