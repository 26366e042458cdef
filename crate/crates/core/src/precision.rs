//! Extended-precision numerics.
//!
//! Two tiers: [`Dd`], an unevaluated sum of two doubles (about 106 bits of
//! significand) used for long accumulations, and [`Hp`], a thin context
//! around `astro_float` used for transcendental evaluation at a few hundred
//! bits.

use astro_float::{BigFloat, Consts, RoundingMode, Sign};
use num_bigint::{BigInt, BigUint, Sign as BigSign};
use num_traits::{One, ToPrimitive, Zero};
use std::ops::{Add, Mul, Neg, Sub};

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    let e = (a - (s - bb)) + (b - bb);
    (s, e)
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

/// Double-double number `hi + lo` with `|lo| <= ulp(hi)/2`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Dd {
    pub hi: f64,
    pub lo: f64,
}

impl Dd {
    pub const ZERO: Dd = Dd { hi: 0.0, lo: 0.0 };

    pub fn new(hi: f64, lo: f64) -> Dd {
        let (hi, lo) = quick_two_sum(hi, lo);
        Dd { hi, lo }
    }

    pub fn from_f64(x: f64) -> Dd {
        Dd { hi: x, lo: 0.0 }
    }

    /// `1/n` to double-double accuracy.
    pub fn recip_u64(n: u64) -> Dd {
        Dd::from_f64(1.0).div_f64(n as f64)
    }

    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    pub fn add_f64(self, b: f64) -> Dd {
        let (s, e) = two_sum(self.hi, b);
        Dd::new(s, e + self.lo)
    }

    pub fn mul_f64(self, b: f64) -> Dd {
        let (p, e) = two_prod(self.hi, b);
        Dd::new(p, e + self.lo * b)
    }

    pub fn div_f64(self, b: f64) -> Dd {
        let q1 = self.hi / b;
        let r = self - Dd::from_f64(b).mul_f64(q1);
        let q2 = r.hi / b;
        let r = r - Dd::from_f64(b).mul_f64(q2);
        let q3 = r.hi / b;
        Dd::new(q1, q2).add_f64(q3)
    }

    pub fn div(self, b: Dd) -> Dd {
        let q1 = self.hi / b.hi;
        let r = self - b * Dd::from_f64(q1);
        let q2 = r.hi / b.hi;
        let r = r - b * Dd::from_f64(q2);
        let q3 = r.hi / b.hi;
        Dd::new(q1, q2).add_f64(q3)
    }

    pub fn abs(self) -> Dd {
        if self.hi < 0.0 {
            -self
        } else {
            self
        }
    }

    pub fn sqrt(self) -> Dd {
        if self.hi <= 0.0 {
            return Dd::ZERO;
        }
        let x = self.hi.sqrt();
        let xx = Dd::from_f64(x) * Dd::from_f64(x);
        Dd::from_f64(x).add_f64((self - xx).hi / (2.0 * x))
    }
}

impl Add for Dd {
    type Output = Dd;
    fn add(self, b: Dd) -> Dd {
        let (s, e) = two_sum(self.hi, b.hi);
        let (t, f) = two_sum(self.lo, b.lo);
        let (s, e) = quick_two_sum(s, e + t);
        Dd::new(s, e + f)
    }
}

impl Sub for Dd {
    type Output = Dd;
    fn sub(self, b: Dd) -> Dd {
        self + (-b)
    }
}

impl Neg for Dd {
    type Output = Dd;
    fn neg(self) -> Dd {
        Dd { hi: -self.hi, lo: -self.lo }
    }
}

impl Mul for Dd {
    type Output = Dd;
    fn mul(self, b: Dd) -> Dd {
        let (p, e) = two_prod(self.hi, b.hi);
        Dd::new(p, e + (self.hi * b.lo + self.lo * b.hi))
    }
}

/// `sqrt(3)/2` as a double-double.
pub fn half_sqrt3() -> Dd {
    Dd::from_f64(3.0).sqrt().mul_f64(0.5)
}

/// Working context for `astro_float` computations at a fixed precision.
pub struct Hp {
    pub p: usize,
    pub rm: RoundingMode,
    pub cc: Consts,
}

impl Hp {
    pub fn new(bits: usize) -> Hp {
        Hp {
            p: bits,
            rm: RoundingMode::ToEven,
            cc: Consts::new().expect("astro-float constants cache"),
        }
    }

    pub fn zero(&self) -> BigFloat {
        BigFloat::from_u64(0, self.p)
    }

    pub fn int(&self, n: i64) -> BigFloat {
        BigFloat::from_i64(n, self.p)
    }

    pub fn f64(&self, x: f64) -> BigFloat {
        BigFloat::from_f64(x, self.p)
    }

    pub fn bigint(&self, n: &BigInt) -> BigFloat {
        let (sign, digits) = n.to_u64_digits();
        let two64 = BigFloat::from_u64(1 << 32, self.p).mul(&BigFloat::from_u64(1 << 32, self.p), self.p, self.rm);
        let mut acc = self.zero();
        for d in digits.iter().rev() {
            acc = acc.mul(&two64, self.p, self.rm).add(&BigFloat::from_u64(*d, self.p), self.p, self.rm);
        }
        if sign == BigSign::Minus {
            acc.neg()
        } else {
            acc
        }
    }

    pub fn add(&self, a: &BigFloat, b: &BigFloat) -> BigFloat {
        a.add(b, self.p, self.rm)
    }
    pub fn sub(&self, a: &BigFloat, b: &BigFloat) -> BigFloat {
        a.sub(b, self.p, self.rm)
    }
    pub fn mul(&self, a: &BigFloat, b: &BigFloat) -> BigFloat {
        a.mul(b, self.p, self.rm)
    }
    pub fn div(&self, a: &BigFloat, b: &BigFloat) -> BigFloat {
        a.div(b, self.p, self.rm)
    }
    pub fn sqrt(&self, a: &BigFloat) -> BigFloat {
        a.sqrt(self.p, self.rm)
    }
    pub fn ln(&mut self, a: &BigFloat) -> BigFloat {
        a.ln(self.p, self.rm, &mut self.cc)
    }
    pub fn exp(&mut self, a: &BigFloat) -> BigFloat {
        a.exp(self.p, self.rm, &mut self.cc)
    }
    pub fn sin(&mut self, a: &BigFloat) -> BigFloat {
        a.sin(self.p, self.rm, &mut self.cc)
    }
    pub fn cos(&mut self, a: &BigFloat) -> BigFloat {
        a.cos(self.p, self.rm, &mut self.cc)
    }
    pub fn pi(&mut self) -> BigFloat {
        self.cc.pi(self.p, self.rm)
    }
}

/// Nearest double to `x` (within one ulp).
pub fn bf_to_f64(x: &BigFloat) -> f64 {
    bf_to_dd(x).to_f64()
}

/// Double-double approximation of `x` (relative error about 2^-116).
pub fn bf_to_dd(x: &BigFloat) -> Dd {
    let Some((m, _, sign, e, _)) = x.as_raw_parts() else {
        return Dd::from_f64(f64::NAN);
    };
    if m.is_empty() || x.is_zero() {
        return Dd::ZERO;
    }
    let n = m.len();
    let top = m[n - 1];
    let next = if n >= 2 { m[n - 2] } else { 0 };
    let hi_f = top as f64;
    // top - hi_f as an exact signed difference
    let diff = top as i128 - hi_f as u128 as i128;
    let lo_f = diff as f64 + next as f64 / 18446744073709551616.0;
    let scale = e - 64;
    let mut d = Dd::new(ldexp(hi_f, scale), ldexp(lo_f, scale));
    if sign == Sign::Neg {
        d = -d;
    }
    d
}

/// Nearest integer to `x` and the signed distance `x − round(x)`.
pub fn bf_round(x: &BigFloat) -> (BigInt, f64) {
    let Some((m, _, sign, e, _)) = x.as_raw_parts() else {
        return (BigInt::zero(), f64::NAN);
    };
    if x.is_zero() || m.is_empty() {
        return (BigInt::zero(), 0.0);
    }
    let mut mag = BigUint::zero();
    for w in m.iter().rev() {
        mag = (mag << 64u32) | BigUint::from(*w);
    }
    let shift = e as i64 - 64 * m.len() as i64;
    let (q, frac) = if shift >= 0 {
        (mag << (shift as u64), 0.0)
    } else if shift < -1000 {
        (BigUint::zero(), bf_to_f64(&x.abs()))
    } else {
        let s = (-shift) as u64;
        let q = (&mag + (BigUint::one() << (s - 1))) >> s;
        let r = BigInt::from(mag) - BigInt::from(&q << s);
        (q, ldexp(r.to_f64().unwrap_or(f64::NAN), shift as i32))
    };
    let q = BigInt::from(q);
    if sign == Sign::Neg {
        (-q, -frac)
    } else {
        (q, frac)
    }
}

/// `⌊x⌋`.
pub fn bf_floor(x: &BigFloat) -> BigInt {
    let (n, frac) = bf_round(x);
    if frac < 0.0 {
        n - 1
    } else {
        n
    }
}

fn ldexp(x: f64, e: i32) -> f64 {
    if e > 1000 || e < -1000 {
        return x * 2f64.powi(e / 2) * 2f64.powi(e - e / 2);
    }
    x * 2f64.powi(e)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dd_reciprocal_is_accurate() {
        let r = Dd::recip_u64(7);
        let back = r.mul_f64(7.0) - Dd::from_f64(1.0);
        assert!(back.to_f64().abs() < 1e-31);
    }

    #[test]
    fn dd_sqrt3() {
        let h = half_sqrt3();
        let sq = h * h - Dd::from_f64(0.75);
        assert!(sq.to_f64().abs() < 1e-31);
    }

    #[test]
    fn bigfloat_round_trip() {
        let mut hp = Hp::new(192);
        let pi = hp.pi();
        let d = bf_to_dd(&pi);
        assert_eq!(d.hi, std::f64::consts::PI);
        // pi - hi to double precision
        assert!((d.lo - 1.2246467991473532e-16).abs() < 1e-30);
        let x = hp.f64(-5.5);
        assert_eq!(bf_to_f64(&x), -5.5);
        let big = hp.bigint(&BigInt::parse_bytes(b"123456789012345678901234567890", 10).unwrap());
        assert!((bf_to_f64(&big) - 1.2345678901234568e29).abs() < 1e14);
        assert_eq!(bf_to_f64(&hp.zero()), 0.0);
    }
}
