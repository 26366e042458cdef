//! `L(1, χ)` for cubic characters and the residue `ζ_F*(1) = |L(1, χ_F)|²`.
//!
//! Two independent evaluations:
//! - the partial sum `Σ_{n ≤ T} χ(n)/n`, accumulated in double-double;
//! - the finite formula for even primitive χ,
//!   `L(1, χ) = −(τ(χ)/f) Σ_a χ̄(a) log|1 − ζ_f^a|`, where the logarithms
//!   are taken of class-wise products of `2 sin(πa/f)` formed exactly in
//!   double-double and converted once per class.

use crate::cubicfield::{CubicCharacter, CyclicCubicField};
use crate::error::{bail, Result};
use crate::precision::{bf_to_dd, half_sqrt3, Dd, Hp};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LMethod {
    TruncatedSum,
    FiniteGaussFormula,
}

/// A complex L-value with about 106 bits of working precision.
#[derive(Clone, Copy, Debug)]
pub struct LValue {
    pub re: Dd,
    pub im: Dd,
    pub method: LMethod,
    /// Truncation error bound (0 for the finite formula, which is exact up
    /// to rounding).
    pub error_bound: f64,
}

impl LValue {
    pub fn conj(&self) -> LValue {
        LValue { im: -self.im, ..*self }
    }

    pub fn abs2(&self) -> Dd {
        self.re * self.re + self.im * self.im
    }

    pub fn to_f64(&self) -> (f64, f64) {
        (self.re.to_f64(), self.im.to_f64())
    }

    pub fn distance(&self, o: &LValue) -> f64 {
        let dr = (self.re - o.re).to_f64();
        let di = (self.im - o.im).to_f64();
        dr.hypot(di)
    }
}

/// `√q·log(q)/T`, the truncation error bound with implied constant 1.
pub fn truncated_error_bound(q: u64, t: u64) -> f64 {
    let qf = q as f64;
    qf.sqrt() * qf.ln() / t as f64
}

/// `c_0 + c_1 ω + c_2 ω²` as (re, im).
fn combine(c: &[Dd; 3]) -> (Dd, Dd) {
    let re = c[0] - (c[1] + c[2]).mul_f64(0.5);
    let im = (c[1] - c[2]) * half_sqrt3();
    (re, im)
}

/// `Σ_{n ≤ T} χ(n)/n`.
pub fn l_value_truncated(chi: &CubicCharacter, t: u64) -> Result<LValue> {
    let q = chi.conductor();
    if q < 2 {
        bail!(InvalidInput, "principal character");
    }
    if t < q {
        bail!(InvalidInput, "truncation length {t} is below the conductor {q}");
    }
    let table = chi.table();
    let mut c = [Dd::ZERO; 3];
    // reciprocals in f64 blocks are not accurate enough; each term is a
    // correctly rounded double-double reciprocal
    let mut r = 1u64;
    for n in 1..=t {
        if let Some(k) = table[r as usize] {
            c[k as usize] = c[k as usize] + Dd::recip_u64(n);
        }
        r += 1;
        if r == q {
            r = 0;
        }
    }
    let (re, im) = combine(&c);
    Ok(LValue { re, im, method: LMethod::TruncatedSum, error_bound: truncated_error_bound(q, t) })
}

/// Product of positive doubles kept as mantissa·2^exp.
#[derive(Clone, Copy)]
struct ScaledDd {
    m: Dd,
    e: i64,
}

impl ScaledDd {
    fn one() -> Self {
        ScaledDd { m: Dd::from_f64(1.0), e: 0 }
    }

    fn mul(&mut self, x: Dd) {
        self.m = self.m * x;
        let bits = self.m.hi.to_bits();
        let ex = ((bits >> 52) & 0x7ff) as i64 - 1023;
        if !(-200..=200).contains(&ex) {
            let s = 2f64.powi(-ex as i32);
            self.m = Dd { hi: self.m.hi * s, lo: self.m.lo * s };
            self.e += ex;
        }
    }

    fn ln(&self, hp: &mut Hp) -> Dd {
        let m = hp.add(&hp.f64(self.m.hi), &hp.f64(self.m.lo));
        let lm = hp.ln(&m);
        let two = hp.int(2);
        let l2 = hp.ln(&two);
        bf_to_dd(&hp.add(&lm, &hp.mul(&l2, &hp.int(self.e))))
    }
}

/// Class sums for an even character: `S_k = Σ_{χ(a)=ω^k} log|1 − ζ_f^a|` and
/// Gaussian periods `G_k = Σ_{χ(a)=ω^k} cos(2πa/f)`, over `0 < a < f`.
pub fn class_sums(chi: &CubicCharacter) -> Result<([Dd; 3], [Dd; 3])> {
    let f = chi.conductor();
    let table = chi.table();
    if table[(f - 1) as usize] != Some(0) {
        bail!(InvalidInput, "character mod {f} is odd");
    }
    let mut hp = Hp::new(192);
    let pi = hp.pi();
    let ang = hp.div(&pi, &hp.int(f as i64));
    let step_re = bf_to_dd(&hp.cos(&ang));
    let step_im = bf_to_dd(&hp.sin(&ang));
    // z = e^{iπa/f}; 2 sin(πa/f) = 2 Im z, cos(2πa/f) = Re(z)² − Im(z)²
    let (mut zr, mut zi) = (Dd::from_f64(1.0), Dd::ZERO);
    let mut prods = [ScaledDd::one(); 3];
    let mut periods = [Dd::ZERO; 3];
    for a in 1..=(f - 1) / 2 {
        let nr = zr * step_re - zi * step_im;
        let ni = zr * step_im + zi * step_re;
        zr = nr;
        zi = ni;
        if let Some(k) = table[a as usize] {
            prods[k as usize].mul(zi.mul_f64(2.0));
            periods[k as usize] = periods[k as usize] + (zr * zr - zi * zi);
        }
    }
    let mut s = [Dd::ZERO; 3];
    for k in 0..3 {
        // a and f − a lie in the same class
        s[k] = prods[k].ln(&mut hp).mul_f64(2.0);
        periods[k] = periods[k].mul_f64(2.0);
    }
    Ok((s, periods))
}

/// `ζ_F*(1) = (1/f)|S_0 + ω̄ S_1 + ω S_2|²` from the class sums.
pub fn residue_from_class_sums(s: &[Dd; 3], f: u64) -> Dd {
    let sq = s[0] * s[0] + s[1] * s[1] + s[2] * s[2] - s[0] * s[1] - s[1] * s[2] - s[0] * s[2];
    sq.div_f64(f as f64)
}

/// `L(1, χ)` by the finite formula for even primitive characters.
pub fn l_value_finite(chi: &CubicCharacter) -> Result<LValue> {
    let f = chi.conductor();
    let (s, g) = class_sums(chi)?;
    // Σ χ̄(a) log|1 − ζ^a| = S_0 + ω² S_1 + ω S_2
    let (sr, si) = combine(&[s[0], s[2], s[1]]);
    let (tr, ti) = combine(&g);
    let re = -(tr * sr - ti * si);
    let im = -(tr * si + ti * sr);
    Ok(LValue { re: re.div_f64(f as f64), im: im.div_f64(f as f64), method: LMethod::FiniteGaussFormula, error_bound: 0.0 })
}

/// Residue of the Dedekind zeta function of a cyclic cubic field, with the
/// truncated-sum cross-check.
#[derive(Clone, Copy, Debug)]
pub struct ZetaResidue {
    pub conductor: u64,
    pub value: Dd,
    /// `|L(1,χ)|²` from the partial sum of length `truncation`.
    pub truncated: f64,
    /// Distance between the two L-values.
    pub residual: f64,
    pub bound: f64,
    pub truncation: u64,
}

/// Default cross-check length: a fixed multiple of the conductor.
pub fn default_truncation(f: u64) -> u64 {
    (32 * f).max(4096)
}

pub fn zeta_residue(field: &CyclicCubicField) -> Result<ZetaResidue> {
    zeta_residue_with(field, default_truncation(field.conductor()))
}

/// Finite-formula residue, failing if the partial sum of length `t`
/// disagrees by more than ten times the truncation bound.
pub fn zeta_residue_with(field: &CyclicCubicField, t: u64) -> Result<ZetaResidue> {
    let chi = field.character();
    let f = chi.conductor();
    let (s, _) = class_sums(chi)?;
    let value = residue_from_class_sums(&s, f);
    let fin = l_value_finite(chi)?;
    let tr = l_value_truncated(chi, t)?;
    let residual = fin.distance(&tr);
    let bound = tr.error_bound;
    if !(residual <= 10.0 * bound) {
        bail!(Precision, "conductor {f}: L-value methods differ by {residual:e}, bound {bound:e}");
    }
    if !(value.to_f64() > 0.0) {
        bail!(Consistency, "conductor {f}: non-positive residue {}", value.to_f64());
    }
    Ok(ZetaResidue { conductor: f, value, truncated: tr.abs2().to_f64(), residual, bound, truncation: t })
}

/// Residue without the cross-check (finite formula only).
pub fn zeta_residue_fast(field: &CyclicCubicField) -> Result<f64> {
    let chi = field.character();
    let (s, _) = class_sums(chi)?;
    Ok(residue_from_class_sums(&s, chi.conductor()).to_f64())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cubicfield::enumerate_fields;

    #[test]
    fn conjugate_characters_give_conjugate_values() {
        let f = CyclicCubicField::of_prime_conductor(7).unwrap();
        let chi = f.character();
        let a = l_value_truncated(chi, 10_000).unwrap();
        let b = l_value_truncated(&chi.conj(), 10_000).unwrap();
        assert_eq!(a.re, b.re);
        assert_eq!(a.im, -b.im);
        let fa = l_value_finite(chi).unwrap();
        let fb = l_value_finite(&chi.conj()).unwrap();
        assert!(fa.distance(&fb.conj()) < 1e-28);
    }

    #[test]
    fn truncation_lengths_agree_within_bound() {
        let f = CyclicCubicField::of_prime_conductor(7).unwrap();
        let a = l_value_truncated(f.character(), 1_000_000).unwrap();
        let b = l_value_truncated(f.character(), 10_000_000).unwrap();
        assert!(a.distance(&b) <= a.error_bound);
        let fin = l_value_finite(f.character()).unwrap();
        assert!(fin.distance(&b) <= b.error_bound);
    }

    #[test]
    fn conductor_7_matches_cyclotomic_unit_regulator() {
        // θ = 2cos(2π/7) and its conjugate 2cos(4π/7) are fundamental units
        // (h = 1 for prime conductor 7), so ζ* = 4R/7.
        let c = |k: f64| 2.0 * (2.0 * std::f64::consts::PI * k / 7.0).cos();
        let (t1, t2, t3) = (c(1.0), c(2.0), c(3.0));
        // embeddings of θ: (t1, t2, t3 ordered by σ: 1 → 2 → 4 ≡ 3)
        let r = (t1.abs().ln() * t3.abs().ln() - t2.abs().ln() * t2.abs().ln()).abs();
        let f = CyclicCubicField::of_prime_conductor(7).unwrap();
        let z = zeta_residue(&f).unwrap();
        assert!((z.value.to_f64() - 4.0 * r / 7.0).abs() < 1e-12, "{} vs {}", z.value.to_f64(), 4.0 * r / 7.0);
    }

    #[test]
    fn dual_methods_agree_for_small_conductors() {
        for f in enumerate_fields(1e6, false, 1).unwrap() {
            let z = zeta_residue_with(&f, 1_000_000).unwrap();
            assert!(z.residual <= z.bound, "f = {}: {} > {}", f.conductor(), z.residual, z.bound);
            assert!(z.value.to_f64() > 0.0);
            let fc = f.conductor() as f64;
            if f.conductor() >= 200 {
                let r = (z.value.to_f64() * fc / 4.0).ln() / fc.ln();
                assert!((0.5..=1.5).contains(&r), "f = {}: {r}", f.conductor());
            }
        }
    }

    #[test]
    fn conductor_9_matches_long_partial_sum() {
        let f = CyclicCubicField::of_prime_conductor(9).unwrap();
        let fin = l_value_finite(f.character()).unwrap();
        let tr = l_value_truncated(f.character(), 10_000_000).unwrap();
        assert!(fin.distance(&tr) <= tr.error_bound);
        let z = zeta_residue(&f).unwrap();
        assert!((z.value - fin.abs2()).to_f64().abs() < 1e-25);
    }
}
