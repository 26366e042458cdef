//! Arithmetic in the Eisenstein integers Z[ω], ω² + ω + 1 = 0, and the cubic
//! residue symbol.

use crate::arith::{factor, inv_mod, is_prime, pow_mod};
use crate::error::{bail, Result};
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::fmt;

/// `a + bω`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EisensteinInt {
    pub a: BigInt,
    pub b: BigInt,
}

impl EisensteinInt {
    pub fn new(a: impl Into<BigInt>, b: impl Into<BigInt>) -> Self {
        EisensteinInt { a: a.into(), b: b.into() }
    }

    pub fn zero() -> Self {
        Self::new(0, 0)
    }

    pub fn one() -> Self {
        Self::new(1, 0)
    }

    pub fn omega() -> Self {
        Self::new(0, 1)
    }

    pub fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }

    /// `a² − ab + b²`.
    pub fn norm(&self) -> BigInt {
        &self.a * &self.a - &self.a * &self.b + &self.b * &self.b
    }

    /// Complex conjugate: ω ↦ ω² = −1 − ω.
    pub fn conj(&self) -> Self {
        EisensteinInt { a: &self.a - &self.b, b: -&self.b }
    }

    pub fn add(&self, o: &Self) -> Self {
        EisensteinInt { a: &self.a + &o.a, b: &self.b + &o.b }
    }

    pub fn sub(&self, o: &Self) -> Self {
        EisensteinInt { a: &self.a - &o.a, b: &self.b - &o.b }
    }

    pub fn neg(&self) -> Self {
        EisensteinInt { a: -&self.a, b: -&self.b }
    }

    pub fn mul(&self, o: &Self) -> Self {
        let bd = &self.b * &o.b;
        EisensteinInt {
            a: &self.a * &o.a - &bd,
            b: &self.a * &o.b + &self.b * &o.a - bd,
        }
    }

    pub fn scale(&self, k: &BigInt) -> Self {
        EisensteinInt { a: &self.a * k, b: &self.b * k }
    }

    /// The six units, starting with 1 and rotating by −ω² (argument +π/3).
    pub fn units() -> [EisensteinInt; 6] {
        [
            Self::new(1, 0),
            Self::new(1, 1),
            Self::new(0, 1),
            Self::new(-1, 0),
            Self::new(-1, -1),
            Self::new(0, -1),
        ]
    }

    /// Associate with argument in [0, π/3), i.e. `0 <= b < a`.
    pub fn canonical(&self) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        for u in Self::units() {
            let x = self.mul(&u);
            if !x.b.is_negative() && x.b < x.a {
                return x;
            }
        }
        unreachable!("every nonzero element has an associate in the fundamental sector")
    }

    /// Euclidean division: `self = q·d + r` with `N(r) < N(d)`.
    pub fn div_rem(&self, d: &Self) -> (Self, Self) {
        let n = d.norm();
        let num = self.mul(&d.conj());
        let two_n: BigInt = &n * 2;
        let round = |x: &BigInt| -> BigInt { (x * 2i32 + &n).div_floor(&two_n) };
        let q = EisensteinInt { a: round(&num.a), b: round(&num.b) };
        let r = self.sub(&q.mul(d));
        (q, r)
    }

    /// Exact quotient if `d` divides `self`.
    pub fn div_exact(&self, d: &Self) -> Option<Self> {
        let n = d.norm();
        let num = self.mul(&d.conj());
        if (&num.a % &n).is_zero() && (&num.b % &n).is_zero() {
            Some(EisensteinInt { a: num.a / &n, b: num.b / &n })
        } else {
            None
        }
    }

    pub fn divides(&self, x: &Self) -> bool {
        x.div_exact(self).is_some()
    }
}

impl fmt::Display for EisensteinInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.b.is_zero() {
            write!(f, "{}", self.a)
        } else if self.a.is_zero() {
            write!(f, "{}ω", self.b)
        } else if self.b.is_negative() {
            write!(f, "{} - {}ω", self.a, -&self.b)
        } else {
            write!(f, "{} + {}ω", self.a, self.b)
        }
    }
}

/// A nonzero ideal of Z[ω], stored by its canonical generator.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EisensteinIdeal {
    generator: EisensteinInt,
}

impl EisensteinIdeal {
    pub fn new(g: &EisensteinInt) -> Result<Self> {
        if g.is_zero() {
            bail!(InvalidInput, "the zero ideal is not supported");
        }
        Ok(EisensteinIdeal { generator: g.canonical() })
    }

    pub fn unit() -> Self {
        EisensteinIdeal { generator: EisensteinInt::one() }
    }

    pub fn generator(&self) -> &EisensteinInt {
        &self.generator
    }

    pub fn norm(&self) -> BigInt {
        self.generator.norm()
    }

    pub fn conj(&self) -> Self {
        EisensteinIdeal { generator: self.generator.conj().canonical() }
    }

    pub fn mul(&self, o: &Self) -> Self {
        EisensteinIdeal { generator: self.generator.mul(&o.generator).canonical() }
    }

    pub fn is_unit(&self) -> bool {
        self.generator == EisensteinInt::one()
    }

    /// Prime ideal factorization as (canonical prime generator, exponent).
    pub fn factor(&self) -> Result<Vec<(EisensteinInt, u32)>> {
        let n = self.norm().to_u64().ok_or_else(|| {
            crate::error::Error::LimitExceeded(format!("norm of {} exceeds 64 bits", self.generator))
        })?;
        let mut rest = self.generator.clone();
        let mut out = Vec::new();
        for (p, _) in factor(n) {
            let primes: Vec<EisensteinInt> = match factor_rational_prime(p)? {
                PrimeSplitting::Split(pi, pib) => vec![pi, pib],
                PrimeSplitting::Inert => vec![EisensteinInt::new(p as i64, 0)],
                PrimeSplitting::Ramified(pi) => vec![pi],
            };
            for pi in primes {
                let mut e = 0;
                while let Some(q) = rest.div_exact(&pi) {
                    rest = q;
                    e += 1;
                }
                if e > 0 {
                    out.push((pi, e));
                }
            }
        }
        if !rest.norm().is_one() {
            bail!(Consistency, "factorization of {} left cofactor {}", self.generator, rest);
        }
        Ok(out)
    }
}

impl fmt::Display for EisensteinIdeal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({})", self.generator)
    }
}

/// How a rational prime decomposes in Z[ω].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PrimeSplitting {
    /// `p = π·π̄` with the canonical generators of the two primes, the one
    /// with lexicographically smaller `(a, b)` first.
    Split(EisensteinInt, EisensteinInt),
    Inert,
    Ramified(EisensteinInt),
}

/// Decomposition of the rational prime `p`, found by searching the norm form
/// `a² − ab + b² = p`.
pub fn factor_rational_prime(p: u64) -> Result<PrimeSplitting> {
    if !is_prime(p) {
        bail!(InvalidInput, "{p} is not prime");
    }
    if p == 3 {
        return Ok(PrimeSplitting::Ramified(EisensteinInt::new(1, -1).canonical()));
    }
    if p % 3 == 2 {
        return Ok(PrimeSplitting::Inert);
    }
    // a = (b ± sqrt(4p − 3b²))/2 for b with 3b² <= 4p
    let p128 = p as i128;
    let mut b: i128 = 1;
    while 3 * b * b <= 4 * p128 {
        let disc = 4 * p128 - 3 * b * b;
        let s = crate::arith::isqrt_u128(disc as u128) as i128;
        if s * s == disc && (b + s) % 2 == 0 {
            let a = (b + s) / 2;
            let pi = EisensteinInt::new(a, b).canonical();
            let pib = pi.conj().canonical();
            return Ok(if pi <= pib {
                PrimeSplitting::Split(pi, pib)
            } else {
                PrimeSplitting::Split(pib, pi)
            });
        }
        b += 1;
    }
    bail!(Consistency, "norm-form search exhausted for split prime {p}")
}

/// Every ideal of norm `q`, without duplicates, sorted.
pub fn ideals_of_norm(q: u64) -> Result<Vec<EisensteinIdeal>> {
    if q == 0 {
        bail!(InvalidInput, "norm must be positive");
    }
    let mut out = vec![EisensteinInt::one()];
    for (p, e) in factor(q) {
        let local: Vec<EisensteinInt> = match factor_rational_prime(p)? {
            PrimeSplitting::Ramified(pi) => vec![pow(&pi, e)],
            PrimeSplitting::Inert => {
                if e % 2 == 1 {
                    return Ok(Vec::new());
                }
                vec![EisensteinInt::new((p as i64).pow(e / 2), 0)]
            }
            PrimeSplitting::Split(pi, pib) => {
                (0..=e).map(|i| pow(&pi, i).mul(&pow(&pib, e - i))).collect()
            }
        };
        out = out.iter().flat_map(|x| local.iter().map(move |y| x.mul(y))).collect();
    }
    let mut ideals: Vec<EisensteinIdeal> =
        out.iter().map(|g| EisensteinIdeal { generator: g.canonical() }).collect();
    ideals.sort();
    ideals.dedup();
    Ok(ideals)
}

fn pow(x: &EisensteinInt, e: u32) -> EisensteinInt {
    let mut r = EisensteinInt::one();
    for _ in 0..e {
        r = r.mul(x);
    }
    r
}

/// A value of a cubic character: 0 or a cube root of unity ω^k.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CubicSymbol {
    Zero,
    /// ω^k with k in {0, 1, 2}.
    Root(u8),
}

impl CubicSymbol {
    pub const ONE: CubicSymbol = CubicSymbol::Root(0);
    pub const OMEGA: CubicSymbol = CubicSymbol::Root(1);
    pub const OMEGA2: CubicSymbol = CubicSymbol::Root(2);

    pub fn mul(self, o: CubicSymbol) -> CubicSymbol {
        match (self, o) {
            (CubicSymbol::Root(a), CubicSymbol::Root(b)) => CubicSymbol::Root((a + b) % 3),
            _ => CubicSymbol::Zero,
        }
    }

    pub fn pow(self, e: u32) -> CubicSymbol {
        match self {
            CubicSymbol::Root(a) => CubicSymbol::Root(((a as u32 * e) % 3) as u8),
            CubicSymbol::Zero if e == 0 => CubicSymbol::ONE,
            CubicSymbol::Zero => CubicSymbol::Zero,
        }
    }

    pub fn conj(self) -> CubicSymbol {
        match self {
            CubicSymbol::Root(a) => CubicSymbol::Root((3 - a) % 3),
            z => z,
        }
    }

    pub fn exponent(self) -> Option<u8> {
        match self {
            CubicSymbol::Root(a) => Some(a),
            CubicSymbol::Zero => None,
        }
    }

    /// Complex value.
    pub fn to_complex(self) -> (f64, f64) {
        match self {
            CubicSymbol::Zero => (0.0, 0.0),
            CubicSymbol::Root(0) => (1.0, 0.0),
            CubicSymbol::Root(1) => (-0.5, 0.75f64.sqrt()),
            CubicSymbol::Root(_) => (-0.5, -(0.75f64.sqrt())),
        }
    }
}

/// Residue of ω modulo a split prime `π = a + bω` of norm `p`: ω ≡ −a/b.
pub fn omega_mod_prime(pi: &EisensteinInt) -> Result<u64> {
    let p = pi.norm().to_u64().ok_or_else(|| crate::error::Error::LimitExceeded("prime norm exceeds 64 bits".into()))?;
    let a = pi.a.mod_floor(&BigInt::from(p)).to_i128().unwrap();
    let b = pi.b.mod_floor(&BigInt::from(p)).to_i128().unwrap();
    let Some(binv) = inv_mod(b, p as i128) else {
        bail!(InvalidInput, "{pi} is not a split prime of degree one");
    };
    Ok(((-a * binv).rem_euclid(p as i128)) as u64)
}

/// Reduce `x` modulo `m` in Z[ω] (Euclidean remainder).
fn reduce(x: &EisensteinInt, m: &EisensteinInt) -> EisensteinInt {
    x.div_rem(m).1
}

/// Symbol at a prime ideal by exponentiation in the residue field Z[ω]/π.
fn symbol_at_prime_generic(n: &BigInt, pi: &EisensteinInt) -> CubicSymbol {
    let np = pi.norm();
    let mut base = reduce(&EisensteinInt::new(n.clone(), 0), pi);
    if base.is_zero() {
        return CubicSymbol::Zero;
    }
    let mut e: BigInt = (&np - 1) / 3;
    let mut r = EisensteinInt::one();
    let two = BigInt::from(2);
    while !e.is_zero() {
        if e.is_odd() {
            r = reduce(&r.mul(&base), pi);
        }
        base = reduce(&base.mul(&base), pi);
        e /= &two;
    }
    let mut root = EisensteinInt::one();
    for k in 0..3u8 {
        if pi.divides(&r.sub(&root)) {
            return CubicSymbol::Root(k);
        }
        root = root.mul(&EisensteinInt::omega());
    }
    CubicSymbol::Zero
}

/// Symbol at a split prime of norm `p` using F_p arithmetic.
fn symbol_at_split_prime_fast(n: &BigInt, pi: &EisensteinInt, p: u64) -> Result<CubicSymbol> {
    let w = omega_mod_prime(pi)?;
    let r = n.mod_floor(&BigInt::from(p)).to_u64().unwrap();
    if r == 0 {
        return Ok(CubicSymbol::Zero);
    }
    let s = pow_mod(r, (p - 1) / 3, p);
    if s == 1 {
        Ok(CubicSymbol::ONE)
    } else if s == w {
        Ok(CubicSymbol::OMEGA)
    } else {
        Ok(CubicSymbol::OMEGA2)
    }
}

/// The cubic residue symbol `(n/I)_3`.
pub fn cubic_residue_symbol(n: &BigInt, ideal: &EisensteinIdeal) -> Result<CubicSymbol> {
    if (ideal.norm() % 3u32).is_zero() {
        bail!(InvalidInput, "ideal {ideal} has norm divisible by 3");
    }
    let mut acc = CubicSymbol::ONE;
    for (pi, e) in ideal.factor()? {
        let np = pi.norm();
        let s = match np.to_u64() {
            Some(p) if pi.b.is_positive() && is_prime(p) => symbol_at_split_prime_fast(n, &pi, p)?,
            _ => symbol_at_prime_generic(n, &pi),
        };
        acc = acc.mul(s.pow(e));
    }
    Ok(acc)
}

/// Same as [`cubic_residue_symbol`] but always through the residue-field
/// exponentiation path; used to cross-check the F_p fast path.
pub fn cubic_residue_symbol_generic(n: &BigInt, ideal: &EisensteinIdeal) -> Result<CubicSymbol> {
    if (ideal.norm() % 3u32).is_zero() {
        bail!(InvalidInput, "ideal {ideal} has norm divisible by 3");
    }
    let mut acc = CubicSymbol::ONE;
    for (pi, e) in ideal.factor()? {
        acc = acc.mul(symbol_at_prime_generic(n, &pi).pow(e));
    }
    Ok(acc)
}

/// Table of `n ↦ (n/I)_3` for `0 <= n < N(I)`, `I` of norm coprime to 3.
/// Entries are `Some(k)` for ω^k and `None` for 0.
pub fn character_table(ideal: &EisensteinIdeal) -> Result<Vec<Option<u8>>> {
    if (ideal.norm() % 3u32).is_zero() {
        bail!(InvalidInput, "ideal {ideal} has norm divisible by 3");
    }
    let q = ideal.norm().to_u64().ok_or_else(|| crate::error::Error::LimitExceeded("modulus too large".into()))?;
    let mut table: Vec<Option<u8>> = vec![Some(0); q as usize];
    for (pi, e) in ideal.factor()? {
        let p = pi.norm().to_u64().unwrap();
        if !is_prime(p) {
            // inert prime (p) of norm p²: (n/(p))_3 = 1 unless p | n
            let p0 = crate::arith::isqrt(p);
            for (n, t) in table.iter_mut().enumerate() {
                if n as u64 % p0 == 0 {
                    *t = None;
                }
            }
            continue;
        }
        let local = prime_character_table(&pi, p)?;
        for (n, t) in table.iter_mut().enumerate() {
            *t = match (*t, local[n % p as usize]) {
                (Some(a), Some(b)) => Some(((a as u32 + b as u32 * e) % 3) as u8),
                _ => None,
            };
        }
    }
    if q == 1 {
        table = vec![Some(0)];
    }
    Ok(table)
}

/// `n ↦ (n/π)_3` on residues mod `p = N(π)` via a primitive root.
pub fn prime_character_table(pi: &EisensteinInt, p: u64) -> Result<Vec<Option<u8>>> {
    let w = omega_mod_prime(pi)?;
    let g = crate::arith::primitive_root(p);
    let s = pow_mod(g, (p - 1) / 3, p);
    let k0: u8 = if s == w { 1 } else if s == crate::arith::mul_mod(w, w, p) { 2 } else {
        bail!(Consistency, "primitive root {g} mod {p} maps to no cube root of unity");
    };
    let mut t = vec![None; p as usize];
    let mut x = 1u64;
    for k in 0..(p - 1) {
        t[x as usize] = Some(((k % 3) as u8 * k0) % 3);
        x = crate::arith::mul_mod(x, g, p);
    }
    Ok(t)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ideal(a: i64, b: i64) -> EisensteinIdeal {
        EisensteinIdeal::new(&EisensteinInt::new(a, b)).unwrap()
    }

    #[test]
    fn splitting_examples() {
        match factor_rational_prime(7).unwrap() {
            PrimeSplitting::Split(p1, p2) => {
                let gens = [p1.clone(), p2.clone()];
                assert!(gens.contains(&EisensteinInt::new(3, 1)));
                assert_eq!(p1.norm(), BigInt::from(7));
                assert_eq!(EisensteinIdeal::new(&p1).unwrap().conj(), EisensteinIdeal::new(&p2).unwrap());
            }
            other => panic!("7 should split, got {other:?}"),
        }
        assert_eq!(factor_rational_prime(2).unwrap(), PrimeSplitting::Inert);
        match factor_rational_prime(3).unwrap() {
            PrimeSplitting::Ramified(pi) => {
                assert_eq!(pi.norm(), BigInt::from(3));
                assert_eq!(EisensteinIdeal::new(&pi).unwrap(), ideal(1, -1));
            }
            other => panic!("3 should ramify, got {other:?}"),
        }
        assert!(factor_rational_prime(9).is_err());
    }

    #[test]
    fn norm_two_has_no_solution() {
        for a in -3i64..=3 {
            for b in -3i64..=3 {
                assert_ne!(a * a - a * b + b * b, 2);
            }
        }
    }

    #[test]
    fn canonical_form_is_unique_among_associates() {
        for a in -6i64..=6 {
            for b in -6i64..=6 {
                let x = EisensteinInt::new(a, b);
                if x.is_zero() {
                    continue;
                }
                let c = x.canonical();
                assert!(c.b >= BigInt::zero() && c.b < c.a);
                for u in EisensteinInt::units() {
                    assert_eq!(x.mul(&u).canonical(), c);
                }
            }
        }
    }

    #[test]
    fn ideals_of_norm_examples() {
        let i7 = ideals_of_norm(7).unwrap();
        assert_eq!(i7.len(), 2);
        assert!(i7.contains(&ideal(3, 1)));
        assert_eq!(i7[0].conj(), i7[1]);
        assert_eq!(ideals_of_norm(1).unwrap(), vec![EisensteinIdeal::unit()]);
        assert!(ideals_of_norm(2).unwrap().is_empty());
        assert_eq!(ideals_of_norm(4).unwrap().len(), 1);
        assert_eq!(ideals_of_norm(7 * 13 * 19).unwrap().len(), 8);
        assert_eq!(ideals_of_norm(49).unwrap().len(), 3);
    }

    #[test]
    fn symbol_examples() {
        let i = ideal(3, 1);
        assert_eq!(cubic_residue_symbol(&BigInt::from(2), &i).unwrap(), CubicSymbol::OMEGA);
        assert_eq!(cubic_residue_symbol(&BigInt::from(5), &EisensteinIdeal::unit()).unwrap(), CubicSymbol::ONE);
        for q in [7u64, 13, 19, 31, 49, 91, 25, 125] {
            for id in ideals_of_norm(q).unwrap() {
                assert_eq!(cubic_residue_symbol(&BigInt::from(8), &id).unwrap(), CubicSymbol::ONE);
            }
        }
        assert!(cubic_residue_symbol(&BigInt::from(2), &ideal(2, 1)).is_err());
        assert_eq!(cubic_residue_symbol(&BigInt::from(14), &i).unwrap(), CubicSymbol::Zero);
    }

    #[test]
    fn fast_and_generic_paths_agree() {
        for q in 2..400u64 {
            if q % 3 == 0 {
                continue;
            }
            for id in ideals_of_norm(q).unwrap() {
                for n in -5i64..40 {
                    let n = BigInt::from(n);
                    assert_eq!(
                        cubic_residue_symbol(&n, &id).unwrap(),
                        cubic_residue_symbol_generic(&n, &id).unwrap(),
                        "n = {n}, I = {id}"
                    );
                }
            }
        }
    }
}
