//! Q-multiplicative functions on ideals, the Möbius function of a field,
//! Dirichlet convolution, and the inverse `γ_{F,M}` of the indicator of
//! squarefree norm coprime to `M`, with its L-value at 1.
//!
//! Only the decomposition type of each rational prime is needed here, so
//! ideals are handled through [`PrimeRef`] handles rather than full prime
//! ideal data. The same code serves cyclic cubic fields and Z[ζ3].

use crate::arith::{factor, primes_up_to};
use crate::cubicfield::{CyclicCubicField, PrimeIdeal, SplittingType};
use crate::error::{bail, Result};
use crate::precision::Dd;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive};
use std::sync::Arc;

/// Handle for a prime ideal: the rational prime below it, its index among
/// the primes above `p`, and its residue degree.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PrimeRef {
    pub p: u64,
    pub index: u8,
    pub degree: u8,
}

impl PrimeRef {
    pub fn norm(&self) -> u128 {
        (self.p as u128).pow(self.degree as u32)
    }
}

impl From<&PrimeIdeal> for PrimeRef {
    fn from(pr: &PrimeIdeal) -> Self {
        PrimeRef { p: pr.p, index: pr.index, degree: pr.degree }
    }
}

/// An ideal as a sorted list of (prime, exponent ≥ 1).
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FactoredIdeal {
    factors: Vec<(PrimeRef, u32)>,
}

impl FactoredIdeal {
    pub fn unit() -> Self {
        FactoredIdeal { factors: Vec::new() }
    }

    /// Normalizes: merges repeated primes, drops zero exponents, sorts.
    pub fn new(mut factors: Vec<(PrimeRef, u32)>) -> Self {
        factors.sort();
        let mut out: Vec<(PrimeRef, u32)> = Vec::with_capacity(factors.len());
        for (q, e) in factors {
            if e == 0 {
                continue;
            }
            match out.last_mut() {
                Some((last, le)) if *last == q => *le += e,
                _ => out.push((q, e)),
            }
        }
        FactoredIdeal { factors: out }
    }

    pub fn prime(q: PrimeRef) -> Self {
        FactoredIdeal { factors: vec![(q, 1)] }
    }

    pub fn factors(&self) -> &[(PrimeRef, u32)] {
        &self.factors
    }

    pub fn is_unit(&self) -> bool {
        self.factors.is_empty()
    }

    pub fn norm(&self) -> BigInt {
        let mut n = BigInt::one();
        for (q, e) in &self.factors {
            n *= BigInt::from(q.p).pow(q.degree as u32 * e);
        }
        n
    }

    pub fn norm_u128(&self) -> Option<u128> {
        let mut n: u128 = 1;
        for (q, e) in &self.factors {
            n = n.checked_mul((q.p as u128).checked_pow(q.degree as u32 * e)?)?;
        }
        Some(n)
    }

    pub fn mul(&self, o: &FactoredIdeal) -> FactoredIdeal {
        let mut v = self.factors.clone();
        v.extend_from_slice(&o.factors);
        FactoredIdeal::new(v)
    }

    pub fn divides(&self, o: &FactoredIdeal) -> bool {
        self.factors.iter().all(|(q, e)| o.exponent(q) >= *e)
    }

    pub fn exponent(&self, q: &PrimeRef) -> u32 {
        self.factors.iter().find(|(r, _)| r == q).map_or(0, |(_, e)| *e)
    }

    /// `self / o`, if `o` divides `self`.
    pub fn quotient(&self, o: &FactoredIdeal) -> Option<FactoredIdeal> {
        if !o.divides(self) {
            return None;
        }
        let v = self.factors.iter().map(|(q, e)| (*q, e - o.exponent(q))).collect();
        Some(FactoredIdeal::new(v))
    }

    pub fn divisor_count(&self) -> u128 {
        self.factors.iter().map(|(_, e)| *e as u128 + 1).product()
    }

    /// All divisors, failing beyond `cap` of them.
    pub fn divisors(&self, cap: u128) -> Result<Vec<FactoredIdeal>> {
        let n = self.divisor_count();
        if n > cap {
            bail!(LimitExceeded, "ideal has {n} divisors, limit {cap}");
        }
        let mut out = vec![Vec::<(PrimeRef, u32)>::new()];
        for (q, e) in &self.factors {
            let mut next = Vec::with_capacity(out.len() * (*e as usize + 1));
            for d in &out {
                for k in 0..=*e {
                    let mut d2 = d.clone();
                    if k > 0 {
                        d2.push((*q, k));
                    }
                    next.push(d2);
                }
            }
            out = next;
        }
        Ok(out.into_iter().map(|factors| FactoredIdeal { factors }).collect())
    }

    /// Factors grouped by rational prime.
    pub fn blocks(&self) -> Vec<(u64, &[(PrimeRef, u32)])> {
        let mut out = Vec::new();
        let mut i = 0;
        while i < self.factors.len() {
            let p = self.factors[i].0.p;
            let mut j = i;
            while j < self.factors.len() && self.factors[j].0.p == p {
                j += 1;
            }
            out.push((p, &self.factors[i..j]));
            i = j;
        }
        out
    }
}

/// Decomposition of a rational prime: `count` primes, each of residue
/// degree `degree` and ramification index `ramification`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LocalType {
    pub count: u8,
    pub degree: u8,
    pub ramification: u8,
}

/// Fields whose prime decomposition is known prime by prime (Galois case).
pub trait PrimeDecomposition: Sync {
    fn field_degree(&self) -> u8;
    fn local_type(&self, p: u64) -> LocalType;

    fn primes_above(&self, p: u64) -> Vec<PrimeRef> {
        let t = self.local_type(p);
        (0..t.count).map(|i| PrimeRef { p, index: i, degree: t.degree }).collect()
    }
}

impl PrimeDecomposition for CyclicCubicField {
    fn field_degree(&self) -> u8 {
        3
    }
    fn local_type(&self, p: u64) -> LocalType {
        match self.splitting_type(p) {
            SplittingType::Split => LocalType { count: 3, degree: 1, ramification: 1 },
            SplittingType::Inert => LocalType { count: 1, degree: 3, ramification: 1 },
            SplittingType::Ramified => LocalType { count: 1, degree: 1, ramification: 3 },
        }
    }
}

/// The ring Z[ζ3].
#[derive(Clone, Copy, Debug, Default)]
pub struct EisensteinRing;

impl PrimeDecomposition for EisensteinRing {
    fn field_degree(&self) -> u8 {
        2
    }
    fn local_type(&self, p: u64) -> LocalType {
        if p == 3 {
            LocalType { count: 1, degree: 1, ramification: 2 }
        } else if p % 3 == 1 {
            LocalType { count: 2, degree: 1, ramification: 1 }
        } else {
            LocalType { count: 1, degree: 2, ramification: 1 }
        }
    }
}

/// `μ_F`.
pub fn moebius(a: &FactoredIdeal) -> i64 {
    if a.factors.iter().any(|(_, e)| *e > 1) {
        0
    } else if a.factors.len() % 2 == 0 {
        1
    } else {
        -1
    }
}

/// `μ²(N(𝔞))·1_M(N(𝔞))`.
pub fn sqfree_coprime_indicator(a: &FactoredIdeal, m: u64) -> i64 {
    for (p, block) in a.blocks() {
        let k: u32 = block.iter().map(|(q, e)| q.degree as u32 * e).sum();
        if k > 1 || m % p == 0 {
            return 0;
        }
    }
    1
}

/// A function on ideals evaluated as a product of per-rational-prime blocks,
/// hence Q-multiplicative by construction.
#[derive(Clone)]
pub struct QMultFunction {
    pub name: String,
    block: Arc<dyn Fn(u64, &[(PrimeRef, u32)]) -> i64 + Send + Sync>,
}

impl QMultFunction {
    pub fn new(name: &str, block: impl Fn(u64, &[(PrimeRef, u32)]) -> i64 + Send + Sync + 'static) -> Self {
        QMultFunction { name: name.to_string(), block: Arc::new(block) }
    }

    pub fn eval(&self, a: &FactoredIdeal) -> i64 {
        let mut v = 1i64;
        for (p, b) in a.blocks() {
            v *= (self.block)(p, b);
            if v == 0 {
                break;
            }
        }
        v
    }

    pub fn moebius() -> Self {
        QMultFunction::new("mu_F", |_, b| moebius(&FactoredIdeal { factors: b.to_vec() }))
    }

    pub fn indicator(m: u64) -> Self {
        QMultFunction::new("sqfree_coprime", move |_, b| sqfree_coprime_indicator(&FactoredIdeal { factors: b.to_vec() }, m))
    }
}

/// Default limit on the number of divisors in convolutions.
pub const DIVISOR_CAP: u128 = 1_000_000;

/// `(f ⋆ g)(𝔞) = Σ_{𝔟 | 𝔞} f(𝔟) g(𝔞/𝔟)` by enumerating divisors.
pub fn dirichlet_convolve<F, G>(f: F, g: G, a: &FactoredIdeal, cap: u128) -> Result<i64>
where
    F: Fn(&FactoredIdeal) -> i64,
    G: Fn(&FactoredIdeal) -> i64,
{
    let mut s = 0i64;
    for b in a.divisors(cap)? {
        let fb = f(&b);
        if fb == 0 {
            continue;
        }
        s += fb * g(&a.quotient(&b).unwrap());
    }
    Ok(s)
}

/// `γ_{F,M}` on one block above `p`, by the closed form; `local_degree` is the
/// residue degree `f_p` of the primes above `p`.
pub fn gamma_block(local_degree: u8, p_divides_m: bool, block: &[(PrimeRef, u32)]) -> i64 {
    let t = block.len() as i64;
    if t == 0 {
        return 1;
    }
    let sign = if t % 2 == 0 { 1 } else { -1 };
    let ones = block.iter().all(|(_, e)| *e == 1);
    if p_divides_m {
        return if ones { sign } else { 0 };
    }
    if ones {
        if local_degree > 1 {
            sign
        } else {
            -sign * (t - 1)
        }
    } else {
        let twos = block.iter().filter(|(_, e)| *e == 2).count();
        let rest_ones = block.iter().filter(|(_, e)| *e == 1).count();
        if local_degree == 1 && twos == 1 && twos + rest_ones == block.len() {
            sign
        } else {
            0
        }
    }
}

/// `γ_{F,M}(𝔞)` by the closed form, block by block.
pub fn gamma_closed(a: &FactoredIdeal, m: u64) -> i64 {
    let mut v = 1i64;
    for (p, b) in a.blocks() {
        v *= gamma_block(b[0].0.degree, m % p == 0, b);
        if v == 0 {
            return 0;
        }
    }
    v
}

/// `γ_{F,M}(𝔞)` from its definition `(μ²(N)·1_M(N)) ⋆ μ_F`.
pub fn gamma_definitional(a: &FactoredIdeal, m: u64, cap: u128) -> Result<i64> {
    dirichlet_convolve(|b| sqfree_coprime_indicator(b, m), moebius, a, cap)
}

pub fn gamma_function(m: u64) -> QMultFunction {
    QMultFunction::new("gamma", move |p, b| gamma_block(b[0].0.degree, m % p == 0, b))
}

/// All ideals of norm at most `x`, in no particular order.
pub fn ideals_up_to(ctx: &dyn PrimeDecomposition, x: u64) -> Vec<FactoredIdeal> {
    let primes = primes_up_to(x);
    let mut out = Vec::new();
    let mut cur: Vec<(PrimeRef, u32)> = Vec::new();
    fn rec(
        ctx: &dyn PrimeDecomposition,
        primes: &[u64],
        start: usize,
        n: u64,
        x: u64,
        cur: &mut Vec<(PrimeRef, u32)>,
        out: &mut Vec<FactoredIdeal>,
    ) {
        out.push(FactoredIdeal { factors: cur.clone() });
        for i in start..primes.len() {
            let p = primes[i];
            if n.saturating_mul(p) > x {
                break;
            }
            let lt = ctx.local_type(p);
            let q = (p as u128).pow(lt.degree as u32);
            if (n as u128) * q > x as u128 {
                continue;
            }
            // exponent vectors on the primes above p, not all zero
            let refs = ctx.primes_above(p);
            let mut exps = vec![0u32; refs.len()];
            loop {
                // increment odometer with norm cutoff
                let mut k = 0;
                loop {
                    if k == refs.len() {
                        break;
                    }
                    exps[k] += 1;
                    let total: u32 = exps.iter().sum();
                    if (n as u128) * q.pow(total) <= x as u128 {
                        break;
                    }
                    exps[k] = 0;
                    k += 1;
                }
                if k == refs.len() {
                    break;
                }
                let total: u32 = exps.iter().sum();
                let m = n * q.pow(total) as u64;
                let before = cur.len();
                for (r, &e) in refs.iter().zip(exps.iter()) {
                    if e > 0 {
                        cur.push((*r, e));
                    }
                }
                rec(ctx, primes, i + 1, m, x, cur, out);
                cur.truncate(before);
            }
        }
    }
    rec(ctx, &primes, 0, 1, x, &mut cur, &mut out);
    out
}

/// Nonzero blocks of `γ_{F,M}` above `p`: `(norm exponent k, Σγ, Σ|γ|)` over
/// all exponent vectors of norm `p^k`.
pub fn gamma_local_blocks(ctx: &dyn PrimeDecomposition, p: u64, m: u64) -> Vec<(u32, i64, u64)> {
    let lt = ctx.local_type(p);
    let refs = ctx.primes_above(p);
    let g = refs.len();
    let mut acc: Vec<(u32, i64, u64)> = Vec::new();
    // closed form vanishes outside exponents ≤ 2
    let mut exps = vec![0u32; g];
    loop {
        let mut k = 0;
        while k < g {
            exps[k] += 1;
            if exps[k] <= 2 {
                break;
            }
            exps[k] = 0;
            k += 1;
        }
        if k == g {
            break;
        }
        let block: Vec<(PrimeRef, u32)> = refs.iter().zip(exps.iter()).filter(|(_, e)| **e > 0).map(|(r, e)| (*r, *e)).collect();
        let v = gamma_block(lt.degree, m % p == 0, &block);
        if v != 0 {
            let kk = lt.degree as u32 * exps.iter().sum::<u32>();
            match acc.iter_mut().find(|(e, _, _)| *e == kk) {
                Some(entry) => {
                    entry.1 += v;
                    entry.2 += v.unsigned_abs();
                }
                None => acc.push((kk, v, v.unsigned_abs())),
            }
        }
    }
    acc.sort();
    acc
}

/// Local Euler factor `Σ_blocks γ/N` as an exact rational.
pub fn local_factor_series(ctx: &dyn PrimeDecomposition, p: u64, m: u64) -> BigRational {
    let mut s = BigRational::one();
    for (k, c, _) in gamma_local_blocks(ctx, p, m) {
        s += BigRational::new(BigInt::from(c), BigInt::from(p).pow(k));
    }
    s
}

/// Local Euler factor of `L(γ_{F,M}, 1)` in closed form.
pub fn local_factor_closed(ctx: &dyn PrimeDecomposition, p: u64, m: u64) -> f64 {
    let lt = ctx.local_type(p);
    let in_m = m % p == 0;
    let x = 1.0 / p as f64;
    match (ctx.field_degree(), lt.count, lt.degree, lt.ramification, in_m) {
        (3, 3, 1, 1, false) => (1.0 - x).powi(3) * (1.0 + 3.0 * x),
        (3, 3, 1, 1, true) => (1.0 - x).powi(3),
        (3, 1, 3, 1, _) => 1.0 - x * x * x,
        (3, 1, 1, 3, true) => 1.0 - x,
        (3, 1, 1, 3, false) => 1.0 - x * x,
        (2, 2, 1, 1, false) => (1.0 - x).powi(2) * (1.0 + 2.0 * x),
        (2, 2, 1, 1, true) => (1.0 - x).powi(2),
        (2, 1, 2, 1, _) => 1.0 - x * x,
        (2, 1, 1, 2, true) => 1.0 - x,
        (2, 1, 1, 2, false) => 1.0 - x * x,
        _ => local_factor_series(ctx, p, m).to_f64().unwrap(),
    }
}

/// `Σ_{p > P} p^{-2} ≤ 6/(P log P)`; the sharper constant 2.51 follows from
/// `π(x) < 1.25506 x/log x`, the stated constant leaves room.
pub fn prime_square_tail(p: u64) -> f64 {
    let pf = p as f64;
    6.0 / (pf * pf.ln())
}

/// `Σ_{p > P} p^{-s}` for `s > 1`, from `π(x) < 1.25506 x/log x`.
pub fn prime_power_tail(p: u64, s: f64) -> f64 {
    let pf = p as f64;
    1.25506 * s * pf.powf(1.0 - s) / ((s - 1.0) * pf.ln())
}

/// A truncated Euler product with a bound on `|full − truncated|`.
#[derive(Clone, Debug)]
pub struct EulerProduct {
    pub name: String,
    pub truncation: u64,
    pub value: f64,
    pub tail_bound: f64,
}

/// `L(γ_{F,M}, 1)` as the Euler product over `p ≤ P` (and all `p | M`).
///
/// For `p > 13` not dividing `M`, every local factor satisfies
/// `|log factor| ≤ 6/p²`, so the tail changes the product by a factor within
/// `exp(±6 Σ_{p>P} p^{-2})`.
pub fn l_gamma(ctx: &dyn PrimeDecomposition, m: u64, p_max: u64) -> Result<EulerProduct> {
    if m == 0 {
        bail!(InvalidInput, "M must be positive");
    }
    let p_max = p_max.max(13);
    let mut prod = Dd::from_f64(1.0);
    for p in primes_up_to(p_max) {
        prod = prod * Dd::from_f64(1.0).add_f64(local_factor_closed(ctx, p, m) - 1.0);
    }
    for (p, _) in factor(m) {
        if p > p_max {
            prod = prod * Dd::from_f64(local_factor_closed(ctx, p, m));
        }
    }
    let value = prod.to_f64();
    let tau = (6.0 * prime_square_tail(p_max)).exp_m1();
    Ok(EulerProduct { name: "L(gamma,1)".into(), truncation: p_max, value, tail_bound: value.abs() * tau })
}

/// `Σ_{N(𝔟) ≤ X} |γ_{F,M}(𝔟)|` over the support (norms whose radical
/// squared divides them, apart from primes dividing `M`).
pub fn gamma_partial_sum_abs(ctx: &dyn PrimeDecomposition, m: u64, x: u64) -> Result<u64> {
    let (_, abs) = gamma_series(ctx, m, x, |_| 1.0)?;
    Ok(abs.round() as u64)
}

/// `(Σ_{N ≤ X} γ w(N), Σ_{N ≤ X} |γ| w(N))` by depth-first search over blocks.
fn gamma_series(ctx: &dyn PrimeDecomposition, m: u64, x: u64, w: impl Fn(u64) -> f64) -> Result<(f64, f64)> {
    if x > 100_000_000_000 {
        bail!(LimitExceeded, "support enumeration limited to X ≤ 1e11");
    }
    let m_primes: Vec<u64> = if m == 1 { Vec::new() } else { factor(m).into_iter().map(|(p, _)| p).collect() };
    let root = crate::arith::isqrt(x);
    let mut blocks: Vec<(u64, Vec<(u32, i64, u64)>)> = Vec::new();
    for &p in &m_primes {
        blocks.push((p, gamma_local_blocks(ctx, p, m)));
    }
    for p in primes_up_to(root) {
        if m % p != 0 {
            blocks.push((p, gamma_local_blocks(ctx, p, m)));
        }
    }
    let n_m = m_primes.len();
    // for primes not dividing M every block has norm ≥ p², so the main loop
    // can stop once n·p² > X
    struct St<'a, W: Fn(u64) -> f64> {
        blocks: &'a [(u64, Vec<(u32, i64, u64)>)],
        n_m: usize,
        x: u64,
        w: W,
        sum: Dd,
        abs: Dd,
    }
    fn rec<W: Fn(u64) -> f64>(st: &mut St<W>, start: usize, n: u64, c: i64, a: u64) {
        let wn = (st.w)(n);
        st.sum = st.sum + Dd::from_f64(c as f64 * wn);
        st.abs = st.abs + Dd::from_f64(a as f64 * wn);
        for i in start..st.blocks.len() {
            let (p, ref bl) = st.blocks[i];
            if i >= st.n_m && (n as u128) * (p as u128) * (p as u128) > st.x as u128 {
                break;
            }
            for &(k, cb, ab) in bl.iter() {
                let q = (p as u128).pow(k);
                let nn = n as u128 * q;
                if nn > st.x as u128 {
                    continue;
                }
                rec(st, i + 1, nn as u64, c * cb, a * ab);
            }
        }
    }
    let mut st = St { blocks: &blocks, n_m, x, w, sum: Dd::ZERO, abs: Dd::ZERO };
    rec(&mut st, 0, 1, 1, 1);
    Ok((st.sum.to_f64(), st.abs.to_f64()))
}

/// Partial sum of the Dirichlet series `Σ_{N(𝔟) ≤ X} γ(𝔟)/N(𝔟)` with a
/// Rankin bound on the remainder.
#[derive(Clone, Debug)]
pub struct DirectSeries {
    pub x: u64,
    pub value: f64,
    pub tail_bound: f64,
    pub rankin_exponent: f64,
}

pub fn l_gamma_direct(ctx: &dyn PrimeDecomposition, m: u64, x: u64) -> Result<DirectSeries> {
    let (value, _) = gamma_series(ctx, m, x, |n| 1.0 / n as f64)?;
    let (tail_bound, sigma) = rankin_tail(ctx, m, x, 1_000_000);
    Ok(DirectSeries { x, value, tail_bound, rankin_exponent: sigma })
}

/// `Σ_{N > X} |γ|/N ≤ X^{σ−1} Π_p (1 + Σ_k |c_k| p^{−kσ})`, minimized over a
/// grid of `σ ∈ (1/2, 1)`. Primes above `p0` are bounded through
/// `log(1 + y) ≤ y` and `Σ|c_k| p^{−kσ} ≤ 17 p^{−2σ}` (the split case is the
/// largest: 6 + 8 + 3).
fn rankin_tail(ctx: &dyn PrimeDecomposition, m: u64, x: u64, p0: u64) -> (f64, f64) {
    let primes = primes_up_to(p0);
    let blocks: Vec<(u64, Vec<(u32, i64, u64)>)> = primes.iter().map(|&p| (p, gamma_local_blocks(ctx, p, m))).collect();
    let mut extra: Vec<(u64, Vec<(u32, i64, u64)>)> = Vec::new();
    for (p, _) in factor(m.max(1)) {
        if p > p0 {
            extra.push((p, gamma_local_blocks(ctx, p, m)));
        }
    }
    let mut best = (f64::INFINITY, 0.0);
    for i in 1..20 {
        let sigma = 0.5 + 0.025 * i as f64;
        let mut log_r = 0.0;
        for (p, bl) in blocks.iter().chain(extra.iter()) {
            let pf = *p as f64;
            let y: f64 = bl.iter().map(|(k, _, a)| *a as f64 * pf.powf(-(*k as f64) * sigma)).sum();
            log_r += y.ln_1p();
        }
        log_r += 17.0 * prime_power_tail(p0, 2.0 * sigma);
        let b = (x as f64).powf(sigma - 1.0) * log_r.exp();
        if b < best.0 {
            best = (b, sigma);
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cubicfield::fields_of_conductor;

    fn split_block(p: u64, exps: &[u32]) -> Vec<(PrimeRef, u32)> {
        exps.iter()
            .enumerate()
            .filter(|(_, e)| **e > 0)
            .map(|(i, e)| (PrimeRef { p, index: i as u8, degree: 1 }, *e))
            .collect()
    }

    #[test]
    fn moebius_examples() {
        let q = |p, i| PrimeRef { p, index: i, degree: 1 };
        assert_eq!(moebius(&FactoredIdeal::unit()), 1);
        assert_eq!(moebius(&FactoredIdeal::new(vec![(q(13, 0), 1), (q(13, 1), 1)])), 1);
        assert_eq!(moebius(&FactoredIdeal::new(vec![(q(13, 0), 2)])), 0);
        assert_eq!(moebius(&FactoredIdeal::new(vec![(q(13, 0), 1)])), -1);
    }

    #[test]
    fn gamma_closed_form_examples() {
        assert_eq!(gamma_block(1, false, &split_block(13, &[1, 1, 1])), 2);
        assert_eq!(gamma_block(1, false, &split_block(13, &[1, 1, 2])), -1);
        let inert = [(PrimeRef { p: 2, index: 0, degree: 3 }, 1)];
        assert_eq!(gamma_block(3, false, &inert), -1);
        assert_eq!(gamma_block(1, true, &split_block(13, &[1, 1, 0])), 1);
    }

    #[test]
    fn closed_local_factors_match_block_series() {
        let f7 = &fields_of_conductor(7).unwrap()[0];
        let f9 = &fields_of_conductor(9).unwrap()[0];
        for ctx in [f7 as &dyn PrimeDecomposition, f9, &EisensteinRing] {
            for p in primes_up_to(200) {
                for m in [1u64, 3, 7, 30, 49, 81, 91 * 13] {
                    let a = local_factor_closed(ctx, p, m);
                    let b = local_factor_series(ctx, p, m).to_f64().unwrap();
                    assert!((a - b).abs() < 1e-15, "p = {p}, m = {m}: {a} vs {b}");
                }
            }
        }
        // listed examples
        let x = 1.0f64 / 13.0;
        assert!((local_factor_closed(f7, 13, 49) - (1.0 - x).powi(3) * (1.0 + 3.0 * x)).abs() < 1e-15);
        assert!((local_factor_closed(&EisensteinRing, 3, 3) - 2.0 / 3.0).abs() < 1e-15);
        assert!((local_factor_closed(f7, 7, 7) - 6.0 / 7.0).abs() < 1e-15);
    }

    #[test]
    fn convolution_inverts_divisor_sum() {
        let f = &fields_of_conductor(13).unwrap()[0];
        let ideals = ideals_up_to(f, 2000);
        let gf = |a: &FactoredIdeal| (a.norm_u128().unwrap() % 7) as i64 - 3;
        for a in ideals.iter().take(300) {
            let s: i64 = a
                .divisors(DIVISOR_CAP)
                .unwrap()
                .iter()
                .map(|b| dirichlet_convolve(gf, moebius, b, DIVISOR_CAP).unwrap())
                .sum();
            assert_eq!(s, gf(a));
            assert_eq!(dirichlet_convolve(gf, |b| b.is_unit() as i64, a, DIVISOR_CAP).unwrap(), gf(a));
        }
        assert_eq!(dirichlet_convolve(gf, moebius, &FactoredIdeal::unit(), 10).unwrap(), gf(&FactoredIdeal::unit()));
    }

    #[test]
    fn convolution_of_q_multiplicative_is_q_multiplicative() {
        let f = &fields_of_conductor(7).unwrap()[0];
        let ideals = ideals_up_to(f, 3000);
        let ind = QMultFunction::indicator(10);
        let mu = QMultFunction::moebius();
        let conv = |a: &FactoredIdeal| dirichlet_convolve(|b| ind.eval(b), |b| mu.eval(b), a, DIVISOR_CAP).unwrap();
        let mut checked = 0;
        for a in ideals.iter().step_by(7) {
            for b in ideals.iter().step_by(11) {
                let (na, nb) = (a.norm_u128().unwrap(), b.norm_u128().unwrap());
                if num_integer::gcd(na, nb) == 1 && na * nb <= 3_000_000 {
                    assert_eq!(conv(&a.mul(b)), conv(a) * conv(b));
                    checked += 1;
                }
            }
        }
        assert!(checked > 100);
    }

    #[test]
    fn ideal_enumeration_counts() {
        let f = &fields_of_conductor(7).unwrap()[0];
        let ideals = ideals_up_to(f, 13);
        let norms: Vec<u128> = {
            let mut v: Vec<u128> = ideals.iter().map(|a| a.norm_u128().unwrap()).collect();
            v.sort();
            v
        };
        // 1, 7 (ramified), 8 (inert 2), 13 ×3
        assert_eq!(norms, vec![1, 7, 8, 13, 13, 13]);
    }

    #[test]
    fn partial_abs_sum_small_x() {
        let f = &fields_of_conductor(7).unwrap()[0];
        assert_eq!(gamma_partial_sum_abs(f, 1, 3).unwrap(), 1);
        // first nonunit support element for M = 1 is the inert prime above 2 (norm 8)
        assert_eq!(gamma_partial_sum_abs(f, 1, 8).unwrap(), 2);
    }

    #[test]
    fn euler_product_two_truncations() {
        let f = &fields_of_conductor(7).unwrap()[0];
        let a = l_gamma(f, 49, 100_000).unwrap();
        let b = l_gamma(f, 49, 1_000_000).unwrap();
        assert!((a.value - b.value).abs() <= a.tail_bound);
        assert!(b.tail_bound < a.tail_bound);
    }
}
