//! The cubic character sum `S_d(X)` over ideals of Z[ω], its split by the
//! sizes of `n₁, n₂`, and the η-weighted main term.

use crate::arith::{factor, is_cube_u128, isqrt, pow_mod, primes_up_to};
use crate::cubicfield::{admissible_divisor, enumerate_fields};
use crate::eisenstein::{factor_rational_prime, omega_mod_prime, PrimeSplitting};
use crate::error::{bail, Result};
use crate::lfunc::{l_value_truncated, zeta_residue_fast};
use crate::qmult::{l_gamma, EisensteinRing};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;
use rayon::prelude::*;
use std::collections::BTreeMap;

/// Largest `X` accepted by [`s_d`].
pub const MAX_X: f64 = 1e5;

/// Subsets `M ⊆ {1, 2}` as report keys.
pub const PART_KEYS: [&str; 4] = ["{}", "{1}", "{2}", "{1,2}"];

/// `η(p^k)` for `k ≥ 1` as a float.
pub fn eta_prime(p: u64) -> f64 {
    if p % 3 == 1 {
        p as f64 / (p as f64 + 2.0)
    } else {
        1.0
    }
}

/// `η(n)`: multiplicative, `p/(p + 2)` on powers of `p ≡ 1 mod 3`, else 1.
pub fn eta(n: u64) -> Result<BigRational> {
    if n == 0 {
        bail!(InvalidInput, "η is defined on positive integers");
    }
    let mut acc = BigRational::one();
    for (p, _) in factor(n) {
        if p % 3 == 1 {
            acc *= BigRational::new(BigInt::from(p), BigInt::from(p + 2));
        }
    }
    Ok(acc)
}

fn eta_f64(n: u64) -> f64 {
    factor(n).iter().map(|&(p, _)| eta_prime(p)).product()
}

#[derive(Clone, Debug)]
pub struct CharSumReport {
    pub d: u64,
    pub x: f64,
    pub s_d: f64,
    /// Imaginary part of the assembled double sum.
    pub imag: f64,
    /// `(7π/26√3)·α·β_d·2^{ω(d)}·X/d`.
    pub predicted: f64,
    pub split_parts: BTreeMap<String, f64>,
    pub cutoff_a: f64,
    pub ideals: usize,
    pub inner_length: u64,
}

/// One character value as an exponent of ω, or 3 for zero.
type ExpVec = Vec<u8>;

/// `χ_π(n)` for `1 ≤ n ≤ len` (index `n`), built multiplicatively from the
/// values at primes.
fn prime_character(p: u64, w: u64, len: usize, small_primes: &[u64]) -> ExpVec {
    let mut v = vec![0u8; len + 1];
    v[0] = 3;
    let w2 = crate::arith::mul_mod(w, w, p);
    let mut at_prime = vec![0u8; len + 1];
    for &q in small_primes {
        if q as usize > len {
            break;
        }
        at_prime[q as usize] = if q % p == 0 {
            3
        } else {
            let s = pow_mod(q % p, (p - 1) / 3, p);
            if s == 1 {
                0
            } else if s == w {
                1
            } else {
                debug_assert_eq!(s, w2);
                2
            }
        };
    }
    let mut spf = vec![0u32; len + 1];
    for &q in small_primes {
        if q as usize > len {
            break;
        }
        for m in (q as usize..=len).step_by(q as usize) {
            if spf[m] == 0 {
                spf[m] = q as u32;
            }
        }
    }
    for n in 2..=len {
        let q = spf[n] as usize;
        let (a, b) = (at_prime[q], v[n / q]);
        v[n] = if a == 3 || b == 3 { 3 } else { (a + b) % 3 };
    }
    v
}

/// Per-ideal class sums `Σ 1/n` over `n` with `χ(n) = ω^k`, for the ranges
/// `n ≤ t` and `t < n ≤ len`.
#[derive(Clone, Copy, Default)]
struct Sums {
    small: [f64; 3],
    large: [f64; 3],
}

fn sums_of(chi: &[u8], t: usize, inv: &[f64]) -> Sums {
    let mut s = Sums::default();
    for n in 1..chi.len() {
        let k = chi[n];
        if k < 3 {
            if n <= t {
                s.small[k as usize] += inv[n];
            } else {
                s.large[k as usize] += inv[n];
            }
        }
    }
    s
}

/// `(Re, Im)` of `a·conj(b)` for `a = Σ a_k ω^k`, `b = Σ b_k ω^k`.
fn cross(a: &[f64; 3], b: &[f64; 3]) -> (f64, f64) {
    let mut re = 0.0;
    let mut im = 0.0;
    let h = 3f64.sqrt() / 2.0;
    for i in 0..3 {
        for j in 0..3 {
            let k = (i + 3 - j) % 3;
            let (c, s) = match k {
                0 => (1.0, 0.0),
                1 => (-0.5, h),
                _ => (-0.5, -h),
            };
            re += a[i] * b[j] * c;
            im += a[i] * b[j] * s;
        }
    }
    (re, im)
}

struct IdealSums {
    parts: [f64; 4],
    imag: f64,
    count: usize,
}

/// Walks the ideals of squarefree norm `N ≤ x` with `3 ∤ N` and `d | N`,
/// computing the four split parts with inner length `len` and cutoff `t`.
fn walk(d: u64, x: u64, len: usize, t: usize) -> Result<IdealSums> {
    let small_primes = primes_up_to(len.max(2) as u64);
    let inv: Vec<f64> = (0..=len).map(|n| if n == 0 { 0.0 } else { 1.0 / n as f64 }).collect();
    let mut chars: Vec<(u64, [ExpVec; 2])> = Vec::new();
    for p in primes_up_to(x).into_iter().filter(|p| p % 3 == 1) {
        let PrimeSplitting::Split(pi, pib) = factor_rational_prime(p)? else {
            bail!(Consistency, "{p} ≡ 1 mod 3 did not split");
        };
        let a = prime_character(p, omega_mod_prime(&pi)?, len, &small_primes);
        let b = prime_character(p, omega_mod_prime(&pib)?, len, &small_primes);
        chars.push((p, [a, b]));
    }
    let d_primes: Vec<u64> = factor(d).into_iter().map(|(p, _)| p).collect();
    let eval = |chi: &[u8]| -> ([f64; 4], f64) {
        let s = sums_of(chi, t, &inv);
        let (ss, _) = cross(&s.small, &s.small);
        let (ll, _) = cross(&s.large, &s.large);
        let (ls, im1) = cross(&s.large, &s.small);
        let (sl, im2) = cross(&s.small, &s.large);
        ([ss, ls, sl, ll], im1 + im2)
    };
    // depth-first over increasing primes; each branch is independent
    fn dfs(
        chars: &[(u64, [ExpVec; 2])],
        start: usize,
        n: u64,
        x: u64,
        chi: &[u8],
        d_primes: &[u64],
        eval: &(dyn Fn(&[u8]) -> ([f64; 4], f64) + Sync),
        out: &mut IdealSums,
    ) {
        if d_primes.iter().all(|p| n % p == 0) {
            let (parts, im) = eval(chi);
            for k in 0..4 {
                out.parts[k] += parts[k];
            }
            out.imag += im;
            out.count += 1;
        }
        for i in start..chars.len() {
            let (p, ref cs) = chars[i];
            if n.saturating_mul(p) > x {
                break;
            }
            for c in cs {
                let next: Vec<u8> =
                    chi.iter().zip(c).map(|(&a, &b)| if a == 3 || b == 3 { 3 } else { (a + b) % 3 }).collect();
                dfs(chars, i + 1, n * p, x, &next, d_primes, eval, out);
            }
        }
    }
    let mut trivial = vec![0u8; len + 1];
    trivial[0] = 3;
    let root = {
        let mut r = IdealSums { parts: [0.0; 4], imag: 0.0, count: 0 };
        if d == 1 {
            let (parts, im) = eval(&trivial);
            r.parts = parts;
            r.imag = im;
            r.count = 1;
        }
        r
    };
    let branches: Vec<IdealSums> = (0..chars.len())
        .into_par_iter()
        .filter(|&i| chars[i].0 <= x)
        .map(|i| {
            let mut out = IdealSums { parts: [0.0; 4], imag: 0.0, count: 0 };
            let (p, ref cs) = chars[i];
            for c in cs {
                dfs(&chars, i + 1, p, x, c, &d_primes, &eval, &mut out);
            }
            out
        })
        .collect();
    let mut acc = root;
    for b in branches {
        for k in 0..4 {
            acc.parts[k] += b.parts[k];
        }
        acc.imag += b.imag;
        acc.count += b.count;
    }
    Ok(acc)
}

fn check_args(d: u64, x: f64) -> Result<u64> {
    if !admissible_divisor(d) {
        bail!(InvalidInput, "d = {d} must be squarefree with prime factors ≡ 1 mod 3");
    }
    if !(x >= 1.0) {
        bail!(InvalidInput, "X must be at least 1");
    }
    if x > MAX_X {
        bail!(LimitExceeded, "X = {x:e} exceeds the limit {MAX_X:e}");
    }
    Ok(x.floor() as u64)
}

/// `log(X)^A` as an integer cutoff.
pub fn cutoff(x: f64, a: f64) -> u64 {
    x.ln().max(0.0).powf(a).floor() as u64
}

/// `S_d(X)` with inner sums of length `⌊X^{1/2}⌋`.
pub fn s_d(d: u64, x: f64) -> Result<f64> {
    Ok(s_d_split(d, x, 2.0)?.s_d)
}

/// `S_d(X)` with an explicit inner length.
pub fn s_d_with(d: u64, x: f64, inner: u64) -> Result<f64> {
    let xi = check_args(d, x)?;
    let r = walk(d, xi, inner as usize, inner as usize)?;
    Ok(r.parts.iter().sum())
}

/// The four parts `S_d^M(X)` for cutoff `log(X)^A`, with the total and the
/// Prop-3.8 style prediction.
pub fn s_d_split(d: u64, x: f64, a: f64) -> Result<CharSumReport> {
    let xi = check_args(d, x)?;
    let len = isqrt(xi);
    let t = cutoff(x, a).min(len);
    let r = walk(d, xi, len as usize, t as usize)?;
    let mut split_parts = BTreeMap::new();
    for (k, v) in PART_KEYS.iter().zip(r.parts) {
        split_parts.insert(k.to_string(), v);
    }
    let s: f64 = r.parts.iter().sum();
    Ok(CharSumReport {
        d,
        x,
        s_d: s,
        imag: r.imag,
        predicted: predicted_s_d(d, x)?,
        split_parts,
        cutoff_a: a,
        ideals: r.count,
        inner_length: len,
    })
}

/// `(7π/26√3)·α·β_d·2^{ω(d)}·X/d`.
pub fn predicted_s_d(d: u64, x: f64) -> Result<f64> {
    let alpha = crate::constants::alpha(1_000_000).value;
    let beta = crate::constants::beta_d_f64(d)?;
    let w = factor(d).len() as i32;
    Ok(crate::constants::leading_constant() * alpha * beta * 2f64.powi(w) * x / d as f64)
}

/// Literal double sum `Σ_I μ²(N(I)) Σ_{n₁,n₂ ≤ X^{1/2}} (n₁/I)(n₂/I)‾/(n₁n₂)`
/// evaluated symbol by symbol; returns `(Re, Im)`. Small `X` only.
pub fn s_d_double_sum(d: u64, x: f64) -> Result<(f64, f64)> {
    let xi = check_args(d, x)?;
    let len = isqrt(xi);
    let mut re = 0.0;
    let mut im = 0.0;
    for n in 1..=xi {
        if n % 3 == 0 || n % d != 0 || !crate::arith::is_squarefree(n) {
            continue;
        }
        if factor(n).iter().any(|&(p, _)| p % 3 != 1) {
            continue;
        }
        for id in crate::eisenstein::ideals_of_norm(n)? {
            let vals: Vec<(f64, f64)> = (1..=len)
                .map(|m| crate::eisenstein::cubic_residue_symbol(&BigInt::from(m), &id).map(|s| s.to_complex()))
                .collect::<Result<_>>()?;
            for (i, a) in vals.iter().enumerate() {
                for (j, b) in vals.iter().enumerate() {
                    let w = 1.0 / ((i + 1) * (j + 1)) as f64;
                    // a·conj(b)
                    re += w * (a.0 * b.0 + a.1 * b.1);
                    im += w * (a.1 * b.0 - a.0 * b.1);
                }
            }
        }
    }
    Ok((re, im))
}

/// Pairs `(n₁, n₂)` with `n₁, n₂ ≤ n` and `n₁n₂²` a cube, from the
/// parametrization `n_i = d₁d₂²m_i³` with `d₁d₂` squarefree.
pub fn cube_pairs(n: u64) -> Vec<(u64, u64)> {
    let mut out = Vec::new();
    for d1 in 1..=n {
        for d2 in 1..=n {
            let base = match d2.checked_mul(d2).and_then(|v| v.checked_mul(d1)) {
                Some(b) if b <= n => b,
                _ => break,
            };
            if !crate::arith::is_squarefree(d1 * d2) {
                continue;
            }
            let mut ms = Vec::new();
            let mut m = 1u64;
            while base * m * m * m <= n {
                ms.push(base * m * m * m);
                m += 1;
            }
            for &a in &ms {
                for &b in &ms {
                    out.push((a, b));
                }
            }
        }
    }
    out.sort_unstable();
    out
}

/// The same set by testing every pair.
pub fn cube_pairs_direct(n: u64) -> Vec<(u64, u64)> {
    let mut out: Vec<(u64, u64)> = (1..=n)
        .into_par_iter()
        .flat_map_iter(|a| (1..=n).filter(move |&b| is_cube_u128(a as u128 * (b as u128) * (b as u128))).map(move |b| (a, b)))
        .collect();
    out.sort_unstable();
    out
}

/// Main term for `S_d^∅(X)`:
/// `(π/3√3)·L(γ_{Q(ω),3},1)·2^{ω(d)}X/d·Σ_{n₁,n₂ ≤ T, n₁n₂² cube} η(n₁n₂d)/(n₁n₂)`.
pub fn s_empty_predicted(d: u64, x: f64, a: f64) -> Result<f64> {
    if !admissible_divisor(d) {
        bail!(InvalidInput, "d = {d} must be squarefree with prime factors ≡ 1 mod 3");
    }
    let t = cutoff(x, a).min(isqrt(x.floor() as u64));
    let mut s = 0.0;
    for (n1, n2) in cube_pairs(t) {
        s += eta_f64(n1 * n2 * d) / (n1 * n2) as f64;
    }
    let lg = l_gamma(&EisensteinRing, 3, 1_000_000)?.value;
    let w = factor(d).len() as i32;
    Ok(std::f64::consts::PI / (3.0 * 3f64.sqrt()) * lg * 2f64.powi(w) * x / d as f64 * s)
}

#[derive(Clone, Debug)]
pub struct CharsumIdentityReport {
    pub x: f64,
    pub d: u64,
    pub fields: usize,
    /// `Σ ζ*_F(1)` over fields unramified at 3 with `d | Δ_F ≤ X`.
    pub lhs: f64,
    /// The same with each `L(χ,1)` truncated at length `⌊X^{1/2}⌋`.
    pub lhs_truncated: f64,
    /// `½ S_d(X^{1/2})`.
    pub rhs: f64,
    /// `½ S_d(X^{1/2})` with inner length `⌊X^{1/2}⌋` (matches the truncated
    /// left side term by term, up to the trivial ideal when `d = 1`).
    pub rhs_matched: f64,
    pub difference: f64,
    /// `|lhs − rhs| / X^{1/4}`.
    pub scaled: f64,
    /// `10·X^{1/4}·log(X)²`.
    pub bound: f64,
}

pub fn verify_charsum_identity(x: f64, d: u64) -> Result<CharsumIdentityReport> {
    if !(x >= 1.0) || x > 1e8 {
        bail!(InvalidInput, "X must lie in [1, 1e8]");
    }
    let fields = enumerate_fields(x, true, d)?;
    let t = isqrt(x.floor() as u64);
    let per_field: Vec<(f64, f64)> = fields
        .par_iter()
        .map(|f| -> Result<(f64, f64)> {
            let z = zeta_residue_fast(f)?;
            let l = l_value_truncated(f.character(), t)?;
            Ok((z, l.abs2().to_f64()))
        })
        .collect::<Result<_>>()?;
    let lhs: f64 = per_field.iter().map(|v| v.0).sum();
    let lhs_truncated: f64 = per_field.iter().map(|v| v.1).sum();
    let y = x.sqrt();
    let (rhs, rhs_matched) = if y >= 1.0 {
        (0.5 * s_d_with(d, y, isqrt(y.floor() as u64))?, 0.5 * s_d_with(d, y, t)?)
    } else {
        (0.0, 0.0)
    };
    let difference = (lhs - rhs).abs();
    let q = x.powf(0.25);
    Ok(CharsumIdentityReport {
        x,
        d,
        fields: fields.len(),
        lhs,
        lhs_truncated,
        rhs,
        rhs_matched,
        difference,
        scaled: difference / q,
        bound: 10.0 * q * x.ln().powi(2),
    })
}

#[derive(Clone, Debug)]
pub struct AverageResidueReport {
    pub x: f64,
    pub d: u64,
    pub fields: usize,
    /// `Σ ζ*_F(1)` over fields unramified at 3 with `d | Δ_F ≤ X`.
    pub sum_residues: f64,
    /// `(7π/26√3)·α·β_d·2^{ω(d)}/d·X^{1/2}`.
    pub predicted: f64,
    pub ratio: f64,
}

pub fn average_residue(x: f64, d: u64) -> Result<AverageResidueReport> {
    if !admissible_divisor(d) {
        bail!(InvalidInput, "d = {d} must be squarefree with prime factors ≡ 1 mod 3");
    }
    if !(x >= 1.0) {
        bail!(InvalidInput, "X must be at least 1");
    }
    if x > 1e12 {
        bail!(LimitExceeded, "X = {x:e} exceeds the limit 1e12");
    }
    let fields = enumerate_fields(x, true, d)?;
    let residues: Vec<f64> = fields.par_iter().map(zeta_residue_fast).collect::<Result<_>>()?;
    let sum_residues: f64 = residues.iter().sum();
    let predicted = predicted_s_d(d, x.sqrt())?;
    Ok(AverageResidueReport { x, d, fields: fields.len(), sum_residues, predicted, ratio: sum_residues / predicted })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eta_values() {
        assert!(eta(1).unwrap().is_one());
        assert_eq!(eta(7).unwrap(), BigRational::new(7.into(), 9.into()));
        assert_eq!(eta(49).unwrap(), BigRational::new(7.into(), 9.into()));
        assert!(eta(10).unwrap().is_one());
    }

    #[test]
    fn inner_sum_matches_double_sum() {
        let (re, im) = s_d_double_sum(1, 100.0).unwrap();
        let fast = s_d(1, 100.0).unwrap();
        assert!((re - fast).abs() < 1e-10 * fast.abs(), "{re} vs {fast}");
        assert!(im.abs() < 1e-10);
    }

    #[test]
    fn cube_pairs_agree() {
        assert_eq!(cube_pairs(1000), cube_pairs_direct(1000));
    }
}
