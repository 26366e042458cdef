//! Leading constants as truncated Euler products with tail bounds.

use crate::arith::{factor, primes_up_to};
use crate::charsum::eta_prime;
use crate::cubicfield::{admissible_divisor, CyclicCubicField, SplittingType};
use crate::error::{bail, Result};
use crate::precision::Dd;
use crate::qmult::{l_gamma, prime_square_tail, EisensteinRing, EulerProduct};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive};
use rayon::prelude::*;

const BLOCK: usize = 4096;

fn ratio(n: i64, d: u64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// Product of `factor(p)` over the given primes, in fixed blocks so the
/// result does not depend on the thread count.
fn blocked_product(primes: &[u64], factor: impl Fn(u64) -> f64 + Sync) -> Dd {
    let parts: Vec<Dd> = primes
        .par_chunks(BLOCK)
        .map(|chunk| chunk.iter().fold(Dd::from_f64(1.0), |acc, &p| acc * Dd::from_f64(1.0).add_f64(factor(p) - 1.0)))
        .collect();
    parts.into_iter().fold(Dd::from_f64(1.0), |a, b| a * b)
}

fn with_tail(name: &str, p_max: u64, value: f64, c: f64) -> EulerProduct {
    let tau = (c * prime_square_tail(p_max)).exp_m1();
    EulerProduct { name: name.into(), truncation: p_max, value, tail_bound: value.abs() * tau }
}

/// Local factor of `c_F` at `p`, exact.
pub fn c_f_local(field: &CyclicCubicField, p: u64) -> BigRational {
    let x = ratio(1, p);
    let one = BigRational::one();
    match field.splitting_type(p) {
        SplittingType::Ramified => &one - &x,
        SplittingType::Split => {
            let a = &one - &x;
            &a * &a * &a * (&one + &x * BigRational::from_integer(3.into()))
        }
        SplittingType::Inert => &one - &x * &x * &x,
    }
}

fn c_f_local_f64(field: &CyclicCubicField, p: u64) -> f64 {
    let x = 1.0 / p as f64;
    match field.splitting_type(p) {
        SplittingType::Ramified => 1.0 - x,
        SplittingType::Split => (1.0 - x).powi(3) * (1.0 + 3.0 * x),
        SplittingType::Inert => 1.0 - x * x * x,
    }
}

/// `c_F = Π_p (local factor)`, truncated at `p_max` (ramified primes always
/// included).
///
/// For `p ≥ 17`: split `log((1−x)³(1+3x)) = −6x² + 8x³ − …`, inert
/// `|log(1−x³)| ≤ 2x³`, so every factor has `|log| ≤ 7/p²`.
pub fn c_f(field: &CyclicCubicField, p_max: u64) -> Result<EulerProduct> {
    let p_max = p_max.max(17);
    let mut primes = primes_up_to(p_max);
    for &p in field.ramified_primes() {
        if p > p_max {
            primes.push(p);
        }
    }
    for &p in primes.iter().take(2000) {
        let v = c_f_local_f64(field, p);
        if !(v > 0.0 && v < 1.0) {
            bail!(Consistency, "c_F factor at {p} is {v}, outside (0, 1)");
        }
    }
    let value = blocked_product(&primes, |p| c_f_local_f64(field, p)).to_f64();
    Ok(with_tail("c_F", p_max, value, 7.0))
}

/// `7π/(26√3)`.
pub fn leading_constant() -> f64 {
    7.0 * std::f64::consts::PI / (26.0 * 3f64.sqrt())
}

fn alpha_local_f64(p: u64) -> f64 {
    let x = 1.0 / p as f64;
    let x3 = x * x * x;
    match p % 3 {
        1 => {
            let num = 1.0 + 3.0 * x + x * x - x3 * x3;
            (1.0 - x).powi(2) * (1.0 + 2.0 * x + x * x * num / ((1.0 - x3) * (1.0 - x3)))
        }
        2 => (1.0 + x3) / (1.0 - x3),
        _ => 1.0,
    }
}

/// `α` from its closed-form Euler product.
///
/// For `p ≥ 7`, `p ≡ 1 mod 3`: the factor is `1 − 2x² + O(x³)`; for
/// `p ≡ 2 mod 3` it is `1 + 2x³ + O(x⁶)`. Hence `|log| ≤ 3/p²`.
pub fn alpha(p_max: u64) -> EulerProduct {
    let p_max = p_max.max(7);
    let primes = primes_up_to(p_max);
    let value = blocked_product(&primes, alpha_local_f64).to_f64();
    with_tail("alpha", p_max, value, 3.0)
}

/// Local factor at `p` of the η-weighted series
/// `Σ μ²(d₁d₂) η(d₁²d₂⁴m₁³m₂³·d)/(d₁²d₂⁴m₁³m₂³)`, summed term by term over
/// the exponents `(d₁, d₂, m₁, m₂)` until `p^{-k}` drops below `1e-40`.
pub fn eta_series_local(p: u64, d: u64) -> f64 {
    let lp = (p as f64).ln();
    let m_max = (40.0 * std::f64::consts::LN_10 / (3.0 * lp)).ceil() as u32 + 1;
    let p_divides_d = d % p == 0;
    let eta_p = eta_prime(p);
    let mut s = 0.0f64;
    let mut terms: Vec<f64> = Vec::new();
    for (a, b) in [(0u32, 0u32), (1, 0), (0, 1)] {
        for m1 in 0..=m_max {
            for m2 in 0..=m_max {
                let k = 2 * a + 4 * b + 3 * m1 + 3 * m2;
                let eta = if k > 0 || p_divides_d { eta_p } else { 1.0 };
                terms.push(eta * (-(k as f64) * lp).exp());
            }
        }
    }
    // smallest first
    terms.sort_by(|x, y| x.partial_cmp(y).unwrap());
    for t in terms {
        s += t;
    }
    s
}

/// `α·β_d` assembled from `(π/3√3)·L(γ_{Q(ζ3),3},1)` times the η-weighted
/// series, divided by `7π/(26√3)`.
///
/// The combined local factor is `1 + O(x²)` with `|log| ≤ 6/p²` for `p ≥ 7`
/// (`3x²` from the `L(γ)` factor, at most `2x²` from the series).
pub fn alpha_beta_assembled(d: u64, p_max: u64) -> Result<EulerProduct> {
    if !admissible_divisor(d) {
        bail!(InvalidInput, "d = {d} must be squarefree with prime factors ≡ 1 mod 3");
    }
    let p_max = p_max.max(7);
    let lg = l_gamma(&EisensteinRing, 3, p_max)?;
    let mut primes = primes_up_to(p_max);
    for (p, _) in factor(d) {
        if p > p_max {
            primes.push(p);
        }
    }
    let series = blocked_product(&primes, |p| eta_series_local(p, d)).to_f64();
    let zeta_star = std::f64::consts::PI / (3.0 * 3f64.sqrt());
    let value = zeta_star * lg.value * series / leading_constant();
    Ok(with_tail("alpha*beta_d (assembled)", p_max, value, 6.0))
}

/// `β_d` exactly.
pub fn beta_d(d: u64) -> Result<BigRational> {
    if !admissible_divisor(d) {
        bail!(InvalidInput, "d = {d} must be squarefree with prime factors ≡ 1 mod 3");
    }
    let mut acc = BigRational::one();
    for (p, _) in factor(d) {
        acc *= beta_p(p);
    }
    Ok(acc)
}

fn beta_p(p: u64) -> BigRational {
    let one = BigRational::one();
    let x = ratio(1, p);
    let x2 = &x * &x;
    let x3 = &x2 * &x;
    let x6 = &x3 * &x3;
    let three = BigRational::from_integer(3.into());
    let two = BigRational::from_integer(2.into());
    let a = (&one - &x + &x2) / (&one + &x + &x2);
    let b = (&one - &x) * (&one - &x);
    let num = &one + &three * &x + &x2 - &x6;
    let den = (&one - &x3) * (&one - &x3);
    let c = &one + &two * &x + &x2 * num / den;
    a / b / c
}

pub fn beta_d_f64(d: u64) -> Result<f64> {
    Ok(beta_d(d)?.to_f64().unwrap_or(f64::NAN))
}

/// Local Tamagawa mass at an odd prime.
pub fn tamagawa_local(field: &CyclicCubicField, p: u64) -> Result<BigRational> {
    if p == 2 {
        bail!(InvalidInput, "the 2-adic Tamagawa factor is not covered");
    }
    if !crate::arith::is_prime(p) {
        bail!(InvalidInput, "{p} is not prime");
    }
    Ok(match field.splitting_type(p) {
        SplittingType::Ramified => {
            let v = crate::arith::valuation_big(&BigInt::from(field.discriminant()), p);
            ratio(1, p.pow(v / 2))
        }
        SplittingType::Split => ratio(p as i64 + 3, p),
        SplittingType::Inert => BigRational::one(),
    })
}

/// Inverse local factor of `ζ_F(1)` at `p`.
pub fn convergence_factor(field: &CyclicCubicField, p: u64) -> BigRational {
    let one = BigRational::one();
    let x = ratio(1, p);
    match field.splitting_type(p) {
        SplittingType::Ramified => &one - &x,
        SplittingType::Split => {
            let a = &one - &x;
            &a * &a * &a
        }
        SplittingType::Inert => &one - &x * &x * &x,
    }
}

#[derive(Clone, Debug)]
pub struct TamagawaReport {
    pub conductor: u64,
    pub primes_checked: usize,
    /// All per-prime identities hold in exact arithmetic.
    pub exact: bool,
    /// Largest per-prime difference when both sides are evaluated in f64.
    pub residual: f64,
    pub unchecked_places: Vec<String>,
}

/// Per odd prime `p ≤ P`: Tamagawa mass × convergence factor equals the
/// `c_F` factor times the `p`-part of `Δ_F^{-1/2}`.
pub fn verify_tamagawa_matches_cf(field: &CyclicCubicField, p_max: u64) -> Result<TamagawaReport> {
    let disc = BigInt::from(field.discriminant());
    let primes: Vec<u64> = primes_up_to(p_max).into_iter().filter(|&p| p != 2).collect();
    let per_prime: Vec<Result<(bool, f64)>> = primes
        .par_iter()
        .map(|&p| {
            let lhs = tamagawa_local(field, p)? * convergence_factor(field, p);
            let v = crate::arith::valuation_big(&disc, p);
            let rhs = c_f_local(field, p) * ratio(1, p.pow(v / 2));
            let lhs_f = lhs.to_f64().unwrap_or(f64::NAN);
            let rhs_f = c_f_local_f64(field, p) / (p as f64).powi(v as i32 / 2);
            Ok((lhs == rhs, (lhs_f - rhs_f).abs()))
        })
        .collect();
    let mut exact = true;
    let mut residual = 0.0f64;
    for r in per_prime {
        let (e, d) = r?;
        exact &= e;
        residual = residual.max(d);
    }
    Ok(TamagawaReport {
        conductor: field.conductor(),
        primes_checked: primes.len(),
        exact,
        residual,
        unchecked_places: vec!["2".into(), "infinity".into()],
    })
}

/// Relative difference of the two routes to `α` at a common truncation.
pub fn alpha_route_discrepancy(p_max: u64) -> Result<(EulerProduct, EulerProduct, f64)> {
    let a = alpha(p_max);
    let b = alpha_beta_assembled(1, p_max)?;
    let rel = (a.value - b.value).abs() / b.value;
    Ok((a, b, rel))
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::Zero;

    #[test]
    fn local_factors() {
        let f7 = CyclicCubicField::of_prime_conductor(7).unwrap();
        assert_eq!(c_f_local(&f7, 13), ratio(12 * 12 * 12 * 16, 13u64.pow(4)));
        assert_eq!(c_f_local(&f7, 7), ratio(6, 7));
        assert_eq!(tamagawa_local(&f7, 7).unwrap(), ratio(1, 7));
        assert_eq!(tamagawa_local(&f7, 13).unwrap(), ratio(16, 13));
        assert!(tamagawa_local(&f7, 2).is_err());
    }

    #[test]
    fn beta_values() {
        assert!(beta_d(1).unwrap().is_one());
        let b7 = beta_d(7).unwrap();
        assert!(b7 > BigRational::zero() && b7 < BigRational::one());
        assert!(beta_d(5).is_err());
        assert!(beta_d(49).is_err());
    }

    #[test]
    fn eta_series_closed_form() {
        // Σ over the exponent patterns in closed form:
        // 1 + η(p)((1 + x² + x⁴)/(1 − x³)² − 1).
        for p in [2u64, 3, 7, 13, 101] {
            let x = 1.0 / p as f64;
            let g = (1.0 + x * x + x.powi(4)) / (1.0 - x.powi(3)).powi(2);
            let want = 1.0 + eta_prime(p) * (g - 1.0);
            assert!((eta_series_local(p, 1) - want).abs() < 1e-14, "p = {p}");
        }
    }
}
