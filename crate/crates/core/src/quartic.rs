//! A4-quartic fields with a fixed cyclic cubic resolvent `F`, through the
//! pairs `(𝔞, u)`: `𝔞` squarefree of square norm with class in `2Cl_F`, and
//! `u` in the kernel of the norm on the 2-Selmer group. Each pair gives the
//! quadratic extension `K = F(√(uα))` where `(α) = 𝔞𝔟²`; the three
//! conjugates of `K` correspond to one quartic field `L`, with
//! `Δ_L = N((4/𝔠²)𝔞)·Δ_F`.

use crate::classgroup::{factor_principal, is_square, prime_ideal, ClassGroupData};
use crate::cubicfield::{enumerate_fields, BigElt, CyclicCubicField, Ideal, NumberField, SplittingType};
use crate::error::{bail, Error, Result};
use crate::idealcount::{count_squarefree_norm_ideals, Subgroup};
use crate::qmult::{FactoredIdeal, PrimeRef};
use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CountMode {
    Exact,
    LowerBound,
}

impl FromStr for CountMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "exact" => Ok(CountMode::Exact),
            "lower_bound" | "lower-bound" | "lower" => Ok(CountMode::LowerBound),
            _ => Err(Error::InvalidInput(format!("unknown count mode '{s}'"))),
        }
    }
}

impl fmt::Display for CountMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CountMode::Exact => "exact",
            CountMode::LowerBound => "lower_bound",
        })
    }
}

#[derive(Clone, Debug)]
pub struct QuarticConfig {
    /// Counting requires `X ≥ 64·Δ_F^{1+1/ε}`.
    pub epsilon: f64,
    pub enforce_precondition: bool,
    /// Truncation point of the Euler product for `c_F`.
    pub euler_truncation: u64,
}

impl Default for QuarticConfig {
    fn default() -> Self {
        QuarticConfig { epsilon: 1.0, enforce_precondition: true, euler_truncation: 1_000_000 }
    }
}

/// Representatives of `ker(N: Sel₂(F) → Sel₂(Q))`.
#[derive(Clone, Debug)]
pub struct SelmerKernel {
    /// Basis: sign-adjusted fundamental units and generators `δ` with
    /// `(δ) = 𝔡²` for `𝔡` of odd norm spanning `Cl_F[2]`.
    pub generators: Vec<BigElt>,
    /// All products of subsets of the basis; index bit `i` selects
    /// generator `i`. Element 0 is 1.
    pub elements: Vec<BigElt>,
    pub size: usize,
}

pub fn selmer_kernel(cg: &ClassGroupData) -> Result<SelmerKernel> {
    let nf = &**cg.order();
    let mut candidates: Vec<BigElt> = vec![cg.units[0].clone(), cg.units[1].clone()];
    for t in cg.two_torsion_generators() {
        let d = cg.ideal_in_class(&t)?;
        let d2 = d.mul(&d);
        let delta = cg
            .principal_generator(&d2)?
            .ok_or_else(|| Error::Consistency("square of a 2-torsion class is not principal".into()))?;
        candidates.push(delta);
    }
    // −1 generates the cokernel of the norm on units mod squares; any
    // generator of negative norm is moved into the kernel by multiplying by it
    let generators: Vec<BigElt> = candidates
        .into_iter()
        .map(|g| if nf.norm_big(&g).is_negative() { g.map(|c| -c) } else { g })
        .collect();
    let k = generators.len();
    let mut elements: Vec<BigElt> = Vec::with_capacity(1 << k);
    for mask in 0usize..(1 << k) {
        let mut x: BigElt = [BigInt::one(), BigInt::zero(), BigInt::zero()];
        for (i, g) in generators.iter().enumerate() {
            if mask >> i & 1 == 1 {
                x = nf.mul_big(&x, g);
            }
        }
        elements.push(x);
    }
    let want = 4 * cg.two_torsion_size() as usize;
    if elements.len() != want {
        bail!(Consistency, "Selmer kernel has {} elements, expected 4·#Cl[2] = {want}", elements.len());
    }
    for (i, x) in elements.iter().enumerate() {
        let n = nf.norm_big(x);
        if n.is_negative() || crate::arith::exact_sqrt(&n).is_none() {
            bail!(Consistency, "Selmer element {i} has norm {n}, not a positive square");
        }
        if factor_principal(nf, x)?.factors().iter().any(|(_, e)| e % 2 == 1) {
            bail!(Consistency, "Selmer element {i} has an odd valuation");
        }
        if i > 0 && is_square(nf, x) {
            bail!(Consistency, "Selmer element {i} is a square; generators are dependent");
        }
    }
    Ok(SelmerKernel { size: elements.len(), generators, elements })
}

#[derive(Clone, Debug)]
pub struct QuarticWitness {
    pub ideal_a: FactoredIdeal,
    /// Index into [`SelmerKernel::elements`].
    pub selmer_u: usize,
    pub alpha: BigElt,
    pub beta: BigElt,
    /// Primes above 2 dividing `𝔠`.
    pub c_ideal: Vec<PrimeRef>,
    pub c_norm: u64,
    pub disc_l: u128,
    pub fiber_id: usize,
}

impl QuarticWitness {
    pub fn norm_a(&self) -> u128 {
        self.ideal_a.norm_u128().unwrap_or(0)
    }
}

#[derive(Clone, Debug)]
pub struct QuarticEnumeration {
    pub conductor: u64,
    pub x: u64,
    pub selmer_size: usize,
    pub two_torsion: u64,
    pub witnesses: Vec<QuarticWitness>,
    /// Witness indices of each fiber.
    pub fibers: Vec<[usize; 3]>,
}

impl QuarticEnumeration {
    pub fn field_count(&self) -> usize {
        self.fibers.len()
    }

    /// Smallest quartic discriminant found.
    pub fn min_disc(&self) -> Option<u128> {
        self.witnesses.iter().map(|w| w.disc_l).min()
    }

    /// Rows `(conductor_F, disc_L, norm_a, u_index, c_norm, fiber_id)`.
    pub fn rows(&self) -> Vec<(u64, u128, u128, usize, u64, usize)> {
        let mut v: Vec<_> = self
            .witnesses
            .iter()
            .map(|w| (self.conductor, w.disc_l, w.norm_a(), w.selmer_u, w.c_norm, w.fiber_id))
            .collect();
        v.sort_by_key(|r| (r.5, r.2, r.3));
        v
    }
}

/// Squarefree ideals of square norm `≤ n_max`: products over distinct split
/// `p` of two of the three primes above `p`.
pub fn square_norm_ideals(field: &CyclicCubicField, n_max: u128) -> Result<Vec<FactoredIdeal>> {
    let pmax = crate::arith::isqrt_u128(n_max) as u64;
    if pmax > 100_000_000 {
        bail!(LimitExceeded, "square-norm enumeration limited to N ≤ 10^16");
    }
    let split: Vec<u64> = crate::arith::primes_up_to(pmax.max(2))
        .into_iter()
        .filter(|&p| p <= pmax && field.splitting_type(p) == SplittingType::Split)
        .collect();
    let mut out = Vec::new();
    fn rec(split: &[u64], start: usize, prod: u64, pmax: u64, cur: &mut Vec<(PrimeRef, u32)>, out: &mut Vec<FactoredIdeal>) {
        out.push(FactoredIdeal::new(cur.clone()));
        for i in start..split.len() {
            let p = split[i];
            if prod.saturating_mul(p) > pmax {
                break;
            }
            for omit in 0..3u8 {
                let pair: Vec<u8> = (0..3).filter(|&j| j != omit).collect();
                for &j in &pair {
                    cur.push((PrimeRef { p, index: j, degree: 1 }, 1));
                }
                rec(split, i + 1, prod * p, pmax, cur, out);
                cur.truncate(cur.len() - 2);
            }
        }
    }
    rec(&split, 0, 1, pmax, &mut Vec::new(), &mut out);
    Ok(out)
}

/// `N(𝔞)^{1/2}𝔞^{-1}`: for each `p`, the prime above `p` missing from `𝔞`.
pub fn square_to_squarefree(a: &FactoredIdeal) -> Result<FactoredIdeal> {
    let mut out = Vec::new();
    for (p, block) in a.blocks() {
        if block.len() != 2 || block.iter().any(|(q, e)| *e != 1 || q.degree != 1) {
            bail!(InvalidInput, "ideal is not a product of two distinct primes above {p}");
        }
        let present: Vec<u8> = block.iter().map(|(q, _)| q.index).collect();
        let missing = (0..3u8).find(|i| !present.contains(i)).unwrap();
        out.push((PrimeRef { p, index: missing, degree: 1 }, 1));
    }
    Ok(FactoredIdeal::new(out))
}

/// `N(𝔟)𝔟^{-1}` for `𝔟` with one split prime above each `p`.
pub fn squarefree_to_square(b: &FactoredIdeal) -> Result<FactoredIdeal> {
    let mut out = Vec::new();
    for (p, block) in b.blocks() {
        if block.len() != 1 || block[0].1 != 1 || block[0].0.degree != 1 {
            bail!(InvalidInput, "ideal is not squarefree of squarefree norm at {p}");
        }
        for i in (0..3u8).filter(|&i| i != block[0].0.index) {
            out.push((PrimeRef { p, index: i, degree: 1 }, 1));
        }
    }
    Ok(FactoredIdeal::new(out))
}

/// `σ(𝔞)`.
pub fn sigma_ideal(nf: &NumberField, a: &FactoredIdeal) -> Result<FactoredIdeal> {
    let mut out = Vec::with_capacity(a.factors().len());
    for (q, e) in a.factors() {
        let pr = prime_ideal(nf, q)?;
        out.push((PrimeRef::from(&nf.sigma_prime(&pr)?), *e));
    }
    Ok(FactoredIdeal::new(out))
}

/// The largest `𝔠 | 2O_F` coprime to `𝔞` with `x² ≡ β mod 𝔠²` solvable,
/// as the list of primes above 2 dividing it and its norm.
///
/// Every residue class mod `𝔠²` is represented by an element with
/// coordinates in `[0, 4)` since `𝔠² | 4O_F`; all 64 are tried for every
/// candidate `𝔠`.
pub fn conductor_at_two(nf: &NumberField, beta: &BigElt, a: &FactoredIdeal) -> Result<(Vec<PrimeRef>, u64)> {
    if beta.iter().all(|c| c.is_zero()) {
        bail!(InvalidInput, "β = 0");
    }
    let above2 = nf.primes_above(2)?;
    let mut free = Vec::new();
    for pr in &above2 {
        let q = PrimeRef::from(pr);
        let v = nf.valuation(pr, beta);
        let va = a.exponent(&q);
        if v != va || v > 1 {
            bail!(InvalidInput, "β has valuation {v} at a prime above 2 where 𝔞 has {va}: (β)/𝔞 is not a square prime to 2");
        }
        if va == 0 {
            free.push(pr.clone());
        }
    }
    let reps: Vec<BigElt> = (0..64)
        .map(|i| [BigInt::from(i & 3), BigInt::from(i >> 2 & 3), BigInt::from(i >> 4)])
        .collect();
    let diffs: Vec<BigElt> = reps
        .iter()
        .map(|x| {
            let s = nf.mul_big(x, x);
            std::array::from_fn(|k| &s[k] - &beta[k])
        })
        .collect();
    let mut solvable = Vec::new();
    for mask in 0usize..(1 << free.len()) {
        let mut c = Ideal::unit();
        for (i, pr) in free.iter().enumerate() {
            if mask >> i & 1 == 1 {
                c = c.mul(nf, &Ideal::from_prime(nf, pr));
            }
        }
        let c2 = c.pow(nf, 2);
        if diffs.iter().any(|d| c2.contains(d)) {
            solvable.push((mask, c.norm()));
        }
    }
    let best = solvable.iter().max_by_key(|(m, _)| m.count_ones()).unwrap().clone();
    if solvable.iter().any(|(m, _)| m & !best.0 != 0) {
        bail!(Consistency, "solvable moduli at 2 are not closed under lcm");
    }
    let primes = free.iter().enumerate().filter(|(i, _)| best.0 >> i & 1 == 1).map(|(_, pr)| PrimeRef::from(pr)).collect();
    Ok((primes, best.1.to_u64().unwrap()))
}

/// `Δ_L = 64·N(𝔞)·Δ_F / N(𝔠)²`.
pub fn quartic_discriminant(field: &CyclicCubicField, norm_a: u128, c_norm: u64) -> Result<u128> {
    let num = 64u128
        .checked_mul(norm_a)
        .and_then(|v| v.checked_mul(field.discriminant() as u128))
        .ok_or_else(|| Error::LimitExceeded("discriminant exceeds 128 bits".into()))?;
    let c2 = (c_norm as u128) * (c_norm as u128);
    if num % c2 != 0 {
        bail!(Consistency, "N(𝔠)² = {c2} does not divide 64·N(𝔞)·Δ_F");
    }
    Ok(num / c2)
}

fn check_disc_shape(field: &CyclicCubicField, w: &QuarticWitness) -> Result<()> {
    let d = field.discriminant() as u128;
    if w.disc_l % d != 0 {
        bail!(Consistency, "Δ_L = {} is not a multiple of Δ_F", w.disc_l);
    }
    let mut q = w.disc_l / d;
    while q % 2 == 0 {
        q /= 2;
    }
    let r = crate::arith::isqrt_u128(q);
    if r * r != q {
        bail!(Consistency, "odd part of Δ_L/Δ_F = {} is not a square", w.disc_l / d);
    }
    Ok(())
}

/// Every A4-quartic field with resolvent `F` and `Δ_L ≤ X`, as witnesses
/// grouped into fibers of three conjugate pairs.
pub fn enumerate_quartics(field: &CyclicCubicField, x: u64) -> Result<QuarticEnumeration> {
    let cg = field.class_group()?;
    let nf = &**cg.order();
    let kernel = selmer_kernel(&cg)?;
    let delta = field.discriminant() as u128;
    let mut out = QuarticEnumeration {
        conductor: field.conductor(),
        x,
        selmer_size: kernel.size,
        two_torsion: cg.two_torsion_size(),
        witnesses: Vec::new(),
        fibers: Vec::new(),
    };
    if (x as u128) < delta {
        return Ok(out);
    }
    let ideals = square_norm_ideals(field, x as u128 / delta)?;
    let per_ideal: Vec<Option<(FactoredIdeal, BigElt, Vec<QuarticWitness>)>> = ideals
        .par_iter()
        .map(|a| -> Result<Option<(FactoredIdeal, BigElt, Vec<QuarticWitness>)>> {
            if !cg.in_two_cl(a)? {
                return Ok(None);
            }
            let (_, alpha) = cg.square_norm_generator(a)?;
            let na = a.norm_u128().ok_or_else(|| Error::LimitExceeded("ideal norm exceeds 128 bits".into()))?;
            let mut ws = Vec::new();
            for (i, u) in kernel.elements.iter().enumerate() {
                let beta = nf.mul_big(u, &alpha);
                if a.is_unit() && is_square(nf, &beta) {
                    continue;
                }
                let (c_ideal, c_norm) = conductor_at_two(nf, &beta, a)?;
                let disc_l = quartic_discriminant(field, na, c_norm)?;
                if disc_l > x as u128 {
                    continue;
                }
                ws.push(QuarticWitness {
                    ideal_a: a.clone(),
                    selmer_u: i,
                    alpha: alpha.clone(),
                    beta,
                    c_ideal,
                    c_norm,
                    disc_l,
                    fiber_id: usize::MAX,
                });
            }
            Ok(Some((a.clone(), alpha, ws)))
        })
        .collect::<Result<_>>()?;
    let mut alphas: HashMap<FactoredIdeal, BigElt> = HashMap::new();
    for (a, alpha, ws) in per_ideal.into_iter().flatten() {
        alphas.insert(a, alpha);
        out.witnesses.extend(ws);
    }
    out.witnesses.sort_by(|a, b| (a.disc_l, &a.ideal_a, a.selmer_u).cmp(&(b.disc_l, &b.ideal_a, b.selmer_u)));
    for w in &out.witnesses {
        check_disc_shape(field, w)?;
    }
    group_fibers(nf, &kernel, &alphas, &mut out)?;
    Ok(out)
}

/// Groups witnesses into orbits of the Galois action: the image of
/// `(𝔞, u)` is the pair `(σ𝔞, u')` with `σ(β)·u'α_{σ𝔞}` a square.
fn group_fibers(
    nf: &NumberField,
    kernel: &SelmerKernel,
    alphas: &HashMap<FactoredIdeal, BigElt>,
    out: &mut QuarticEnumeration,
) -> Result<()> {
    let index: HashMap<(FactoredIdeal, usize), usize> =
        out.witnesses.iter().enumerate().map(|(i, w)| ((w.ideal_a.clone(), w.selmer_u), i)).collect();
    let image: Vec<usize> = out
        .witnesses
        .par_iter()
        .map(|w| -> Result<usize> {
            let sa = sigma_ideal(nf, &w.ideal_a)?;
            let alpha = alphas
                .get(&sa)
                .ok_or_else(|| Error::Consistency("conjugate ideal missing from the enumeration".into()))?;
            let sb = nf.sigma_big(&w.beta);
            let base = nf.mul_big(&sb, alpha);
            for (j, u) in kernel.elements.iter().enumerate() {
                if is_square(nf, &nf.mul_big(&base, u)) {
                    return index.get(&(sa.clone(), j)).copied().ok_or_else(|| {
                        Error::Consistency(format!("conjugate of a witness with Δ_L = {} is not enumerated", w.disc_l))
                    });
                }
            }
            bail!(Consistency, "no Selmer twist matches the conjugate of a witness")
        })
        .collect::<Result<_>>()?;
    let mut seen = vec![false; image.len()];
    for start in 0..image.len() {
        if seen[start] {
            continue;
        }
        let b = image[start];
        let c = image[b];
        if b == start || c == start || image[c] != start {
            bail!(Consistency, "Galois orbit of witness {start} does not have length 3");
        }
        for &k in &[start, b, c] {
            if seen[k] {
                bail!(Consistency, "fibers overlap at witness {k}");
            }
            seen[k] = true;
        }
        let disc = out.witnesses[start].disc_l;
        if out.witnesses[b].disc_l != disc || out.witnesses[c].disc_l != disc {
            bail!(Consistency, "fiber members have different discriminants");
        }
        let id = out.fibers.len();
        for &k in &[start, b, c] {
            out.witnesses[k].fiber_id = id;
        }
        out.fibers.push([start, b, c]);
    }
    Ok(())
}

#[derive(Clone, Debug)]
pub struct QuarticCountReport {
    pub conductor: u64,
    pub x: u64,
    pub mode: CountMode,
    pub count: u64,
    pub main_term: f64,
    pub ratio: f64,
    pub two_torsion: u64,
    /// Lower-bound mode: squarefree-norm ideal count at `(X/64Δ_F)^{1/2}`.
    pub ideal_count: Option<u64>,
    /// Exact mode: number of fields by `N(𝔠)`.
    pub by_c_norm: Vec<(u64, u64)>,
    pub min_disc: Option<u128>,
}

fn check_precondition(field: &CyclicCubicField, x: u64, cfg: &QuarticConfig) -> Result<()> {
    if !cfg.enforce_precondition {
        return Ok(());
    }
    if !(cfg.epsilon > 0.0) {
        bail!(InvalidInput, "ε must be positive");
    }
    let need = 64.0 * (field.discriminant() as f64).powf(1.0 + 1.0 / cfg.epsilon);
    if (x as f64) < need {
        bail!(InvalidInput, "X = {x} is below 64·Δ_F^(1+1/ε) = {need}");
    }
    Ok(())
}

/// Largest `n` with `64·Δ_F·n² ≤ X`.
pub fn lower_bound_cutoff(field: &CyclicCubicField, x: u64) -> u64 {
    let q = x as u128 / (64 * field.discriminant() as u128);
    crate::arith::isqrt_u128(q) as u64
}

pub fn count_quartics(field: &CyclicCubicField, x: u64, mode: CountMode, cfg: &QuarticConfig) -> Result<QuarticCountReport> {
    check_precondition(field, x, cfg)?;
    let main_term = quartic_main_term(field, x as f64, cfg.euler_truncation)?;
    let cg = field.class_group()?;
    let two = cg.two_torsion_size();
    let mut report = QuarticCountReport {
        conductor: field.conductor(),
        x,
        mode,
        count: 0,
        main_term,
        ratio: 0.0,
        two_torsion: two,
        ideal_count: None,
        by_c_norm: Vec::new(),
        min_disc: None,
    };
    match mode {
        CountMode::LowerBound => {
            let n = lower_bound_cutoff(field, x);
            let ic = count_squarefree_norm_ideals(field, field.discriminant(), Subgroup::Squares, n)?.exact_count;
            let pairs = 4 * two * ic - 1;
            if pairs % 3 != 0 {
                bail!(Consistency, "4·#Cl[2]·{ic} − 1 is not divisible by 3");
            }
            report.count = pairs / 3;
            report.ideal_count = Some(ic);
        }
        CountMode::Exact => {
            let e = enumerate_quartics(field, x)?;
            report.count = e.field_count() as u64;
            let mut hist: HashMap<u64, u64> = HashMap::new();
            for f in &e.fibers {
                *hist.entry(e.witnesses[f[0]].c_norm).or_default() += 1;
            }
            let mut h: Vec<(u64, u64)> = hist.into_iter().collect();
            h.sort();
            report.by_c_norm = h;
            report.min_disc = e.min_disc();
        }
    }
    report.ratio = report.count as f64 / main_term;
    Ok(report)
}

/// `ζ*_F(1)·c_F·X^{1/2}/(6Δ_F^{1/2})`.
pub fn quartic_main_term(field: &CyclicCubicField, x: f64, p_max: u64) -> Result<f64> {
    let z = crate::lfunc::zeta_residue_fast(field)?;
    let c = crate::constants::c_f(field, p_max)?.value;
    Ok(z * c * x.sqrt() / (6.0 * (field.discriminant() as f64).sqrt()))
}

#[derive(Clone, Debug)]
pub struct AggregateReport {
    pub x: u64,
    /// `(conductor, exact count)` for every field used.
    pub fields: Vec<(u64, u64)>,
    pub total: u64,
    /// `total / (X^{1/2}·log X)`.
    pub statistic: f64,
}

/// Exact counts summed over fields unramified at 3 with `Δ_F ≤ X^{1/4}`.
pub fn aggregate_counts(x: u64) -> Result<AggregateReport> {
    let fields = enumerate_fields((x as f64).powf(0.25), true, 1)?;
    let mut rows = Vec::with_capacity(fields.len());
    let mut total = 0u64;
    for f in &fields {
        let n = enumerate_quartics(f, x)?.field_count() as u64;
        total += n;
        rows.push((f.conductor(), n));
    }
    let xf = x as f64;
    Ok(AggregateReport { x, fields: rows, total, statistic: total as f64 / (xf.sqrt() * xf.ln()) })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn selmer_size_conductor_7() {
        let f7 = CyclicCubicField::of_prime_conductor(7).unwrap();
        let k = selmer_kernel(&f7.class_group().unwrap()).unwrap();
        assert_eq!(k.size, 4);
        assert_eq!(k.elements[0], [BigInt::one(), BigInt::zero(), BigInt::zero()]);
    }

    #[test]
    fn conductor_at_two_examples() {
        let f7 = CyclicCubicField::of_prime_conductor(7).unwrap();
        let nf = f7.order().unwrap();
        let one = FactoredIdeal::unit();
        let b: BigElt = [BigInt::from(5), BigInt::from(4), BigInt::from(8)];
        let (c, n) = conductor_at_two(&nf, &b, &one).unwrap();
        assert_eq!(n, 8);
        assert_eq!(c.len(), 1);
        let (_, n) = conductor_at_two(&nf, &[BigInt::from(3), BigInt::zero(), BigInt::zero()], &one).unwrap();
        assert!(n == 1 || n == 8);
        assert!(conductor_at_two(&nf, &[BigInt::from(4), BigInt::zero(), BigInt::zero()], &one).is_err());
    }

    #[test]
    fn empty_below_discriminant() {
        let f7 = CyclicCubicField::of_prime_conductor(7).unwrap();
        assert!(enumerate_quartics(&f7, 48).unwrap().witnesses.is_empty());
    }
}
