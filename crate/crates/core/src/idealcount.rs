//! Exact counts of ideals of squarefree norm coprime to `M`, by class.
//!
//! An ideal of squarefree norm coprime to `M` is a product of distinct
//! primes of degree one: at most one prime above each split `p ∤ M` and
//! optionally the ramified prime above `p | Δ_F`, `p ∤ M`. The count is a
//! depth-first product over those primes with a running norm and class.

use crate::arith::primes_up_to;
use crate::classgroup::ClassGroupData;
use crate::cubicfield::{CyclicCubicField, SplittingType};
use crate::error::{bail, Error, Result};
use crate::lfunc::zeta_residue_fast;
use crate::qmult::{l_gamma, FactoredIdeal, PrimeRef};
use rayon::prelude::*;
use std::fmt;
use std::str::FromStr;

pub const MAX_X: u64 = 1_000_000_000;

/// Subgroups of the class group that can be counted against.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Subgroup {
    Full,
    /// `2Cl_F`.
    Squares,
    /// Principal classes.
    Trivial,
}

impl FromStr for Subgroup {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "cl" | "full" => Ok(Subgroup::Full),
            "2cl" | "squares" => Ok(Subgroup::Squares),
            "1" | "trivial" | "principal" => Ok(Subgroup::Trivial),
            _ => Err(Error::InvalidInput(format!("unknown subgroup `{s}` (expected cl, 2cl or trivial)"))),
        }
    }
}

impl fmt::Display for Subgroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Subgroup::Full => "cl",
            Subgroup::Squares => "2cl",
            Subgroup::Trivial => "trivial",
        })
    }
}

impl Subgroup {
    pub fn order(&self, cg: &ClassGroupData) -> u64 {
        match self {
            Subgroup::Full => cg.h,
            Subgroup::Squares => cg.h / cg.two_torsion_size(),
            Subgroup::Trivial => 1,
        }
    }

    pub fn contains(&self, cg: &ClassGroupData, class: &[u64]) -> bool {
        match self {
            Subgroup::Full => true,
            Subgroup::Squares => cg.halve(class).is_some(),
            Subgroup::Trivial => class.iter().all(|c| *c == 0),
        }
    }

    /// Characters of the class group trivial on the subgroup, as exponent
    /// vectors `a` with `χ_a(c) = exp(2πi Σ a_i c_i / d_i)`.
    pub fn annihilator(&self, cg: &ClassGroupData) -> Vec<Vec<u64>> {
        let d = &cg.elementary_divisors;
        let choices: Vec<Vec<u64>> = d
            .iter()
            .map(|&di| match self {
                Subgroup::Full => vec![0],
                Subgroup::Squares => {
                    if di % 2 == 0 {
                        vec![0, di / 2]
                    } else {
                        vec![0]
                    }
                }
                Subgroup::Trivial => (0..di).collect(),
            })
            .collect();
        let mut out = vec![Vec::new()];
        for c in choices {
            out = out.into_iter().flat_map(|v| c.iter().map(move |x| [v.clone(), vec![*x]].concat())).collect();
        }
        out
    }
}

#[derive(Clone, Debug)]
pub struct IdealCountReport {
    pub conductor: u64,
    pub exact_count: u64,
    pub main_term: f64,
    pub ratio: f64,
    pub x: u64,
    pub m: u64,
    pub subgroup: Subgroup,
    /// `#H/#Cl_F`.
    pub density: f64,
    pub zeta_residue: f64,
    pub l_gamma: f64,
    pub l_gamma_tail: f64,
}

/// Number of ideals in each class, indexed by the mixed-radix encoding of
/// class vectors.
#[derive(Clone, Debug)]
pub struct ClassHistogram {
    pub divisors: Vec<u64>,
    pub counts: Vec<u64>,
}

impl ClassHistogram {
    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn decode(&self, mut idx: usize) -> Vec<u64> {
        self.divisors
            .iter()
            .map(|&d| {
                let c = idx as u64 % d;
                idx /= d as usize;
                c
            })
            .collect()
    }
}

fn encode(divisors: &[u64], c: &[u64]) -> u32 {
    let mut idx = 0u64;
    let mut scale = 1u64;
    for (i, &d) in divisors.iter().enumerate() {
        idx += c[i] * scale;
        scale *= d;
    }
    idx as u32
}

struct AddTable {
    h: usize,
    table: Vec<u32>,
}

impl AddTable {
    fn new(divisors: &[u64]) -> Result<AddTable> {
        let h: u64 = divisors.iter().product();
        if h > 4096 {
            bail!(LimitExceeded, "class-resolved counts limited to class number ≤ 4096 (h = {h})");
        }
        let h = h as usize;
        let dec = |mut i: usize| -> Vec<u64> {
            divisors
                .iter()
                .map(|&d| {
                    let c = i as u64 % d;
                    i /= d as usize;
                    c
                })
                .collect()
        };
        let mut table = vec![0u32; h * h];
        for a in 0..h {
            let ca = dec(a);
            for b in 0..h {
                let cb = dec(b);
                let s: Vec<u64> = divisors.iter().enumerate().map(|(i, d)| (ca[i] + cb[i]) % d).collect();
                table[a * h + b] = encode(divisors, &s);
            }
        }
        Ok(AddTable { h, table })
    }

    #[inline]
    fn add(&self, a: u32, b: u32) -> u32 {
        self.table[a as usize * self.h + b as usize]
    }
}

/// A prime of the enumeration: its norm and the classes of its admissible
/// prime ideals (three for split `p`, one for ramified `p`).
struct Entry {
    p: u64,
    classes: Vec<u32>,
}

fn check_args(m: u64, x: u64) -> Result<()> {
    if m == 0 {
        bail!(InvalidInput, "M must be positive");
    }
    if x > MAX_X {
        bail!(LimitExceeded, "X = {x} exceeds the enumeration limit {MAX_X}");
    }
    Ok(())
}

fn admissible_primes(field: &CyclicCubicField, m: u64, x: u64) -> Vec<(u64, SplittingType)> {
    primes_up_to(x)
        .into_iter()
        .filter(|&p| m % p != 0)
        .map(|p| (p, field.splitting_type(p)))
        .filter(|(_, t)| *t != SplittingType::Inert)
        .collect()
}

/// Class histogram of ideals with squarefree norm `≤ x` coprime to `m`.
pub fn class_histogram(field: &CyclicCubicField, m: u64, x: u64) -> Result<ClassHistogram> {
    check_args(m, x)?;
    let cg = field.class_group()?;
    let divisors = cg.elementary_divisors.clone();
    let add = AddTable::new(&divisors)?;
    let primes = admissible_primes(field, m, x);
    let entries: Vec<Entry> = primes
        .par_iter()
        .map(|&(p, t)| -> Result<Entry> {
            let cls = cg.classes_above(p)?;
            let classes: Vec<u32> = cls.iter().map(|c| encode(&divisors, c)).collect();
            debug_assert_eq!(classes.len(), if t == SplittingType::Split { 3 } else { 1 });
            Ok(Entry { p, classes })
        })
        .collect::<Result<_>>()?;
    let h = add.h;
    let partial: Vec<Vec<u64>> = (0..entries.len())
        .into_par_iter()
        .map(|i| {
            let mut hist = vec![0u64; h];
            let e = &entries[i];
            for &c in &e.classes {
                dfs_classes(&entries, i + 1, e.p, c, x, &add, &mut hist);
            }
            hist
        })
        .collect();
    let mut counts = vec![0u64; h];
    counts[0] += 1; // unit ideal
    for part in partial {
        for (a, b) in counts.iter_mut().zip(part) {
            *a += b;
        }
    }
    Ok(ClassHistogram { divisors, counts })
}

fn dfs_classes(entries: &[Entry], start: usize, norm: u64, class: u32, x: u64, add: &AddTable, hist: &mut [u64]) {
    hist[class as usize] += 1;
    for i in start..entries.len() {
        let p = entries[i].p;
        let Some(n) = norm.checked_mul(p) else { break };
        if n > x {
            break;
        }
        for &c in &entries[i].classes {
            dfs_classes(entries, i + 1, n, add.add(class, c), x, add, hist);
        }
    }
}

fn dfs_weights(entries: &[(u64, u64)], start: usize, norm: u64, weight: u64, x: u64) -> u64 {
    let mut total = weight;
    for i in start..entries.len() {
        let (p, w) = entries[i];
        let Some(n) = norm.checked_mul(p) else { break };
        if n > x {
            break;
        }
        total += dfs_weights(entries, i + 1, n, weight * w, x);
    }
    total
}

/// Count over all classes, without class bookkeeping.
pub fn count_all(field: &CyclicCubicField, m: u64, x: u64) -> Result<u64> {
    check_args(m, x)?;
    let entries: Vec<(u64, u64)> = admissible_primes(field, m, x)
        .into_iter()
        .map(|(p, t)| (p, if t == SplittingType::Split { 3 } else { 1 }))
        .collect();
    let rest: u64 = (0..entries.len())
        .into_par_iter()
        .map(|i| dfs_weights(&entries, i + 1, entries[i].0, entries[i].1, x))
        .sum();
    Ok(1 + rest)
}

pub fn count_squarefree_norm_ideals(field: &CyclicCubicField, m: u64, subgroup: Subgroup, x: u64) -> Result<IdealCountReport> {
    count_with_truncation(field, m, subgroup, x, 1_000_000)
}

/// As [`count_squarefree_norm_ideals`], with the Euler product for
/// `L(γ_{F,M}, 1)` truncated at `p_max`.
pub fn count_with_truncation(
    field: &CyclicCubicField,
    m: u64,
    subgroup: Subgroup,
    x: u64,
    p_max: u64,
) -> Result<IdealCountReport> {
    let exact_count = match subgroup {
        Subgroup::Full => count_all(field, m, x)?,
        _ => {
            let cg = field.class_group()?;
            if cg.h == 1 {
                count_all(field, m, x)?
            } else {
                let hist = class_histogram(field, m, x)?;
                (0..hist.counts.len())
                    .filter(|&i| subgroup.contains(&cg, &hist.decode(i)))
                    .map(|i| hist.counts[i])
                    .sum()
            }
        }
    };
    let density = if subgroup == Subgroup::Full {
        1.0
    } else {
        let cg = field.class_group()?;
        subgroup.order(&cg) as f64 / cg.h as f64
    };
    let zeta = zeta_residue_fast(field)?;
    let l = l_gamma(field, m, p_max)?;
    let main = density * zeta * l.value * x as f64;
    Ok(IdealCountReport {
        conductor: field.conductor(),
        exact_count,
        main_term: main,
        ratio: exact_count as f64 / main,
        x,
        m,
        subgroup,
        density,
        zeta_residue: zeta,
        l_gamma: l.value,
        l_gamma_tail: l.tail_bound,
    })
}

/// `Σ χ(𝔞)` over the counted ideals, for the class-group character with
/// exponent vector `chi`; returned as (real, imaginary).
pub fn count_by_character_twist(field: &CyclicCubicField, m: u64, chi: &[u64], x: u64) -> Result<(f64, f64)> {
    let cg = field.class_group()?;
    if chi.len() != cg.elementary_divisors.len() {
        bail!(InvalidInput, "character has {} exponents, class group has {} cyclic factors", chi.len(), cg.elementary_divisors.len());
    }
    if cg.h == 1 {
        return Ok((count_all(field, m, x)? as f64, 0.0));
    }
    let hist = class_histogram(field, m, x)?;
    Ok(twist(&hist, chi))
}

pub fn twist(hist: &ClassHistogram, chi: &[u64]) -> (f64, f64) {
    let (mut re, mut im) = (0.0, 0.0);
    for (i, &n) in hist.counts.iter().enumerate() {
        if n == 0 {
            continue;
        }
        let c = hist.decode(i);
        let mut phase = 0.0;
        for (j, &d) in hist.divisors.iter().enumerate() {
            phase += ((chi[j] * c[j]) % d) as f64 / d as f64;
        }
        let t = 2.0 * std::f64::consts::PI * phase;
        re += n as f64 * t.cos();
        im += n as f64 * t.sin();
    }
    (re, im)
}

/// All counted ideals for small `x` (for audits).
pub fn enumerate_squarefree_norm_ideals(field: &CyclicCubicField, m: u64, x: u64) -> Result<Vec<FactoredIdeal>> {
    check_args(m, x)?;
    if x > 10_000_000 {
        bail!(LimitExceeded, "explicit enumeration limited to X ≤ 10^7");
    }
    let primes = admissible_primes(field, m, x);
    let mut out = Vec::new();
    fn rec(
        primes: &[(u64, SplittingType)],
        start: usize,
        norm: u64,
        cur: &mut Vec<(PrimeRef, u32)>,
        x: u64,
        out: &mut Vec<FactoredIdeal>,
    ) {
        out.push(FactoredIdeal::new(cur.clone()));
        for i in start..primes.len() {
            let (p, t) = primes[i];
            if norm * p > x {
                break;
            }
            let k = if t == SplittingType::Split { 3 } else { 1 };
            for index in 0..k {
                cur.push((PrimeRef { p, index, degree: 1 }, 1));
                rec(primes, i + 1, norm * p, cur, x, out);
                cur.pop();
            }
        }
    }
    rec(&primes, 0, 1, &mut Vec::new(), x, &mut out);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_examples() {
        let f7 = CyclicCubicField::of_prime_conductor(7).unwrap();
        assert_eq!(count_all(&f7, 7, 13).unwrap(), 4);
        assert_eq!(count_all(&f7, 7, 1).unwrap(), 1);
        let r = count_squarefree_norm_ideals(&f7, 7, Subgroup::Squares, 13).unwrap();
        assert_eq!(r.exact_count, 4);
    }

    #[test]
    fn subgroup_parsing() {
        assert_eq!("2cl".parse::<Subgroup>().unwrap(), Subgroup::Squares);
        assert_eq!("Cl".parse::<Subgroup>().unwrap(), Subgroup::Full);
        assert!("half".parse::<Subgroup>().is_err());
    }
}
