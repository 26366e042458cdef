//! Cyclic cubic fields keyed by conductor and cubic character.
//!
//! A cyclic cubic field of conductor `f` corresponds to a conjugate pair
//! `{χ, χ̄}` of primitive cubic Dirichlet characters mod `f`. The prime-to-3
//! part of χ is a cubic residue symbol `(·/I)_3` for an ideal `I` of Z[ω] of
//! squarefree norm; when `9 | f` it is multiplied by the mod-9 cubic
//! character with `χ₉(2) = ω`.

pub mod ideal;
pub mod order;
pub mod primes;

use crate::arith::{factor, primes_up_to};
use crate::eisenstein::{character_table, ideals_of_norm, CubicSymbol, EisensteinIdeal};
use crate::error::{bail, Result};
use num_traits::ToPrimitive;
use std::fmt;
use std::sync::{Arc, OnceLock};

pub use ideal::Ideal;
pub use order::{from_big, to_big, BigElt, Elt, IntegralBasis, NumberField};
pub use primes::{PrimeIdeal, SplittingType};

/// Value of the mod-9 cubic character at `n` as an exponent of ω.
fn chi9(n: u64) -> Option<u8> {
    match n % 9 {
        1 | 8 => Some(0),
        2 | 7 => Some(1),
        4 | 5 => Some(2),
        _ => None,
    }
}

/// A primitive cubic Dirichlet character.
#[derive(Clone, Debug)]
pub struct CubicCharacter {
    conductor: u64,
    ideal: EisensteinIdeal,
    /// Power of χ₉ (0, 1 or 2) in the character.
    three_part: u8,
    table: Arc<OnceLock<Vec<Option<u8>>>>,
}

impl PartialEq for CubicCharacter {
    fn eq(&self, o: &Self) -> bool {
        self.conductor == o.conductor && self.ideal == o.ideal && self.three_part == o.three_part
    }
}
impl Eq for CubicCharacter {}
impl std::hash::Hash for CubicCharacter {
    fn hash<H: std::hash::Hasher>(&self, h: &mut H) {
        (self.conductor, &self.ideal, self.three_part).hash(h)
    }
}

impl CubicCharacter {
    /// `(·/I)_3 · χ₉^s`. The conductor is `N(I)` times 9 when `s != 0`.
    pub fn new(ideal: EisensteinIdeal, three_part: u8) -> Result<Self> {
        let q = ideal
            .norm()
            .to_u64()
            .ok_or_else(|| crate::Error::LimitExceeded("character modulus exceeds 64 bits".into()))?;
        if q % 3 == 0 {
            bail!(InvalidInput, "character ideal must have norm prime to 3");
        }
        for (p, e) in factor(q) {
            if e != 1 || p % 3 != 1 {
                bail!(InvalidInput, "character ideal {ideal} does not give a primitive cubic character");
            }
        }
        let conductor = if three_part % 3 == 0 { q } else { 9 * q };
        if conductor == 1 {
            bail!(InvalidInput, "the trivial character does not define a cubic field");
        }
        Ok(CubicCharacter { conductor, ideal, three_part: three_part % 3, table: Arc::new(OnceLock::new()) })
    }

    pub fn conductor(&self) -> u64 {
        self.conductor
    }

    pub fn ideal(&self) -> &EisensteinIdeal {
        &self.ideal
    }

    pub fn three_part(&self) -> u8 {
        self.three_part
    }

    pub fn conj(&self) -> CubicCharacter {
        CubicCharacter {
            conductor: self.conductor,
            ideal: self.ideal.conj(),
            three_part: (3 - self.three_part) % 3,
            table: Arc::new(OnceLock::new()),
        }
    }

    /// Values on residues mod the conductor (`Some(k)` for ω^k, `None` for 0).
    pub fn table(&self) -> &[Option<u8>] {
        self.table.get_or_init(|| {
            let q = self.ideal.norm().to_u64().unwrap();
            let tq = character_table(&self.ideal).expect("admissible ideal");
            (0..self.conductor)
                .map(|n| {
                    let a = tq[(n % q) as usize]?;
                    if self.three_part == 0 {
                        Some(a)
                    } else {
                        let b = chi9(n)?;
                        Some((a + b * self.three_part) % 3)
                    }
                })
                .collect()
        })
    }

    pub fn value(&self, n: u64) -> CubicSymbol {
        match self.table()[(n % self.conductor) as usize] {
            Some(k) => CubicSymbol::Root(k),
            None => CubicSymbol::Zero,
        }
    }

    pub fn value_i64(&self, n: i64) -> CubicSymbol {
        self.value(n.rem_euclid(self.conductor as i64) as u64)
    }
}

/// A cyclic cubic field. Cheap to clone; arithmetic data is built on first
/// use and shared between clones.
#[derive(Clone)]
pub struct CyclicCubicField {
    character: CubicCharacter,
    ramified: Vec<u64>,
    order: Arc<OnceLock<std::result::Result<Arc<NumberField>, crate::Error>>>,
    class_group: Arc<OnceLock<std::result::Result<Arc<crate::classgroup::ClassGroupData>, crate::Error>>>,
}

impl PartialEq for CyclicCubicField {
    fn eq(&self, o: &Self) -> bool {
        self.character == o.character
    }
}
impl Eq for CyclicCubicField {}
impl std::hash::Hash for CyclicCubicField {
    fn hash<H: std::hash::Hasher>(&self, h: &mut H) {
        self.character.hash(h)
    }
}

impl fmt::Debug for CyclicCubicField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "CyclicCubicField(f = {}, I = {}, s = {})", self.conductor(), self.character.ideal, self.character.three_part)
    }
}

impl CyclicCubicField {
    /// Field cut out by `χ` (equivalently by `χ̄`). The stored character is the
    /// orbit representative: three-part exponent 1 when `9 | f`, otherwise
    /// the ideal whose canonical generator is lexicographically smaller.
    pub fn from_character(chi: CubicCharacter) -> Self {
        let flip = chi.three_part == 2 || (chi.three_part == 0 && chi.ideal.conj().generator() < chi.ideal.generator());
        let rep = if flip { chi.conj() } else { chi };
        let mut ramified: Vec<u64> = factor(rep.conductor).into_iter().map(|(p, _)| p).collect();
        ramified.sort_unstable();
        CyclicCubicField {
            character: rep,
            ramified,
            order: Arc::new(OnceLock::new()),
            class_group: Arc::new(OnceLock::new()),
        }
    }

    /// The field of prime conductor `p ≡ 1 mod 3` (there is exactly one), or of
    /// conductor 9.
    pub fn of_prime_conductor(f: u64) -> Result<Self> {
        let fields = fields_of_conductor(f)?;
        if fields.len() != 1 {
            bail!(InvalidInput, "conductor {f} carries {} fields", fields.len());
        }
        Ok(fields.into_iter().next().unwrap())
    }

    pub fn conductor(&self) -> u64 {
        self.character.conductor
    }

    pub fn discriminant(&self) -> u64 {
        self.conductor() * self.conductor()
    }

    pub fn character(&self) -> &CubicCharacter {
        &self.character
    }

    pub fn character_ideal(&self) -> &EisensteinIdeal {
        &self.character.ideal
    }

    pub fn ramified_at_3(&self) -> bool {
        self.character.three_part != 0
    }

    pub fn ramified_primes(&self) -> &[u64] {
        &self.ramified
    }

    pub fn splitting_type(&self, p: u64) -> SplittingType {
        if self.conductor() % p == 0 {
            SplittingType::Ramified
        } else if self.character.value(p) == CubicSymbol::ONE {
            SplittingType::Split
        } else {
            SplittingType::Inert
        }
    }

    /// Maximal order data, built on first call.
    pub fn order(&self) -> Result<Arc<NumberField>> {
        self.order.get_or_init(|| NumberField::build(self).map(Arc::new)).clone()
    }

    pub fn integral_basis(&self) -> Result<IntegralBasis> {
        Ok(self.order()?.integral_basis())
    }

    /// Class group with default search parameters, computed once.
    pub fn class_group(&self) -> Result<Arc<crate::classgroup::ClassGroupData>> {
        self.class_group
            .get_or_init(|| {
                crate::classgroup::compute_class_group(self, &crate::classgroup::ClassGroupConfig::default()).map(Arc::new)
            })
            .clone()
    }
}

/// Whether `d` is squarefree with all prime factors ≡ 1 mod 3.
pub fn admissible_divisor(d: u64) -> bool {
    d >= 1 && factor(d).iter().all(|&(p, e)| e == 1 && p % 3 == 1)
}

/// All cyclic cubic fields of conductor `f` (empty if `f` is not a conductor).
pub fn fields_of_conductor(f: u64) -> Result<Vec<CyclicCubicField>> {
    if f < 7 {
        return Ok(Vec::new());
    }
    let three = f % 9 == 0;
    let q = if three { f / 9 } else { f };
    if q % 3 == 0 || !admissible_divisor(q) {
        return Ok(Vec::new());
    }
    let mut out = Vec::new();
    for id in ideals_of_norm(q)? {
        if three {
            out.push(CyclicCubicField::from_character(CubicCharacter::new(id, 1)?));
        } else if id.generator() < id.conj().generator() {
            out.push(CyclicCubicField::from_character(CubicCharacter::new(id, 0)?));
        }
    }
    Ok(out)
}

/// All cyclic cubic fields with `Δ_F = f² <= x_max` and `d | Δ_F`, optionally
/// restricted to fields unramified at 3, sorted by conductor then character.
pub fn enumerate_fields(x_max: f64, require_unramified_at_3: bool, d: u64) -> Result<Vec<CyclicCubicField>> {
    if !admissible_divisor(d) {
        bail!(InvalidInput, "divisor {d} must be squarefree with prime factors ≡ 1 mod 3");
    }
    if !(x_max >= 49.0) {
        return Ok(Vec::new());
    }
    let fmax = x_max.sqrt().floor() as u64;
    let fmax = if (fmax + 1) * (fmax + 1) <= x_max as u64 { fmax + 1 } else { fmax };
    let primes: Vec<u64> = primes_up_to(fmax).into_iter().filter(|p| p % 3 == 1).collect();
    let mut qs = Vec::new();
    squarefree_products(&primes, 0, 1, fmax, &mut qs);
    let mut conductors = Vec::new();
    for q in qs {
        if q % d != 0 {
            continue;
        }
        if q > 1 {
            conductors.push(q);
        }
        if !require_unramified_at_3 && 9 * q <= fmax {
            conductors.push(9 * q);
        }
    }
    conductors.sort_unstable();
    let mut out = Vec::new();
    for f in conductors {
        let mut fs = fields_of_conductor(f)?;
        fs.sort_by(|a, b| a.character_ideal().cmp(b.character_ideal()));
        out.extend(fs);
    }
    Ok(out)
}

fn squarefree_products(primes: &[u64], start: usize, acc: u64, bound: u64, out: &mut Vec<u64>) {
    out.push(acc);
    for i in start..primes.len() {
        let p = primes[i];
        if acc.saturating_mul(p) > bound {
            break;
        }
        squarefree_products(primes, i + 1, acc * p, bound, out);
    }
}

/// Number of fields of conductor `f` predicted by the character count
/// `2^{ω'(f) − 1}`, with the factor 9 counted once.
pub fn expected_field_count(f: u64) -> u64 {
    let w = factor(f).len() as u32;
    if w == 0 {
        0
    } else {
        1 << (w - 1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn enumeration_examples() {
        let fs = enumerate_fields(2500.0, true, 1).unwrap();
        let cond: Vec<u64> = fs.iter().map(|f| f.conductor()).collect();
        assert_eq!(cond, vec![7, 13, 19, 31, 37, 43]);
        assert!(enumerate_fields(48.0, true, 1).unwrap().is_empty());
        let fs = enumerate_fields(1e4, false, 1).unwrap();
        assert_eq!(fs.len(), 16);
        assert_eq!(fs.iter().filter(|f| f.conductor() == 63).count(), 2);
        assert_eq!(fs.iter().filter(|f| f.conductor() == 91).count(), 2);
        assert!(fs.iter().any(|f| f.conductor() == 9));
        let d7 = enumerate_fields(1e6, true, 7).unwrap();
        assert!(d7.iter().all(|f| f.conductor() % 7 == 0));
        assert!(enumerate_fields(1e4, true, 4).is_err());
    }

    #[test]
    fn field_counts_per_conductor() {
        for f in enumerate_fields(1e6, false, 1).unwrap().iter().map(|f| f.conductor()) {
            assert_eq!(fields_of_conductor(f).unwrap().len() as u64, expected_field_count(f));
        }
    }

    #[test]
    fn splitting_examples() {
        let f7 = CyclicCubicField::of_prime_conductor(7).unwrap();
        assert_eq!(f7.splitting_type(7), SplittingType::Ramified);
        assert_eq!(f7.splitting_type(13), SplittingType::Split);
        assert_eq!(f7.splitting_type(2), SplittingType::Inert);
    }

    #[test]
    fn orbit_representative_is_stable() {
        for f in enumerate_fields(1e5, false, 1).unwrap() {
            let chi = f.character().clone();
            assert_eq!(CyclicCubicField::from_character(chi.conj()), f);
            // conjugate characters cut out the same splitting behaviour
            for p in [2u64, 5, 11, 13, 17, 29, 31, 37, 41] {
                assert_eq!(chi.value(p) == CubicSymbol::ONE, chi.conj().value(p) == CubicSymbol::ONE);
            }
        }
    }

    #[test]
    fn characters_are_primitive_even_and_cubic() {
        for f in enumerate_fields(250_000.0, false, 1).unwrap().into_iter().take(40) {
            let chi = f.character();
            let q = chi.conductor();
            assert_eq!(chi.value(q - 1), CubicSymbol::ONE, "even");
            // multiplicative
            for a in 1..q.min(60) {
                for b in 1..q.min(60) {
                    assert_eq!(chi.value(a * b), chi.value(a).mul(chi.value(b)));
                }
            }
            // primitive: not periodic modulo any proper divisor
            for (p, _) in factor(q) {
                let m = q / p;
                let periodic = (1..q).all(|n| chi.value(n) == chi.value(n + m));
                assert!(!periodic, "character mod {q} is induced from {m}");
            }
        }
    }
}
