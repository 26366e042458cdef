//! Integral ideals of the maximal order as Hermite-normalized lattices.

use super::order::{BigElt, NumberField};
use super::primes::PrimeIdeal;
use crate::linalg::{hnf_lower, in_lattice, reduce_mod_hnf, Mat3, Row3};
use num_bigint::BigInt;
use num_traits::{One, Zero};

/// Nonzero integral ideal, stored as the lower Hermite basis of its lattice
/// in integral-basis coordinates. Equal ideals have equal bases.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Ideal {
    pub hnf: Mat3,
}

impl Ideal {
    pub fn unit() -> Ideal {
        let o = || BigInt::one();
        let z = || BigInt::zero();
        Ideal { hnf: [[o(), z(), z()], [z(), o(), z()], [z(), z(), o()]] }
    }

    /// Ideal generated by `gens`; `None` if all generators vanish.
    pub fn from_generators(nf: &NumberField, gens: &[BigElt]) -> Option<Ideal> {
        let mut rows: Vec<Row3> = Vec::with_capacity(3 * gens.len());
        for g in gens {
            for j in 0..3 {
                let mut w: BigElt = Default::default();
                w[j] = BigInt::one();
                rows.push(nf.mul_big(g, &w));
            }
        }
        hnf_lower(&rows).map(|hnf| Ideal { hnf })
    }

    pub fn principal(nf: &NumberField, x: &BigElt) -> Option<Ideal> {
        Ideal::from_generators(nf, std::slice::from_ref(x))
    }

    pub fn from_prime(nf: &NumberField, pr: &PrimeIdeal) -> Ideal {
        let p: BigElt = [BigInt::from(pr.p), BigInt::zero(), BigInt::zero()];
        Ideal::from_generators(nf, &[p, pr.gen.clone()]).expect("prime ideal is nonzero")
    }

    pub fn mul(&self, nf: &NumberField, o: &Ideal) -> Ideal {
        let mut rows = Vec::with_capacity(9);
        for a in &self.hnf {
            for b in &o.hnf {
                rows.push(nf.mul_big(a, b));
            }
        }
        Ideal { hnf: hnf_lower(&rows).expect("product of nonzero ideals is nonzero") }
    }

    pub fn pow(&self, nf: &NumberField, mut e: u32) -> Ideal {
        let mut r = Ideal::unit();
        let mut b = self.clone();
        while e > 0 {
            if e & 1 == 1 {
                r = r.mul(nf, &b);
            }
            e >>= 1;
            if e > 0 {
                b = b.mul(nf, &b);
            }
        }
        r
    }

    pub fn norm(&self) -> BigInt {
        &self.hnf[0][0] * &self.hnf[1][1] * &self.hnf[2][2]
    }

    /// Least positive rational integer in the ideal.
    pub fn min_integer(&self) -> BigInt {
        self.hnf[0][0].clone()
    }

    pub fn contains(&self, x: &BigElt) -> bool {
        in_lattice(x, &self.hnf)
    }

    /// Canonical representative of `x` modulo the ideal.
    pub fn reduce(&self, x: &BigElt) -> BigElt {
        reduce_mod_hnf(x, &self.hnf)
    }

    pub fn is_unit(&self) -> bool {
        self.norm().is_one()
    }

    /// Image under the Galois automorphism.
    pub fn sigma(&self, nf: &NumberField) -> Ideal {
        let rows: Vec<Row3> = self.hnf.iter().map(|r| nf.sigma_big(r)).collect();
        Ideal { hnf: hnf_lower(&rows).unwrap() }
    }

    /// Whether `o` divides `self` (containment `self ⊆ o`).
    pub fn divisible_by(&self, o: &Ideal) -> bool {
        self.hnf.iter().all(|r| o.contains(r))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cubicfield::order::to_big;
    use crate::cubicfield::CyclicCubicField;

    #[test]
    fn prime_ideals_have_expected_norms() {
        let field = CyclicCubicField::of_prime_conductor(7).unwrap();
        let o = field.order().unwrap();
        for p in [2u64, 7, 13, 29] {
            let ps = o.primes_above(p).unwrap();
            let mut prod = Ideal::unit();
            for q in &ps {
                let id = Ideal::from_prime(&o, q);
                assert_eq!(id.norm(), BigInt::from(q.norm()));
                prod = prod.mul(&o, &id.pow(&o, q.ramification as u32));
            }
            let pp = Ideal::principal(&o, &to_big(&[p as i64, 0, 0])).unwrap();
            assert_eq!(prod, pp, "p = {p}");
        }
    }

    #[test]
    fn principal_norm_and_galois() {
        let field = CyclicCubicField::of_prime_conductor(163).unwrap();
        let o = field.order().unwrap();
        let x = to_big(&[7, -3, 2]);
        let id = Ideal::principal(&o, &x).unwrap();
        assert_eq!(id.norm(), o.norm_big(&x).magnitude().clone().into());
        assert!(id.contains(&x));
        let s = id.sigma(&o);
        assert_eq!(s, Ideal::principal(&o, &o.sigma_big(&x)).unwrap());
        assert!(id.mul(&o, &s).divisible_by(&id));
    }
}
