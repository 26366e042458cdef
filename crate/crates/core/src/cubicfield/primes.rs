//! Prime ideals of the maximal order, residue maps and valuations.

use super::order::{to_big, BigElt, Elt, NumberField};
use crate::arith::polymod;
use crate::error::{bail, Result};
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};
use std::cmp::Ordering;
use std::hash::{Hash, Hasher};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SplittingType {
    Ramified,
    Split,
    Inert,
}

/// A prime ideal above the rational prime `p`.
///
/// For degree-one primes `residue[i]` is the image of the basis element
/// `w_i` under the residue map `O → F_p`. Split primes above the same `p`
/// are indexed in increasing order of their residue vectors.
#[derive(Clone, Debug)]
pub struct PrimeIdeal {
    pub p: u64,
    pub index: u8,
    pub degree: u8,
    pub ramification: u8,
    pub residue: [u64; 3],
    /// Second generator: the ideal is `(p, gen)`.
    pub gen: BigElt,
    /// Element of the other two primes above `p` that is a unit at this one
    /// (split primes only).
    tau: Option<BigElt>,
}

impl PartialEq for PrimeIdeal {
    fn eq(&self, o: &Self) -> bool {
        self.p == o.p && self.index == o.index
    }
}
impl Eq for PrimeIdeal {}
impl Hash for PrimeIdeal {
    fn hash<H: Hasher>(&self, h: &mut H) {
        (self.p, self.index).hash(h)
    }
}
impl PartialOrd for PrimeIdeal {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}
impl Ord for PrimeIdeal {
    fn cmp(&self, o: &Self) -> Ordering {
        (self.p, self.index).cmp(&(o.p, o.index))
    }
}

impl PrimeIdeal {
    /// Absolute norm `p^degree` (saturating).
    pub fn norm(&self) -> u64 {
        self.p.saturating_pow(self.degree as u32)
    }

    pub fn splitting(&self) -> SplittingType {
        if self.ramification == 3 {
            SplittingType::Ramified
        } else if self.degree == 3 {
            SplittingType::Inert
        } else {
            SplittingType::Split
        }
    }
}

fn mod_big(x: &BigInt, p: u64) -> u64 {
    x.mod_floor(&BigInt::from(p)).to_u64().unwrap()
}

impl NumberField {
    /// Image of `x` under the residue map of a degree-one prime.
    pub fn residue(&self, pr: &PrimeIdeal, x: &Elt) -> u64 {
        let p = pr.p as i128;
        let mut s: i128 = 0;
        for i in 0..3 {
            s = (s + (x[i] as i128).rem_euclid(p) * pr.residue[i] as i128) % p;
        }
        s as u64
    }

    pub fn residue_big(&self, pr: &PrimeIdeal, x: &BigElt) -> u64 {
        let p = pr.p as u128;
        let mut s: u128 = 0;
        for i in 0..3 {
            s = (s + mod_big(&x[i], pr.p) as u128 * pr.residue[i] as u128) % p;
        }
        s as u64
    }

    /// Image of θ under the residue map of a degree-one prime.
    pub fn theta_residue(&self, pr: &PrimeIdeal) -> u64 {
        self.residue(pr, &self.theta)
    }

    /// Degree-one residue maps `O → F_p`, each given by the images of `w_1, w_2`.
    fn residue_maps(&self, p: u64) -> Result<Vec<[u64; 3]>> {
        let pi = p as i128;
        let charpoly_mod = |i: usize| -> Vec<u64> {
            let x = to_big(&[(i == 0) as i64, (i == 1) as i64, (i == 2) as i64]);
            let (tr, e2, det) = self.charpoly_big(&x);
            // x³ − tr x² + e2 x − det, coefficients low to high
            let m = |v: BigInt| v.mod_floor(&BigInt::from(p)).to_u64().unwrap();
            vec![m(-det), m(e2), m(-tr), 1]
        };
        let r1 = polymod::roots(&charpoly_mod(1), p);
        let r2 = polymod::roots(&charpoly_mod(2), p);
        let mut out = Vec::new();
        for &a in &r1 {
            for &b in &r2 {
                let phi = [1i128, a as i128, b as i128];
                let ok = (0..3).all(|i| {
                    (0..3).all(|j| {
                        let lhs = phi[i] * phi[j] % pi;
                        let rhs = (0..3).map(|k| (self.table[i][j][k] as i128).rem_euclid(pi) * phi[k] % pi).sum::<i128>() % pi;
                        lhs == rhs
                    })
                });
                if ok {
                    out.push([1u64, a, b]);
                }
            }
        }
        out.sort_unstable();
        out.dedup();
        Ok(out)
    }

    /// The prime ideals above `p`, with splitting type read off the residue maps.
    pub fn primes_above(&self, p: u64) -> Result<Vec<PrimeIdeal>> {
        if p < 2 || !crate::arith::is_prime(p) {
            bail!(InvalidInput, "{p} is not prime");
        }
        let ramified = self.conductor % p == 0;
        let maps = self.residue_maps(p)?;
        match (ramified, maps.len()) {
            (true, 1) => {
                let phi = maps[0];
                let gen = self.local_generator(p, &phi, &[], true)?;
                Ok(vec![PrimeIdeal { p, index: 0, degree: 1, ramification: 3, residue: phi, gen, tau: None }])
            }
            (false, 0) => Ok(vec![PrimeIdeal {
                p,
                index: 0,
                degree: 3,
                ramification: 1,
                residue: [0; 3],
                gen: to_big(&[p as i64, 0, 0]),
                tau: None,
            }]),
            (false, 3) => {
                let mut out = Vec::new();
                for (idx, phi) in maps.iter().enumerate() {
                    let others: Vec<[u64; 3]> = maps.iter().enumerate().filter(|(j, _)| *j != idx).map(|(_, m)| *m).collect();
                    let gen = self.local_generator(p, phi, &others, false)?;
                    // τ: product of elements vanishing at the two other primes only
                    let mut tau = to_big(&NumberField::one());
                    for o in &others {
                        let g = self.vanishing_at(p, o, phi)?;
                        tau = self.mul_big(&tau, &g);
                        for c in tau.iter_mut() {
                            *c = c.mod_floor(&BigInt::from(p));
                        }
                    }
                    out.push(PrimeIdeal {
                        p,
                        index: idx as u8,
                        degree: 1,
                        ramification: 1,
                        residue: *phi,
                        gen,
                        tau: Some(tau),
                    });
                }
                Ok(out)
            }
            (r, n) => bail!(Consistency, "inconsistent decomposition of {p}: ramified = {r}, {n} residue maps"),
        }
    }

    pub fn splitting_type_of(&self, p: u64) -> Result<SplittingType> {
        Ok(self.primes_above(p)?[0].splitting())
    }

    /// Element in the kernel of `phi` but not of `avoid`.
    fn vanishing_at(&self, p: u64, phi: &[u64; 3], avoid: &[u64; 3]) -> Result<BigElt> {
        for i in 1..3 {
            if phi[i] != avoid[i] {
                let mut x = [0i64; 3];
                x[i] = 1;
                x[0] = (p - phi[i]) as i64;
                return Ok(to_big(&x));
            }
        }
        bail!(Consistency, "residue maps coincide")
    }

    /// `g` with `(p, g)` equal to the prime with residue map `phi`.
    fn local_generator(&self, p: u64, phi: &[u64; 3], others: &[[u64; 3]], ramified: bool) -> Result<BigElt> {
        let pb = BigInt::from(p);
        let ev = |m: &[u64; 3], x: &[i64; 3]| -> u64 {
            let s: i128 = (0..3).map(|i| (x[i] as i128).rem_euclid(p as i128) * m[i] as i128).sum();
            (s % p as i128) as u64
        };
        for c1 in 0i64..4 {
            for c2 in 0i64..4 {
                if c1 == 0 && c2 == 0 {
                    continue;
                }
                let s = (c1 as i128 * phi[1] as i128 + c2 as i128 * phi[2] as i128) % p as i128;
                let x = [((p as i128 - s) % p as i128) as i64, c1, c2];
                debug_assert_eq!(ev(phi, &x), 0);
                if others.iter().any(|o| ev(o, &x) == 0) {
                    continue;
                }
                if ramified {
                    let n = self.norm_big(&to_big(&x));
                    if n.is_zero() || (&n % (&pb * &pb)).is_zero() {
                        continue;
                    }
                }
                return Ok(to_big(&x));
            }
        }
        bail!(Consistency, "no local generator found above {p}")
    }

    /// `v_P(x)` for nonzero `x`.
    pub fn valuation(&self, pr: &PrimeIdeal, x: &BigElt) -> u32 {
        let pb = BigInt::from(pr.p);
        match pr.splitting() {
            SplittingType::Inert => {
                let mut v = 0;
                let mut x = x.clone();
                while x.iter().all(|c| (c % &pb).is_zero()) {
                    for c in x.iter_mut() {
                        *c /= &pb;
                    }
                    v += 1;
                }
                v
            }
            SplittingType::Ramified => crate::arith::valuation_big(&self.norm_big(x), pr.p),
            SplittingType::Split => {
                let tau = pr.tau.as_ref().unwrap();
                let mut v = 0;
                let mut x = x.clone();
                while self.residue_big(pr, &x) == 0 {
                    let y = self.mul_big(&x, tau);
                    for (xi, yi) in x.iter_mut().zip(y.iter()) {
                        *xi = yi / &pb;
                    }
                    v += 1;
                }
                v
            }
        }
    }

    /// `σ(P)`.
    pub fn sigma_prime(&self, pr: &PrimeIdeal) -> Result<PrimeIdeal> {
        if pr.splitting() != SplittingType::Split {
            return Ok(pr.clone());
        }
        // residue map of σ(P) is φ∘σ⁻¹ = φ∘σ²
        let mut phi = [0u64; 3];
        for i in 0..3 {
            let mut w = [0i64; 3];
            w[i] = 1;
            let s2 = self.sigma(&self.sigma(&w));
            phi[i] = self.residue(pr, &s2);
        }
        let all = self.primes_above(pr.p)?;
        all.into_iter()
            .find(|q| q.residue == phi)
            .ok_or_else(|| crate::Error::Consistency(format!("Galois image of prime above {} not found", pr.p)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cubicfield::CyclicCubicField;

    #[test]
    fn decomposition_matches_character() {
        for f in [7u64, 9, 13, 63, 91, 163] {
            for field in crate::cubicfield::fields_of_conductor(f).unwrap() {
                let o = field.order().unwrap();
                for p in crate::arith::primes_up_to(400) {
                    let ps = o.primes_above(p).unwrap();
                    assert_eq!(ps[0].splitting(), field.splitting_type(p), "f = {f}, p = {p}");
                    let total: u32 = ps.iter().map(|q| q.degree as u32 * q.ramification as u32).sum();
                    assert_eq!(total, 3);
                }
            }
        }
    }

    #[test]
    fn valuations_sum_to_norm() {
        let field = CyclicCubicField::of_prime_conductor(163).unwrap();
        let o = field.order().unwrap();
        let xs: [Elt; 4] = [[5, 3, -2], [12, 0, 7], [1, 1, 1], [-40, 9, 13]];
        for x in xs {
            let n = o.norm(&x).unwrap().unsigned_abs() as u64;
            for (p, e) in crate::arith::factor(n) {
                let ps = o.primes_above(p).unwrap();
                let s: u32 = ps.iter().map(|q| o.valuation(q, &to_big(&x)) * q.degree as u32).sum();
                assert_eq!(s, e, "x = {x:?}, p = {p}");
            }
        }
    }

    #[test]
    fn galois_permutes_split_primes() {
        let field = CyclicCubicField::of_prime_conductor(7).unwrap();
        let o = field.order().unwrap();
        let ps = o.primes_above(13).unwrap();
        assert_eq!(ps.len(), 3);
        let s0 = o.sigma_prime(&ps[0]).unwrap();
        let s1 = o.sigma_prime(&s0).unwrap();
        let s2 = o.sigma_prime(&s1).unwrap();
        assert_ne!(s0, ps[0]);
        assert_ne!(s1, ps[0]);
        assert_eq!(s2, ps[0]);
    }
}
