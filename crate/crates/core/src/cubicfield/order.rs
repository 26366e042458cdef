//! The maximal order of a cyclic cubic field: integral basis, multiplication
//! table, embeddings and the Galois automorphism.
//!
//! Construction: a Gaussian period `θ = Σ_{χ(a)=1} ζ_f^{ja}` generates the
//! field; its minimal polynomial is read off the three conjugate periods.
//! The order Z[θ] is enlarged one prime at a time by adjoining elements
//! `x/p` that turn out to be integral, until the discriminant equals `f²`,
//! which certifies maximality.

use super::CyclicCubicField;
use crate::arith::{exact_sqrt, factor};
use crate::error::{bail, Result};
use crate::linalg::{det3, hnf_lower, qmat_identity, qmat_inverse, qvec_mul, QMat3, Row3};
use crate::precision::{bf_to_f64, Hp};
use astro_float::BigFloat;
use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

/// Coordinates in the integral basis.
pub type Elt = [i64; 3];
pub type BigElt = [BigInt; 3];

/// Monic defining cubic and discriminant of the integral basis.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntegralBasis {
    /// `[c0, c1, c2]` for `x³ + c2·x² + c1·x + c0`.
    pub defining_cubic: [i64; 3],
    pub basis_disc: BigInt,
}

/// Precision (bits) of the stored high-precision embeddings.
pub const HP_BITS: usize = 384;

pub struct NumberField {
    pub conductor: u64,
    /// `[c0, c1, c2]` for `θ³ + c2·θ² + c1·θ + c0`.
    pub defining_cubic: [i64; 3],
    /// `w_i = Σ_j basis_theta[i][j]·θ^j`; `w_0 = 1`.
    pub basis_theta: QMat3,
    /// Coordinates of θ.
    pub theta: Elt,
    /// `w_i·w_j = Σ_k table[i][j][k]·w_k`.
    pub table: [[[i64; 3]; 3]; 3],
    /// `mats[i]` is the matrix of multiplication by `w_i` acting on column vectors.
    pub mats: [[[i64; 3]; 3]; 3],
    pub traces: [i64; 3],
    /// `σ(x) = sigma·x` on column vectors, `σ` the generator of the Galois
    /// group with `e_k(σx) = e_{k+1}(x)`.
    pub sigma: [[i64; 3]; 3],
    /// `emb[k][i] = e_k(w_i)`.
    pub emb: [[f64; 3]; 3],
    emb_inv: [[f64; 3]; 3],
    /// `emb_hp[k][i] = e_k(w_i)` to `HP_BITS` bits.
    pub emb_hp: Vec<Vec<BigFloat>>,
    pub disc: BigInt,
}

fn q(x: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(x))
}

/// Multiply two θ-polynomials of degree ≤ 2 modulo the monic cubic `g`.
fn polymul_mod(a: &[BigRational; 3], b: &[BigRational; 3], g: &[i64; 3]) -> [BigRational; 3] {
    let mut c = vec![BigRational::zero(); 5];
    for i in 0..3 {
        for j in 0..3 {
            c[i + j] += &a[i] * &b[j];
        }
    }
    for d in (3..5).rev() {
        let lead = std::mem::replace(&mut c[d], BigRational::zero());
        if lead.is_zero() {
            continue;
        }
        // θ^d = θ^{d-3}·θ³ = −θ^{d-3}(c2 θ² + c1 θ + c0)
        for k in 0..3 {
            c[d - 3 + k] -= &lead * q(g[k]);
        }
    }
    [c[0].clone(), c[1].clone(), c[2].clone()]
}

struct OrderTables {
    table: [[[i64; 3]; 3]; 3],
    traces: [i64; 3],
}

fn tables_for(basis: &QMat3, g: &[i64; 3]) -> Result<OrderTables> {
    let inv = qmat_inverse(basis).ok_or_else(|| crate::Error::Consistency("singular basis".into()))?;
    let mut table = [[[0i64; 3]; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            let prod = polymul_mod(&basis[i], &basis[j], g);
            let c = qvec_mul(&prod, &inv);
            for k in 0..3 {
                if !c[k].is_integer() {
                    bail!(Consistency, "basis is not closed under multiplication");
                }
                table[i][j][k] = c[k].to_integer().to_i64().ok_or_else(|| {
                    crate::Error::LimitExceeded("multiplication table entry exceeds 64 bits".into())
                })?;
            }
        }
    }
    let mut traces = [0i64; 3];
    for (i, t) in traces.iter_mut().enumerate() {
        *t = (0..3).map(|j| table[i][j][j]).sum();
    }
    Ok(OrderTables { table, traces })
}

fn disc_of(t: &OrderTables) -> BigInt {
    let mut m: [[BigInt; 3]; 3] = Default::default();
    for i in 0..3 {
        for j in 0..3 {
            let tr: i128 = (0..3).map(|k| t.table[i][j][k] as i128 * t.traces[k] as i128).sum();
            m[i][j] = BigInt::from(tr);
        }
    }
    det3(&m)
}

/// Matrix of multiplication by the element with coordinates `x` (integer
/// tables), acting on column vectors.
fn mult_matrix_big(table: &[[[i64; 3]; 3]; 3], x: &[BigInt; 3]) -> [[BigInt; 3]; 3] {
    let mut m: [[BigInt; 3]; 3] = Default::default();
    for k in 0..3 {
        for j in 0..3 {
            let mut s = BigInt::zero();
            for i in 0..3 {
                s += &x[i] * table[i][j][k];
            }
            m[k][j] = s;
        }
    }
    m
}

/// Characteristic polynomial coefficients (trace, second symmetric function, det).
fn charpoly_big(m: &[[BigInt; 3]; 3]) -> (BigInt, BigInt, BigInt) {
    let tr = &m[0][0] + &m[1][1] + &m[2][2];
    let e2 = &m[0][0] * &m[1][1] - &m[0][1] * &m[1][0] + &m[0][0] * &m[2][2] - &m[0][2] * &m[2][0]
        + &m[1][1] * &m[2][2]
        - &m[1][2] * &m[2][1];
    (tr, e2, det3(m))
}

/// Search `(c0 + c1 w1 + c2 w2)/p` integral with `c` not all divisible by `p`.
fn find_p_integral(table: &[[[i64; 3]; 3]; 3], p: u64) -> Option<[BigInt; 3]> {
    let pb = BigInt::from(p);
    let p2 = &pb * &pb;
    let p3 = &p2 * &pb;
    for c2 in 0..p {
        for c1 in 0..p {
            for c0 in 0..p {
                if c0 == 0 && c1 == 0 && c2 == 0 {
                    continue;
                }
                let x = [BigInt::from(c0), BigInt::from(c1), BigInt::from(c2)];
                let m = mult_matrix_big(table, &x);
                let (tr, e2, det) = charpoly_big(&m);
                if (&tr % &pb).is_zero() && (&e2 % &p2).is_zero() && (&det % &p3).is_zero() {
                    return Some(x);
                }
            }
        }
    }
    None
}

/// Gaussian periods `Σ_{χ(a) = ω^k} cos(2π j a / f)`, k = 0, 1, 2.
fn periods(field: &CyclicCubicField, j: u64) -> [f64; 3] {
    let f = field.conductor();
    let chi = field.character();
    let mut s = [0.0f64; 3];
    for a in 1..f {
        if let Some(k) = chi.table()[a as usize] {
            let r = ((j * a) % f) as f64 / f as f64;
            s[k as usize] += (2.0 * std::f64::consts::PI * r).cos();
        }
    }
    s
}

fn round_checked(x: f64, what: &str) -> Result<i64> {
    let r = x.round();
    if (x - r).abs() > 1e-4 * (1.0 + x.abs()).sqrt() || !r.is_finite() {
        bail!(Precision, "{what} = {x} is not close to an integer");
    }
    Ok(r as i64)
}

impl NumberField {
    pub fn build(field: &CyclicCubicField) -> Result<NumberField> {
        let f = field.conductor();
        let f2 = BigInt::from(f) * BigInt::from(f);
        // defining polynomial from periods
        let mut chosen = None;
        for j in 1..f {
            let eta = periods(field, j);
            let e1 = eta[0] + eta[1] + eta[2];
            let e2 = eta[0] * eta[1] + eta[0] * eta[2] + eta[1] * eta[2];
            let e3 = eta[0] * eta[1] * eta[2];
            let g = [-round_checked(e3, "period norm")?, round_checked(e2, "period e2")?, -round_checked(e1, "period trace")?];
            let min_gap = (eta[0] - eta[1]).abs().min((eta[1] - eta[2]).abs()).min((eta[0] - eta[2]).abs());
            if min_gap > 1e-6 {
                chosen = Some((g, eta));
                break;
            }
        }
        let Some((g, eta)) = chosen else {
            bail!(Consistency, "no Gaussian period generates the field of conductor {f}");
        };
        let gd = poly_disc(&g);
        if gd.is_zero() || exact_sqrt(&gd).is_none() {
            bail!(Consistency, "period polynomial {g:?} has non-square discriminant {gd}");
        }

        // p-maximization
        let mut basis = qmat_identity();
        loop {
            let t = tables_for(&basis, &g)?;
            let d = disc_of(&t);
            if d == f2 {
                break;
            }
            if !(&d % &f2).is_zero() {
                bail!(Consistency, "order discriminant {d} is not a multiple of f² = {f2}");
            }
            let idx2 = &d / &f2;
            let idx = exact_sqrt(&idx2)
                .ok_or_else(|| crate::Error::Consistency(format!("index² = {idx2} is not a square")))?;
            let idx_u = idx
                .to_u64()
                .ok_or_else(|| crate::Error::LimitExceeded(format!("order index {idx} too large")))?;
            let mut enlarged = false;
            for (p, _) in factor(idx_u) {
                if p > 2000 {
                    bail!(LimitExceeded, "index prime {p} too large for exhaustive p-maximization");
                }
                if let Some(x) = find_p_integral(&t.table, p) {
                    basis = enlarge(&basis, &t.table, &g, &x, p)?;
                    enlarged = true;
                    break;
                }
            }
            if !enlarged {
                bail!(Certificate, "cannot certify maximal order for conductor {f}: index {idx} remains");
            }
        }

        // LLL-type reduction of (w1, w2) for the trace-zero part of T2
        let emb_of = |b: &QMat3| -> [[f64; 3]; 3] {
            let mut e = [[0.0; 3]; 3];
            for k in 0..3 {
                for i in 0..3 {
                    e[k][i] = (0..3).map(|jj| b[i][jj].to_f64().unwrap() * eta[k].powi(jj as i32)).sum();
                }
            }
            e
        };
        let basis = reduce_basis(&basis, &emb_of(&basis));
        let t = tables_for(&basis, &g)?;
        let disc = disc_of(&t);
        if disc != f2 {
            bail!(Certificate, "reduced basis discriminant {disc} differs from f² = {f2}");
        }
        let emb = emb_of(&basis);
        let emb_inv = inv3_f64(&emb);

        let inv = qmat_inverse(&basis).unwrap();
        let th = qvec_mul(&[q(0), q(1), q(0)], &inv);
        let mut theta = [0i64; 3];
        for k in 0..3 {
            theta[k] = th[k].to_integer().to_i64().unwrap();
        }

        let mut mats = [[[0i64; 3]; 3]; 3];
        for i in 0..3 {
            for k in 0..3 {
                for j in 0..3 {
                    mats[i][k][j] = t.table[i][j][k];
                }
            }
        }

        // high-precision roots by Newton refinement, then basis embeddings
        let hp = Hp::new(HP_BITS);
        let mut emb_hp = Vec::new();
        for k in 0..3 {
            let mut x = hp.f64(eta[k]);
            for _ in 0..5 {
                let gx = hp.add(&hp.mul(&hp.add(&hp.mul(&hp.add(&x, &hp.int(g[2])), &x), &hp.int(g[1])), &x), &hp.int(g[0]));
                let dg = hp.add(
                    &hp.mul(&hp.add(&hp.mul(&hp.int(3), &x), &hp.int(2 * g[2])), &x),
                    &hp.int(g[1]),
                );
                x = hp.sub(&x, &hp.div(&gx, &dg));
            }
            let powers = [hp.int(1), x.clone(), hp.mul(&x, &x)];
            let mut row = Vec::new();
            for i in 0..3 {
                let mut s = hp.zero();
                for jj in 0..3 {
                    let c = &basis[i][jj];
                    let cf = hp.div(&hp.bigint(c.numer()), &hp.bigint(c.denom()));
                    s = hp.add(&s, &hp.mul(&cf, &powers[jj]));
                }
                row.push(s);
            }
            emb_hp.push(row);
        }

        let mut nf = NumberField {
            conductor: f,
            defining_cubic: g,
            basis_theta: basis,
            theta,
            table: t.table,
            mats,
            traces: t.traces,
            sigma: [[0; 3]; 3],
            emb,
            emb_inv,
            emb_hp,
            disc,
        };
        nf.sigma = nf.compute_sigma()?;
        Ok(nf)
    }

    fn compute_sigma(&self) -> Result<[[i64; 3]; 3]> {
        let mut s = [[0i64; 3]; 3];
        for j in 0..3 {
            let target = [self.emb[1][j], self.emb[2][j], self.emb[0][j]];
            let c = self.solve_embeddings(&target);
            for i in 0..3 {
                s[i][j] = round_checked(c[i], "Galois matrix entry")?;
            }
        }
        // verify: ring automorphism of order 3
        let apply = |x: &Elt| -> Elt {
            let mut y = [0i64; 3];
            for i in 0..3 {
                y[i] = (0..3).map(|j| s[i][j] * x[j]).sum();
            }
            y
        };
        let basis_el = |i: usize| -> Elt {
            let mut e = [0; 3];
            e[i] = 1;
            e
        };
        for i in 0..3 {
            for j in 0..3 {
                let lhs = apply(&self.mul(&basis_el(i), &basis_el(j)).unwrap());
                let rhs = self.mul(&apply(&basis_el(i)), &apply(&basis_el(j))).unwrap();
                if lhs != rhs {
                    bail!(Consistency, "computed Galois action is not multiplicative");
                }
            }
            let x = basis_el(i);
            if apply(&apply(&apply(&x))) != x {
                bail!(Consistency, "computed Galois action does not have order dividing 3");
            }
        }
        if s[1][1] == 1 && s[2][2] == 1 && s[1][2] == 0 && s[2][1] == 0 {
            bail!(Consistency, "computed Galois action is trivial");
        }
        Ok(s)
    }

    pub fn integral_basis(&self) -> IntegralBasis {
        IntegralBasis { defining_cubic: self.defining_cubic, basis_disc: self.disc.clone() }
    }

    pub fn one() -> Elt {
        [1, 0, 0]
    }

    pub fn int(n: i64) -> Elt {
        [n, 0, 0]
    }

    /// Solve `Σ_i c_i e_k(w_i) = v_k` in floating point.
    pub fn solve_embeddings(&self, v: &[f64; 3]) -> [f64; 3] {
        let mut c = [0.0; 3];
        for i in 0..3 {
            c[i] = (0..3).map(|k| self.emb_inv[i][k] * v[k]).sum();
        }
        c
    }

    pub fn embeddings(&self, x: &Elt) -> [f64; 3] {
        let mut e = [0.0; 3];
        for k in 0..3 {
            e[k] = (0..3).map(|i| self.emb[k][i] * x[i] as f64).sum();
        }
        e
    }

    pub fn embeddings_big(&self, x: &BigElt) -> [f64; 3] {
        let xf: Vec<f64> = x.iter().map(|v| v.to_f64().unwrap_or(f64::INFINITY)).collect();
        let mut e = [0.0; 3];
        for k in 0..3 {
            e[k] = (0..3).map(|i| self.emb[k][i] * xf[i]).sum();
        }
        e
    }

    /// `log|e_k(x)|` evaluated with `HP_BITS`-bit embeddings.
    pub fn log_embeddings_hp(&self, x: &BigElt, hp: &mut Hp) -> [f64; 3] {
        let xs: Vec<BigFloat> = x.iter().map(|v| hp.bigint(v)).collect();
        let mut out = [0.0; 3];
        for k in 0..3 {
            let mut s = hp.zero();
            for i in 0..3 {
                s = hp.add(&s, &hp.mul(&xs[i], &self.emb_hp[k][i]));
            }
            let a = s.abs();
            out[k] = bf_to_f64(&hp.ln(&a));
        }
        out
    }

    pub fn mul(&self, x: &Elt, y: &Elt) -> Option<Elt> {
        let xx = [x[0] as i128, x[1] as i128, x[2] as i128];
        let yy = [y[0] as i128, y[1] as i128, y[2] as i128];
        let z = self.mul_i128(&xx, &yy)?;
        Some([z[0].try_into().ok()?, z[1].try_into().ok()?, z[2].try_into().ok()?])
    }

    pub fn mul_i128(&self, x: &[i128; 3], y: &[i128; 3]) -> Option<[i128; 3]> {
        let mut z = [0i128; 3];
        for i in 0..3 {
            if x[i] == 0 {
                continue;
            }
            for j in 0..3 {
                if y[j] == 0 {
                    continue;
                }
                let xy = x[i].checked_mul(y[j])?;
                for k in 0..3 {
                    let c = self.table[i][j][k] as i128;
                    if c != 0 {
                        z[k] = z[k].checked_add(xy.checked_mul(c)?)?;
                    }
                }
            }
        }
        Some(z)
    }

    pub fn mul_big(&self, x: &BigElt, y: &BigElt) -> BigElt {
        let mut z: BigElt = Default::default();
        for i in 0..3 {
            if x[i].is_zero() {
                continue;
            }
            for j in 0..3 {
                if y[j].is_zero() {
                    continue;
                }
                let xy = &x[i] * &y[j];
                for k in 0..3 {
                    let c = self.table[i][j][k];
                    if c != 0 {
                        z[k] += &xy * c;
                    }
                }
            }
        }
        z
    }

    pub fn pow_big(&self, x: &BigElt, mut e: u64) -> BigElt {
        let mut r = to_big(&Self::one());
        let mut b = x.clone();
        while e > 0 {
            if e & 1 == 1 {
                r = self.mul_big(&r, &b);
            }
            e >>= 1;
            if e > 0 {
                b = self.mul_big(&b, &b);
            }
        }
        r
    }

    pub fn mult_matrix_i128(&self, x: &[i128; 3]) -> Option<[[i128; 3]; 3]> {
        let mut m = [[0i128; 3]; 3];
        for i in 0..3 {
            if x[i] == 0 {
                continue;
            }
            for k in 0..3 {
                for j in 0..3 {
                    let c = self.mats[i][k][j] as i128;
                    if c != 0 {
                        m[k][j] = m[k][j].checked_add(x[i].checked_mul(c)?)?;
                    }
                }
            }
        }
        Some(m)
    }

    pub fn norm_i128(&self, x: &[i128; 3]) -> Option<i128> {
        let m = self.mult_matrix_i128(x)?;
        let t1 = m[1][1].checked_mul(m[2][2])?.checked_sub(m[1][2].checked_mul(m[2][1])?)?;
        let t2 = m[1][0].checked_mul(m[2][2])?.checked_sub(m[1][2].checked_mul(m[2][0])?)?;
        let t3 = m[1][0].checked_mul(m[2][1])?.checked_sub(m[1][1].checked_mul(m[2][0])?)?;
        m[0][0]
            .checked_mul(t1)?
            .checked_sub(m[0][1].checked_mul(t2)?)?
            .checked_add(m[0][2].checked_mul(t3)?)
    }

    pub fn norm(&self, x: &Elt) -> Option<i128> {
        self.norm_i128(&[x[0] as i128, x[1] as i128, x[2] as i128])
    }

    pub fn norm_big(&self, x: &BigElt) -> BigInt {
        det3(&mult_matrix_big(&self.table, x))
    }

    pub fn trace(&self, x: &Elt) -> i64 {
        (0..3).map(|i| x[i] * self.traces[i]).sum()
    }

    pub fn sigma(&self, x: &Elt) -> Elt {
        let mut y = [0i64; 3];
        for i in 0..3 {
            y[i] = (0..3).map(|j| self.sigma[i][j] * x[j]).sum();
        }
        y
    }

    pub fn sigma_big(&self, x: &BigElt) -> BigElt {
        let mut y: BigElt = Default::default();
        for i in 0..3 {
            for j in 0..3 {
                if self.sigma[i][j] != 0 {
                    y[i] += &x[j] * self.sigma[i][j];
                }
            }
        }
        y
    }

    /// `σ(x)·σ²(x)`, so that `x·adjugate(x) = N(x)`.
    pub fn adjugate_big(&self, x: &BigElt) -> BigElt {
        let s1 = self.sigma_big(x);
        let s2 = self.sigma_big(&s1);
        self.mul_big(&s1, &s2)
    }

    /// `x / y` if the quotient is integral.
    pub fn div_exact_big(&self, x: &BigElt, y: &BigElt) -> Option<BigElt> {
        let n = self.norm_big(y);
        if n.is_zero() {
            return None;
        }
        let num = self.mul_big(x, &self.adjugate_big(y));
        let mut out: BigElt = Default::default();
        for i in 0..3 {
            let (qq, r) = num[i].div_rem(&n);
            if !r.is_zero() {
                return None;
            }
            out[i] = qq;
        }
        Some(out)
    }

    /// Characteristic polynomial `(tr, e2, det)` of the element.
    pub fn charpoly_big(&self, x: &BigElt) -> (BigInt, BigInt, BigInt) {
        charpoly_big(&mult_matrix_big(&self.table, x))
    }
}

pub fn to_big(x: &Elt) -> BigElt {
    [BigInt::from(x[0]), BigInt::from(x[1]), BigInt::from(x[2])]
}

pub fn from_big(x: &BigElt) -> Option<Elt> {
    Some([x[0].to_i64()?, x[1].to_i64()?, x[2].to_i64()?])
}

fn poly_disc(g: &[i64; 3]) -> BigInt {
    // x³ + a x² + b x + c
    let (a, b, c) = (BigInt::from(g[2]), BigInt::from(g[1]), BigInt::from(g[0]));
    &a * &a * &b * &b - BigInt::from(4) * &b * &b * &b - BigInt::from(4) * &a * &a * &a * &c - BigInt::from(27) * &c * &c
        + BigInt::from(18) * &a * &b * &c
}

fn enlarge(basis: &QMat3, table: &[[[i64; 3]; 3]; 3], g: &[i64; 3], x: &[BigInt; 3], p: u64) -> Result<QMat3> {
    // x/p in θ-coordinates, then the ring O[x/p] spanned by w_i, (x/p) w_i, (x/p)² w_i
    let _ = table;
    let pq = BigRational::from_integer(BigInt::from(p));
    let mut xt = [BigRational::zero(), BigRational::zero(), BigRational::zero()];
    for i in 0..3 {
        for j in 0..3 {
            xt[j] += BigRational::from_integer(x[i].clone()) * &basis[i][j] / &pq;
        }
    }
    let x2 = polymul_mod(&xt, &xt, g);
    let mut gens: Vec<[BigRational; 3]> = Vec::new();
    for i in 0..3 {
        gens.push(basis[i].clone());
        gens.push(polymul_mod(&xt, &basis[i], g));
        gens.push(polymul_mod(&x2, &basis[i], g));
    }
    let mut den = BigInt::one();
    for r in &gens {
        for c in r {
            den = den.lcm(c.denom());
        }
    }
    let rows: Vec<Row3> = gens
        .iter()
        .map(|r| {
            let mut out: Row3 = Default::default();
            for k in 0..3 {
                out[k] = (&r[k] * BigRational::from_integer(den.clone())).to_integer();
            }
            out
        })
        .collect();
    let h = hnf_lower(&rows).ok_or_else(|| crate::Error::Consistency("enlarged order has rank < 3".into()))?;
    let mut out = qmat_identity();
    let dq = BigRational::from_integer(den);
    for i in 0..3 {
        for j in 0..3 {
            out[i][j] = BigRational::from_integer(h[i][j].clone()) / &dq;
        }
    }
    if out[0][0] != BigRational::one() {
        bail!(Consistency, "enlarged order does not contain 1 as a basis vector");
    }
    Ok(out)
}

fn inv3_f64(m: &[[f64; 3]; 3]) -> [[f64; 3]; 3] {
    let det = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
    let mut inv = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            let r: Vec<usize> = (0..3).filter(|&x| x != j).collect();
            let s: Vec<usize> = (0..3).filter(|&x| x != i).collect();
            let minor = m[r[0]][s[0]] * m[r[1]][s[1]] - m[r[0]][s[1]] * m[r[1]][s[0]];
            let sign = if (i + j) % 2 == 0 { 1.0 } else { -1.0 };
            inv[i][j] = sign * minor / det;
        }
    }
    inv
}

/// Lagrange-reduce `(w1, w2)` for `Σ e_k(x)² − Tr(x)²/3` and size-reduce
/// against 1. `w_0 = 1` is kept.
fn reduce_basis(basis: &QMat3, emb: &[[f64; 3]; 3]) -> QMat3 {
    let vec_of = |c: &[i64; 3]| -> [f64; 3] {
        let mut v = [0.0; 3];
        for k in 0..3 {
            v[k] = (0..3).map(|i| emb[k][i] * c[i] as f64).sum();
        }
        v
    };
    let form = |a: &[f64; 3], b: &[f64; 3]| -> f64 {
        let ta: f64 = a.iter().sum();
        let tb: f64 = b.iter().sum();
        a[0] * b[0] + a[1] * b[1] + a[2] * b[2] - ta * tb / 3.0
    };
    let mut u: [i64; 3] = [0, 1, 0];
    let mut v: [i64; 3] = [0, 0, 1];
    for _ in 0..200 {
        let (eu, ev) = (vec_of(&u), vec_of(&v));
        let (nu, nv) = (form(&eu, &eu), form(&ev, &ev));
        if nu > nv {
            std::mem::swap(&mut u, &mut v);
            continue;
        }
        let mu = (form(&eu, &ev) / nu).round() as i64;
        if mu == 0 {
            break;
        }
        for k in 0..3 {
            v[k] -= mu * u[k];
        }
    }
    let mut out = qmat_identity();
    for (row, c) in [(1usize, u), (2usize, v)] {
        let e = vec_of(&c);
        let shift = (e.iter().sum::<f64>() / 3.0).round() as i64;
        let mut c = c;
        c[0] -= shift;
        for j in 0..3 {
            let mut s = BigRational::zero();
            for i in 0..3 {
                s += q(c[i]) * &basis[i][j];
            }
            out[row][j] = s;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cubicfield::{enumerate_fields, CyclicCubicField};

    #[test]
    fn conductor_7_polynomial() {
        let f = CyclicCubicField::of_prime_conductor(7).unwrap();
        let ib = f.integral_basis().unwrap();
        assert_eq!(ib.defining_cubic, [-1, -2, 1]);
        assert_eq!(ib.basis_disc, BigInt::from(49));
    }

    #[test]
    fn conductor_9_polynomial() {
        let f = CyclicCubicField::of_prime_conductor(9).unwrap();
        let ib = f.integral_basis().unwrap();
        // x³ − 3x + 1, which is x³ − 3x − 1 under x ↦ −x
        assert_eq!(ib.defining_cubic, [1, -3, 0]);
        assert_eq!(ib.basis_disc, BigInt::from(81));
    }

    #[test]
    fn conductor_13_discriminant() {
        let f = CyclicCubicField::of_prime_conductor(13).unwrap();
        assert_eq!(f.integral_basis().unwrap().basis_disc, BigInt::from(169));
        let g = f.integral_basis().unwrap().defining_cubic;
        assert_eq!(poly_disc(&g), BigInt::from(169));
    }

    #[test]
    fn all_small_conductors_certify() {
        for f in enumerate_fields(1e6, false, 1).unwrap() {
            let o = f.order().unwrap_or_else(|e| panic!("conductor {}: {e}", f.conductor()));
            assert_eq!(o.disc, BigInt::from(f.discriminant()));
            let th = to_big(&o.theta);
            let (tr, e2, det) = o.charpoly_big(&th);
            let g = o.defining_cubic;
            assert_eq!((tr, e2, det), (BigInt::from(-g[2]), BigInt::from(g[1]), BigInt::from(-g[0])));
        }
    }

    #[test]
    fn arithmetic_is_consistent_with_embeddings() {
        let f = CyclicCubicField::of_prime_conductor(163).unwrap();
        let o = f.order().unwrap();
        let x: Elt = [3, -2, 5];
        let y: Elt = [-1, 4, 1];
        let z = o.mul(&x, &y).unwrap();
        let (ex, ey, ez) = (o.embeddings(&x), o.embeddings(&y), o.embeddings(&z));
        for k in 0..3 {
            assert!((ex[k] * ey[k] - ez[k]).abs() < 1e-8 * (1.0 + ez[k].abs()));
        }
        let n = o.norm(&x).unwrap() as f64;
        assert!((n - ex[0] * ex[1] * ex[2]).abs() < 1e-6 * n.abs().max(1.0));
        let sx = o.sigma(&x);
        let es = o.embeddings(&sx);
        assert!((es[0] - ex[1]).abs() < 1e-8 && (es[1] - ex[2]).abs() < 1e-8 && (es[2] - ex[0]).abs() < 1e-8);
        let xb = to_big(&x);
        let q = o.div_exact_big(&o.mul_big(&xb, &to_big(&y)), &to_big(&y)).unwrap();
        assert_eq!(q, xb);
    }
}
