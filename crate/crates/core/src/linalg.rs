//! Small exact linear algebra: rank-3 Hermite forms over Z and Q, 3×3
//! determinants and inverses, and a Smith normal form with transforms.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

pub type Row3 = [BigInt; 3];
pub type Mat3 = [[BigInt; 3]; 3];
pub type QMat3 = [[BigRational; 3]; 3];

pub fn zero_row() -> Row3 {
    [BigInt::zero(), BigInt::zero(), BigInt::zero()]
}

/// Lower-triangular Hermite basis of the full-rank lattice spanned by `rows`:
/// `[ (a,0,0), (b,c,0), (d,e,f) ]` with positive diagonal and off-diagonal
/// entries reduced into `[0, diagonal)` of their column.
///
/// Returns `None` if the rows do not span a rank-3 lattice.
pub fn hnf_lower(rows: &[Row3]) -> Option<Mat3> {
    let mut pool: Vec<Row3> = rows.iter().filter(|r| r.iter().any(|x| !x.is_zero())).cloned().collect();
    let mut pivots: Vec<Option<Row3>> = vec![None, None, None];
    for col in (0..3).rev() {
        loop {
            let mut best: Option<usize> = None;
            for (i, r) in pool.iter().enumerate() {
                if !r[col].is_zero() && best.map_or(true, |b| r[col].abs() < pool[b][col].abs()) {
                    best = Some(i);
                }
            }
            let Some(b) = best else { break };
            let piv = pool[b].clone();
            let mut others_nonzero = false;
            for (i, r) in pool.iter_mut().enumerate() {
                if i == b || r[col].is_zero() {
                    continue;
                }
                let q = r[col].div_floor(&piv[col]);
                for k in 0..3 {
                    r[k] -= &q * &piv[k];
                }
                if !r[col].is_zero() {
                    others_nonzero = true;
                }
            }
            if !others_nonzero {
                let mut piv = pool.swap_remove(b);
                if piv[col].is_negative() {
                    for x in piv.iter_mut() {
                        *x = -&*x;
                    }
                }
                pivots[col] = Some(piv);
                pool.retain(|r| r.iter().any(|x| !x.is_zero()));
                break;
            }
        }
        pool.retain(|r| r.iter().any(|x| !x.is_zero()));
        if pivots[col].is_none() {
            return None;
        }
    }
    let mut m: Mat3 = [
        pivots[0].take().unwrap(),
        pivots[1].take().unwrap(),
        pivots[2].take().unwrap(),
    ];
    // reduce entries below the diagonal: row i, column j < i, modulo m[j][j]
    for i in 1..3 {
        for j in (0..i).rev() {
            let q = m[i][j].div_floor(&m[j][j]);
            if !q.is_zero() {
                let rj = m[j].clone();
                for k in 0..3 {
                    m[i][k] -= &q * &rj[k];
                }
            }
        }
    }
    Some(m)
}

/// Canonical representative of `x` modulo the lattice with lower Hermite basis `h`.
pub fn reduce_mod_hnf(x: &Row3, h: &Mat3) -> Row3 {
    let mut x = x.clone();
    for i in (0..3).rev() {
        let q = x[i].div_floor(&h[i][i]);
        if !q.is_zero() {
            for k in 0..3 {
                x[k] -= &q * &h[i][k];
            }
        }
    }
    x
}

/// Whether `x` lies in the lattice with lower Hermite basis `h`.
pub fn in_lattice(x: &Row3, h: &Mat3) -> bool {
    reduce_mod_hnf(x, h).iter().all(|v| v.is_zero())
}

pub fn det3<T>(m: &[[T; 3]; 3]) -> T
where
    T: Clone + std::ops::Mul<Output = T> + std::ops::Sub<Output = T> + std::ops::Add<Output = T>,
{
    let a = |i: usize, j: usize| m[i][j].clone();
    a(0, 0) * (a(1, 1) * a(2, 2) - a(1, 2) * a(2, 1)) - a(0, 1) * (a(1, 0) * a(2, 2) - a(1, 2) * a(2, 0))
        + a(0, 2) * (a(1, 0) * a(2, 1) - a(1, 1) * a(2, 0))
}

pub fn qmat_identity() -> QMat3 {
    let z = || BigRational::zero();
    let o = || BigRational::one();
    [[o(), z(), z()], [z(), o(), z()], [z(), z(), o()]]
}

pub fn qmat_mul(a: &QMat3, b: &QMat3) -> QMat3 {
    let mut out = qmat_identity();
    for i in 0..3 {
        for j in 0..3 {
            let mut s = BigRational::zero();
            for k in 0..3 {
                s += &a[i][k] * &b[k][j];
            }
            out[i][j] = s;
        }
    }
    out
}

pub fn qmat_inverse(m: &QMat3) -> Option<QMat3> {
    let d = det3(m);
    if d.is_zero() {
        return None;
    }
    let c = |i: usize, j: usize| -> BigRational {
        let r: Vec<usize> = (0..3).filter(|&x| x != i).collect();
        let s: Vec<usize> = (0..3).filter(|&x| x != j).collect();
        &m[r[0]][s[0]] * &m[r[1]][s[1]] - &m[r[0]][s[1]] * &m[r[1]][s[0]]
    };
    let mut inv = qmat_identity();
    for i in 0..3 {
        for j in 0..3 {
            let sign = if (i + j) % 2 == 0 { BigRational::one() } else { -BigRational::one() };
            inv[j][i] = sign * c(i, j) / &d;
        }
    }
    Some(inv)
}

/// Row vector times matrix.
pub fn qvec_mul(v: &[BigRational; 3], m: &QMat3) -> [BigRational; 3] {
    let mut out = [BigRational::zero(), BigRational::zero(), BigRational::zero()];
    for j in 0..3 {
        for k in 0..3 {
            out[j] += &v[k] * &m[k][j];
        }
    }
    out
}

/// Smith normal form of an integer matrix `a` (r×c): returns `(d, u, v)` with
/// `u·a·v = diag(d)` (padded with zeros), `u`, `v` unimodular, and
/// `d[0] | d[1] | …` non-negative.
pub fn smith(a: &[Vec<BigInt>]) -> (Vec<BigInt>, Vec<Vec<BigInt>>, Vec<Vec<BigInt>>) {
    let r = a.len();
    let c = if r == 0 { 0 } else { a[0].len() };
    let mut m: Vec<Vec<BigInt>> = a.to_vec();
    let mut u = identity(r);
    let mut v = identity(c);
    let n = r.min(c);
    let mut t = 0;
    while t < n {
        // find a nonzero pivot of minimal absolute value in the trailing block
        let mut best: Option<(usize, usize)> = None;
        for i in t..r {
            for j in t..c {
                if !m[i][j].is_zero() && best.map_or(true, |(bi, bj)| m[i][j].abs() < m[bi][bj].abs()) {
                    best = Some((i, j));
                }
            }
        }
        let Some((pi, pj)) = best else { break };
        m.swap(t, pi);
        u.swap(t, pi);
        for row in m.iter_mut() {
            row.swap(t, pj);
        }
        for row in v.iter_mut() {
            row.swap(t, pj);
        }
        let mut done = false;
        while !done {
            done = true;
            // clear column t
            for i in (t + 1)..r {
                if m[i][t].is_zero() {
                    continue;
                }
                let q = m[i][t].div_floor(&m[t][t]);
                row_sub(&mut m, i, t, &q);
                row_sub(&mut u, i, t, &q);
                if !m[i][t].is_zero() {
                    m.swap(t, i);
                    u.swap(t, i);
                    done = false;
                }
            }
            // clear row t
            for j in (t + 1)..c {
                if m[t][j].is_zero() {
                    continue;
                }
                let q = m[t][j].div_floor(&m[t][t]);
                col_sub(&mut m, j, t, &q);
                col_sub(&mut v, j, t, &q);
                if !m[t][j].is_zero() {
                    for row in m.iter_mut() {
                        row.swap(t, j);
                    }
                    for row in v.iter_mut() {
                        row.swap(t, j);
                    }
                    done = false;
                }
            }
            if done {
                // divisibility: pivot must divide the trailing block
                'outer: for i in (t + 1)..r {
                    for j in (t + 1)..c {
                        if !(&m[i][j] % &m[t][t]).is_zero() {
                            // add row i to row t and restart
                            let one = -BigInt::one();
                            row_sub(&mut m, t, i, &one);
                            row_sub(&mut u, t, i, &one);
                            done = false;
                            break 'outer;
                        }
                    }
                }
            }
        }
        if m[t][t].is_negative() {
            for x in m[t].iter_mut() {
                *x = -&*x;
            }
            for x in u[t].iter_mut() {
                *x = -&*x;
            }
        }
        t += 1;
    }
    let d = (0..n).map(|i| m[i][i].clone()).collect();
    (d, u, v)
}

fn identity(n: usize) -> Vec<Vec<BigInt>> {
    (0..n).map(|i| (0..n).map(|j| if i == j { BigInt::one() } else { BigInt::zero() }).collect()).collect()
}

/// row_i -= q·row_j
fn row_sub(m: &mut [Vec<BigInt>], i: usize, j: usize, q: &BigInt) {
    if q.is_zero() {
        return;
    }
    let rj = m[j].clone();
    for (x, y) in m[i].iter_mut().zip(rj.iter()) {
        *x -= q * y;
    }
}

/// col_i -= q·col_j
fn col_sub(m: &mut [Vec<BigInt>], i: usize, j: usize, q: &BigInt) {
    if q.is_zero() {
        return;
    }
    for row in m.iter_mut() {
        let y = row[j].clone();
        row[i] -= q * y;
    }
}

/// LLL reduction (δ = 0.99) of three integer row vectors under the
/// positive definite form `|emb(x)|²`. Returns `false` if an update would
/// overflow; the basis is then left partially reduced but still valid.
pub fn lll3(b: &mut [[i128; 3]; 3], emb: &dyn Fn(&[i128; 3]) -> [f64; 3]) -> bool {
    let dot = |x: &[f64; 3], y: &[f64; 3]| x[0] * y[0] + x[1] * y[1] + x[2] * y[2];
    let mut k = 1;
    let mut guard = 0;
    while k < 3 {
        guard += 1;
        if guard > 10_000 {
            return false;
        }
        let v: Vec<[f64; 3]> = b.iter().map(|r| emb(r)).collect();
        // Gram–Schmidt
        let mut star = v.clone();
        let mut mu = [[0.0f64; 3]; 3];
        for i in 0..3 {
            for j in 0..i {
                mu[i][j] = dot(&v[i], &star[j]) / dot(&star[j], &star[j]);
                for t in 0..3 {
                    star[i][t] -= mu[i][j] * star[j][t];
                }
            }
        }
        let mut changed = false;
        for j in (0..k).rev() {
            let q = mu[k][j].round();
            if q != 0.0 {
                if !(q.abs() < 1e30) {
                    return false;
                }
                let qi = q as i128;
                for t in 0..3 {
                    match b[j][t].checked_mul(qi).and_then(|d| b[k][t].checked_sub(d)) {
                        Some(x) => b[k][t] = x,
                        None => return false,
                    }
                }
                for jj in 0..=j {
                    mu[k][jj] -= q * if jj == j { 1.0 } else { mu[j][jj] };
                }
                changed = true;
            }
        }
        if changed {
            continue;
        }
        let lhs = dot(&star[k], &star[k]);
        let rhs = (0.99 - mu[k][k - 1] * mu[k][k - 1]) * dot(&star[k - 1], &star[k - 1]);
        if lhs >= rhs {
            k += 1;
        } else {
            b.swap(k, k - 1);
            k = (k - 1).max(1);
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    fn b(x: i64) -> BigInt {
        BigInt::from(x)
    }

    fn mat(rows: &[Vec<i64>]) -> Vec<Vec<BigInt>> {
        rows.iter().map(|r| r.iter().map(|&x| b(x)).collect()).collect()
    }

    fn matmul(a: &[Vec<BigInt>], bm: &[Vec<BigInt>]) -> Vec<Vec<BigInt>> {
        let n = a.len();
        let m = bm[0].len();
        let k = bm.len();
        (0..n).map(|i| (0..m).map(|j| (0..k).map(|l| &a[i][l] * &bm[l][j]).sum()).collect()).collect()
    }

    #[test]
    fn hnf_of_known_lattice() {
        let rows = vec![[b(2), b(0), b(0)], [b(0), b(3), b(0)], [b(1), b(1), b(5)], [b(4), b(6), b(10)]];
        let h = hnf_lower(&rows).unwrap();
        let det = &h[0][0] * &h[1][1] * &h[2][2];
        // the fourth row adds (2,4,0), which halves the index of the first three
        assert_eq!(det, b(10));
        for r in &rows {
            assert!(in_lattice(r, &h));
        }
        assert!(hnf_lower(&[[b(1), b(0), b(0)], [b(2), b(0), b(0)]]).is_none());
    }

    #[test]
    fn smith_form_with_transforms() {
        let a = mat(&[vec![2, 4, 4], vec![-6, 6, 12], vec![10, -4, -16]]);
        let (d, u, v) = smith(&a);
        assert_eq!(d, vec![b(2), b(6), b(12)]);
        let p = matmul(&matmul(&u, &a), &v);
        for i in 0..3 {
            for j in 0..3 {
                let expect = if i == j { d[i].clone() } else { b(0) };
                assert_eq!(p[i][j], expect);
            }
        }
        let a = mat(&[vec![2, 0], vec![0, 3], vec![4, 6]]);
        let (d, _, _) = smith(&a);
        assert_eq!(d, vec![b(1), b(6)]);
    }
}
