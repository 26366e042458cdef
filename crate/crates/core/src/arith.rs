//! Rational-integer utilities: sieving, factorization, modular arithmetic,
//! roots of small polynomials mod p, exact integer roots.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, ToPrimitive, Zero};

/// All primes `<= n`.
pub fn primes_up_to(n: u64) -> Vec<u64> {
    if n < 2 {
        return Vec::new();
    }
    let n = n as usize;
    let mut composite = vec![false; n + 1];
    let mut out = Vec::new();
    let mut i = 2;
    while i * i <= n {
        if !composite[i] {
            let mut j = i * i;
            while j <= n {
                composite[j] = true;
                j += i;
            }
        }
        i += 1;
    }
    for (k, &c) in composite.iter().enumerate().skip(2) {
        if !c {
            out.push(k as u64);
        }
    }
    out
}

#[inline]
pub fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

pub fn pow_mod(mut b: u64, mut e: u64, m: u64) -> u64 {
    if m == 1 {
        return 0;
    }
    let mut r = 1u64;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            r = mul_mod(r, b, m);
        }
        b = mul_mod(b, b, m);
        e >>= 1;
    }
    r
}

/// Inverse of `a` modulo `m`, if it exists.
pub fn inv_mod(a: i128, m: i128) -> Option<i128> {
    let (mut r0, mut r1) = (a.rem_euclid(m), m);
    let (mut s0, mut s1) = (1i128, 0i128);
    while r1 != 0 {
        let q = r0 / r1;
        (r0, r1) = (r1, r0 - q * r1);
        (s0, s1) = (s1, s0 - q * s1);
    }
    if r0 != 1 {
        return None;
    }
    Some(s0.rem_euclid(m))
}

/// Deterministic Miller-Rabin for 64-bit integers.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n % p == 0 {
            return n == p;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d % 2 == 0 {
        d /= 2;
        s += 1;
    }
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

fn pollard_rho(n: u64) -> u64 {
    if n % 2 == 0 {
        return 2;
    }
    let mut c = 1u64;
    loop {
        let f = |x: u64| (mul_mod(x, x, n) + c) % n;
        let (mut x, mut y, mut d) = (2u64, 2u64, 1u64);
        while d == 1 {
            x = f(x);
            y = f(f(y));
            d = x.abs_diff(y).gcd(&n);
        }
        if d != n {
            return d;
        }
        c += 1;
    }
}

/// Prime factorization of `n >= 1`, sorted by prime.
pub fn factor(mut n: u64) -> Vec<(u64, u32)> {
    assert!(n >= 1, "factor(0)");
    let mut out: Vec<(u64, u32)> = Vec::new();
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47] {
        if n % p == 0 {
            let mut e = 0;
            while n % p == 0 {
                n /= p;
                e += 1;
            }
            out.push((p, e));
        }
    }
    let mut stack = vec![];
    if n > 1 {
        stack.push(n);
    }
    let mut primes = Vec::new();
    while let Some(m) = stack.pop() {
        if is_prime(m) {
            primes.push(m);
        } else {
            let d = pollard_rho(m);
            stack.push(d);
            stack.push(m / d);
        }
    }
    primes.sort_unstable();
    for p in primes {
        match out.last_mut() {
            Some((q, e)) if *q == p => *e += 1,
            _ => out.push((p, 1)),
        }
    }
    out.sort_unstable();
    out
}

pub fn is_squarefree(n: u64) -> bool {
    factor(n).iter().all(|&(_, e)| e == 1)
}

/// Number of distinct prime factors.
pub fn omega(n: u64) -> u32 {
    factor(n).len() as u32
}

/// Multiplicative order / smallest primitive root modulo an odd prime.
pub fn primitive_root(p: u64) -> u64 {
    if p == 2 {
        return 1;
    }
    let fs = factor(p - 1);
    (2..p)
        .find(|&g| fs.iter().all(|&(q, _)| pow_mod(g, (p - 1) / q, p) != 1))
        .expect("primitive root exists")
}

pub fn isqrt(n: u64) -> u64 {
    let mut r = (n as f64).sqrt() as u64;
    while r * r > n {
        r -= 1;
    }
    while (r + 1) * (r + 1) <= n {
        r += 1;
    }
    r
}

pub fn isqrt_u128(n: u128) -> u128 {
    if n == 0 {
        return 0;
    }
    let mut r = (n as f64).sqrt() as u128;
    while r * r > n {
        r -= 1;
    }
    while (r + 1) * (r + 1) <= n {
        r += 1;
    }
    r
}

pub fn icbrt_u128(n: u128) -> u128 {
    let mut r = (n as f64).cbrt() as u128;
    while r > 0 && r * r * r > n {
        r -= 1;
    }
    while (r + 1) * (r + 1) * (r + 1) <= n {
        r += 1;
    }
    r
}

pub fn is_cube_u128(n: u128) -> bool {
    let r = icbrt_u128(n);
    r * r * r == n
}

/// Exact square root of a non-negative big integer, if it is a perfect square.
pub fn exact_sqrt(n: &BigInt) -> Option<BigInt> {
    if n.is_negative() {
        return None;
    }
    let r = n.sqrt();
    if &r * &r == *n {
        Some(r)
    } else {
        None
    }
}

pub fn bigint_to_u64(n: &BigInt) -> Option<u64> {
    n.to_u64()
}

/// Valuation of `n` at `p` (`n != 0`).
pub fn valuation_big(n: &BigInt, p: u64) -> u32 {
    let mut n = n.abs();
    let pb = BigInt::from(p);
    let mut v = 0;
    while !n.is_zero() && (&n % &pb).is_zero() {
        n /= &pb;
        v += 1;
    }
    v
}

/// Polynomials over F_p with coefficients in ascending degree order.
pub mod polymod {
    use super::{inv_mod, mul_mod};

    pub type Poly = Vec<u64>;

    pub fn trim(mut a: Poly) -> Poly {
        while a.last() == Some(&0) {
            a.pop();
        }
        a
    }

    pub fn sub(a: &[u64], b: &[u64], p: u64) -> Poly {
        let n = a.len().max(b.len());
        let mut out = vec![0; n];
        for i in 0..n {
            let x = a.get(i).copied().unwrap_or(0);
            let y = b.get(i).copied().unwrap_or(0);
            out[i] = (x + p - y) % p;
        }
        trim(out)
    }

    pub fn mul(a: &[u64], b: &[u64], p: u64) -> Poly {
        if a.is_empty() || b.is_empty() {
            return vec![];
        }
        let mut out = vec![0u64; a.len() + b.len() - 1];
        for (i, &x) in a.iter().enumerate() {
            for (j, &y) in b.iter().enumerate() {
                out[i + j] = (out[i + j] + mul_mod(x, y, p)) % p;
            }
        }
        trim(out)
    }

    pub fn rem(a: &[u64], m: &[u64], p: u64) -> Poly {
        let mut r = trim(a.to_vec());
        let dm = m.len() - 1;
        let lead_inv = inv_mod(m[dm] as i128, p as i128).unwrap() as u64;
        while r.len() > dm {
            let k = r.len() - 1 - dm;
            let c = mul_mod(*r.last().unwrap(), lead_inv, p);
            for (i, &mi) in m.iter().enumerate() {
                r[k + i] = (r[k + i] + p - mul_mod(c, mi, p)) % p;
            }
            r = trim(r);
        }
        r
    }

    pub fn gcd(a: &[u64], b: &[u64], p: u64) -> Poly {
        let mut a = trim(a.to_vec());
        let mut b = trim(b.to_vec());
        while !b.is_empty() {
            let r = rem(&a, &b, p);
            a = b;
            b = r;
        }
        if a.is_empty() {
            return a;
        }
        let inv = inv_mod(*a.last().unwrap() as i128, p as i128).unwrap() as u64;
        a.iter().map(|&c| mul_mod(c, inv, p)).collect()
    }

    /// `base^e mod m` over F_p.
    pub fn powmod(base: &[u64], mut e: u64, m: &[u64], p: u64) -> Poly {
        let mut r: Poly = vec![1];
        let mut b = rem(base, m, p);
        while e > 0 {
            if e & 1 == 1 {
                r = rem(&mul(&r, &b, p), m, p);
            }
            b = rem(&mul(&b, &b, p), m, p);
            e >>= 1;
        }
        r
    }

    pub fn eval(a: &[u64], x: u64, p: u64) -> u64 {
        a.iter().rev().fold(0, |acc, &c| (mul_mod(acc, x, p) + c) % p)
    }

    fn split(f: &[u64], p: u64, out: &mut Vec<u64>, seed: &mut u64) {
        let f = trim(f.to_vec());
        let d = f.len() - 1;
        if d == 0 {
            return;
        }
        if d == 1 {
            let inv = inv_mod(f[1] as i128, p as i128).unwrap() as u64;
            out.push((p - mul_mod(f[0], inv, p)) % p);
            return;
        }
        loop {
            *seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            let a = (*seed >> 11) % p;
            let h = powmod(&[a, 1], (p - 1) / 2, &f, p);
            let g = gcd(&f, &sub(&h, &[1], p), p);
            let dg = g.len().saturating_sub(1);
            if dg > 0 && dg < d {
                let q = div_exact(&f, &g, p);
                split(&g, p, out, seed);
                split(&q, p, out, seed);
                return;
            }
        }
    }

    pub fn div_exact(a: &[u64], b: &[u64], p: u64) -> Poly {
        let mut r = trim(a.to_vec());
        let db = b.len() - 1;
        let inv = inv_mod(b[db] as i128, p as i128).unwrap() as u64;
        let mut q = vec![0u64; r.len() - db];
        while r.len() > db {
            let k = r.len() - 1 - db;
            let c = mul_mod(*r.last().unwrap(), inv, p);
            q[k] = c;
            for (i, &bi) in b.iter().enumerate() {
                r[k + i] = (r[k + i] + p - mul_mod(c, bi, p)) % p;
            }
            r = trim(r);
        }
        q
    }

    /// Distinct roots in F_p of `f` (ascending coefficients), sorted.
    pub fn roots(f: &[u64], p: u64) -> Vec<u64> {
        let f: Poly = trim(f.iter().map(|c| c % p).collect());
        if f.len() <= 1 {
            return vec![];
        }
        if p < 600 {
            return (0..p).filter(|&x| eval(&f, x, p) == 0).collect();
        }
        let xp = powmod(&[0, 1], p, &f, p);
        let g = gcd(&f, &sub(&xp, &[0, 1], p), p);
        let mut out = Vec::new();
        let mut seed = p ^ 0x9e37_79b9_7f4a_7c15;
        if g.len() > 1 {
            split(&g, p, &mut out, &mut seed);
        }
        out.sort_unstable();
        out.dedup();
        debug_assert!(out.iter().all(|&r| eval(&f, r, p) == 0));
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sieve_matches_trial_division() {
        let ps = primes_up_to(1000);
        let naive: Vec<u64> = (2..=1000u64).filter(|&n| (2..n).all(|d| n % d != 0)).collect();
        assert_eq!(ps, naive);
        assert!(ps.iter().all(|&p| is_prime(p)));
    }

    #[test]
    fn factorization_round_trips() {
        for n in 1..5000u64 {
            let f = factor(n);
            let prod: u64 = f.iter().map(|&(p, e)| p.pow(e)).product();
            assert_eq!(prod, n);
            assert!(f.iter().all(|&(p, _)| is_prime(p)));
        }
        let n = 1_000_000_007u64 * 998_244_353;
        assert_eq!(factor(n), vec![(998_244_353, 1), (1_000_000_007, 1)]);
    }

    #[test]
    fn roots_mod_p_large_prime() {
        let p = 1_000_003u64;
        // (x - 5)(x - 17)(x - 123456)
        let r = [5u64, 17, 123456];
        let mut f = vec![1u64];
        for &x in &r {
            f = polymod::mul(&f, &[(p - x) % p, 1], p);
        }
        assert_eq!(polymod::roots(&f, p), vec![5, 17, 123456]);
        // x^2 + 1 has no roots when p = 3 mod 4 (1000003 = 3 mod 4)
        assert!(polymod::roots(&[1, 0, 1], p).is_empty());
    }

    #[test]
    fn integer_roots() {
        assert_eq!(icbrt_u128(26), 2);
        assert_eq!(icbrt_u128(27), 3);
        assert!(is_cube_u128(1_000_000_000_000_000_000));
        assert!(!is_cube_u128(1_000_000_000_000_000_001));
        assert_eq!(isqrt(99), 9);
        assert_eq!(exact_sqrt(&BigInt::from(169)), Some(BigInt::from(13)));
        assert_eq!(exact_sqrt(&BigInt::from(170)), None);
    }
}
