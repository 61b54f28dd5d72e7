//! Cyclotomic number fields Q(ζ_n) in the power basis modulo Φ_n.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};

/// Dense univariate polynomial over Q, lowest degree first, no trailing zeros.
pub(crate) type QPoly = Vec<BigRational>;

fn trim(p: &mut QPoly) {
    while p.last().is_some_and(|c| c.is_zero()) {
        p.pop();
    }
}

/// Integer coefficients of the n-th cyclotomic polynomial, lowest degree first.
pub fn cyclotomic_polynomial(n: u32) -> Vec<BigInt> {
    assert!(n >= 1, "cyclotomic order must be positive");
    // x^n - 1 divided by Φ_d for every proper divisor d.
    let mut num: Vec<BigInt> = vec![BigInt::zero(); n as usize + 1];
    num[0] = -BigInt::one();
    num[n as usize] = BigInt::one();
    for d in 1..n {
        if n.is_multiple_of(d) {
            let phi_d = cyclotomic_polynomial(d);
            num = int_exact_div(&num, &phi_d);
        }
    }
    num
}

fn int_exact_div(a: &[BigInt], b: &[BigInt]) -> Vec<BigInt> {
    let mut r: Vec<BigInt> = a.to_vec();
    let db = b.len() - 1;
    let lb = &b[db];
    let mut q = vec![BigInt::zero(); a.len() - db];
    for i in (0..q.len()).rev() {
        let c = &r[i + db] / lb;
        for (j, bj) in b.iter().enumerate() {
            r[i + j] -= &c * bj;
        }
        q[i] = c;
    }
    debug_assert!(r.iter().all(|c| c.is_zero()));
    q
}

/// The field Q(ζ_n) with precomputed reduction data.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CyclotomicField {
    order: u32,
    /// Φ_n as a monic rational polynomial.
    modulus: QPoly,
}

impl CyclotomicField {
    /// Builds Q(ζ_n).
    pub fn new(order: u32) -> Self {
        let modulus = cyclotomic_polynomial(order).into_iter().map(BigRational::from_integer).collect();
        CyclotomicField { order, modulus }
    }

    /// The order n of the adjoined root of unity.
    pub fn order(&self) -> u32 {
        self.order
    }

    /// Degree φ(n) of the field over Q.
    pub fn degree(&self) -> usize {
        self.modulus.len() - 1
    }

    /// Reduces an arbitrary rational polynomial in ζ to the power basis.
    pub fn reduce(&self, mut p: QPoly) -> QPoly {
        let d = self.degree();
        while p.len() > d {
            let top = p.pop().expect("nonempty");
            if top.is_zero() {
                continue;
            }
            let shift = p.len() - d;
            for (j, mj) in self.modulus.iter().take(d).enumerate() {
                p[shift + j] -= &top * mj;
            }
        }
        trim(&mut p);
        p
    }

    /// ζ^j in the power basis.
    pub fn zeta_pow(&self, j: i64) -> QPoly {
        let e = j.rem_euclid(self.order as i64) as usize;
        let mut p = vec![BigRational::zero(); e + 1];
        p[e] = BigRational::one();
        self.reduce(p)
    }

    /// Product of two reduced elements.
    pub fn mul(&self, a: &QPoly, b: &QPoly) -> QPoly {
        if a.is_empty() || b.is_empty() {
            return Vec::new();
        }
        let mut out = vec![BigRational::zero(); a.len() + b.len() - 1];
        for (i, ai) in a.iter().enumerate() {
            if ai.is_zero() {
                continue;
            }
            for (j, bj) in b.iter().enumerate() {
                out[i + j] += ai * bj;
            }
        }
        self.reduce(out)
    }

    /// Inverse of a nonzero reduced element via the extended Euclidean algorithm.
    pub fn inv(&self, a: &QPoly) -> Option<QPoly> {
        if a.is_empty() {
            return None;
        }
        if a.len() == 1 {
            return Some(vec![a[0].recip()]);
        }
        // Invariant: s * a ≡ r (mod Φ_n).
        let (mut r0, mut r1) = (self.modulus.clone(), a.clone());
        let (mut s0, mut s1): (QPoly, QPoly) = (Vec::new(), vec![BigRational::one()]);
        while r1.len() > 1 {
            let (q, r) = qpoly_divrem(&r0, &r1);
            let s2 = qpoly_sub(&s0, &qpoly_mul(&q, &s1));
            r0 = std::mem::replace(&mut r1, r);
            s0 = std::mem::replace(&mut s1, s2);
        }
        if r1.is_empty() {
            return None;
        }
        let c = r1[0].recip();
        Some(self.reduce(s1.into_iter().map(|x| x * &c).collect()))
    }
}

impl CyclotomicField {
    /// A p-th root of a number of the form q·ζ^j with q rational, if one exists here.
    pub fn root_of_monomial(&self, c: &QPoly, p: u32) -> Option<QPoly> {
        let n = self.order() as i64;
        for j in 0..n {
            let shifted = self.mul(c, &self.zeta_pow(-j));
            if shifted.len() != 1 {
                continue;
            }
            let Some(r) = rational_root(&shifted[0], p) else { continue };
            for jj in 0..n {
                if (jj * p as i64 - j).rem_euclid(n) == 0 {
                    return Some(self.mul(&vec![r], &self.zeta_pow(jj)));
                }
            }
        }
        None
    }
}

/// Exact p-th root of a rational number.
pub(crate) fn rational_root(q: &BigRational, p: u32) -> Option<BigRational> {
    use num_traits::Signed;
    let neg = q.is_negative();
    if neg && p.is_multiple_of(2) {
        return None;
    }
    let root = |x: &BigInt| -> Option<BigInt> {
        let r = x.abs().nth_root(p);
        (num_traits::pow(r.clone(), p as usize) == x.abs()).then_some(r)
    };
    let n = root(q.numer())?;
    let d = root(q.denom())?;
    let r = BigRational::new(n, d);
    Some(if neg { -r } else { r })
}

pub(crate) fn qpoly_add(a: &QPoly, b: &QPoly) -> QPoly {
    let n = a.len().max(b.len());
    let mut out: QPoly = (0..n)
        .map(|i| {
            let x = a.get(i).cloned().unwrap_or_else(BigRational::zero);
            let y = b.get(i).cloned().unwrap_or_else(BigRational::zero);
            x + y
        })
        .collect();
    trim(&mut out);
    out
}

pub(crate) fn qpoly_neg(a: &QPoly) -> QPoly {
    a.iter().map(|c| -c).collect()
}

pub(crate) fn qpoly_sub(a: &QPoly, b: &QPoly) -> QPoly {
    qpoly_add(a, &qpoly_neg(b))
}

pub(crate) fn qpoly_mul(a: &QPoly, b: &QPoly) -> QPoly {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![BigRational::zero(); a.len() + b.len() - 1];
    for (i, ai) in a.iter().enumerate() {
        for (j, bj) in b.iter().enumerate() {
            out[i + j] += ai * bj;
        }
    }
    trim(&mut out);
    out
}

pub(crate) fn qpoly_divrem(a: &QPoly, b: &QPoly) -> (QPoly, QPoly) {
    assert!(!b.is_empty(), "polynomial division by zero");
    let mut r = a.clone();
    trim(&mut r);
    if r.len() < b.len() {
        return (Vec::new(), r);
    }
    let db = b.len() - 1;
    let lb = b[db].clone();
    let mut q = vec![BigRational::zero(); r.len() - db];
    for i in (0..q.len()).rev() {
        let c = &r[i + db] / &lb;
        if !c.is_zero() {
            for (j, bj) in b.iter().enumerate() {
                r[i + j] -= &c * bj;
            }
        }
        q[i] = c;
    }
    trim(&mut q);
    trim(&mut r);
    (q, r)
}

/// Smallest prime `p ≡ 1 (mod n)` with `p > lower`.
pub fn prime_congruent_one(n: u64, lower: u64) -> u64 {
    let mut p = lower + 1;
    p += (n + 1 - p % n) % n;
    loop {
        if p > 2 && is_prime(p) {
            return p;
        }
        p += n;
    }
}

fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= p {
        if p.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

/// An element of multiplicative order exactly `n` in F_p, where `n | p - 1`.
pub fn root_of_unity_mod(n: u64, p: u64) -> u64 {
    let mut factors = Vec::new();
    let mut m = n;
    let mut f = 2;
    while f * f <= m {
        if m.is_multiple_of(f) {
            factors.push(f);
            while m.is_multiple_of(f) {
                m /= f;
            }
        }
        f += 1;
    }
    if m > 1 {
        factors.push(m);
    }
    for g in 2..p {
        let w = pow_mod(g, (p - 1) / n, p);
        if factors.iter().all(|q| pow_mod(w, n / q, p) != 1) {
            return w;
        }
    }
    1
}

pub(crate) fn pow_mod(mut b: u64, mut e: u64, p: u64) -> u64 {
    let mut r = 1u64 % p;
    b %= p;
    while e > 0 {
        if e & 1 == 1 {
            r = ((r as u128 * b as u128) % p as u128) as u64;
        }
        b = ((b as u128 * b as u128) % p as u128) as u64;
        e >>= 1;
    }
    r
}

/// Reduces a rational modulo `p`; `None` if the denominator vanishes.
pub(crate) fn rational_mod(q: &BigRational, p: u64) -> Option<u64> {
    let pb = BigInt::from(p);
    let n = q.numer().mod_floor(&pb);
    let d = q.denom().mod_floor(&pb);
    if d.is_zero() {
        return None;
    }
    let n: u64 = n.try_into().ok()?;
    let d: u64 = d.try_into().ok()?;
    Some(((n as u128 * pow_mod(d, p - 2, p) as u128) % p as u128) as u64)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ints(v: &[i64]) -> Vec<BigInt> {
        v.iter().map(|&x| BigInt::from(x)).collect()
    }

    #[test]
    fn small_cyclotomic_polynomials() {
        assert_eq!(cyclotomic_polynomial(1), ints(&[-1, 1]));
        assert_eq!(cyclotomic_polynomial(4), ints(&[1, 0, 1]));
        assert_eq!(cyclotomic_polynomial(6), ints(&[1, -1, 1]));
        assert_eq!(cyclotomic_polynomial(12), ints(&[1, 0, -1, 0, 1]));
    }

    #[test]
    fn zeta_has_order_n() {
        let f = CyclotomicField::new(12);
        let z = f.zeta_pow(1);
        let mut acc = f.zeta_pow(0);
        for k in 1..=12 {
            acc = f.mul(&acc, &z);
            assert_eq!(acc == f.zeta_pow(0), k == 12, "k = {k}");
        }
    }

    #[test]
    fn inverse_roundtrip() {
        let f = CyclotomicField::new(12);
        let a = f.reduce(vec![
            BigRational::from_integer(2.into()),
            BigRational::from_integer((-1).into()),
            BigRational::from_integer(3.into()),
        ]);
        let ai = f.inv(&a).unwrap();
        assert_eq!(f.mul(&a, &ai), f.zeta_pow(0));
    }

    #[test]
    fn modular_roots() {
        let p = prime_congruent_one(12, 1000);
        assert_eq!(p % 12, 1);
        let w = root_of_unity_mod(12, p);
        assert_eq!(pow_mod(w, 12, p), 1);
        assert_ne!(pow_mod(w, 6, p), 1);
        assert_ne!(pow_mod(w, 4, p), 1);
    }
}
