//! Exact linear algebra over the session field, with a modular fast path for ranks.

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use super::cyclotomic::{pow_mod, prime_congruent_one, root_of_unity_mod};
use super::matrix::LaurentMatrix;
use super::scalar::{FieldRef, Scalar};
use super::series::TruncatedLaurent;
use crate::error::{Error, Result};

/// Dense matrix of field elements, row-major.
pub type ScalarMatrix = Vec<Vec<Scalar>>;

pub fn identity(field: &FieldRef, n: usize) -> ScalarMatrix {
    (0..n).map(|i| (0..n).map(|j| if i == j { Scalar::one(field) } else { Scalar::zero(field) }).collect()).collect()
}

pub fn mat_mul(a: &ScalarMatrix, b: &ScalarMatrix, field: &FieldRef) -> ScalarMatrix {
    let n = b.first().map_or(0, Vec::len);
    a.iter()
        .map(|row| {
            (0..n)
                .map(|j| {
                    let mut acc = Scalar::zero(field);
                    for (k, x) in row.iter().enumerate() {
                        if !x.is_zero() && !b[k][j].is_zero() {
                            acc = acc.add(&x.mul(&b[k][j]));
                        }
                    }
                    acc
                })
                .collect()
        })
        .collect()
}

/// Cost heuristic used to pick pivots that keep expressions small.
fn weight(s: &Scalar) -> usize {
    s.numer().terms.len() + s.denom().terms.len()
}

/// Reduced row echelon form; returns pivot columns.
pub fn row_reduce(m: &mut ScalarMatrix) -> Vec<usize> {
    let rows = m.len();
    let cols = m.first().map_or(0, Vec::len);
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let best = (r..rows).filter(|&i| !m[i][c].is_zero()).min_by_key(|&i| weight(&m[i][c]));
        let Some(p) = best else { continue };
        m.swap(p, r);
        let inv = m[r][c].inv().expect("nonzero pivot");
        for j in c..cols {
            m[r][j] = m[r][j].mul(&inv);
        }
        for i in 0..rows {
            if i == r || m[i][c].is_zero() {
                continue;
            }
            let f = m[i][c].clone();
            for j in c..cols {
                if !m[r][j].is_zero() {
                    m[i][j] = m[i][j].sub(&f.mul(&m[r][j]));
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

/// Exact rank by elimination.
pub fn rank_exact(m: &ScalarMatrix) -> usize {
    let mut a = m.clone();
    row_reduce(&mut a).len()
}

/// Basis of the right kernel {v : m v = 0}.
pub fn nullspace(m: &ScalarMatrix, field: &FieldRef) -> Vec<Vec<Scalar>> {
    let cols = m.first().map_or(0, Vec::len);
    let mut a = m.clone();
    let piv = row_reduce(&mut a);
    let free: Vec<usize> = (0..cols).filter(|c| !piv.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut v = vec![Scalar::zero(field); cols];
            v[f] = Scalar::one(field);
            for (r, &pc) in piv.iter().enumerate() {
                v[pc] = a[r][f].neg();
            }
            v
        })
        .collect()
}

/// Some solution x of m·x = b, if the system is consistent.
pub fn solve(m: &ScalarMatrix, b: &[Scalar], field: &FieldRef) -> Option<Vec<Scalar>> {
    let cols = m.first().map_or(0, Vec::len);
    let mut aug: ScalarMatrix = m
        .iter()
        .zip(b)
        .map(|(row, x)| {
            let mut r = row.clone();
            r.push(x.clone());
            r
        })
        .collect();
    let piv = row_reduce(&mut aug);
    if piv.last() == Some(&cols) {
        return None;
    }
    let mut x = vec![Scalar::zero(field); cols];
    for (r, &c) in piv.iter().enumerate() {
        x[c] = aug[r][cols].clone();
    }
    Some(x)
}

pub fn mat_sub(a: &ScalarMatrix, b: &ScalarMatrix) -> ScalarMatrix {
    a.iter().zip(b).map(|(x, y)| x.iter().zip(y).map(|(u, v)| u.sub(v)).collect()).collect()
}

/// a − λ·I.
pub fn shift_diagonal(a: &ScalarMatrix, lambda: &Scalar) -> ScalarMatrix {
    let mut out = a.clone();
    for (i, row) in out.iter_mut().enumerate() {
        row[i] = row[i].sub(lambda);
    }
    out
}

/// p(a) for a polynomial with coefficients low to high.
pub fn poly_eval_matrix(p: &[Scalar], a: &ScalarMatrix, field: &FieldRef) -> ScalarMatrix {
    let n = a.len();
    let mut acc = vec![vec![Scalar::zero(field); n]; n];
    for c in p.iter().rev() {
        acc = mat_mul(&acc, a, field);
        for (i, row) in acc.iter_mut().enumerate() {
            row[i] = row[i].add(c);
        }
    }
    acc
}

/// Sizes of the Jordan blocks of a nilpotent matrix, largest first.
pub fn nilpotent_jordan_type(n: &ScalarMatrix, field: &FieldRef) -> Vec<usize> {
    let size = n.len();
    // ranks[k] = rank of n^k
    let mut ranks = vec![size];
    let mut pw = identity(field, size);
    while *ranks.last().unwrap() > 0 && ranks.len() <= size + 1 {
        pw = mat_mul(&pw, n, field);
        ranks.push(rank(&pw, field).0);
    }
    // number of blocks of size ≥ k is rank(n^{k−1}) − rank(n^k)
    let mut out = Vec::new();
    let at_least: Vec<usize> = ranks.windows(2).map(|w| w[0] - w[1]).collect();
    for k in (1..=at_least.len()).rev() {
        let exact = at_least[k - 1] - at_least.get(k).copied().unwrap_or(0);
        out.extend(std::iter::repeat_n(k, exact));
    }
    out
}

/// Strictly upper triangular Jordan matrix with the given block sizes.
pub fn jordan_matrix(sizes: &[usize], field: &FieldRef) -> ScalarMatrix {
    let n: usize = sizes.iter().sum();
    let mut m = vec![vec![Scalar::zero(field); n]; n];
    let mut start = 0;
    for &s in sizes {
        for i in start..start + s.saturating_sub(1) {
            m[i][i + 1] = Scalar::one(field);
        }
        start += s;
    }
    m
}

/// Rank of the image of `m` in F_p under a random specialization, if defined.
fn rank_mod_p(m: &ScalarMatrix, field: &FieldRef, seed: u64) -> Option<usize> {
    let n = field.order() as u64;
    let p = prime_congruent_one(n, 1 << 30);
    let zeta = root_of_unity_mod(n, p);
    let mut rng = StdRng::seed_from_u64(seed);
    let vals: Vec<u64> = (0..field.nvars()).map(|_| rng.gen_range(2..p)).collect();
    let mut a: Vec<Vec<u64>> = Vec::with_capacity(m.len());
    for row in m {
        let mut r = Vec::with_capacity(row.len());
        for x in row {
            r.push(x.eval_mod(zeta, &vals, p)?);
        }
        a.push(r);
    }
    Some(rank_fp(&mut a, p))
}

/// Rank over the function field by random specialization modulo a large prime.
///
/// Each trial is a lower bound for the exact rank; the maximum over `trials`
/// seeds equals it unless every specialization hits a minor's zero set.
pub fn rank_generic(m: &ScalarMatrix, field: &FieldRef, trials: u64) -> usize {
    (0..trials).filter_map(|s| rank_mod_p(m, field, 0xa11ce + s)).max().unwrap_or_else(|| rank_exact(m))
}

/// Rank of a matrix over F_p (destroys the input).
pub fn rank_fp(a: &mut [Vec<u64>], p: u64) -> usize {
    let rows = a.len();
    let cols = a.first().map_or(0, Vec::len);
    let mut r = 0;
    for c in 0..cols {
        let Some(piv) = (r..rows).find(|&i| a[i][c] != 0) else { continue };
        a.swap(piv, r);
        let inv = pow_mod(a[r][c], p - 2, p);
        for j in c..cols {
            a[r][j] = (a[r][j] as u128 * inv as u128 % p as u128) as u64;
        }
        let pivot_row = a[r].clone();
        for (i, row) in a.iter_mut().enumerate() {
            if i == r || row[c] == 0 {
                continue;
            }
            let f = row[c];
            for j in c..cols {
                if pivot_row[j] != 0 {
                    let t = (f as u128 * pivot_row[j] as u128 % p as u128) as u64;
                    row[j] = (row[j] + p - t) % p;
                }
            }
        }
        r += 1;
        if r == rows {
            break;
        }
    }
    r
}

/// How a rank was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RankMethod {
    /// A specialization reached the maximal possible rank.
    ModularCertificate,
    /// Full symbolic elimination.
    Exact,
}

/// Exact rank over the session field.
///
/// A specialization to F_p can only lower the rank, so a full-rank image
/// certifies the rank; otherwise exact elimination decides.
pub fn rank(m: &ScalarMatrix, field: &FieldRef) -> (usize, RankMethod) {
    let rows = m.len();
    let cols = m.first().map_or(0, Vec::len);
    let full = rows.min(cols);
    if full == 0 {
        return (0, RankMethod::Exact);
    }
    for seed in 0..2 {
        if rank_mod_p(m, field, 0x5eed + seed) == Some(full) {
            return (full, RankMethod::ModularCertificate);
        }
    }
    (rank_exact(m), RankMethod::Exact)
}

/// Characteristic polynomial det(T·I − A) by Faddeev–LeVerrier; coefficients low to high.
pub fn charpoly_series(a: &LaurentMatrix) -> Result<Vec<TruncatedLaurent>> {
    let n = a.rows();
    if n != a.cols() {
        return Err(Error::Incompatible("characteristic polynomial of non-square matrix".into()));
    }
    let field = a.field().clone();
    let mut coeffs = vec![TruncatedLaurent::zero(&field); n + 1];
    coeffs[n] = TruncatedLaurent::one(&field);
    let id = LaurentMatrix::identity(&field, n);
    let mut mk = LaurentMatrix::zeros(&field, n, n);
    for k in 1..=n {
        // M_k = A·M_{k−1} + c_{n−k+1}·I,  c_{n−k} = −tr(A·M_k)/k
        mk = a.mul(&mk)?.add(&id.scale(&coeffs[n - k + 1]))?;
        let am = a.mul(&mk)?;
        let mut tr = TruncatedLaurent::zero(&field);
        for i in 0..n {
            tr = tr.add(am.get(i, i));
        }
        let s = Scalar::from_int(&field, k as i64).inv()?;
        coeffs[n - k] = tr.scale(&s).neg();
    }
    Ok(coeffs)
}

/// Characteristic polynomial of a constant matrix, coefficients low to high.
pub fn charpoly(a: &ScalarMatrix, field: &FieldRef) -> Result<Vec<Scalar>> {
    let m = LaurentMatrix::from_scalars(field, a)?;
    charpoly_series(&m)?.into_iter().map(|c| c.coeff(0)).collect()
}

/// Univariate polynomials over the session field, coefficients low to high.
pub mod upoly {
    use super::*;
    use num_bigint::BigInt;
    use num_integer::Integer;
    use num_rational::BigRational;
    use num_traits::{One, Signed, Zero};

    pub fn trim(p: &mut Vec<Scalar>) {
        while p.last().is_some_and(Scalar::is_zero) {
            p.pop();
        }
    }

    pub fn rem(a: &[Scalar], b: &[Scalar]) -> Vec<Scalar> {
        divrem(a, b).1
    }

    pub fn divrem(a: &[Scalar], b: &[Scalar]) -> (Vec<Scalar>, Vec<Scalar>) {
        let mut r = a.to_vec();
        trim(&mut r);
        let mut b = b.to_vec();
        trim(&mut b);
        assert!(!b.is_empty(), "division by the zero polynomial");
        let field = b[0].field().clone();
        if r.len() < b.len() {
            return (Vec::new(), r);
        }
        let db = b.len() - 1;
        let lb = b[db].inv().expect("nonzero");
        let mut q = vec![Scalar::zero(&field); r.len() - db];
        for i in (0..q.len()).rev() {
            let c = r[i + db].mul(&lb);
            if !c.is_zero() {
                for (j, bj) in b.iter().enumerate() {
                    r[i + j] = r[i + j].sub(&c.mul(bj));
                }
            }
            q[i] = c;
        }
        trim(&mut q);
        trim(&mut r);
        (q, r)
    }

    /// Distinct rational roots of a polynomial over Q, coefficients low to high.
    /// Returns None when a constant or leading coefficient is too large to factor by trial division.
    pub fn rational_roots(p: &[BigRational]) -> Option<Vec<BigRational>> {
        let mut p = p.to_vec();
        while p.last().is_some_and(Zero::is_zero) {
            p.pop();
        }
        let mut out = Vec::new();
        if p.len() <= 1 {
            return Some(out);
        }
        let lead = p.iter().position(|c| !c.is_zero()).expect("nonzero");
        if lead > 0 {
            out.push(BigRational::zero());
            p.drain(..lead);
        }
        let l = p.iter().fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
        let ints: Vec<BigInt> = p.iter().map(|c| (c * BigRational::from_integer(l.clone())).to_integer()).collect();
        let nums = small_divisors(&ints[0])?;
        let dens = small_divisors(&ints[ints.len() - 1])?;
        let eval = |x: &BigRational| p.iter().rev().fold(BigRational::zero(), |acc, c| acc * x + c);
        for a in &nums {
            for b in &dens {
                for s in [1i64, -1] {
                    let x = BigRational::new(a * BigInt::from(s), b.clone());
                    if !out.contains(&x) && eval(&x).is_zero() {
                        out.push(x);
                    }
                }
            }
        }
        Some(out)
    }

    fn small_divisors(n: &BigInt) -> Option<Vec<BigInt>> {
        use num_traits::ToPrimitive;
        let n = n.abs().to_u64().filter(|&v| v <= 1 << 40)?;
        let mut out = Vec::new();
        let mut d = 1u64;
        while d * d <= n {
            if n % d == 0 {
                out.push(BigInt::from(d));
                if d * d != n {
                    out.push(BigInt::from(n / d));
                }
            }
            d += 1;
        }
        Some(out)
    }

    /// Monic gcd.
    pub fn gcd(a: &[Scalar], b: &[Scalar]) -> Vec<Scalar> {
        let mut x = a.to_vec();
        let mut y = b.to_vec();
        trim(&mut x);
        trim(&mut y);
        while !y.is_empty() {
            let r = rem(&x, &y);
            x = y;
            y = r;
        }
        if let Some(l) = x.last().cloned() {
            let li = l.inv().expect("nonzero");
            x.iter_mut().for_each(|c| *c = c.mul(&li));
        }
        x
    }

    pub fn eval(a: &[Scalar], x: &Scalar) -> Scalar {
        let mut acc = Scalar::zero(x.field());
        for c in a.iter().rev() {
            acc = acc.mul(x).add(c);
        }
        acc
    }

    pub fn mul(a: &[Scalar], b: &[Scalar]) -> Vec<Scalar> {
        if a.is_empty() || b.is_empty() {
            return Vec::new();
        }
        let field = a[0].field().clone();
        let mut out = vec![Scalar::zero(&field); a.len() + b.len() - 1];
        for (i, x) in a.iter().enumerate() {
            for (j, y) in b.iter().enumerate() {
                out[i + j] = out[i + j].add(&x.mul(y));
            }
        }
        trim(&mut out);
        out
    }

    /// (T − λ)^e.
    pub fn linear_power(lambda: &Scalar, e: usize) -> Vec<Scalar> {
        let field = lambda.field().clone();
        let mut out = vec![Scalar::one(&field)];
        for _ in 0..e {
            out = mul(&out, &[lambda.neg(), Scalar::one(&field)]);
        }
        out
    }

    pub fn derivative(a: &[Scalar]) -> Vec<Scalar> {
        let mut d: Vec<Scalar> =
            a.iter().enumerate().skip(1).map(|(i, c)| c.mul(&Scalar::from_int(c.field(), i as i64))).collect();
        trim(&mut d);
        d
    }
}
