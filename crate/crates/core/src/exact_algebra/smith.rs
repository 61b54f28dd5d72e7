//! Smith normal form over the power-series ring with precision certification.

use super::matrix::LaurentMatrix;
use super::series::TruncatedLaurent;
use crate::error::{Error, Result};

/// Result of a Smith reduction `left · M · right = diag(z^{d_1}, …)`.
#[derive(Debug, Clone)]
pub struct SmithForm {
    /// Invariant exponents d_i in increasing order; `None` marks an exactly zero factor.
    pub invariants: Vec<Option<i64>>,
    pub left: LaurentMatrix,
    pub right: LaurentMatrix,
    /// The reduced matrix itself.
    pub diagonal: LaurentMatrix,
}

impl SmithForm {
    /// Σ d_i, or `None` if some factor is zero.
    pub fn exponent_sum(&self) -> Option<i64> {
        self.invariants.iter().copied().sum()
    }
}

fn scale_row(m: &mut LaurentMatrix, i: usize, s: &TruncatedLaurent) {
    for j in 0..m.cols() {
        let v = m.get(i, j).mul(s);
        m.set(i, j, v);
    }
}

fn add_row_multiple(m: &mut LaurentMatrix, target: usize, src: usize, f: &TruncatedLaurent) {
    for j in 0..m.cols() {
        if m.get(src, j).is_exact_zero() {
            continue;
        }
        let v = m.get(target, j).sub(&f.mul(m.get(src, j)));
        m.set(target, j, v);
    }
}

fn add_col_multiple(m: &mut LaurentMatrix, target: usize, src: usize, f: &TruncatedLaurent) {
    for i in 0..m.rows() {
        if m.get(i, src).is_exact_zero() {
            continue;
        }
        let v = m.get(i, target).sub(&m.get(i, src).mul(f));
        m.set(i, target, v);
    }
}

fn swap_rows(m: &mut LaurentMatrix, a: usize, b: usize) {
    if a == b {
        return;
    }
    for j in 0..m.cols() {
        let x = m.get(a, j).clone();
        let y = m.get(b, j).clone();
        m.set(a, j, y);
        m.set(b, j, x);
    }
}

fn swap_cols(m: &mut LaurentMatrix, a: usize, b: usize) {
    if a == b {
        return;
    }
    for i in 0..m.rows() {
        let x = m.get(i, a).clone();
        let y = m.get(i, b).clone();
        m.set(i, a, y);
        m.set(i, b, x);
    }
}

/// Smith normal form of a matrix over C[[z]] at working precision `n`.
///
/// Exact inputs stay exact where possible; unit inverses are expanded to precision `n`.
pub fn smith_normal_form(m: &LaurentMatrix, n: i64) -> Result<SmithForm> {
    if m.entries().iter().any(|e| e.valuation().is_some_and(|v| v < 0)) {
        return Err(Error::Contract("Smith form needs entries of nonnegative valuation".into()));
    }
    let field = m.field().clone();
    let (r, c) = (m.rows(), m.cols());
    let mut a = m.clone();
    let mut left = LaurentMatrix::identity(&field, r);
    let mut right = LaurentMatrix::identity(&field, c);
    let mut invariants = Vec::new();
    for k in 0..r.min(c) {
        let mut best: Option<(i64, usize, usize)> = None;
        let mut uncertain: Option<i64> = None;
        for i in k..r {
            for j in k..c {
                let e = a.get(i, j);
                match e.valuation() {
                    Some(v) => {
                        if best.is_none_or(|(bv, _, _)| v < bv) {
                            best = Some((v, i, j));
                        }
                    }
                    None => {
                        if let Some(p) = e.precision() {
                            uncertain = Some(uncertain.map_or(p, |u: i64| u.min(p)));
                        }
                    }
                }
            }
        }
        let (v, pi, pj) = match (best, uncertain) {
            (None, None) => {
                invariants.extend(std::iter::repeat_n(None, r.min(c) - k));
                break;
            }
            (None, Some(p)) => {
                return Err(Error::PrecisionExhausted(format!(
                    "invariant factor {} not certified: remaining block vanishes modulo z^{p}",
                    k + 1
                )))
            }
            (Some((v, _, _)), Some(p)) if p <= v => {
                return Err(Error::PrecisionExhausted(format!(
                    "invariant factor {} not certified: entry known only modulo z^{p}",
                    k + 1
                )))
            }
            (Some(b), _) => b,
        };
        swap_rows(&mut a, pi, k);
        swap_rows(&mut left, pi, k);
        swap_cols(&mut a, pj, k);
        swap_cols(&mut right, pj, k);
        let unit = a.get(k, k).shift(-v);
        let uinv = unit.inv_with_precision(n)?;
        scale_row(&mut a, k, &uinv);
        scale_row(&mut left, k, &uinv);
        for i in k + 1..r {
            if a.get(i, k).is_zero_to_precision() {
                continue;
            }
            let f = a.get(i, k).shift(-v);
            add_row_multiple(&mut a, i, k, &f);
            add_row_multiple(&mut left, i, k, &f);
        }
        for j in k + 1..c {
            if a.get(k, j).is_zero_to_precision() {
                continue;
            }
            let f = a.get(k, j).shift(-v);
            add_col_multiple(&mut a, j, k, &f);
            add_col_multiple(&mut right, j, k, &f);
        }
        invariants.push(Some(v));
    }
    Ok(SmithForm { invariants, left, right, diagonal: a })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact_algebra::Field;

    fn z(k: &crate::exact_algebra::FieldRef, e: i64) -> TruncatedLaurent {
        TruncatedLaurent::z_pow(k, e)
    }

    #[test]
    fn diagonal_is_sorted() {
        let k = Field::gaussian();
        let m = LaurentMatrix::monomial_diagonal(&k, &[1, 0]);
        let s = smith_normal_form(&m, 24).unwrap();
        assert_eq!(s.invariants, vec![Some(0), Some(1)]);
    }

    #[test]
    fn gcd_of_minors_oracle() {
        // [[z,1],[0,z]]: gcd of entries is 1, det is z², so invariants (1, z²).
        let k = Field::gaussian();
        let m =
            LaurentMatrix::from_rows(&k, vec![vec![z(&k, 1), z(&k, 0)], vec![TruncatedLaurent::zero(&k), z(&k, 1)]])
                .unwrap();
        let s = smith_normal_form(&m, 24).unwrap();
        assert_eq!(s.invariants, vec![Some(0), Some(2)]);
        let check = s.left.mul(&m).unwrap().mul(&s.right).unwrap();
        assert_eq!(check.get(0, 0).valuation(), Some(0));
        assert!(check.get(0, 1).is_zero_to_precision());
        assert!(check.get(1, 0).is_zero_to_precision());
        assert_eq!(check.get(1, 1).valuation(), Some(2));
    }

    #[test]
    fn identity_and_uncertified() {
        let k = Field::gaussian();
        let s = smith_normal_form(&LaurentMatrix::identity(&k, 3), 24).unwrap();
        assert_eq!(s.invariants, vec![Some(0); 3]);
        let mut m = LaurentMatrix::identity(&k, 2);
        m.set(1, 1, TruncatedLaurent::zero_to_precision(&k, 5));
        assert!(matches!(smith_normal_form(&m, 24), Err(Error::PrecisionExhausted(_))));
    }
}
