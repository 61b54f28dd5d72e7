//! Dense matrices of truncated Laurent series.

use std::fmt;

use super::scalar::{FieldRef, Scalar};
use super::series::TruncatedLaurent;
use crate::error::{Error, Result};

/// Row-major matrix of Laurent series.
#[derive(Clone, PartialEq, Eq)]
pub struct LaurentMatrix {
    field: FieldRef,
    rows: usize,
    cols: usize,
    entries: Vec<TruncatedLaurent>,
}

impl LaurentMatrix {
    pub fn zeros(field: &FieldRef, rows: usize, cols: usize) -> Self {
        LaurentMatrix { field: field.clone(), rows, cols, entries: vec![TruncatedLaurent::zero(field); rows * cols] }
    }

    pub fn identity(field: &FieldRef, n: usize) -> Self {
        let mut m = Self::zeros(field, n, n);
        for i in 0..n {
            m.set(i, i, TruncatedLaurent::one(field));
        }
        m
    }

    /// Diagonal matrix diag(z^{e_i}).
    pub fn monomial_diagonal(field: &FieldRef, exps: &[i64]) -> Self {
        let mut m = Self::zeros(field, exps.len(), exps.len());
        for (i, &e) in exps.iter().enumerate() {
            m.set(i, i, TruncatedLaurent::z_pow(field, e));
        }
        m
    }

    /// Builds from rows of entries.
    pub fn from_rows(field: &FieldRef, rows: Vec<Vec<TruncatedLaurent>>) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::Incompatible("ragged matrix rows".into()));
        }
        Ok(LaurentMatrix { field: field.clone(), rows: r, cols: c, entries: rows.into_iter().flatten().collect() })
    }

    /// Constant matrix from scalars.
    pub fn from_scalars(field: &FieldRef, rows: &[Vec<Scalar>]) -> Result<Self> {
        let rows = rows.iter().map(|r| r.iter().map(|s| TruncatedLaurent::constant(s.clone())).collect()).collect();
        Self::from_rows(field, rows)
    }

    pub fn field(&self) -> &FieldRef {
        &self.field
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &TruncatedLaurent {
        &self.entries[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: TruncatedLaurent) {
        self.entries[i * self.cols + j] = v;
    }

    pub fn entries(&self) -> &[TruncatedLaurent] {
        &self.entries
    }

    /// Minimum absolute precision over entries, `None` if all are exact.
    pub fn precision(&self) -> Option<i64> {
        self.entries.iter().filter_map(TruncatedLaurent::precision).min()
    }

    /// Minimum valuation over known-nonzero entries.
    pub fn valuation(&self) -> Option<i64> {
        self.entries.iter().filter_map(TruncatedLaurent::valuation).min()
    }

    pub fn mul(&self, o: &Self) -> Result<Self> {
        if self.cols != o.rows {
            return Err(Error::Incompatible(format!(
                "matrix product {}x{} · {}x{}",
                self.rows, self.cols, o.rows, o.cols
            )));
        }
        let mut m = Self::zeros(&self.field, self.rows, o.cols);
        for i in 0..self.rows {
            for j in 0..o.cols {
                let mut acc = TruncatedLaurent::zero(&self.field);
                for k in 0..self.cols {
                    let a = self.get(i, k);
                    let b = o.get(k, j);
                    if a.is_exact_zero() || b.is_exact_zero() {
                        continue;
                    }
                    acc = acc.add(&a.mul(b));
                }
                m.set(i, j, acc);
            }
        }
        Ok(m)
    }

    pub fn add(&self, o: &Self) -> Result<Self> {
        if (self.rows, self.cols) != (o.rows, o.cols) {
            return Err(Error::Incompatible("matrix sum shape mismatch".into()));
        }
        let entries = self.entries.iter().zip(&o.entries).map(|(a, b)| a.add(b)).collect();
        Ok(LaurentMatrix { field: self.field.clone(), rows: self.rows, cols: self.cols, entries })
    }

    pub fn scale(&self, s: &TruncatedLaurent) -> Self {
        let entries = self.entries.iter().map(|a| a.mul(s)).collect();
        LaurentMatrix { field: self.field.clone(), rows: self.rows, cols: self.cols, entries }
    }

    pub fn map(&self, f: impl Fn(&TruncatedLaurent) -> TruncatedLaurent) -> Self {
        LaurentMatrix {
            field: self.field.clone(),
            rows: self.rows,
            cols: self.cols,
            entries: self.entries.iter().map(f).collect(),
        }
    }

    pub fn transpose(&self) -> Self {
        let mut m = Self::zeros(&self.field, self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                m.set(j, i, self.get(i, j).clone());
            }
        }
        m
    }

    /// Sub-block with the given row and column indices.
    pub fn submatrix(&self, rows: &[usize], cols: &[usize]) -> Self {
        let mut m = Self::zeros(&self.field, rows.len(), cols.len());
        for (a, &i) in rows.iter().enumerate() {
            for (b, &j) in cols.iter().enumerate() {
                m.set(a, b, self.get(i, j).clone());
            }
        }
        m
    }

    /// Block-diagonal direct sum.
    pub fn direct_sum(&self, o: &Self) -> Self {
        let mut m = Self::zeros(&self.field, self.rows + o.rows, self.cols + o.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                m.set(i, j, self.get(i, j).clone());
            }
        }
        for i in 0..o.rows {
            for j in 0..o.cols {
                m.set(self.rows + i, self.cols + j, o.get(i, j).clone());
            }
        }
        m
    }

    /// Coefficient matrix of z^k.
    pub fn coefficient(&self, k: i64) -> Result<Vec<Vec<Scalar>>> {
        (0..self.rows).map(|i| (0..self.cols).map(|j| self.get(i, j).coeff(k)).collect()).collect()
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.entries.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    /// Determinant by elimination with minimal-valuation pivots.
    pub fn det(&self) -> Result<TruncatedLaurent> {
        if self.rows != self.cols {
            return Err(Error::Incompatible("determinant of a non-square matrix".into()));
        }
        let n = self.rows;
        let mut m = self.clone();
        let mut det = TruncatedLaurent::one(&self.field);
        for k in 0..n {
            let piv = (k..n).filter_map(|i| m.get(i, k).valuation().map(|v| (v, i))).min();
            let Some((_, p)) = piv else {
                if (k..n).all(|i| m.get(i, k).is_exact_zero()) {
                    return Ok(TruncatedLaurent::zero(&self.field));
                }
                let prec = (k..n).filter_map(|i| m.get(i, k).precision()).min().unwrap_or(0);
                return Ok(det.mul(&TruncatedLaurent::zero_to_precision(&self.field, prec)));
            };
            if p != k {
                m.swap_rows(p, k);
                det = det.neg();
            }
            let pivot = m.get(k, k).clone();
            det = det.mul(&pivot);
            let pinv = pivot.inv()?;
            for i in k + 1..n {
                if m.get(i, k).is_exact_zero() {
                    continue;
                }
                let f = m.get(i, k).mul(&pinv);
                for j in k..n {
                    let v = m.get(i, j).sub(&f.mul(m.get(k, j)));
                    m.set(i, j, v);
                }
            }
        }
        Ok(det)
    }

    /// Inverse over the Laurent series field by Gauss–Jordan elimination.
    pub fn inverse(&self) -> Result<Self> {
        if self.rows != self.cols {
            return Err(Error::Incompatible("inverse of a non-square matrix".into()));
        }
        let n = self.rows;
        let mut a = self.clone();
        let mut b = Self::identity(&self.field, n);
        for k in 0..n {
            let piv = (k..n).filter_map(|i| a.get(i, k).valuation().map(|v| (v, i))).min();
            let Some((_, p)) = piv else {
                return Err(if (k..n).all(|i| a.get(i, k).is_exact_zero()) {
                    Error::DivisionByZero("singular matrix".into())
                } else {
                    Error::PrecisionExhausted("pivot vanishes to working precision".into())
                });
            };
            a.swap_rows(p, k);
            b.swap_rows(p, k);
            let pinv = a.get(k, k).inv()?;
            for j in 0..n {
                a.set(k, j, a.get(k, j).mul(&pinv));
                b.set(k, j, b.get(k, j).mul(&pinv));
            }
            for i in 0..n {
                if i == k || a.get(i, k).is_exact_zero() {
                    continue;
                }
                let f = a.get(i, k).clone();
                for j in 0..n {
                    let va = a.get(i, j).sub(&f.mul(a.get(k, j)));
                    a.set(i, j, va);
                    let vb = b.get(i, j).sub(&f.mul(b.get(k, j)));
                    b.set(i, j, vb);
                }
            }
        }
        Ok(b)
    }

    /// Entrywise substitution z ↦ u^p.
    pub fn substitute_power(&self, p: i64) -> Self {
        self.map(|e| e.substitute_power(p))
    }

    /// Truncates every entry to absolute precision n.
    pub fn truncate(&self, n: i64) -> Self {
        self.map(|e| e.truncate(n))
    }

    pub fn embed(&self, into: &FieldRef) -> Result<Self> {
        let entries = self.entries.iter().map(|e| e.embed(into)).collect::<Result<Vec<_>>>()?;
        Ok(LaurentMatrix { field: into.clone(), rows: self.rows, cols: self.cols, entries })
    }
}

impl fmt::Debug for LaurentMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "LaurentMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            let row: Vec<String> = (0..self.cols).map(|j| self.get(i, j).to_string()).collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        write!(f, "]")
    }
}
