//! Precision-tracked truncated Laurent series in one variable z.

use std::fmt;

use super::scalar::{FieldRef, Scalar};
use crate::error::{Error, Result};

/// Default working precision.
pub const DEFAULT_PRECISION: i64 = 24;

/// A Laurent series Σ_{k ≥ v} c_k z^k known modulo z^N, or exactly when `prec` is `None`.
#[derive(Clone, PartialEq, Eq)]
pub struct TruncatedLaurent {
    field: FieldRef,
    /// Exponent of `coeffs[0]`; meaningful only when `coeffs` is nonempty.
    val: i64,
    /// Coefficients c_v, c_{v+1}, …; the first is nonzero, no trailing zeros for exact series.
    coeffs: Vec<Scalar>,
    /// Absolute precision N, or `None` for an exact Laurent polynomial.
    prec: Option<i64>,
}

impl TruncatedLaurent {
    /// Builds the series Σ coeffs[i] z^{start+i} + O(z^prec) and normalizes it.
    pub fn new(field: &FieldRef, start: i64, coeffs: Vec<Scalar>, prec: Option<i64>) -> Self {
        let mut s = TruncatedLaurent { field: field.clone(), val: start, coeffs, prec };
        s.normalize();
        s
    }

    fn normalize(&mut self) {
        if let Some(n) = self.prec {
            let keep = (n - self.val).max(0) as usize;
            self.coeffs.truncate(keep);
        }
        let lead = self.coeffs.iter().position(|c| !c.is_zero());
        match lead {
            None => {
                self.coeffs.clear();
                self.val = 0;
            }
            Some(i) => {
                self.coeffs.drain(..i);
                self.val += i as i64;
                while self.coeffs.last().is_some_and(|c| c.is_zero()) {
                    self.coeffs.pop();
                }
            }
        }
    }

    /// Exact zero.
    pub fn zero(field: &FieldRef) -> Self {
        Self::new(field, 0, Vec::new(), None)
    }

    /// Zero known only modulo z^N.
    pub fn zero_to_precision(field: &FieldRef, n: i64) -> Self {
        Self::new(field, 0, Vec::new(), Some(n))
    }

    /// Exact constant.
    pub fn constant(c: Scalar) -> Self {
        let f = c.field().clone();
        Self::new(&f, 0, vec![c], None)
    }

    pub fn one(field: &FieldRef) -> Self {
        Self::constant(Scalar::one(field))
    }

    /// Exact monomial c·z^k.
    pub fn monomial(c: Scalar, k: i64) -> Self {
        let f = c.field().clone();
        Self::new(&f, k, vec![c], None)
    }

    /// Exact z^k.
    pub fn z_pow(field: &FieldRef, k: i64) -> Self {
        Self::monomial(Scalar::one(field), k)
    }

    /// Series from integer coefficients starting at z^start.
    pub fn from_ints(field: &FieldRef, start: i64, coeffs: &[i64], prec: Option<i64>) -> Self {
        let c = coeffs.iter().map(|&x| Scalar::from_int(field, x)).collect();
        Self::new(field, start, c, prec)
    }

    pub fn field(&self) -> &FieldRef {
        &self.field
    }

    /// True for the exact zero series.
    pub fn is_exact_zero(&self) -> bool {
        self.coeffs.is_empty() && self.prec.is_none()
    }

    /// True when no nonzero coefficient is known (exact zero or O(z^N)).
    pub fn is_zero_to_precision(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn is_exact(&self) -> bool {
        self.prec.is_none()
    }

    /// Valuation, `None` if no nonzero coefficient is known.
    pub fn valuation(&self) -> Option<i64> {
        (!self.coeffs.is_empty()).then_some(self.val)
    }

    /// Absolute precision, `None` for exact series.
    pub fn precision(&self) -> Option<i64> {
        self.prec
    }

    /// Leading coefficient c_v.
    pub fn leading(&self) -> Option<&Scalar> {
        self.coeffs.first()
    }

    /// Coefficient of z^k; errors beyond the known precision.
    pub fn coeff(&self, k: i64) -> Result<Scalar> {
        if let Some(n) = self.prec {
            if k >= n {
                return Err(Error::PrecisionExhausted(format!("coefficient z^{k} beyond precision {n}")));
            }
        }
        if self.coeffs.is_empty() || k < self.val {
            return Ok(Scalar::zero(&self.field));
        }
        Ok(self.coeffs.get((k - self.val) as usize).cloned().unwrap_or_else(|| Scalar::zero(&self.field)))
    }

    /// Known terms as (exponent, coefficient), zero coefficients skipped.
    pub fn terms(&self) -> impl Iterator<Item = (i64, &Scalar)> {
        self.coeffs.iter().enumerate().filter(|(_, c)| !c.is_zero()).map(move |(i, c)| (self.val + i as i64, c))
    }

    /// Largest exponent with a known coefficient, for exact series.
    pub fn degree(&self) -> Option<i64> {
        (!self.coeffs.is_empty()).then(|| self.val + self.coeffs.len() as i64 - 1)
    }

    fn min_prec(a: Option<i64>, b: Option<i64>) -> Option<i64> {
        match (a, b) {
            (Some(x), Some(y)) => Some(x.min(y)),
            (x, None) => x,
            (None, y) => y,
        }
    }

    pub fn add(&self, o: &Self) -> Self {
        let prec = Self::min_prec(self.prec, o.prec);
        let lo = match (self.valuation(), o.valuation()) {
            (Some(a), Some(b)) => a.min(b),
            (Some(a), None) => a,
            (None, Some(b)) => b,
            (None, None) => return Self::new(&self.field, 0, Vec::new(), prec),
        };
        let hi_a = self.degree().unwrap_or(lo);
        let hi_b = o.degree().unwrap_or(lo);
        let mut hi = hi_a.max(hi_b);
        if let Some(n) = prec {
            hi = hi.min(n - 1);
        }
        let mut c = Vec::new();
        let mut k = lo;
        while k <= hi {
            let x = self.coeff_unchecked(k).add(&o.coeff_unchecked(k));
            c.push(x);
            k += 1;
        }
        Self::new(&self.field, lo, c, prec)
    }

    fn coeff_unchecked(&self, k: i64) -> Scalar {
        if self.coeffs.is_empty() || k < self.val {
            return Scalar::zero(&self.field);
        }
        self.coeffs.get((k - self.val) as usize).cloned().unwrap_or_else(|| Scalar::zero(&self.field))
    }

    pub fn neg(&self) -> Self {
        let c = self.coeffs.iter().map(Scalar::neg).collect();
        Self::new(&self.field, self.val, c, self.prec)
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    pub fn scale(&self, s: &Scalar) -> Self {
        if s.is_zero() {
            return Self::zero(&self.field);
        }
        let c = self.coeffs.iter().map(|x| x.mul(s)).collect();
        Self::new(&self.field, self.val, c, self.prec)
    }

    /// Multiplication by z^k.
    pub fn shift(&self, k: i64) -> Self {
        Self::new(&self.field, self.val + k, self.coeffs.clone(), self.prec.map(|n| n + k))
    }

    pub fn mul(&self, o: &Self) -> Self {
        if self.is_exact_zero() || o.is_exact_zero() {
            return Self::zero(&self.field);
        }
        // Error term of a·b is z^{v(a)}·O(z^{N_b}) + z^{v(b)}·O(z^{N_a}).
        let prec = match (self.valuation(), o.valuation()) {
            (Some(va), Some(vb)) => Self::min_prec(self.prec.map(|n| n + vb), o.prec.map(|n| n + va)),
            (None, Some(vb)) => self.prec.map(|n| n + vb),
            (Some(va), None) => o.prec.map(|n| n + va),
            (None, None) => Some(self.prec.unwrap() + o.prec.unwrap()),
        };
        if self.coeffs.is_empty() || o.coeffs.is_empty() {
            return Self::new(&self.field, 0, Vec::new(), prec);
        }
        let mut len = self.coeffs.len() + o.coeffs.len() - 1;
        let start = self.val + o.val;
        if let Some(n) = prec {
            len = len.min((n - start).max(0) as usize);
        }
        let mut c = vec![Scalar::zero(&self.field); len];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() || i >= len {
                continue;
            }
            for (j, b) in o.coeffs.iter().enumerate() {
                if i + j >= len {
                    break;
                }
                if !b.is_zero() {
                    c[i + j] = c[i + j].add(&a.mul(b));
                }
            }
        }
        Self::new(&self.field, start, c, prec)
    }

    /// Inverse; exact non-monomial inputs are expanded to absolute precision `target`.
    pub fn inv_with_precision(&self, target: i64) -> Result<Self> {
        let v = match self.valuation() {
            Some(v) => v,
            None if self.is_exact() => return Err(Error::DivisionByZero("inverse of the zero series".into())),
            None => {
                return Err(Error::PrecisionExhausted("inverse of a series that vanishes to working precision".into()))
            }
        };
        let lead_inv = self.coeffs[0].inv()?;
        if self.is_exact() && self.coeffs.len() == 1 {
            return Ok(Self::monomial(lead_inv, -v));
        }
        // Relative precision of the unit part.
        let rel = match self.prec {
            Some(n) => n - v,
            None => target + v,
        };
        let out_prec = -v + rel;
        if rel <= 0 {
            return Err(Error::PrecisionExhausted("no coefficients left to invert".into()));
        }
        let rel = rel as usize;
        let mut b: Vec<Scalar> = Vec::with_capacity(rel);
        b.push(lead_inv.clone());
        for k in 1..rel {
            let mut acc = Scalar::zero(&self.field);
            for j in 1..=k.min(self.coeffs.len() - 1) {
                let a = &self.coeffs[j];
                if !a.is_zero() {
                    acc = acc.add(&a.mul(&b[k - j]));
                }
            }
            b.push(acc.mul(&lead_inv).neg());
        }
        Ok(Self::new(&self.field, -v, b, Some(out_prec)))
    }

    /// Inverse at the default working precision.
    pub fn inv(&self) -> Result<Self> {
        self.inv_with_precision(DEFAULT_PRECISION)
    }

    /// Truncates to absolute precision `n` (no-op if already coarser); exact zero stays exact.
    pub fn truncate(&self, n: i64) -> Self {
        if self.is_exact_zero() {
            return self.clone();
        }
        let p = Self::min_prec(self.prec, Some(n));
        Self::new(&self.field, self.val, self.coeffs.clone(), p)
    }

    /// Substitutes z ↦ u^p, returning a series in u.
    pub fn substitute_power(&self, p: i64) -> Self {
        assert!(p >= 1, "covering degree must be positive");
        if self.coeffs.is_empty() {
            return Self::new(&self.field, 0, Vec::new(), self.prec.map(|n| n * p));
        }
        let mut c = vec![Scalar::zero(&self.field); (self.coeffs.len() - 1) * p as usize + 1];
        for (i, x) in self.coeffs.iter().enumerate() {
            c[i * p as usize] = x.clone();
        }
        Self::new(&self.field, self.val * p, c, self.prec.map(|n| n * p))
    }

    /// Rewrites every coefficient in another field.
    pub fn embed(&self, into: &FieldRef) -> Result<Self> {
        let c = self.coeffs.iter().map(|x| x.embed(into)).collect::<Result<Vec<_>>>()?;
        Ok(Self::new(into, self.val, c, self.prec))
    }
}

impl fmt::Display for TruncatedLaurent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts: Vec<String> = self
            .terms()
            .map(|(k, c)| match k {
                0 => format!("{c}"),
                1 => format!("({c})*z"),
                _ => format!("({c})*z^{k}"),
            })
            .collect();
        if let Some(n) = self.prec {
            parts.push(format!("O(z^{n})"));
        }
        if parts.is_empty() {
            parts.push("0".into());
        }
        write!(f, "{}", parts.join(" + "))
    }
}

impl fmt::Debug for TruncatedLaurent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact_algebra::Field;
    use num_rational::BigRational;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn geometric_series() {
        let k = Field::gaussian();
        let a = TruncatedLaurent::from_ints(&k, 0, &[1, -1], Some(4));
        let inv = a.inv().unwrap();
        assert_eq!(inv, TruncatedLaurent::from_ints(&k, 0, &[1, 1, 1, 1], Some(4)));
    }

    #[test]
    fn monomials_cancel_exactly() {
        let k = Field::gaussian();
        let p = TruncatedLaurent::z_pow(&k, -1).mul(&TruncatedLaurent::z_pow(&k, 1));
        assert_eq!(p, TruncatedLaurent::one(&k));
        assert!(p.is_exact());
    }

    #[test]
    fn long_division_oracle() {
        // 1/(2+z) = 1/2 − z/4 + z²/8 + O(z³), checked by long division by hand.
        let k = Field::gaussian();
        let a = TruncatedLaurent::from_ints(&k, 0, &[2, 1], Some(3));
        let expected = TruncatedLaurent::new(
            &k,
            0,
            vec![
                Scalar::from_rational(&k, &q(1, 2)),
                Scalar::from_rational(&k, &q(-1, 4)),
                Scalar::from_rational(&k, &q(1, 8)),
            ],
            Some(3),
        );
        assert_eq!(a.inv().unwrap(), expected);
    }

    #[test]
    fn precision_propagation() {
        let k = Field::gaussian();
        let a = TruncatedLaurent::from_ints(&k, 1, &[1, 1], Some(5));
        let b = TruncatedLaurent::from_ints(&k, -2, &[3], Some(2));
        // z·O(z^2) and z^{-2}·O(z^5) give O(z^3).
        assert_eq!(a.mul(&b).precision(), Some(3));
        assert!(TruncatedLaurent::zero(&k).inv().is_err());
        assert!(matches!(TruncatedLaurent::zero_to_precision(&k, 3).inv(), Err(Error::PrecisionExhausted(_))));
    }
}
