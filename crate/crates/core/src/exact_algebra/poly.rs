//! Sparse multivariate polynomials over a cyclotomic field, lex order with x₁ most significant.

use std::collections::BTreeMap;

use num_rational::BigRational;
use num_traits::One;

use super::cyclotomic::{qpoly_add, qpoly_neg, CyclotomicField, QPoly};

fn pow_q(c: &QPoly, e: u32, f: &CyclotomicField) -> QPoly {
    let mut r = vec![BigRational::one()];
    for _ in 0..e {
        r = f.mul(&r, c);
    }
    r
}

/// Exponent vector.
pub type Monomial = Vec<u32>;

/// Multivariate polynomial with reduced cyclotomic coefficients.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MPoly {
    pub(crate) nvars: usize,
    pub(crate) terms: BTreeMap<Monomial, QPoly>,
}

impl MPoly {
    pub fn zero(nvars: usize) -> Self {
        MPoly { nvars, terms: BTreeMap::new() }
    }

    pub fn constant(nvars: usize, c: QPoly) -> Self {
        let mut p = Self::zero(nvars);
        if !c.is_empty() {
            p.terms.insert(vec![0; nvars], c);
        }
        p
    }

    pub fn one(nvars: usize) -> Self {
        Self::constant(nvars, vec![BigRational::one()])
    }

    /// The variable x_{i+1}.
    pub fn var(nvars: usize, i: usize) -> Self {
        let mut e = vec![0; nvars];
        e[i] = 1;
        let mut p = Self::zero(nvars);
        p.terms.insert(e, vec![BigRational::one()]);
        p
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.keys().all(|e| e.iter().all(|&x| x == 0))
    }

    /// Constant coefficient (possibly empty = zero).
    pub fn constant_term(&self) -> QPoly {
        self.terms.get(&vec![0; self.nvars]).cloned().unwrap_or_default()
    }

    /// Leading term in lex order.
    pub fn leading(&self) -> Option<(&Monomial, &QPoly)> {
        self.terms.iter().next_back()
    }

    fn insert_add(&mut self, e: Monomial, c: QPoly) {
        if c.is_empty() {
            return;
        }
        match self.terms.get_mut(&e) {
            Some(old) => {
                let s = qpoly_add(old, &c);
                if s.is_empty() {
                    self.terms.remove(&e);
                } else {
                    *old = s;
                }
            }
            None => {
                self.terms.insert(e, c);
            }
        }
    }

    pub fn add(&self, o: &MPoly) -> MPoly {
        let mut r = self.clone();
        for (e, c) in &o.terms {
            r.insert_add(e.clone(), c.clone());
        }
        r
    }

    pub fn neg(&self) -> MPoly {
        MPoly { nvars: self.nvars, terms: self.terms.iter().map(|(e, c)| (e.clone(), qpoly_neg(c))).collect() }
    }

    pub fn sub(&self, o: &MPoly) -> MPoly {
        self.add(&o.neg())
    }

    pub fn mul(&self, o: &MPoly, f: &CyclotomicField) -> MPoly {
        let mut r = MPoly::zero(self.nvars);
        for (e1, c1) in &self.terms {
            for (e2, c2) in &o.terms {
                let e: Monomial = e1.iter().zip(e2).map(|(a, b)| a + b).collect();
                r.insert_add(e, f.mul(c1, c2));
            }
        }
        r
    }

    pub fn scale(&self, c: &QPoly, f: &CyclotomicField) -> MPoly {
        let mut r = MPoly::zero(self.nvars);
        for (e, x) in &self.terms {
            r.insert_add(e.clone(), f.mul(x, c));
        }
        r
    }

    fn mul_term(&self, e: &Monomial, c: &QPoly, f: &CyclotomicField) -> MPoly {
        let mut r = MPoly::zero(self.nvars);
        for (e1, c1) in &self.terms {
            let ee: Monomial = e1.iter().zip(e).map(|(a, b)| a + b).collect();
            r.insert_add(ee, f.mul(c1, c));
        }
        r
    }

    /// Makes the leading coefficient one; zero stays zero.
    pub fn monic(&self, f: &CyclotomicField) -> MPoly {
        match self.leading() {
            None => self.clone(),
            Some((_, c)) => {
                let inv = f.inv(c).expect("nonzero leading coefficient");
                self.scale(&inv, f)
            }
        }
    }

    /// Exact quotient, or `None` when `d` does not divide `self`.
    pub fn div_exact(&self, d: &MPoly, f: &CyclotomicField) -> Option<MPoly> {
        let (ld, lc) = d.leading()?;
        let lc_inv = f.inv(lc)?;
        let mut r = self.clone();
        let mut q = MPoly::zero(self.nvars);
        while let Some((lr, cr)) = r.leading() {
            if lr.iter().zip(ld).any(|(a, b)| a < b) {
                return None;
            }
            let e: Monomial = lr.iter().zip(ld).map(|(a, b)| a - b).collect();
            let c = f.mul(cr, &lc_inv);
            let t = d.mul_term(&e, &c, f);
            r = r.sub(&t);
            q.insert_add(e, c);
        }
        Some(q)
    }

    /// Exact p-th root, found term by term in decreasing lex order.
    pub fn nth_root(&self, p: u32, f: &CyclotomicField) -> Option<MPoly> {
        if self.is_zero() {
            return Some(self.clone());
        }
        let (lm, lc) = self.leading()?;
        if lm.iter().any(|e| e % p != 0) {
            return None;
        }
        let mut g = MPoly::zero(self.nvars);
        g.insert_add(lm.iter().map(|e| e / p).collect(), f.root_of_monomial(lc, p)?);
        let (gm, gc) = {
            let (m, c) = g.leading()?;
            (m.clone(), c.clone())
        };
        let denom = f.inv(&f.mul(&vec![BigRational::from_integer(p.into())], &pow_q(&gc, p - 1, f)))?;
        let bound = self.terms.len() * 8 + 64;
        for _ in 0..bound {
            let r = self.sub(&g.pow(p, f));
            let Some((rm, rc)) = r.leading() else { return Some(g) };
            let sub = p - 1;
            if rm.iter().zip(&gm).any(|(a, b)| *a < sub * b) {
                return None;
            }
            let e: Monomial = rm.iter().zip(&gm).map(|(a, b)| a - sub * b).collect();
            if e >= gm {
                return None;
            }
            g.insert_add(e, f.mul(rc, &denom));
        }
        None
    }

    pub fn pow(&self, e: u32, f: &CyclotomicField) -> MPoly {
        let mut r = MPoly::one(self.nvars);
        for _ in 0..e {
            r = r.mul(self, f);
        }
        r
    }

    /// Smallest variable index that occurs.
    fn main_var(&self) -> Option<usize> {
        (0..self.nvars).find(|&i| self.terms.keys().any(|e| e[i] > 0))
    }

    pub fn degree_in(&self, v: usize) -> u32 {
        self.terms.keys().map(|e| e[v]).max().unwrap_or(0)
    }

    /// Coefficients with respect to x_v, indexed by power.
    fn coeffs_in(&self, v: usize) -> Vec<MPoly> {
        let d = self.degree_in(v) as usize;
        let mut out = vec![MPoly::zero(self.nvars); d + 1];
        for (e, c) in &self.terms {
            let mut e2 = e.clone();
            let k = e2[v] as usize;
            e2[v] = 0;
            out[k].insert_add(e2, c.clone());
        }
        out
    }

    fn shift_var(&self, v: usize, k: u32) -> MPoly {
        MPoly {
            nvars: self.nvars,
            terms: self
                .terms
                .iter()
                .map(|(e, c)| {
                    let mut e2 = e.clone();
                    e2[v] += k;
                    (e2, c.clone())
                })
                .collect(),
        }
    }

    fn content_in(&self, v: usize, f: &CyclotomicField) -> MPoly {
        let mut g = MPoly::zero(self.nvars);
        for c in self.coeffs_in(v) {
            g = gcd(&g, &c, f);
            if g.is_constant() && !g.is_zero() {
                return MPoly::one(self.nvars);
            }
        }
        g
    }

    fn prem_in(&self, b: &MPoly, v: usize, f: &CyclotomicField) -> MPoly {
        let db = b.degree_in(v);
        let lb = b.coeffs_in(v).pop().expect("nonzero");
        let mut r = self.clone();
        while !r.is_zero() && r.degree_in(v) >= db {
            let dr = r.degree_in(v);
            let lr = r.coeffs_in(v).pop().expect("nonzero");
            r = r.mul(&lb, f).sub(&b.mul(&lr, f).shift_var(v, dr - db));
        }
        r
    }

    /// Evaluates the polynomial with each variable mapped to a residue mod p.
    pub(crate) fn eval_mod(&self, zeta: u64, vals: &[u64], p: u64) -> Option<u64> {
        let mut acc: u128 = 0;
        for (e, c) in &self.terms {
            let mut cv: u128 = 0;
            let mut zp: u128 = 1;
            for q in c {
                let qm = super::cyclotomic::rational_mod(q, p)? as u128;
                cv = (cv + qm * zp) % p as u128;
                zp = zp * zeta as u128 % p as u128;
            }
            let mut t = cv;
            for (i, &k) in e.iter().enumerate() {
                t = t * super::cyclotomic::pow_mod(vals[i], k as u64, p) as u128 % p as u128;
            }
            acc = (acc + t) % p as u128;
        }
        Some(acc as u64)
    }
}

/// Monic greatest common divisor; `gcd(0, 0) = 0`.
pub fn gcd(a: &MPoly, b: &MPoly, f: &CyclotomicField) -> MPoly {
    if a.is_zero() {
        return b.monic(f);
    }
    if b.is_zero() {
        return a.monic(f);
    }
    if a.is_constant() || b.is_constant() {
        return MPoly::one(a.nvars);
    }
    let v = match (a.main_var(), b.main_var()) {
        (Some(x), Some(y)) => x.min(y),
        _ => unreachable!("nonconstant polynomials have a variable"),
    };
    if a.degree_in(v) == 0 {
        return gcd(a, &b.content_in(v, f), f);
    }
    if b.degree_in(v) == 0 {
        return gcd(&a.content_in(v, f), b, f);
    }
    let ca = a.content_in(v, f);
    let cb = b.content_in(v, f);
    let pa = a.div_exact(&ca, f).expect("content divides");
    let pb = b.div_exact(&cb, f).expect("content divides");
    let c = gcd(&ca, &cb, f);
    let (mut r0, mut r1) = if pa.degree_in(v) >= pb.degree_in(v) { (pa, pb) } else { (pb, pa) };
    let g = loop {
        let r = r0.prem_in(&r1, v, f);
        if r.is_zero() {
            break r1;
        }
        if r.degree_in(v) == 0 {
            break MPoly::one(a.nvars);
        }
        r0 = r1;
        let cr = r.content_in(v, f);
        r1 = r.div_exact(&cr, f).expect("content divides");
    };
    let cg = g.content_in(v, f);
    let g = g.div_exact(&cg, f).expect("content divides");
    c.mul(&g, f).monic(f)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64) -> QPoly {
        if n == 0 {
            vec![]
        } else {
            vec![BigRational::from_integer(n.into())]
        }
    }

    #[test]
    fn gcd_of_products() {
        let f = CyclotomicField::new(4);
        let x = MPoly::var(2, 0);
        let y = MPoly::var(2, 1);
        let one = MPoly::one(2);
        let a = x.add(&y.scale(&q(2), &f)); // x + 2y
        let b = x.sub(&one); // x - 1
        let c = y.add(&one); // y + 1
        let p1 = a.mul(&b, &f);
        let p2 = a.mul(&c, &f);
        assert_eq!(gcd(&p1, &p2, &f), a.monic(&f));
        assert_eq!(gcd(&b, &c, &f), MPoly::one(2));
    }

    #[test]
    fn exact_division() {
        let f = CyclotomicField::new(4);
        let x = MPoly::var(1, 0);
        let one = MPoly::one(1);
        let a = x.mul(&x, &f).sub(&one);
        let b = x.sub(&one);
        assert_eq!(a.div_exact(&b, &f), Some(x.add(&one)));
        assert_eq!(b.div_exact(&a, &f), None);
    }
}
