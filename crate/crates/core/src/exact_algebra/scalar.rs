//! Elements of K_{M,k} = Q(ζ_M, i)(x₁,…,x_k) in canonical reduced form.

use std::cmp::Ordering;
use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};

use super::cyclotomic::{CyclotomicField, QPoly};
use super::poly::{gcd, MPoly};
use crate::error::{Error, Result};

/// A session coefficient field.
#[derive(Debug, PartialEq, Eq)]
pub struct Field {
    declared_order: u32,
    cyc: CyclotomicField,
    names: Vec<String>,
}

/// Shared handle to a session field.
pub type FieldRef = Arc<Field>;

impl Field {
    /// Q(ζ_M, i)(names…). The cyclotomic order actually used is lcm(M, 4).
    pub fn new(m: u32, names: Vec<String>) -> FieldRef {
        let m = m.max(1);
        let order = m.lcm(&4);
        Arc::new(Field { declared_order: m, cyc: CyclotomicField::new(order), names })
    }

    /// Field with `k` symbols named x1…xk.
    pub fn with_symbols(m: u32, k: usize) -> FieldRef {
        Self::new(m, (1..=k).map(|i| format!("x{i}")).collect())
    }

    /// Gaussian rationals Q(i).
    pub fn gaussian() -> FieldRef {
        Self::new(1, Vec::new())
    }

    /// The same cyclotomic part with additional symbols appended.
    pub fn extended(&self, extra: &[&str]) -> FieldRef {
        let mut names = self.names.clone();
        names.extend(extra.iter().map(|s| s.to_string()));
        Self::new(self.declared_order, names)
    }

    pub fn declared_order(&self) -> u32 {
        self.declared_order
    }

    /// Order n of the root of unity ζ_n generating the constant field.
    pub fn order(&self) -> u32 {
        self.cyc.order()
    }

    pub fn nvars(&self) -> usize {
        self.names.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn symbol_index(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub(crate) fn cyc(&self) -> &CyclotomicField {
        &self.cyc
    }
}

/// A field element num/den with gcd(num, den) = 1 and den monic.
#[derive(Clone)]
pub struct Scalar {
    field: FieldRef,
    num: MPoly,
    den: MPoly,
}

impl Scalar {
    fn raw(field: &FieldRef, num: MPoly, den: MPoly) -> Scalar {
        Scalar { field: field.clone(), num, den }
    }

    /// Builds num/den and normalizes; errors on a zero denominator.
    pub fn from_fraction(field: &FieldRef, num: MPoly, den: MPoly) -> Result<Scalar> {
        if den.is_zero() {
            return Err(Error::DivisionByZero("scalar with zero denominator".into()));
        }
        Ok(Self::normalized(field, num, den))
    }

    fn normalized(field: &FieldRef, num: MPoly, den: MPoly) -> Scalar {
        let f = field.cyc();
        let n = field.nvars();
        if num.is_zero() {
            return Self::raw(field, num, MPoly::one(n));
        }
        let (num, den) = if den.is_constant() {
            (num, den)
        } else {
            let g = gcd(&num, &den, f);
            if g.is_constant() {
                (num, den)
            } else {
                (num.div_exact(&g, f).expect("gcd divides"), den.div_exact(&g, f).expect("gcd divides"))
            }
        };
        let lc = den.leading().expect("nonzero").1.clone();
        let inv = f.inv(&lc).expect("nonzero");
        Self::raw(field, num.scale(&inv, f), den.scale(&inv, f))
    }

    pub fn zero(field: &FieldRef) -> Scalar {
        Self::raw(field, MPoly::zero(field.nvars()), MPoly::one(field.nvars()))
    }

    pub fn one(field: &FieldRef) -> Scalar {
        Self::from_int(field, 1)
    }

    pub fn from_int(field: &FieldRef, n: i64) -> Scalar {
        Self::from_rational(field, &BigRational::from_integer(BigInt::from(n)))
    }

    pub fn from_rational(field: &FieldRef, q: &BigRational) -> Scalar {
        let c = if q.is_zero() { Vec::new() } else { vec![q.clone()] };
        Self::raw(field, MPoly::constant(field.nvars(), c), MPoly::one(field.nvars()))
    }

    /// ζ_n^j where n is the field's cyclotomic order.
    pub fn zeta_pow(field: &FieldRef, j: i64) -> Scalar {
        let c = field.cyc().zeta_pow(j);
        Self::raw(field, MPoly::constant(field.nvars(), c), MPoly::one(field.nvars()))
    }

    /// A primitive d-th root of unity when d divides the cyclotomic order.
    pub fn root_of_unity(field: &FieldRef, d: u32) -> Option<Scalar> {
        let n = field.order();
        (d >= 1 && n.is_multiple_of(d)).then(|| Self::zeta_pow(field, (n / d) as i64))
    }

    /// The imaginary unit.
    pub fn i(field: &FieldRef) -> Scalar {
        Self::root_of_unity(field, 4).expect("i is always adjoined")
    }

    /// The i-th transcendental generator (0-based).
    pub fn var(field: &FieldRef, i: usize) -> Scalar {
        assert!(i < field.nvars(), "symbol index out of range");
        Self::raw(field, MPoly::var(field.nvars(), i), MPoly::one(field.nvars()))
    }

    /// Symbol by name.
    pub fn symbol(field: &FieldRef, name: &str) -> Result<Scalar> {
        let i = field.symbol_index(name).ok_or_else(|| Error::Input(format!("undeclared symbol {name}")))?;
        Ok(Self::var(field, i))
    }

    pub fn field(&self) -> &FieldRef {
        &self.field
    }

    pub fn numer(&self) -> &MPoly {
        &self.num
    }

    pub fn denom(&self) -> &MPoly {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.den.is_constant() && self.num == self.den
    }

    /// True when the element lies in Q(ζ).
    pub fn is_constant(&self) -> bool {
        self.num.is_constant() && self.den.is_constant()
    }

    /// The rational value when the element lies in Q.
    pub fn to_rational(&self) -> Option<BigRational> {
        if !self.is_constant() {
            return None;
        }
        let c = self.num.constant_term();
        match c.len() {
            0 => Some(BigRational::zero()),
            1 => Some(c[0].clone()),
            _ => None,
        }
    }

    /// (c, [l_1, …, l_k]) when the element equals c + Σ l_i·x_i with rational c, l_i.
    pub fn affine_rational_form(&self) -> Option<(BigRational, Vec<BigRational>)> {
        if !self.den.is_constant() {
            return None;
        }
        let d = self.den.constant_term();
        if d.len() != 1 {
            return None;
        }
        let nv = self.field.nvars();
        let mut c = BigRational::zero();
        let mut lin = vec![BigRational::zero(); nv];
        for (e, coeff) in &self.num.terms {
            let v = match coeff.len() {
                0 => BigRational::zero(),
                1 => &coeff[0] / &d[0],
                _ => return None,
            };
            match e.iter().sum::<u32>() {
                0 => c = v,
                1 => lin[e.iter().position(|&x| x == 1).expect("degree one")] = v,
                _ => return None,
            }
        }
        Some((c, lin))
    }

    fn check(&self, o: &Scalar) {
        assert!(Arc::ptr_eq(&self.field, &o.field) || self.field == o.field, "scalars from different session fields");
    }

    pub fn add(&self, o: &Scalar) -> Scalar {
        self.check(o);
        let f = self.field.cyc();
        if self.den.is_constant() && o.den.is_constant() && self.den == o.den {
            return Self::normalized(&self.field, self.num.add(&o.num), self.den.clone());
        }
        let num = self.num.mul(&o.den, f).add(&o.num.mul(&self.den, f));
        Self::normalized(&self.field, num, self.den.mul(&o.den, f))
    }

    pub fn neg(&self) -> Scalar {
        Self::raw(&self.field, self.num.neg(), self.den.clone())
    }

    pub fn sub(&self, o: &Scalar) -> Scalar {
        self.add(&o.neg())
    }

    pub fn mul(&self, o: &Scalar) -> Scalar {
        self.check(o);
        let f = self.field.cyc();
        if self.is_zero() || o.is_zero() {
            return Self::zero(&self.field);
        }
        let num = self.num.mul(&o.num, f);
        Self::normalized(&self.field, num, self.den.mul(&o.den, f))
    }

    /// Multiplicative inverse.
    pub fn inv(&self) -> Result<Scalar> {
        if self.is_zero() {
            return Err(Error::DivisionByZero("inverse of zero scalar".into()));
        }
        Ok(Self::normalized(&self.field, self.den.clone(), self.num.clone()))
    }

    pub fn div(&self, o: &Scalar) -> Result<Scalar> {
        Ok(self.mul(&o.inv()?))
    }

    pub fn pow(&self, e: i64) -> Result<Scalar> {
        let base = if e < 0 { self.inv()? } else { self.clone() };
        let mut acc = Scalar::one(&self.field);
        let mut b = base;
        let mut k = e.unsigned_abs();
        while k > 0 {
            if k & 1 == 1 {
                acc = acc.mul(&b);
            }
            b = b.mul(&b);
            k >>= 1;
        }
        Ok(acc)
    }

    /// Some p-th root inside the session field, if one exists in a form the
    /// term-by-term extraction can find.
    pub fn nth_root(&self, p: u32) -> Option<Scalar> {
        if p == 0 {
            return None;
        }
        let f = self.field.cyc();
        let num = self.num.nth_root(p, f)?;
        let den = self.den.nth_root(p, f)?;
        let r = Self::normalized(&self.field, num, den);
        (r.pow(p as i64).ok()? == *self).then_some(r)
    }

    pub fn scale_rational(&self, q: &BigRational) -> Scalar {
        self.mul(&Scalar::from_rational(&self.field, q))
    }

    /// Re-expresses the element in a field with the same cyclotomic part and
    /// at least as many symbols, keeping symbol indices.
    pub fn embed(&self, into: &FieldRef) -> Result<Scalar> {
        if into.order() != self.field.order() || into.nvars() < self.field.nvars() {
            return Err(Error::Incompatible("cannot embed scalar into target field".into()));
        }
        let lift = |p: &MPoly| {
            let mut out = MPoly::zero(into.nvars());
            for (e, c) in &p.terms {
                let mut e2 = e.clone();
                e2.resize(into.nvars(), 0);
                out.terms.insert(e2, c.clone());
            }
            out
        };
        Ok(Self::raw(into, lift(&self.num), lift(&self.den)))
    }

    /// Rational value under x_i ↦ `vals[i]`, if it lies in Q and the denominator survives.
    pub fn specialize_rational(&self, vals: &[BigRational]) -> Option<BigRational> {
        let eval = |p: &MPoly| -> Option<BigRational> {
            let mut acc: QPoly = Vec::new();
            for (e, c) in &p.terms {
                let mut m = BigRational::one();
                for (i, &k) in e.iter().enumerate() {
                    if k > 0 {
                        m *= num_traits::pow(vals[i].clone(), k as usize);
                    }
                }
                if acc.len() < c.len() {
                    acc.resize(c.len(), BigRational::zero());
                }
                for (j, cj) in c.iter().enumerate() {
                    acc[j] += cj * &m;
                }
            }
            while acc.last().is_some_and(Zero::is_zero) {
                acc.pop();
            }
            match acc.len() {
                0 => Some(BigRational::zero()),
                1 => acc.pop(),
                _ => None,
            }
        };
        let d = eval(&self.den)?;
        if d.is_zero() {
            return None;
        }
        Some(eval(&self.num)? / d)
    }

    /// Image under ζ ↦ `zeta` and x_i ↦ `vals[i]` in F_p, if the denominator survives.
    pub(crate) fn eval_mod(&self, zeta: u64, vals: &[u64], p: u64) -> Option<u64> {
        let n = self.num.eval_mod(zeta, vals, p)?;
        let d = self.den.eval_mod(zeta, vals, p)?;
        if d == 0 {
            return None;
        }
        Some(((n as u128 * super::cyclotomic::pow_mod(d, p - 2, p) as u128) % p as u128) as u64)
    }
}

impl PartialEq for Scalar {
    fn eq(&self, o: &Self) -> bool {
        self.num == o.num && self.den == o.den
    }
}

impl Eq for Scalar {}

impl PartialOrd for Scalar {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

/// Total order on canonical forms, used only for deterministic tie-breaking.
impl Ord for Scalar {
    fn cmp(&self, o: &Self) -> Ordering {
        (&self.num, &self.den).cmp(&(&o.num, &o.den))
    }
}

impl std::hash::Hash for Scalar {
    fn hash<H: std::hash::Hasher>(&self, h: &mut H) {
        self.num.hash(h);
        self.den.hash(h);
    }
}

fn fmt_rational(q: &BigRational) -> String {
    if q.is_integer() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

fn fmt_cyc(c: &QPoly, n: u32) -> String {
    let mut parts = Vec::new();
    for (j, q) in c.iter().enumerate() {
        if q.is_zero() {
            continue;
        }
        let z = match j {
            0 => String::new(),
            1 => format!("z{n}"),
            _ => format!("z{n}^{j}"),
        };
        let s = match (z.is_empty(), q.is_one(), (-q).is_one()) {
            (true, _, _) => fmt_rational(q),
            (false, true, _) => z,
            (false, _, true) => format!("-{z}"),
            _ => format!("{}*{z}", fmt_rational(q)),
        };
        parts.push(s);
    }
    parts.join("+").replace("+-", "-")
}

fn fmt_poly(p: &MPoly, names: &[String], n: u32) -> String {
    if p.is_zero() {
        return "0".into();
    }
    let mut parts = Vec::new();
    for (e, c) in p.terms.iter().rev() {
        let mono: Vec<String> = e
            .iter()
            .enumerate()
            .filter(|(_, &k)| k > 0)
            .map(|(i, &k)| if k == 1 { names[i].clone() } else { format!("{}^{k}", names[i]) })
            .collect();
        let cs = fmt_cyc(c, n);
        let simple = c.len() == 1;
        let s = if mono.is_empty() {
            if simple {
                cs
            } else {
                format!("({cs})")
            }
        } else if simple && c[0].is_one() {
            mono.join("*")
        } else if simple && (-&c[0]).is_one() {
            format!("-{}", mono.join("*"))
        } else if simple {
            format!("{cs}*{}", mono.join("*"))
        } else {
            format!("({cs})*{}", mono.join("*"))
        };
        parts.push(s);
    }
    parts.join(" + ").replace("+ -", "- ")
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let n = self.field.order();
        let num = fmt_poly(&self.num, self.field.names(), n);
        if self.den.is_constant() && self.den.constant_term().len() == 1 && self.den.constant_term()[0].is_one() {
            write!(f, "{num}")
        } else {
            let den = fmt_poly(&self.den, self.field.names(), n);
            write!(f, "({num})/({den})")
        }
    }
}

impl fmt::Debug for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Scalar({self})")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rational_specialization() {
        let k = Field::with_symbols(1, 2);
        let x = Scalar::var(&k, 0);
        let y = Scalar::var(&k, 1);
        let e = x.mul(&x).add(&Scalar::from_int(&k, 3)).div(&y.sub(&Scalar::one(&k))).unwrap();
        let v = |a: i64| BigRational::from_integer(a.into());
        assert_eq!(e.specialize_rational(&[v(2), v(3)]), Some(BigRational::new(7.into(), 2.into())));
        assert_eq!(e.specialize_rational(&[v(2), v(1)]), None);
        assert_eq!(Scalar::i(&k).specialize_rational(&[v(0), v(0)]), None);
    }

    #[test]
    fn canonical_cancellation() {
        let k = Field::with_symbols(1, 2);
        let x = Scalar::var(&k, 0);
        let y = Scalar::var(&k, 1);
        let one = Scalar::one(&k);
        let a = x.mul(&x).sub(&one).div(&x.sub(&one)).unwrap();
        assert_eq!(a, x.add(&one));
        let b = x.add(&y).div(&y.add(&x)).unwrap();
        assert!(b.is_one());
    }

    #[test]
    fn gaussian_unit() {
        let k = Field::gaussian();
        let i = Scalar::i(&k);
        assert_eq!(i.mul(&i), Scalar::from_int(&k, -1));
        assert_eq!(i.inv().unwrap(), i.neg());
    }

    #[test]
    fn display_is_readable() {
        let k = Field::with_symbols(1, 1);
        let x = Scalar::var(&k, 0);
        let s = x.add(&Scalar::from_int(&k, 2)).div(&Scalar::from_int(&k, 3)).unwrap();
        assert_eq!(s.to_string(), "1/3*x1 + 2/3");
    }

    #[test]
    fn roots() {
        let k = Field::with_symbols(1, 1);
        let a = Scalar::var(&k, 0);
        let sq = a.mul(&a).div(&Scalar::from_int(&k, 4)).unwrap();
        let r = sq.nth_root(2).unwrap();
        assert_eq!(r.mul(&r), sq);
        let cube = a.add(&Scalar::one(&k)).pow(3).unwrap().div(&a.pow(3).unwrap()).unwrap();
        let r3 = cube.nth_root(3).unwrap();
        assert_eq!(r3.pow(3).unwrap(), cube);
        assert!(a.nth_root(2).is_none());
        let minus_one = Scalar::from_int(&k, -1);
        let i = minus_one.nth_root(2).unwrap();
        assert_eq!(i.mul(&i), minus_one);
        assert!(Scalar::from_int(&k, 2).nth_root(2).is_none());
    }
}
