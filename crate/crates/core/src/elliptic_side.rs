//! Points of T and T^∨ in lattice units, the (V, f) presentation of semistable
//! degree-0 bundles, and the degree, stability and cohomology conditions on
//! filtered bundles over T × P¹ given by elementary blocks at infinity.
//!
//! A point is q₁ + q₂τ in units of its lattice plus a formal Q-combination of
//! position symbols. An eigenvalue λ of f is read as a point by taking its
//! rational constant as q₁, the coefficient of the session symbol `tau` as q₂,
//! and every other symbol as a position symbol.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::exact_algebra::linalg::{jordan_matrix, nilpotent_jordan_type, nullspace, solve, ScalarMatrix};
use crate::exact_algebra::{FieldRef, Scalar};
use crate::filtered_disc::{floor_q, normalize_weight, Q};
use crate::higgs_local::{
    admissibility_check, certified_eigenvalues, endo_germ_wrap, goodness_decomposition, CanonicalGerm, Coordinate,
    ElementaryBlock, IrregularPart,
};

/// Session symbol read as the second lattice generator.
pub const TAU_SYMBOL: &str = "tau";

/// Which torus a point lives on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Side {
    /// T = C / (Z + Zτ).
    Torus,
    /// T^∨ = C / L^∨.
    Dual,
}

/// q₁ + q₂τ + Σ c_s·s in lattice units.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TorusPoint {
    pub side: Side,
    pub q1: Q,
    pub q2: Q,
    /// Nonzero coefficients of position symbols.
    pub symbolic: BTreeMap<String, Q>,
    /// True for a lift, i.e. before reduction modulo the lattice.
    pub lift: bool,
}

impl TorusPoint {
    pub fn new(side: Side, q1: Q, q2: Q) -> Self {
        TorusPoint { side, q1, q2, symbolic: BTreeMap::new(), lift: true }
    }

    pub fn origin(side: Side) -> Self {
        Self::new(side, Q::zero(), Q::zero()).reduce()
    }

    /// Adds c times a position symbol.
    pub fn with_symbol(mut self, name: &str, c: Q) -> Self {
        let e = self.symbolic.entry(name.to_string()).or_insert_with(Q::zero);
        *e += c;
        if e.is_zero() {
            self.symbolic.remove(name);
        }
        self
    }

    /// Representative with q₁, q₂ ∈ [0, 1).
    pub fn reduce(&self) -> Self {
        let frac = |x: &Q| x - Q::from_integer(floor_q(x).into());
        TorusPoint {
            side: self.side,
            q1: frac(&self.q1),
            q2: frac(&self.q2),
            symbolic: self.symbolic.clone(),
            lift: false,
        }
    }

    /// Equality modulo the lattice.
    pub fn equivalent(&self, o: &Self) -> bool {
        self.side == o.side
            && (&self.q1 - &o.q1).is_integer()
            && (&self.q2 - &o.q2).is_integer()
            && self.symbolic == o.symbolic
    }

    pub fn neg(&self) -> Self {
        TorusPoint {
            side: self.side,
            q1: -&self.q1,
            q2: -&self.q2,
            symbolic: self.symbolic.iter().map(|(k, v)| (k.clone(), -v)).collect(),
            lift: self.lift,
        }
    }

    pub fn add(&self, o: &Self) -> Result<Self> {
        if self.side != o.side {
            return Err(Error::Incompatible("points on different tori".into()));
        }
        let mut out = TorusPoint::new(self.side, &self.q1 + &o.q1, &self.q2 + &o.q2);
        out.symbolic = self.symbolic.clone();
        for (k, v) in &o.symbolic {
            out = out.with_symbol(k, v.clone());
        }
        out.lift = self.lift && o.lift;
        Ok(out)
    }

    /// Reads a Q-affine scalar as a point.
    pub fn from_scalar(side: Side, x: &Scalar) -> Result<Self> {
        let (c, lin) = x
            .affine_rational_form()
            .ok_or_else(|| Error::Contract(format!("{x} is not a rational affine combination of position symbols")))?;
        let mut p = TorusPoint::new(side, c, Q::zero());
        for (name, l) in x.field().names().iter().zip(lin) {
            if l.is_zero() {
                continue;
            }
            if name == TAU_SYMBOL {
                p.q2 = l;
            } else {
                p = p.with_symbol(name, l);
            }
        }
        Ok(p)
    }

    /// The lift as a scalar of the session field.
    pub fn to_scalar(&self, field: &FieldRef) -> Result<Scalar> {
        let mut x = Scalar::from_rational(field, &self.q1);
        if !self.q2.is_zero() {
            x = x.add(&Scalar::symbol(field, TAU_SYMBOL)?.scale_rational(&self.q2));
        }
        for (k, v) in &self.symbolic {
            x = x.add(&Scalar::symbol(field, k)?.scale_rational(v));
        }
        Ok(x)
    }
}

impl fmt::Display for TorusPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.q1)?;
        if !self.q2.is_zero() {
            write!(f, " + {}·tau", self.q2)?;
        }
        for (k, v) in &self.symbolic {
            write!(f, " + {v}·{k}")?;
        }
        Ok(())
    }
}

/// Canonical representative modulo the lattice.
pub fn torus_reduce(x: &TorusPoint) -> TorusPoint {
    x.reduce()
}

/// A vector space with an endomorphism, presenting a semistable degree-0 bundle.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EndoPair {
    pub label: String,
    pub f: ScalarMatrix,
}

impl EndoPair {
    pub fn dim(&self) -> usize {
        self.f.len()
    }
}

/// Spectrum on T^∨ and the matching spectral summands.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpectralDecomposition {
    pub spectrum: Vec<TorusPoint>,
    pub blocks: Vec<EndoPair>,
}

/// Spectral decomposition of (V, f) by eigenvalue classes modulo L^∨.
pub fn g_equiv(vf: &EndoPair, field: &FieldRef) -> Result<SpectralDecomposition> {
    let n = vf.dim();
    let (eig, rest) = certified_eigenvalues(&vf.f, field)?;
    if rest.len() > 1 {
        return Err(Error::FieldExtensionRequired("eigenvalues of f are not in the session field".into()));
    }
    let mut classes: BTreeMap<TorusPoint, Vec<(Scalar, usize)>> = BTreeMap::new();
    for (lam, mult) in &eig {
        classes.entry(TorusPoint::from_scalar(Side::Dual, lam)?.reduce()).or_default().push((lam.clone(), *mult));
    }
    let mut spectrum = Vec::new();
    let mut blocks = Vec::new();
    for (k, (pt, lams)) in classes.into_iter().enumerate() {
        let mut basis: Vec<Vec<Scalar>> = Vec::new();
        for (lam, mult) in &lams {
            let mut shifted = vf.f.clone();
            for (i, row) in shifted.iter_mut().enumerate() {
                row[i] = row[i].sub(lam);
            }
            let mut power = shifted.clone();
            for _ in 1..*mult {
                power = crate::exact_algebra::linalg::mat_mul(&power, &shifted, field);
            }
            basis.extend(nullspace(&power, field));
        }
        let d = basis.len();
        let bmat: ScalarMatrix = (0..n).map(|r| basis.iter().map(|v| v[r].clone()).collect()).collect();
        let mut restricted = vec![vec![Scalar::zero(field); d]; d];
        for (j, v) in basis.iter().enumerate() {
            let fv: Vec<Scalar> =
                (0..n).map(|r| (0..n).fold(Scalar::zero(field), |acc, c| acc.add(&vf.f[r][c].mul(&v[c])))).collect();
            let coords = solve(&bmat, &fv, field)
                .ok_or_else(|| Error::Contract("generalized eigenspace is not invariant".into()))?;
            for (i, c) in coords.into_iter().enumerate() {
                restricted[i][j] = c;
            }
        }
        spectrum.push(pt);
        blocks.push(EndoPair { label: format!("{}[{k}]", vf.label), f: restricted });
    }
    let total: usize = blocks.iter().map(EndoPair::dim).sum();
    if total != n {
        return Err(Error::FieldExtensionRequired("generalized eigenspaces do not span V".into()));
    }
    Ok(SpectralDecomposition { spectrum, blocks })
}

/// One elementary block of a global datum, singular at a single point.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GlobalBlock {
    pub point: TorusPoint,
    pub block: ElementaryBlock,
    /// Degree of the underlying bundle of the level-0 lattice.
    pub base_degree: i64,
}

impl GlobalBlock {
    /// Normalizes upstairs weights into (−1, 0], shifting the base degree so the
    /// parabolic degree is unchanged.
    pub fn new(point: TorusPoint, block: ElementaryBlock, base_degree: i64) -> Result<Self> {
        block.validate()?;
        let mut g = GlobalBlock { point: point.reduce(), block, base_degree };
        let mut shift = 0i64;
        for w in g.block.weights.iter_mut() {
            let (nw, k) = normalize_weight(w, &Q::zero());
            *w = nw;
            shift += k;
        }
        g.base_degree += shift;
        Ok(g)
    }

    pub fn rank(&self) -> usize {
        self.block.rank()
    }

    /// base − δ.
    pub fn parabolic_degree(&self) -> Q {
        Q::from_integer(self.base_degree.into()) - self.block.delta()
    }

    /// Dual block at the negated point.
    pub fn dual(&self) -> Result<Self> {
        let b = dual_block(&self.block)?;
        let target = -self.parabolic_degree();
        let mut g = GlobalBlock::new(self.point.neg(), b, 0)?;
        let base = target + g.block.delta();
        if !base.is_integer() {
            return Err(Error::Contract("dual block has non-integral base degree".into()));
        }
        g.base_degree = i64::try_from(base.to_integer()).expect("small degree");
        Ok(g)
    }
}

/// Dual of an elementary block: 𝔞 ↦ −𝔞, α ↦ −α, N ↦ −N^T, c ↦ −c.
pub fn dual_block(b: &ElementaryBlock) -> Result<ElementaryBlock> {
    let s = b.multiplicity();
    let rev = |i: usize| s - 1 - i;
    let field = b.field().clone();
    let mut n = vec![vec![Scalar::zero(&field); s]; s];
    for i in 0..s {
        for j in 0..s {
            // conjugating −N^T by the order-reversing permutation keeps it upper triangular
            n[rev(j)][rev(i)] = b.nilpotent[i][j].neg();
        }
    }
    let weights: Vec<Q> = (0..s).map(|i| -&b.weights[rev(i)]).collect();
    let irregular = match &b.irregular {
        None => None,
        Some(irr) => {
            let sign = |e: u32| if e.is_multiple_of(2) { Scalar::one(&field) } else { Scalar::from_int(&field, -1) };
            let (p, m) = (irr.p(), irr.m());
            let lp = irr.leading_power().mul(&sign(p));
            let lower = irr
                .lower_invariants()
                .iter()
                .enumerate()
                .map(|(i, r)| {
                    let k = i as u32 + 1;
                    let e = (0..p).find(|e| (k + m * e).is_multiple_of(p)).expect("m invertible mod p");
                    r.mul(&sign(1 + e))
                })
                .collect();
            Some(IrregularPart::from_invariants(p, m, lp, lower)?)
        }
    };
    let injection = match &b.injection {
        Some(src) => Some(Box::new(dual_block(src)?)),
        None => None,
    };
    let out = ElementaryBlock { p: b.p, m: b.m, irregular, alpha: b.alpha.neg(), nilpotent: n, weights, injection };
    out.validate()?;
    Ok(out)
}

/// Filtered bundle on (T × P¹, T × {∞}) presented by elementary blocks at infinity.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FilteredBundleData {
    pub field: FieldRef,
    pub blocks: Vec<GlobalBlock>,
}

impl FilteredBundleData {
    pub fn new(field: FieldRef, blocks: Vec<GlobalBlock>) -> Result<Self> {
        if blocks.iter().any(|b| b.point.side != Side::Dual) {
            return Err(Error::Contract("spectrum points lie on T^∨".into()));
        }
        Ok(FilteredBundleData { field, blocks })
    }

    pub fn rank(&self) -> usize {
        self.blocks.iter().map(GlobalBlock::rank).sum()
    }

    /// Sp_∞ as distinct reduced points, sorted.
    pub fn spectrum(&self) -> Vec<TorusPoint> {
        distinct_points(&self.blocks)
    }

    /// The germ at infinity of the summand with spectrum P.
    pub fn germ_at(&self, p: &TorusPoint) -> Result<CanonicalGerm> {
        germ_at(&self.blocks, p, Coordinate::Infinity)
    }

    pub fn dual(&self) -> Result<Self> {
        Ok(FilteredBundleData {
            field: self.field.clone(),
            blocks: self.blocks.iter().map(GlobalBlock::dual).collect::<Result<_>>()?,
        })
    }

    pub fn direct_sum(&self, o: &Self) -> Self {
        let mut blocks = self.blocks.clone();
        blocks.extend(o.blocks.iter().cloned());
        FilteredBundleData { field: self.field.clone(), blocks }
    }
}

pub(crate) fn distinct_points(blocks: &[GlobalBlock]) -> Vec<TorusPoint> {
    let mut pts: Vec<TorusPoint> = blocks.iter().map(|b| b.point.reduce()).collect();
    pts.sort();
    pts.dedup();
    pts
}

pub(crate) fn germ_at(blocks: &[GlobalBlock], p: &TorusPoint, c: Coordinate) -> Result<CanonicalGerm> {
    CanonicalGerm::new(c, blocks.iter().filter(|b| b.point.equivalent(p)).map(|b| b.block.clone()).collect())
}

/// Σ base degrees − Σ δ.
pub fn global_parabolic_degree(d: &FilteredBundleData) -> Q {
    d.blocks.iter().map(GlobalBlock::parabolic_degree).fold(Q::zero(), |a, x| a + x)
}

/// Stability verdict relative to a candidate set of sub-data.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stability {
    Stable,
    Polystable,
    Semistable,
    Unstable,
}

impl fmt::Display for Stability {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Stability::Stable => "stable",
            Stability::Polystable => "polystable",
            Stability::Semistable => "semistable",
            Stability::Unstable => "unstable",
        };
        f.write_str(s)
    }
}

/// Result of [`stability_check`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StabilityReport {
    pub verdict: Stability,
    pub slope: Q,
    /// A candidate with larger slope, when unstable.
    pub destabilizing: Option<Vec<usize>>,
}

fn slope_of(d: &FilteredBundleData, idx: &[usize]) -> Q {
    let deg = idx.iter().map(|&i| d.blocks[i].parabolic_degree()).fold(Q::zero(), |a, x| a + x);
    let rank: usize = idx.iter().map(|&i| d.blocks[i].rank()).sum();
    deg / Q::from_integer(rank.into())
}

/// Candidates made of summands: every proper nonempty sub-sum for up to 12
/// blocks, otherwise single summands and initial partial sums.
pub fn default_candidates(n: usize) -> Vec<Vec<usize>> {
    if n <= 12 {
        (1u32..(1 << n) - 1).map(|mask| (0..n).filter(|i| mask & (1 << i) != 0).collect()).collect()
    } else {
        let mut c: Vec<Vec<usize>> = (0..n).map(|i| vec![i]).collect();
        c.extend((2..n).map(|k| (0..k).collect()));
        c
    }
}

/// μ-stability of d against the candidate sub-data, given as sets of block indices.
pub fn stability_check(d: &FilteredBundleData, candidates: Option<&[Vec<usize>]>) -> Result<StabilityReport> {
    let n = d.blocks.len();
    if n == 0 {
        return Err(Error::Contract("empty datum".into()));
    }
    let owned;
    let cands = match candidates {
        Some(c) => c,
        None => {
            owned = default_candidates(n);
            &owned[..]
        }
    };
    let all: Vec<usize> = (0..n).collect();
    let mu = slope_of(d, &all);
    let mut strict = true;
    for c in cands {
        let mut sorted = c.clone();
        sorted.sort();
        sorted.dedup();
        if sorted.is_empty() || sorted.len() == n || sorted.iter().any(|&i| i >= n) {
            return Err(Error::Contract(format!("candidate {c:?} is not a strict sub-datum")));
        }
        let m = slope_of(d, &sorted);
        if m > mu {
            return Ok(StabilityReport { verdict: Stability::Unstable, slope: mu, destabilizing: Some(sorted) });
        }
        if m == mu {
            strict = false;
        }
    }
    let verdict = if strict {
        Stability::Stable
    } else if (0..n).all(|i| slope_of(d, &[i]) == mu) {
        Stability::Polystable
    } else {
        Stability::Semistable
    };
    Ok(StabilityReport { verdict, slope: mu, destabilizing: None })
}

/// A twist (w, L) by a degree-0 line bundle L, with w only on the Higgs side.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Twist {
    pub w: Option<Scalar>,
    pub line: TorusPoint,
}

/// Verdict of a global condition with the failing twist classes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConditionReport {
    pub condition: String,
    pub holds: bool,
    pub failing: Vec<Twist>,
    pub notes: Vec<String>,
}

impl ConditionReport {
    pub(crate) fn new(condition: &str) -> Self {
        ConditionReport { condition: condition.into(), holds: true, failing: Vec::new(), notes: Vec::new() }
    }

    pub(crate) fn fail(&mut self, t: Twist, note: String) {
        self.holds = false;
        if !self.failing.contains(&t) {
            self.failing.push(t);
        }
        self.notes.push(note);
    }
}

/// True when the nilpotent part has a Jordan block of size one.
pub fn has_free_summand(b: &ElementaryBlock) -> bool {
    nilpotent_jordan_type(&b.nilpotent, b.field()).contains(&1)
}

/// (A3) on a datum of elementary blocks.
///
/// Away from spectral twists both vanishings hold. At the twist −P̃ only an
/// exceptional block can carry sections: one carrying an injection datum inherits
/// the verdict of its source; a bare one fails iff its nilpotent part has a free
/// one-dimensional summand.
pub fn a3_check(d: &FilteredBundleData) -> ConditionReport {
    let mut rep = ConditionReport::new("A3");
    for b in &d.blocks {
        if !b.block.is_exceptional() {
            continue;
        }
        let fails = match &b.block.injection {
            Some(src) => has_free_summand(src),
            None => has_free_summand(&b.block),
        };
        if fails {
            let twist = Twist { w: None, line: b.point.neg().reduce() };
            rep.fail(twist, format!("exceptional block at {} has an invariant section after twisting by −P", b.point));
        }
    }
    rep
}

/// (A1) holds by the (V, g) presentation; (A2) checks each germ g_P − P̃ for
/// admissibility with slopes at most 1.
pub fn a1a2_check(d: &FilteredBundleData) -> Result<ConditionReport> {
    let mut rep = ConditionReport::new("A1A2");
    for p in d.spectrum() {
        let germ = d.germ_at(&p)?;
        if !germ.admissible(&Q::one(), false) {
            rep.holds = false;
            rep.notes.push(format!("germ at {p} has a slope above 1"));
            continue;
        }
        if germ.blocks.iter().any(|b| b.m == b.p) {
            rep.notes.push(format!("germ at {p} has slope 1, which transformed Higgs data never produce"));
        }
        match realized_endomorphism(&germ, &d.field) {
            Ok(Some(h)) => {
                if !admissibility_check(&h, &Q::one(), false)? {
                    rep.holds = false;
                    rep.notes.push(format!("realized germ at {p} fails the slope split"));
                }
            }
            Ok(None) => rep.notes.push(format!("germ at {p} checked on canonical blocks only")),
            Err(e) => return Err(e),
        }
    }
    Ok(rep)
}

/// The germ (P_*V, −τ^{−2}g dτ) rebuilt from a realized canonical germ, when
/// its irregular parts are explicit over the session field.
fn realized_endomorphism(germ: &CanonicalGerm, field: &FieldRef) -> Result<Option<crate::higgs_local::HiggsGerm>> {
    let h = match germ.realize(field) {
        Ok(h) => h,
        Err(Error::FieldExtensionRequired(_)) => return Ok(None),
        Err(e) => return Err(e),
    };
    if h.theta().entries().iter().any(|e| e.valuation().is_some_and(|v| v < -1)) {
        // slope above 1 cannot come from a holomorphic endomorphism
        return Ok(Some(h));
    }
    let g = h.theta().map(|e| e.neg().shift(1));
    Ok(Some(endo_germ_wrap(h.lattice(), &g)?))
}

/// Goodness of every germ at infinity.
pub fn good_check(d: &FilteredBundleData) -> Result<ConditionReport> {
    let mut rep = ConditionReport::new("Good");
    for p in d.spectrum() {
        let germ = d.germ_at(&p)?;
        if let Some(h) = realized_endomorphism(&germ, &d.field)? {
            match goodness_decomposition(&h) {
                Ok(_) => {}
                Err(Error::NotGood(msg)) => {
                    rep.holds = false;
                    rep.notes.push(format!("germ at {p}: {msg}"));
                }
                Err(e) => return Err(e),
            }
        } else {
            rep.notes.push(format!("germ at {p} is a sum of canonical blocks, good by construction"));
        }
    }
    Ok(rep)
}

/// Rank-one datum p*L₀ with L₀ of class `point`: a bare exceptional block.
pub fn line_bundle_datum(field: &FieldRef, point: TorusPoint) -> Result<FilteredBundleData> {
    let b = ElementaryBlock::tame(Scalar::zero(field), jordan_matrix(&[1], field), vec![Q::zero()])?;
    FilteredBundleData::new(field.clone(), vec![GlobalBlock::new(point, b, 0)?])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact_algebra::Field;
    use crate::filtered_disc::q;

    #[test]
    fn reduction_examples() {
        let p = TorusPoint::new(Side::Dual, q(1, 1), Q::zero());
        assert_eq!(torus_reduce(&p), TorusPoint::origin(Side::Dual));
        let p = TorusPoint::new(Side::Dual, q(3, 2), q(-1, 4)).reduce();
        assert_eq!((p.q1.clone(), p.q2.clone()), (q(1, 2), q(3, 4)));
        let x = TorusPoint::new(Side::Dual, q(2, 1), q(-3, 1)).with_symbol("x1", Q::one());
        assert_eq!(x.reduce(), TorusPoint::origin(Side::Dual).with_symbol("x1", Q::one()));
        assert!(x.lift && !x.reduce().lift);
    }

    #[test]
    fn spectral_decomposition_examples() {
        let k = Field::new(1, vec!["x1".into(), TAU_SYMBOL.into()]);
        let z = Scalar::zero(&k);
        let one = Scalar::one(&k);
        let nil = EndoPair { label: "V".into(), f: vec![vec![z.clone(), one.clone()], vec![z.clone(), z.clone()]] };
        let sd = g_equiv(&nil, &k).unwrap();
        assert_eq!(sd.spectrum, vec![TorusPoint::origin(Side::Dual)]);
        assert_eq!(sd.blocks[0].dim(), 2);
        let a = Scalar::from_rational(&k, &q(1, 3));
        let nu = Scalar::from_int(&k, 2).add(&Scalar::symbol(&k, TAU_SYMBOL).unwrap().scale_rational(&q(-1, 1)));
        let f = EndoPair { label: "V".into(), f: vec![vec![a.clone(), z.clone()], vec![z.clone(), a.add(&nu)]] };
        let sd = g_equiv(&f, &k).unwrap();
        assert_eq!(sd.spectrum.len(), 1);
        assert_eq!(sd.blocks[0].dim(), 2);
        let x = Scalar::var(&k, 0);
        let f = EndoPair { label: "V".into(), f: vec![vec![z.clone(), z.clone()], vec![z.clone(), x]] };
        let sd = g_equiv(&f, &k).unwrap();
        assert_eq!(sd.spectrum.len(), 2);
        assert_eq!(sd.blocks.iter().map(EndoPair::dim).collect::<Vec<_>>(), vec![1, 1]);
    }

    fn rank1(k: &FieldRef, w: Q, base: i64) -> GlobalBlock {
        GlobalBlock::new(
            TorusPoint::origin(Side::Dual).with_symbol("x1", Q::one()),
            ElementaryBlock::tame_rank1(Scalar::var(k, 0), w),
            base,
        )
        .unwrap()
    }

    #[test]
    fn parabolic_degree_examples() {
        let k = Field::with_symbols(1, 1);
        let a = q(-1, 3);
        let d0 = FilteredBundleData::new(k.clone(), vec![rank1(&k, Q::zero(), 0)]).unwrap();
        let d1 = FilteredBundleData::new(k.clone(), vec![rank1(&k, a.clone(), 0)]).unwrap();
        assert_eq!(global_parabolic_degree(&d0), Q::zero());
        assert_eq!(global_parabolic_degree(&d1), -a.clone());
        assert_eq!(global_parabolic_degree(&d0.direct_sum(&d1)), -a);
        assert_eq!(global_parabolic_degree(&d1.dual().unwrap()), -global_parabolic_degree(&d1));
    }

    #[test]
    fn stability_examples() {
        let k = Field::with_symbols(1, 1);
        let d = FilteredBundleData::new(k.clone(), vec![rank1(&k, q(-1, 4), 0), rank1(&k, q(-3, 4), 0)]).unwrap();
        let r = stability_check(&d, Some(&[vec![0], vec![1]])).unwrap();
        assert_eq!(r.verdict, Stability::Unstable);
        assert_eq!(r.slope, q(1, 2));
        let d = FilteredBundleData::new(k.clone(), vec![rank1(&k, q(-1, 4), 0), rank1(&k, q(-1, 4), 0)]).unwrap();
        assert_eq!(stability_check(&d, None).unwrap().verdict, Stability::Polystable);
        let d = FilteredBundleData::new(k.clone(), vec![rank1(&k, q(-1, 4), 0)]).unwrap();
        assert_eq!(stability_check(&d, None).unwrap().verdict, Stability::Stable);
        assert!(stability_check(&d, Some(&[vec![0]])).is_err());
    }

    #[test]
    fn a3_examples() {
        let k = Field::with_symbols(1, 1);
        let p0 = TorusPoint::new(Side::Dual, q(1, 3), q(1, 5));
        let lb = line_bundle_datum(&k, p0.clone()).unwrap();
        let rep = a3_check(&lb);
        assert!(!rep.holds);
        assert_eq!(rep.failing.len(), 1);
        assert!(rep.failing[0].line.equivalent(&p0.neg()));
        let dual = a3_check(&lb.dual().unwrap());
        assert!(dual.failing[0].line.equivalent(&p0));
        let generic = FilteredBundleData::new(k.clone(), vec![rank1(&k, q(-1, 3), 0)]).unwrap();
        assert!(a3_check(&generic).holds);
        assert!(a3_check(&generic.dual().unwrap()).holds);
    }

    #[test]
    fn a1a2_and_good_examples() {
        let k = Field::with_symbols(1, 1);
        let a = Scalar::var(&k, 0);
        let pt = TorusPoint::origin(Side::Dual);
        let b = ElementaryBlock::pushforward_rank1(1, vec![a.clone()], Q::zero()).unwrap();
        let d = FilteredBundleData::new(k.clone(), vec![GlobalBlock::new(pt.clone(), b, 0).unwrap()]).unwrap();
        let r = a1a2_check(&d).unwrap();
        assert!(r.holds);
        assert!(r.notes.iter().any(|n| n.contains("slope 1")));
        assert!(good_check(&d).unwrap().holds);
        let steep = ElementaryBlock::pushforward_rank1(1, vec![Scalar::one(&k), a.clone()], Q::zero()).unwrap();
        let d = FilteredBundleData::new(k.clone(), vec![GlobalBlock::new(pt, steep, 0).unwrap()]).unwrap();
        assert!(!a1a2_check(&d).unwrap().holds);
    }

    #[test]
    fn dual_block_involution() {
        let k = Field::with_symbols(1, 1);
        let a = Scalar::var(&k, 0);
        let b = ElementaryBlock::pushforward_rank1(3, vec![Scalar::from_int(&k, 2), a.clone()], q(-1, 3)).unwrap();
        assert_eq!(dual_block(&dual_block(&b).unwrap()).unwrap(), b);
        let t = ElementaryBlock::tame(a, jordan_matrix(&[2, 1], &k), vec![q(-1, 2), q(-1, 2), q(-1, 5)]).unwrap();
        let dd = dual_block(&dual_block(&t).unwrap()).unwrap();
        assert_eq!(dd, t);
    }
}
