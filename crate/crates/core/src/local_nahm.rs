//! Local algebraic Nahm transforms N^{0,∞} and N^{∞,0} on canonical blocks, and
//! the lattices C⁰ ⊂ C¹ of the local complex at a singular point.
//!
//! Lattices of C¹ are written in dz-units, so [C¹ : C⁰] is the local contribution
//! deg C¹ − deg C⁰ to the rank of the transform.

use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::exact_algebra::linalg::rank_exact;
use crate::exact_algebra::{smith_normal_form, LaurentMatrix, Scalar, TruncatedLaurent, DEFAULT_PRECISION};
use crate::filtered_disc::{floor_q, normalize_weight, q, weight_denominator_lcm, FilteredLattice, Q};
use crate::higgs_local::{recognize, CanonicalGerm, Coordinate, ElementaryBlock, HiggsGerm, IrregularPart, TypeLabel};

/// Offset of the C⁰ and C¹ levels around the residue level; the single place the
/// level convention is fixed.
pub fn level_offset() -> Q {
    q(1, 2)
}

/// Level of C⁰ for a block of slope m/p other than (1, 0, 0).
pub fn c0_level(p: u32, m: u32) -> Q {
    -level_offset() - q(m as i64, p as i64)
}

/// Level of C¹ for a block other than (1, 0, 0).
pub fn c1_level() -> Q {
    level_offset()
}

/// C(p, m) = ((p+m)/m)^{p+m}·(−m/p)^p, the factor on the leading orbit invariant a_m^p.
pub fn leading_multiplier(p: u32, m: u32) -> Q {
    let a = q((p + m) as i64, m as i64);
    let b = q(-(m as i64), p as i64);
    num_traits::pow(a, (p + m) as usize) * num_traits::pow(b, p as usize)
}

/// C⁰ and C¹ of one elementary block together with the operator used by the oracle.
#[derive(Debug, Clone)]
pub struct BlockComplex {
    pub label: TypeLabel,
    pub c0: FilteredLattice,
    /// Frame of C¹ in the reference trivialization.
    pub c1_frame: LaurentMatrix,
    /// Θ = u^m·θ pushed forward, in the C⁰ frame (dz/z units); it preserves C⁰.
    pub operator: LaurentMatrix,
}

/// C⁰ ⊂ C¹ for a whole germ, assembled blockwise.
#[derive(Debug, Clone)]
pub struct LocalComplexLattices {
    pub c0: FilteredLattice,
    pub c1: FilteredLattice,
    /// Each summand's source type and its (start, rank) range.
    pub labels: Vec<(TypeLabel, usize, usize)>,
    pub blocks: Vec<BlockComplex>,
}

/// Normalized weights into (−1, 0].
fn normalized(ws: &[Q]) -> Vec<Q> {
    ws.iter().map(|c| normalize_weight(c, &Q::zero()).0).collect()
}

/// [C¹ : C⁰] by weight bookkeeping.
pub fn local_index(b: &ElementaryBlock) -> usize {
    let s = b.multiplicity();
    if !b.is_exceptional() {
        return if b.m == 0 { s } else { s * (b.p + b.m) as usize };
    }
    // dim(V_{<0} + N·V)
    let field = b.field();
    let ws = normalized(&b.weights);
    let mut cols: Vec<Vec<Scalar>> = Vec::new();
    for (i, w) in ws.iter().enumerate() {
        if w.is_negative() {
            cols.push((0..s).map(|r| if r == i { Scalar::one(field) } else { Scalar::zero(field) }).collect());
        }
    }
    for j in 0..s {
        cols.push((0..s).map(|r| b.nilpotent[r][j].clone()).collect());
    }
    let m: Vec<Vec<Scalar>> = (0..s).map(|r| cols.iter().map(|c| c[r].clone()).collect()).collect();
    rank_exact(&m)
}

/// Column span of a matrix over K((z)) with full row rank, as a square frame.
fn column_span(m: &LaurentMatrix) -> Result<LaurentMatrix> {
    let shift = -m.entries().iter().filter_map(TruncatedLaurent::valuation).min().unwrap_or(0).min(0);
    let held = m.map(|e| e.shift(shift));
    let sf = smith_normal_form(&held, DEFAULT_PRECISION)?;
    let r = m.rows();
    let exps: Vec<i64> = sf.invariants[..r]
        .iter()
        .map(|d| d.ok_or_else(|| Error::Contract("lattice sum is degenerate".into())))
        .collect::<Result<_>>()?;
    let diag = LaurentMatrix::monomial_diagonal(m.field(), &exps);
    Ok(sf.left.inverse()?.mul(&diag)?.map(|e| e.shift(-shift)))
}

/// C⁰, C¹ and Θ for one block at a given coordinate.
pub fn block_complex(b: &ElementaryBlock, coordinate: Coordinate) -> Result<BlockComplex> {
    let label = b.type_label();
    let scaled = b.realize_scaled(coordinate, b.m as i64)?;
    if !b.is_exceptional() {
        let g0 = scaled.relevel(&c0_level(b.p, b.m));
        let c1 = g0.lattice().relevel(&c1_level());
        return Ok(BlockComplex {
            label,
            c0: g0.lattice().clone(),
            c1_frame: c1.frame().clone(),
            operator: g0.theta().clone(),
        });
    }
    let g0 = scaled.relevel(&Q::zero());
    let f0 = g0.lattice().frame().clone();
    let den = weight_denominator_lcm(g0.lattice());
    let below_one = g0.lattice().relevel(&(Q::one() - q(1, 2 * den))).frame().clone();
    // θ·P₀ in dz-units is z^{-1}·A·P₀
    let theta_cols = f0.mul(&g0.theta().map(|e| e.shift(-1)))?;
    let r = b.rank();
    let mut both = LaurentMatrix::zeros(b.field(), r, 2 * r);
    for i in 0..r {
        for j in 0..r {
            both.set(i, j, below_one.get(i, j).clone());
            both.set(i, r + j, theta_cols.get(i, j).clone());
        }
    }
    Ok(BlockComplex { label, c0: g0.lattice().clone(), c1_frame: column_span(&both)?, operator: g0.theta().clone() })
}

/// C⁰ and C¹ of a canonical germ.
pub fn build_local_complex(g: &CanonicalGerm) -> Result<LocalComplexLattices> {
    let field = match g.blocks.first() {
        Some(b) => b.field().clone(),
        None => return Err(Error::Contract("empty germ".into())),
    };
    let mut blocks = Vec::new();
    let mut labels = Vec::new();
    let mut c0_weights = Vec::new();
    let mut c0_frame = LaurentMatrix::zeros(&field, 0, 0);
    let mut c1_frame = LaurentMatrix::zeros(&field, 0, 0);
    let mut start = 0;
    for b in &g.blocks {
        let bc = block_complex(b, g.coordinate)?;
        labels.push((bc.label.clone(), start, b.rank()));
        start += b.rank();
        // C⁰ levels differ between blocks, so the sum keeps the frames and tags the weights at level 0
        c0_weights.extend(normalized(bc.c0.weights()));
        c0_frame = c0_frame.direct_sum(bc.c0.frame());
        c1_frame = c1_frame.direct_sum(&bc.c1_frame);
        blocks.push(bc);
    }
    let n = c1_frame.rows();
    Ok(LocalComplexLattices {
        c0: FilteredLattice::new(Q::zero(), c0_weights, c0_frame)?,
        c1: FilteredLattice::new(c1_level(), vec![c1_level(); n], c1_frame)?,
        labels,
        blocks,
    })
}

/// Transformed germ with the change of base degree that keeps the parabolic degree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LocalTransform {
    pub germ: CanonicalGerm,
    /// δ_out − δ_in, always an integer.
    pub degree_shift: i64,
}

fn ceil_q(x: &Q) -> i64 {
    -floor_q(&-x)
}

fn to_int(x: &Q) -> i64 {
    debug_assert!(x.is_integer());
    i64::try_from(x.to_integer()).expect("small integer")
}

fn forward_block(b: &ElementaryBlock) -> Result<ElementaryBlock> {
    let field = b.field().clone();
    if b.is_exceptional() {
        let k = local_index(b);
        if k == 0 {
            return Err(Error::ConditionFailed {
                condition: "A0".into(),
                detail: "exceptional block with [C1:C0] = 0 has cohomology at the trivial twist".into(),
            });
        }
        let d = b.delta();
        let x = &d - Q::from_integer(ceil_q(&d).into());
        let mut weights = vec![x];
        weights.extend(std::iter::repeat_n(Q::zero(), k - 1));
        let mut out = ElementaryBlock::tame(Scalar::zero(&field), vec![vec![Scalar::zero(&field); k]; k], weights)?;
        out.injection = Some(Box::new(b.clone()));
        return Ok(out);
    }
    if b.m == 0 {
        return ElementaryBlock::tame(b.alpha.neg(), b.nilpotent.clone(), b.weights.clone());
    }
    let irr = b.irregular.as_ref().expect("irregular block");
    let (p, m) = (b.p, b.m);
    let c = Scalar::from_rational(&field, &leading_multiplier(p, m));
    let out_irr =
        IrregularPart::from_invariants(p + m, m, irr.leading_power().mul(&c), irr.lower_invariants().to_vec())?;
    let half = q(m as i64, 2);
    ElementaryBlock::irregular(
        out_irr,
        b.alpha.neg(),
        b.nilpotent.clone(),
        b.weights.iter().map(|w| w + &half).collect(),
    )
}

fn backward_block(b: &ElementaryBlock) -> Result<ElementaryBlock> {
    let field = b.field().clone();
    if b.is_exceptional() {
        return match &b.injection {
            Some(src) => Ok((**src).clone()),
            None => Err(Error::Contract("exceptional block at infinity without injection datum".into())),
        };
    }
    if b.m == 0 {
        return ElementaryBlock::tame(b.alpha.neg(), b.nilpotent.clone(), b.weights.clone());
    }
    let (pp, m) = (b.p, b.m);
    if m >= pp {
        return Err(Error::Contract(format!("slope {m}/{pp} at infinity is not below 1")));
    }
    let p = pp - m;
    let irr = b.irregular.as_ref().expect("irregular block");
    let c = Scalar::from_rational(&field, &leading_multiplier(p, m));
    let src_irr = IrregularPart::from_invariants(p, m, irr.leading_power().div(&c)?, irr.lower_invariants().to_vec())?;
    let half = q(m as i64, 2);
    ElementaryBlock::irregular(
        src_irr,
        b.alpha.neg(),
        b.nilpotent.clone(),
        b.weights.iter().map(|w| w - &half).collect(),
    )
}

fn transform(
    g: &CanonicalGerm,
    to: Coordinate,
    f: fn(&ElementaryBlock) -> Result<ElementaryBlock>,
) -> Result<LocalTransform> {
    let mut blocks = Vec::with_capacity(g.blocks.len());
    let mut shift = Q::zero();
    for b in &g.blocks {
        let out = f(b)?;
        shift += out.delta() - b.delta();
        blocks.push(out);
    }
    Ok(LocalTransform { germ: CanonicalGerm::new(to, blocks)?, degree_shift: to_int(&shift) })
}

/// N^{0,∞}: a germ at a finite point to a germ at infinity with slopes below 1.
pub fn local_nahm_0_inf(g: &CanonicalGerm) -> Result<LocalTransform> {
    if g.coordinate != Coordinate::Finite {
        return Err(Error::Contract("N^{0,∞} takes a germ at a finite point".into()));
    }
    transform(g, Coordinate::Infinity, forward_block)
}

/// N^{∞,0}: a germ at infinity with slopes below 1 back to a finite point.
pub fn local_nahm_inf_0(g: &CanonicalGerm) -> Result<LocalTransform> {
    if g.coordinate != Coordinate::Infinity {
        return Err(Error::Contract("N^{∞,0} takes a germ at infinity".into()));
    }
    transform(g, Coordinate::Finite, backward_block)
}

/// N^{0,∞} on a matrix germ, through its canonical blocks.
pub fn local_nahm_0_inf_germ(g: &HiggsGerm) -> Result<LocalTransform> {
    local_nahm_0_inf(&CanonicalGerm::new(Coordinate::Finite, recognize(g)?)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact_algebra::linalg::jordan_matrix;
    use crate::exact_algebra::{Field, FieldRef};

    fn field() -> (FieldRef, Scalar) {
        let k = Field::with_symbols(1, 1);
        let a = Scalar::var(&k, 0);
        (k, a)
    }

    fn index_by_smith(bc: &BlockComplex) -> i64 {
        let rel = bc.c1_frame.inverse().unwrap().mul(bc.c0.frame()).unwrap();
        smith_normal_form(&rel, DEFAULT_PRECISION).unwrap().exponent_sum().unwrap()
    }

    #[test]
    fn complex_levels() {
        let (k, a) = field();
        let b21 = ElementaryBlock::pushforward_rank1(2, vec![a.clone()], q(-1, 2)).unwrap();
        let bc = block_complex(&b21, Coordinate::Finite).unwrap();
        assert_eq!(bc.c0.level(), &q(-1, 1));
        assert_eq!(index_by_smith(&bc), 3);
        let tame = ElementaryBlock::tame_rank1(a.clone(), q(-1, 3));
        let bc = block_complex(&tame, Coordinate::Finite).unwrap();
        assert_eq!(bc.c0.level(), &q(-1, 2));
        assert_eq!(index_by_smith(&bc), 1);
        let zero = ElementaryBlock::tame_rank1(Scalar::zero(&k), Q::zero());
        let bc = block_complex(&zero, Coordinate::Finite).unwrap();
        assert_eq!(bc.c0.level(), &Q::zero());
        assert_eq!(index_by_smith(&bc), 0);
        assert_eq!(local_index(&zero), 0);
    }

    #[test]
    fn bookkeeping_matches_lattice_index() {
        let (k, a) = field();
        let blocks = vec![
            ElementaryBlock::pushforward_rank1(1, vec![a.clone()], Q::zero()).unwrap(),
            ElementaryBlock::pushforward_rank1(3, vec![a.clone()], q(-2, 7)).unwrap(),
            ElementaryBlock::pushforward_rank1(2, vec![Scalar::one(&k), a.clone(), a.clone()], q(-1, 4)).unwrap(),
            ElementaryBlock::tame(Scalar::zero(&k), jordan_matrix(&[2], &k), vec![Q::zero(), Q::zero()]).unwrap(),
            ElementaryBlock::tame(Scalar::zero(&k), jordan_matrix(&[2, 1], &k), vec![q(-1, 2), q(-1, 2), Q::zero()])
                .unwrap(),
            ElementaryBlock::tame(a.clone(), jordan_matrix(&[2], &k), vec![q(-1, 3), q(-1, 3)]).unwrap(),
        ];
        for b in blocks {
            let bc = block_complex(&b, Coordinate::Finite).unwrap();
            assert_eq!(index_by_smith(&bc), local_index(&b) as i64, "{b:?}");
        }
    }

    #[test]
    fn leading_multiplier_matches_legendre_dual() {
        // numerically: b = (p+m)/m·κ^{p/(p+m)} with κ = −m·a/p, compared as b^{p+m}
        for (p, m, a) in [(1u32, 1u32, -0.75f64), (2, 1, -1.5), (1, 2, -0.3), (3, 2, -2.0)] {
            let kappa = -(m as f64) * a / p as f64;
            let b = (p + m) as f64 / m as f64 * kappa.powf(p as f64 / (p + m) as f64);
            let lhs = b.powi((p + m) as i32);
            let c = leading_multiplier(p, m);
            let cf = c.numer().to_string().parse::<f64>().unwrap() / c.denom().to_string().parse::<f64>().unwrap();
            let rhs = cf * a.powi(p as i32);
            assert!((lhs - rhs).abs() < 1e-9 * lhs.abs().max(1.0), "({p},{m}): {lhs} vs {rhs}");
        }
        assert_eq!(leading_multiplier(1, 1), q(-4, 1));
    }

    #[test]
    fn forward_examples() {
        let (k, a) = field();
        let tame = ElementaryBlock::tame_rank1(a.clone(), q(-1, 3));
        let b21 = ElementaryBlock::pushforward_rank1(2, vec![a.clone()], q(-1, 2)).unwrap();
        let b11 = ElementaryBlock::pushforward_rank1(1, vec![a.clone()], Q::zero()).unwrap();
        for (b, rank, slope) in [(tame, 1, q(0, 1)), (b21, 3, q(1, 3)), (b11, 2, q(1, 2))] {
            let g = CanonicalGerm::new(Coordinate::Finite, vec![b.clone()]).unwrap();
            let out = local_nahm_0_inf(&g).unwrap();
            assert_eq!(out.germ.rank(), rank);
            assert_eq!(out.germ.blocks[0].slope(), slope);
            assert_eq!(out.degree_shift, 0);
            assert!(out.germ.admissible(&Q::one(), true));
            let back = local_nahm_inf_0(&out.germ).unwrap();
            assert_eq!(back.germ.blocks, vec![b]);
        }
        // (1,1) with a = −1: output invariant b² = 4, explicit b = ±2
        let b = ElementaryBlock::pushforward_rank1(1, vec![Scalar::from_int(&k, -1)], Q::zero()).unwrap();
        let out = forward_block(&b).unwrap();
        let irr = out.irregular.unwrap();
        assert_eq!(irr.leading_power(), &Scalar::from_int(&k, 4));
        assert!(irr.coefficients().is_ok());
        let g = out_germ_realized(&b);
        assert!(crate::higgs_local::admissibility_check(&g, &Q::one(), true).unwrap());
    }

    fn out_germ_realized(b: &ElementaryBlock) -> HiggsGerm {
        forward_block(b).unwrap().realize(Coordinate::Infinity).unwrap()
    }

    #[test]
    fn exceptional_blocks() {
        let (k, _) = field();
        let j2 = ElementaryBlock::tame(Scalar::zero(&k), jordan_matrix(&[2], &k), vec![Q::zero(), Q::zero()]).unwrap();
        let g = CanonicalGerm::new(Coordinate::Finite, vec![j2.clone()]).unwrap();
        let out = local_nahm_0_inf(&g).unwrap();
        assert_eq!(out.germ.rank(), 1);
        assert!(out.germ.blocks[0].injection.is_some());
        let back = local_nahm_inf_0(&out.germ).unwrap();
        assert_eq!(back.germ.blocks, vec![j2]);
        assert_eq!(back.degree_shift, -out.degree_shift);
        let bare =
            CanonicalGerm::new(Coordinate::Infinity, vec![ElementaryBlock::tame_rank1(Scalar::zero(&k), Q::zero())])
                .unwrap();
        assert!(matches!(local_nahm_inf_0(&bare), Err(Error::Contract(_))));
        let zero =
            CanonicalGerm::new(Coordinate::Finite, vec![ElementaryBlock::tame_rank1(Scalar::zero(&k), Q::zero())])
                .unwrap();
        assert!(matches!(local_nahm_0_inf(&zero), Err(Error::ConditionFailed { .. })));
        // weights with non-integral δ: degree shift compensates
        let w = ElementaryBlock::tame(Scalar::zero(&k), jordan_matrix(&[2], &k), vec![q(-1, 3), q(-1, 3)]).unwrap();
        let out = local_nahm_0_inf(&CanonicalGerm::new(Coordinate::Finite, vec![w.clone()]).unwrap()).unwrap();
        assert_eq!(out.germ.rank(), 2);
        assert_eq!(out.germ.blocks[0].weights, vec![q(-2, 3), Q::zero()]);
        assert_eq!(out.degree_shift, 0);
    }

    #[test]
    fn local_complex_assembly() {
        let (_, a) = field();
        let g = CanonicalGerm::new(
            Coordinate::Finite,
            vec![
                ElementaryBlock::tame_rank1(a.clone(), Q::zero()),
                ElementaryBlock::pushforward_rank1(2, vec![a.clone()], q(-1, 2)).unwrap(),
            ],
        )
        .unwrap();
        let lc = build_local_complex(&g).unwrap();
        assert_eq!(lc.c0.rank(), 3);
        assert_eq!(lc.labels.iter().map(|l| (l.1, l.2)).collect::<Vec<_>>(), vec![(0, 1), (1, 2)]);
        let rel = lc.c1.frame().inverse().unwrap().mul(lc.c0.frame()).unwrap();
        assert_eq!(smith_normal_form(&rel, DEFAULT_PRECISION).unwrap().exponent_sum(), Some(4));
    }
}
