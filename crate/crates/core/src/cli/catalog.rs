//! Built-in example families and the randomized suites used by the oracle and
//! acceptance runs.

use num_integer::Integer;
use num_traits::{One, Zero};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use super::schema::{Annotation, ConfigDocument, Datum, RationalJson};
use crate::elliptic_side::{line_bundle_datum, GlobalBlock, Side, TorusPoint};
use crate::error::{Error, Result};
use crate::exact_algebra::linalg::jordan_matrix;
use crate::exact_algebra::{FieldRef, Scalar};
use crate::filtered_disc::{q, Q};
use crate::higgs_local::{ElementaryBlock, IrregularPart};
use crate::nahm_global::AdmissibleHiggsData;

/// Names and one-line descriptions of the example families.
pub const CATALOG: &[(&str, &str)] = &[
    ("tame-rank1", "rank-one tame block (1,0,α) with weight −1/3 at a torsion point"),
    ("pushforward", "φ_{p*}L(𝔞) with 𝔞 = α·u^{−m}; set p with --p and m with --order"),
    ("trivial", "rank-one block with θ = 0 and weight 0, fails A0"),
    ("line-bundle", "rank-one filtered bundle with zero residue at infinity, fails A3"),
    ("mixed", "multi-point sum of tame, nilpotent and irregular blocks"),
];

fn alpha(field: &FieldRef) -> Scalar {
    if field.nvars() > 0 {
        Scalar::var(field, 0)
    } else {
        Scalar::one(field)
    }
}

fn torsion_point() -> TorusPoint {
    TorusPoint::new(Side::Dual, q(1, 3), Q::zero())
}

fn slope_annotation(note: String, blocks: &[GlobalBlock]) -> Annotation {
    let max = blocks.iter().map(|b| b.block.slope()).max().unwrap_or_else(Q::zero);
    Annotation { note, slope_criterion: Some(max <= Q::one()), max_slope: Some(RationalJson::emit(&max)) }
}

/// Rank-one block φ_{p*}L(α·u^{−m}) with zero residue.
pub fn pushforward_block(field: &FieldRef, p: u32, m: u32, weight: Q) -> Result<ElementaryBlock> {
    if p == 0 || m == 0 || p.gcd(&m) != 1 {
        return Err(Error::Input(format!("pushforward needs p, m ≥ 1 coprime, got ({p},{m})")));
    }
    let mut coeffs = vec![Scalar::zero(field); m as usize];
    coeffs[m as usize - 1] = alpha(field);
    ElementaryBlock::pushforward_rank1(p, coeffs, weight)
}

/// The example document `name`; `p` and `order` parametrize `pushforward`.
pub fn example(name: &str, field: &FieldRef, p: u32, order: u32) -> Result<ConfigDocument> {
    let pt = torsion_point();
    let (datum, note, blocks) = match name {
        "tame-rank1" => {
            let b = vec![GlobalBlock::new(pt, ElementaryBlock::tame_rank1(alpha(field), q(-1, 3)), 0)?];
            (Datum::Higgs(AdmissibleHiggsData::new(field.clone(), b.clone())?), "rank-one tame".to_string(), b)
        }
        "pushforward" => {
            let b = vec![GlobalBlock::new(pt, pushforward_block(field, p, order, Q::zero())?, 0)?];
            let note = if order <= p {
                format!("slope {order}/{p} ≤ 1")
            } else {
                format!("slope {order}/{p} > 1, not instanton-admissible")
            };
            (Datum::Higgs(AdmissibleHiggsData::new(field.clone(), b.clone())?), note, b)
        }
        "trivial" => {
            let b = vec![GlobalBlock::new(pt, ElementaryBlock::tame_rank1(Scalar::zero(field), Q::zero()), 0)?];
            let note = "degenerate: θ = 0 has a flat section at w = 0, fails A0".to_string();
            (Datum::Higgs(AdmissibleHiggsData::new(field.clone(), b.clone())?), note, b)
        }
        "line-bundle" => {
            let d = line_bundle_datum(field, pt)?;
            let b = d.blocks.clone();
            (Datum::Bundle(d), "rank-one bundle, fails A3 at one twist".to_string(), b)
        }
        "mixed" => {
            let h = mixed(field)?;
            let b = h.blocks.clone();
            (Datum::Higgs(h), "multi-point mixed suite".to_string(), b)
        }
        _ => return Err(Error::Input(format!("unknown example {name:?}"))),
    };
    let mut doc = ConfigDocument::emit(&datum);
    doc.annotation = Some(slope_annotation(note, &blocks));
    Ok(doc)
}

fn mixed(field: &FieldRef) -> Result<AdmissibleHiggsData> {
    let a = alpha(field);
    let p0 = torsion_point();
    let p1 = TorusPoint::new(Side::Dual, Q::zero(), q(1, 2));
    let blocks = vec![
        GlobalBlock::new(p0.clone(), ElementaryBlock::tame_rank1(a.clone(), q(-1, 3)), 0)?,
        GlobalBlock::new(p1.clone(), pushforward_block(field, 2, 1, q(-1, 2))?, 1)?,
        GlobalBlock::new(
            p0,
            ElementaryBlock::tame(a.add(&Scalar::one(field)), jordan_matrix(&[2], field), vec![q(-1, 4), q(-1, 4)])?,
            -1,
        )?,
        GlobalBlock::new(p1, pushforward_block(field, 3, 2, Q::zero())?, 0)?,
    ];
    AdmissibleHiggsData::new(field.clone(), blocks)
}

/// Rank-one elementary blocks with p + m ≤ 6 and symbolic coefficients, the
/// exceptional type (1,0,0) excluded. Needs two field symbols.
pub fn elementary_suite(field: &FieldRef) -> Result<Vec<ElementaryBlock>> {
    if field.nvars() < 2 {
        return Err(Error::Contract("the elementary suite needs two symbols".into()));
    }
    let x1 = Scalar::var(field, 0);
    let x2 = Scalar::var(field, 1);
    let mut out = vec![ElementaryBlock::tame_rank1(x1.clone(), q(-1, 3))];
    for p in 1..=5u32 {
        for m in 1..=6 - p {
            if p.gcd(&m) != 1 {
                continue;
            }
            let mut coeffs: Vec<Scalar> = (1..m).map(|k| Scalar::from_int(field, k as i64)).collect();
            coeffs.push(x1.clone());
            let irr = IrregularPart::from_coefficients(p, m, coeffs)?;
            let w = q(-1, (p + m) as i64);
            out.push(ElementaryBlock::irregular(irr, x2.clone(), vec![vec![Scalar::zero(field)]], vec![w])?);
        }
    }
    Ok(out)
}

fn random_weight(rng: &mut StdRng) -> Q {
    let d = rng.gen_range(1..=6i64);
    q(-rng.gen_range(0..d), d)
}

fn random_rational(rng: &mut StdRng, nonzero: bool) -> Q {
    loop {
        let r = q(rng.gen_range(-4..=4), rng.gen_range(1..=3));
        if !nonzero || !r.is_zero() {
            return r;
        }
    }
}

fn random_block(rng: &mut StdRng, field: &FieldRef) -> Result<ElementaryBlock> {
    let x1 = Scalar::var(field, 0);
    let x2 = Scalar::var(field, 1);
    let shift = |rng: &mut StdRng, s: &Scalar| s.add(&Scalar::from_rational(field, &random_rational(rng, false)));
    Ok(match rng.gen_range(0..5) {
        0 => ElementaryBlock::tame_rank1(shift(rng, &x1), random_weight(rng)),
        1 => {
            let s = rng.gen_range(2..=3);
            // θ preserves the lattice when weights increase along the Jordan chain
            let mut w: Vec<Q> = (0..s).map(|_| random_weight(rng)).collect();
            w.sort();
            ElementaryBlock::tame(shift(rng, &x2), jordan_matrix(&[s], field), w)?
        }
        2 => {
            let s = rng.gen_range(2..=3);
            let w = random_weight(rng);
            ElementaryBlock::tame(Scalar::zero(field), jordan_matrix(&[s], field), vec![w; s])?
        }
        3 => {
            let p = rng.gen_range(1..=4u32);
            let m = loop {
                let m = rng.gen_range(1..=p);
                if p.gcd(&m) == 1 {
                    break m;
                }
            };
            let mut coeffs: Vec<Scalar> =
                (1..m).map(|_| Scalar::from_rational(field, &random_rational(rng, false))).collect();
            coeffs.push(if rng.gen_bool(0.5) {
                x1.clone()
            } else {
                Scalar::from_rational(field, &random_rational(rng, true))
            });
            let alpha = if rng.gen_bool(0.5) { Scalar::zero(field) } else { x2.clone() };
            let irr = IrregularPart::from_coefficients(p, m, coeffs)?;
            ElementaryBlock::irregular(irr, alpha, vec![vec![Scalar::zero(field)]], vec![random_weight(rng)])?
        }
        _ => {
            let m = rng.gen_range(1..=2u32);
            let mut coeffs: Vec<Scalar> =
                (1..m).map(|_| Scalar::from_rational(field, &random_rational(rng, false))).collect();
            coeffs.push(x1.clone());
            let irr = IrregularPart::from_coefficients(1, m, coeffs)?;
            let w = random_weight(rng);
            ElementaryBlock::irregular(irr, shift(rng, &x2), jordan_matrix(&[2], field), vec![w.clone(), w])?
        }
    })
}

/// Composed multi-point Higgs data with mixed blocks, reproducible from `seed`.
/// Needs two field symbols.
pub fn global_suite(field: &FieldRef, count: usize, seed: u64) -> Result<Vec<AdmissibleHiggsData>> {
    if field.nvars() < 2 {
        return Err(Error::Contract("the global suite needs two symbols".into()));
    }
    let pool = [
        TorusPoint::origin(Side::Dual),
        TorusPoint::new(Side::Dual, q(1, 3), q(1, 2)),
        TorusPoint::new(Side::Dual, q(1, 4), Q::zero()).with_symbol(&field.names()[0], Q::one()),
    ];
    let mut rng = StdRng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        let n = rng.gen_range(2..=4);
        let mut blocks = Vec::with_capacity(n);
        for _ in 0..n {
            let pt = pool[rng.gen_range(0..pool.len())].clone();
            blocks.push(GlobalBlock::new(pt, random_block(&mut rng, field)?, rng.gen_range(-2..=2))?);
        }
        out.push(AdmissibleHiggsData::new(field.clone(), blocks)?);
    }
    Ok(out)
}
