//! JSON document schema. Rationals are {"num", "den"} records, scalars are
//! rationals, scaled symbols or explicit fractions of polynomials; no floats.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::elliptic_side::{FilteredBundleData, GlobalBlock, Side, TorusPoint, TAU_SYMBOL};
use crate::error::{Error, Result};
use crate::exact_algebra::{Field, FieldRef, LaurentMatrix, Scalar, ScalarMatrix, TruncatedLaurent};
use crate::filtered_disc::{FilteredLattice, Q};
use crate::higgs_local::{ElementaryBlock, IrregularPart};
use crate::nahm_global::AdmissibleHiggsData;

/// Integer that is a JSON number when it fits in i64 and a decimal string otherwise.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum IntJson {
    Small(i64),
    Big(String),
}

impl IntJson {
    fn from_big(n: &BigInt) -> Self {
        n.to_i64().map_or_else(|| IntJson::Big(n.to_string()), IntJson::Small)
    }

    fn to_big(&self) -> Result<BigInt> {
        match self {
            IntJson::Small(n) => Ok(BigInt::from(*n)),
            IntJson::Big(s) => s.parse().map_err(|_| Error::Input(format!("not an integer: {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RationalJson {
    pub num: IntJson,
    pub den: IntJson,
}

impl RationalJson {
    pub fn emit(q: &Q) -> Self {
        RationalJson { num: IntJson::from_big(q.numer()), den: IntJson::from_big(q.denom()) }
    }

    pub fn parse(&self) -> Result<Q> {
        let d = self.den.to_big()?;
        if d.is_zero() {
            return Err(Error::Input("zero denominator".into()));
        }
        Ok(Q::new(self.num.to_big()?, d))
    }
}

/// c·ζ^0 + c'·ζ^1 + … times the monomial Π x_i^{e_i}.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermJson {
    pub coeff: Vec<RationalJson>,
    #[serde(default)]
    pub exps: Vec<u32>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ScalarJson {
    Rational(RationalJson),
    Symbol {
        symbol: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        scale: Option<RationalJson>,
    },
    Fraction {
        numer: Vec<TermJson>,
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        denom: Vec<TermJson>,
    },
}

fn terms_of(p: &crate::exact_algebra::poly::MPoly) -> Vec<TermJson> {
    p.terms
        .iter()
        .map(|(e, c)| TermJson { coeff: c.iter().map(RationalJson::emit).collect(), exps: e.clone() })
        .collect()
}

fn scalar_of_terms(field: &FieldRef, terms: &[TermJson]) -> Result<Scalar> {
    let mut acc = Scalar::zero(field);
    for t in terms {
        if t.exps.len() > field.nvars() {
            return Err(Error::Input(format!(
                "monomial has {} exponents, field has {} symbols",
                t.exps.len(),
                field.nvars()
            )));
        }
        let mut c = Scalar::zero(field);
        for (j, r) in t.coeff.iter().enumerate() {
            c = c.add(&Scalar::zeta_pow(field, j as i64).scale_rational(&r.parse()?));
        }
        for (i, &e) in t.exps.iter().enumerate() {
            c = c.mul(&Scalar::var(field, i).pow(e as i64)?);
        }
        acc = acc.add(&c);
    }
    Ok(acc)
}

impl ScalarJson {
    pub fn emit(s: &Scalar) -> Self {
        if let Some(q) = s.to_rational() {
            return ScalarJson::Rational(RationalJson::emit(&q));
        }
        let denom =
            if s.denom().is_constant() && s.denom() == &crate::exact_algebra::poly::MPoly::one(s.field().nvars()) {
                Vec::new()
            } else {
                terms_of(s.denom())
            };
        ScalarJson::Fraction { numer: terms_of(s.numer()), denom }
    }

    pub fn parse(&self, field: &FieldRef) -> Result<Scalar> {
        match self {
            ScalarJson::Rational(r) => Ok(Scalar::from_rational(field, &r.parse()?)),
            ScalarJson::Symbol { symbol, scale } => {
                let s =
                    Scalar::symbol(field, symbol).map_err(|_| Error::Input(format!("undeclared symbol {symbol:?}")))?;
                Ok(match scale {
                    Some(r) => s.scale_rational(&r.parse()?),
                    None => s,
                })
            }
            ScalarJson::Fraction { numer, denom } => {
                let n = scalar_of_terms(field, numer)?;
                if denom.is_empty() {
                    return Ok(n);
                }
                n.div(&scalar_of_terms(field, denom)?).map_err(|_| Error::Input("zero denominator".into()))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldJson {
    /// Cyclotomic order M; ζ in coefficient arrays is a primitive lcm(M, 4)-th root of unity.
    pub order: u32,
    #[serde(default)]
    pub symbols: Vec<String>,
}

impl FieldJson {
    pub fn emit(f: &FieldRef) -> Self {
        FieldJson { order: f.declared_order(), symbols: f.names().to_vec() }
    }

    pub fn parse(&self) -> Result<FieldRef> {
        if self.order == 0 {
            return Err(Error::Input("field order must be positive".into()));
        }
        let mut seen = std::collections::BTreeSet::new();
        for s in &self.symbols {
            if s.is_empty() || s == TAU_SYMBOL || !seen.insert(s) {
                return Err(Error::Input(format!("invalid or repeated symbol {s:?}")));
            }
        }
        Ok(Field::new(self.order, self.symbols.clone()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeriesTermJson {
    pub exp: i64,
    pub coeff: ScalarJson,
}

/// Laurent series as its nonzero terms, known modulo z^precision when set.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeriesJson {
    #[serde(default)]
    pub terms: Vec<SeriesTermJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub precision: Option<i64>,
}

impl SeriesJson {
    pub fn emit(s: &TruncatedLaurent) -> Self {
        let terms = s.terms().map(|(exp, c)| SeriesTermJson { exp, coeff: ScalarJson::emit(c) }).collect();
        SeriesJson { terms, precision: s.precision() }
    }

    pub fn parse(&self, field: &FieldRef) -> Result<TruncatedLaurent> {
        let Some(lo) = self.terms.iter().map(|t| t.exp).min() else {
            return Ok(match self.precision {
                Some(n) => TruncatedLaurent::zero_to_precision(field, n),
                None => TruncatedLaurent::zero(field),
            });
        };
        let hi = self.terms.iter().map(|t| t.exp).max().expect("nonempty");
        if hi - lo > 1 << 16 {
            return Err(Error::Input(format!("series spans exponents {lo}..{hi}")));
        }
        let mut coeffs = vec![Scalar::zero(field); (hi - lo + 1) as usize];
        for t in &self.terms {
            let slot = &mut coeffs[(t.exp - lo) as usize];
            *slot = slot.add(&t.coeff.parse(field)?);
        }
        Ok(TruncatedLaurent::new(field, lo, coeffs, self.precision))
    }
}

/// A filtered lattice: level, weights in (level − 1, level] and frame matrix.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatticeJson {
    pub rank: usize,
    pub level: RationalJson,
    pub weights: Vec<RationalJson>,
    /// Row-major frame entries.
    pub frame: Vec<Vec<SeriesJson>>,
}

impl LatticeJson {
    pub fn emit(l: &FilteredLattice) -> Self {
        let f = l.frame();
        LatticeJson {
            rank: l.rank(),
            level: RationalJson::emit(l.level()),
            weights: l.weights().iter().map(RationalJson::emit).collect(),
            frame: (0..f.rows()).map(|i| (0..f.cols()).map(|j| SeriesJson::emit(f.get(i, j))).collect()).collect(),
        }
    }

    pub fn parse(&self, field: &FieldRef) -> Result<FilteredLattice> {
        if self.weights.len() != self.rank
            || self.frame.len() != self.rank
            || self.frame.iter().any(|r| r.len() != self.rank)
        {
            return Err(Error::Input(format!("lattice record of rank {} has mismatched weights or frame", self.rank)));
        }
        let weights = self.weights.iter().map(RationalJson::parse).collect::<Result<Vec<_>>>()?;
        let rows = self
            .frame
            .iter()
            .map(|r| r.iter().map(|s| s.parse(field)).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        FilteredLattice::new(self.level.parse()?, weights, LaurentMatrix::from_rows(field, rows)?)
            .map_err(|e| Error::Input(format!("invalid lattice: {e}")))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PointJson {
    pub q1: RationalJson,
    pub q2: RationalJson,
    /// Coefficients of position symbols.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub symbolic: BTreeMap<String, RationalJson>,
}

impl PointJson {
    pub fn emit(p: &TorusPoint) -> Self {
        PointJson {
            q1: RationalJson::emit(&p.q1),
            q2: RationalJson::emit(&p.q2),
            symbolic: p.symbolic.iter().map(|(k, v)| (k.clone(), RationalJson::emit(v))).collect(),
        }
    }

    pub fn parse(&self, field: &FieldRef) -> Result<TorusPoint> {
        let mut p = TorusPoint::new(Side::Dual, self.q1.parse()?, self.q2.parse()?);
        for (k, v) in &self.symbolic {
            if field.symbol_index(k).is_none() {
                return Err(Error::Input(format!("undeclared position symbol {k:?}")));
            }
            p = p.with_symbol(k, v.parse()?);
        }
        Ok(p)
    }
}

/// Orbit invariants a_m^p and r_k, for irregular parts without explicit coefficients.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InvariantsJson {
    pub leading_power: ScalarJson,
    #[serde(default)]
    pub lower: Vec<ScalarJson>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BlockJson {
    pub p: u32,
    pub m: u32,
    /// Irregular coefficients a_1, …, a_m.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a_coeffs: Option<Vec<ScalarJson>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub invariants: Option<InvariantsJson>,
    pub alpha: ScalarJson,
    /// Strictly upper triangular; defaults to zero of the size of `weights`.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub nilpotent: Vec<Vec<ScalarJson>>,
    pub weights: Vec<RationalJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub injection: Option<Box<BlockJson>>,
}

fn is_zero_matrix(m: &ScalarMatrix) -> bool {
    m.iter().flatten().all(Scalar::is_zero)
}

impl BlockJson {
    pub fn emit(b: &ElementaryBlock) -> Self {
        let (a_coeffs, invariants) = match &b.irregular {
            None => (None, None),
            Some(irr) => match irr.coefficients() {
                Ok(c) => (Some(c.iter().map(ScalarJson::emit).collect()), None),
                Err(_) => (
                    None,
                    Some(InvariantsJson {
                        leading_power: ScalarJson::emit(irr.leading_power()),
                        lower: irr.lower_invariants().iter().map(ScalarJson::emit).collect(),
                    }),
                ),
            },
        };
        BlockJson {
            p: b.p,
            m: b.m,
            a_coeffs,
            invariants,
            alpha: ScalarJson::emit(&b.alpha),
            nilpotent: if is_zero_matrix(&b.nilpotent) {
                Vec::new()
            } else {
                b.nilpotent.iter().map(|r| r.iter().map(ScalarJson::emit).collect()).collect()
            },
            weights: b.weights.iter().map(RationalJson::emit).collect(),
            injection: b.injection.as_ref().map(|i| Box::new(BlockJson::emit(i))),
        }
    }

    pub fn parse(&self, field: &FieldRef) -> Result<ElementaryBlock> {
        let s = self.weights.len();
        if s == 0 {
            return Err(Error::Input("a block needs at least one weight".into()));
        }
        let irregular = match (self.m, &self.a_coeffs, &self.invariants) {
            (0, None, None) => None,
            (0, _, _) => return Err(Error::Input("m = 0 blocks carry no irregular part".into())),
            (_, Some(c), None) => Some(IrregularPart::from_coefficients(
                self.p,
                self.m,
                c.iter().map(|a| a.parse(field)).collect::<Result<_>>()?,
            )?),
            (_, None, Some(inv)) => Some(IrregularPart::from_invariants(
                self.p,
                self.m,
                inv.leading_power.parse(field)?,
                inv.lower.iter().map(|a| a.parse(field)).collect::<Result<_>>()?,
            )?),
            _ => return Err(Error::Input("give exactly one of a_coeffs and invariants".into())),
        };
        let nilpotent: ScalarMatrix = if self.nilpotent.is_empty() {
            vec![vec![Scalar::zero(field); s]; s]
        } else {
            if self.nilpotent.len() != s || self.nilpotent.iter().any(|r| r.len() != s) {
                return Err(Error::Input(format!("nilpotent must be {s}×{s}")));
            }
            self.nilpotent
                .iter()
                .map(|r| r.iter().map(|a| a.parse(field)).collect::<Result<_>>())
                .collect::<Result<_>>()?
        };
        let b = ElementaryBlock {
            p: self.p,
            m: self.m,
            irregular,
            alpha: self.alpha.parse(field)?,
            nilpotent,
            weights: self.weights.iter().map(RationalJson::parse).collect::<Result<_>>()?,
            injection: match &self.injection {
                Some(i) => Some(Box::new(i.parse(field)?)),
                None => None,
            },
        };
        b.validate().map_err(|e| Error::Input(e.to_string()))?;
        Ok(b)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GlobalBlockJson {
    pub point: PointJson,
    #[serde(default)]
    pub base_degree: i64,
    pub block: BlockJson,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Higgs,
    Bundle,
}

/// Notes attached by the example generators.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Annotation {
    pub note: String,
    /// Largest slope m/p among the blocks.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_slope: Option<RationalJson>,
    /// Whether every slope is at most 1.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub slope_criterion: Option<bool>,
}

/// Top-level input and output document.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigDocument {
    pub field: FieldJson,
    pub kind: Kind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub precision: Option<i64>,
    pub blocks: Vec<GlobalBlockJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub annotation: Option<Annotation>,
}

/// A parsed document payload.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Datum {
    Higgs(AdmissibleHiggsData),
    Bundle(FilteredBundleData),
}

impl Datum {
    pub fn field(&self) -> &FieldRef {
        match self {
            Datum::Higgs(h) => &h.field,
            Datum::Bundle(d) => &d.field,
        }
    }
}

fn emit_blocks(blocks: &[GlobalBlock]) -> Vec<GlobalBlockJson> {
    blocks
        .iter()
        .map(|b| GlobalBlockJson {
            point: PointJson::emit(&b.point),
            base_degree: b.base_degree,
            block: BlockJson::emit(&b.block),
        })
        .collect()
}

impl ConfigDocument {
    pub fn emit(d: &Datum) -> Self {
        let (kind, blocks) = match d {
            Datum::Higgs(h) => (Kind::Higgs, &h.blocks),
            Datum::Bundle(b) => (Kind::Bundle, &b.blocks),
        };
        ConfigDocument {
            field: FieldJson::emit(d.field()),
            kind,
            precision: None,
            blocks: emit_blocks(blocks),
            annotation: None,
        }
    }

    pub fn parse(&self) -> Result<Datum> {
        let field = self.field.parse()?;
        let blocks = self
            .blocks
            .iter()
            .map(|g| {
                GlobalBlock::new(g.point.parse(&field)?, g.block.parse(&field)?, g.base_degree)
                    .map_err(|e| Error::Input(e.to_string()))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(match self.kind {
            Kind::Higgs => {
                Datum::Higgs(AdmissibleHiggsData::new(field, blocks).map_err(|e| Error::Input(e.to_string()))?)
            }
            Kind::Bundle => {
                Datum::Bundle(FilteredBundleData::new(field, blocks).map_err(|e| Error::Input(e.to_string()))?)
            }
        })
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::Input(format!("malformed document: {e}")))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("documents serialize")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact_algebra::linalg::jordan_matrix;
    use crate::filtered_disc::q;

    #[test]
    fn scalar_roundtrip() {
        let k = Field::new(3, vec!["x1".into(), "x2".into()]);
        let x = Scalar::var(&k, 0);
        let y = Scalar::var(&k, 1);
        let z = Scalar::zeta_pow(&k, 1);
        let s = x.mul(&z).add(&Scalar::from_int(&k, 2)).div(&y.add(&Scalar::one(&k))).unwrap();
        for v in [s, x.clone(), Scalar::from_rational(&k, &q(-7, 3)), z] {
            let j = serde_json::to_string(&ScalarJson::emit(&v)).unwrap();
            let back: ScalarJson = serde_json::from_str(&j).unwrap();
            assert_eq!(back.parse(&k).unwrap(), v);
        }
        let sym: ScalarJson = serde_json::from_str(r#"{"symbol":"x2","scale":{"num":3,"den":2}}"#).unwrap();
        assert_eq!(sym.parse(&k).unwrap(), y.scale_rational(&q(3, 2)));
        let big: RationalJson = serde_json::from_str(r#"{"num":"123456789012345678901234567890","den":1}"#).unwrap();
        assert_eq!(RationalJson::emit(&big.parse().unwrap()), big);
    }

    #[test]
    fn lattice_roundtrip() {
        let k = Field::with_symbols(1, 1);
        let x = Scalar::var(&k, 0);
        let mut frame = LaurentMatrix::monomial_diagonal(&k, &[-1, 2]);
        frame.set(
            0,
            1,
            TruncatedLaurent::new(&k, -1, vec![x.clone(), Scalar::zero(&k), x.add(&Scalar::one(&k))], Some(4)),
        );
        let l = FilteredLattice::new(q(1, 2), vec![q(1, 2), q(-1, 3)], frame).unwrap();
        let j = serde_json::to_string(&LatticeJson::emit(&l)).unwrap();
        let back: LatticeJson = serde_json::from_str(&j).unwrap();
        assert_eq!(back.parse(&k).unwrap(), l);
        let mut bad = back.clone();
        bad.weights[0] = RationalJson::emit(&q(3, 2));
        assert!(matches!(bad.parse(&k), Err(Error::Input(_))));
        bad.rank = 3;
        assert!(matches!(bad.parse(&k), Err(Error::Input(_))));
    }

    #[test]
    fn document_roundtrip() {
        let k = Field::with_symbols(1, 1);
        let a = Scalar::var(&k, 0);
        let p = TorusPoint::new(Side::Dual, q(1, 3), q(2, 5)).with_symbol("x1", q(1, 1));
        let blocks = vec![
            GlobalBlock::new(p.clone(), ElementaryBlock::tame_rank1(a.clone(), q(-1, 3)), 2).unwrap(),
            GlobalBlock::new(
                p.clone(),
                ElementaryBlock::pushforward_rank1(3, vec![a.clone(), a.clone()], q(-1, 2)).unwrap(),
                1,
            )
            .unwrap(),
            GlobalBlock::new(
                p,
                ElementaryBlock::tame(Scalar::zero(&k), jordan_matrix(&[2], &k), vec![q(-1, 4), q(-1, 4)]).unwrap(),
                0,
            )
            .unwrap(),
        ];
        let d = Datum::Higgs(AdmissibleHiggsData::new(k, blocks).unwrap());
        let doc = ConfigDocument::emit(&d);
        let back = ConfigDocument::from_json(&doc.to_json()).unwrap();
        assert_eq!(back, doc);
        assert_eq!(back.parse().unwrap(), d);
    }

    #[test]
    fn malformed_documents() {
        assert!(matches!(ConfigDocument::from_json("{"), Err(Error::Input(_))));
        let doc = r#"{"field":{"order":1,"symbols":["x1"]},"kind":"higgs","blocks":[
            {"point":{"q1":{"num":0,"den":1},"q2":{"num":0,"den":1}},
             "block":{"p":1,"m":0,"alpha":{"symbol":"y"},"weights":[{"num":0,"den":1}]}}]}"#;
        assert!(matches!(ConfigDocument::from_json(doc).unwrap().parse(), Err(Error::Input(_))));
        let floats = r#"{"field":{"order":1},"kind":"higgs","blocks":[
            {"point":{"q1":0.5,"q2":{"num":0,"den":1}},
             "block":{"p":1,"m":0,"alpha":{"num":1,"den":1},"weights":[{"num":0,"den":1}]}}]}"#;
        assert!(ConfigDocument::from_json(floats).is_err());
    }
}
