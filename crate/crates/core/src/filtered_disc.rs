//! Filtered bundles on a disc germ: grading, dual, tensor, ramified pull-back,
//! push-forward, descent and parabolic degree contributions.
//!
//! A [`FilteredLattice`] presents the lattice P_a E by a compatible frame: column
//! i of `frame` is a generator of parabolic weight `weights[i]`, expressed in a
//! reference trivialization of the meromorphic bundle. Multiplying a generator by
//! z lowers its weight by one.

use std::collections::BTreeMap;

use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::exact_algebra::{FieldRef, LaurentMatrix, TruncatedLaurent};

/// Exact rational numbers used for weights, levels and degrees.
pub type Q = BigRational;

/// Builds n/d.
pub fn q(n: i64, d: i64) -> Q {
    Q::new(n.into(), d.into())
}

/// Integer part ⌊x⌋.
pub fn floor_q(x: &Q) -> i64 {
    i64::try_from(x.floor().to_integer()).expect("weight out of range")
}

/// Characters of the μ_p action on frame vectors: vector i spans the isotypic
/// piece where t acts by t^{chars[i]}.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GaloisAction {
    pub p: u32,
    pub chars: Vec<u32>,
}

/// The lattice P_a E of a filtered bundle germ, with weights in (a − 1, a].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FilteredLattice {
    level: Q,
    weights: Vec<Q>,
    frame: LaurentMatrix,
    galois: Option<GaloisAction>,
}

/// Jump data of a lattice.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Grading {
    /// Par(P_a E) in increasing order with dim Gr_b.
    pub jumps: Vec<(Q, usize)>,
    /// dim F_b of the parabolic filtration of the fiber, at each jump b.
    pub filtration: Vec<(Q, usize)>,
}

/// Moves `c` by an integer into (level − 1, level]; returns the new weight and the shift.
pub fn normalize_weight(c: &Q, level: &Q) -> (Q, i64) {
    // smallest k with c + k > level - 1, i.e. k = ⌊level - c⌋
    let k = floor_q(&(level - c));
    (c + Q::from_integer(k.into()), k)
}

impl FilteredLattice {
    /// Validates weights and frame.
    pub fn new(level: Q, weights: Vec<Q>, frame: LaurentMatrix) -> Result<Self> {
        let r = weights.len();
        if frame.rows() != r || frame.cols() != r {
            return Err(Error::Incompatible(format!("frame is {}x{} for rank {r}", frame.rows(), frame.cols())));
        }
        let lo = &level - Q::one();
        if let Some(c) = weights.iter().find(|c| **c <= lo || **c > level) {
            return Err(Error::Contract(format!("weight {c} outside ({lo}, {level}]")));
        }
        if r > 0 {
            let det = frame.det()?;
            if det.is_exact_zero() {
                return Err(Error::Contract("frame is not invertible".into()));
            }
        }
        Ok(FilteredLattice { level, weights, frame, galois: None })
    }

    /// Lattice with the reference frame, weights normalized into (level − 1, level].
    pub fn standard(field: &FieldRef, level: Q, weights: Vec<Q>) -> Result<Self> {
        let mut exps = Vec::with_capacity(weights.len());
        let mut ws = Vec::with_capacity(weights.len());
        for c in &weights {
            let (w, k) = normalize_weight(c, &level);
            ws.push(w);
            exps.push(-k);
        }
        let frame = LaurentMatrix::monomial_diagonal(field, &exps);
        Self::new(level, ws, frame)
    }

    /// Attaches μ_p characters to the frame vectors.
    pub fn with_galois(mut self, action: GaloisAction) -> Result<Self> {
        if action.chars.len() != self.rank() || action.p == 0 || action.chars.iter().any(|&c| c >= action.p) {
            return Err(Error::Contract("inconsistent equivariance data".into()));
        }
        self.galois = Some(action);
        Ok(self)
    }

    pub fn rank(&self) -> usize {
        self.weights.len()
    }

    pub fn level(&self) -> &Q {
        &self.level
    }

    pub fn weights(&self) -> &[Q] {
        &self.weights
    }

    pub fn frame(&self) -> &LaurentMatrix {
        &self.frame
    }

    pub fn field(&self) -> &FieldRef {
        self.frame.field()
    }

    pub fn galois(&self) -> Option<&GaloisAction> {
        self.galois.as_ref()
    }

    /// Weights sorted decreasingly, for multiset comparisons.
    pub fn sorted_weights(&self) -> Vec<Q> {
        let mut w = self.weights.clone();
        w.sort_by(|a, b| b.cmp(a));
        w
    }

    /// Frame vectors reordered by decreasing weight, ties by original index.
    pub fn canonical(&self) -> Self {
        let mut idx: Vec<usize> = (0..self.rank()).collect();
        idx.sort_by(|&i, &j| self.weights[j].cmp(&self.weights[i]).then(i.cmp(&j)));
        let rows: Vec<usize> = (0..self.rank()).collect();
        FilteredLattice {
            level: self.level.clone(),
            weights: idx.iter().map(|&i| self.weights[i].clone()).collect(),
            frame: self.frame.submatrix(&rows, &idx),
            galois: self
                .galois
                .as_ref()
                .map(|g| GaloisAction { p: g.p, chars: idx.iter().map(|&i| g.chars[i]).collect() }),
        }
    }

    /// Presents the same filtered bundle at another level b.
    pub fn relevel(&self, b: &Q) -> Self {
        let mut ws = Vec::with_capacity(self.rank());
        let mut frame = self.frame.clone();
        for (i, c) in self.weights.iter().enumerate() {
            let (w, k) = normalize_weight(c, b);
            ws.push(w);
            if k != 0 {
                let zk = TruncatedLaurent::z_pow(self.field(), -k);
                for row in 0..self.rank() {
                    let v = frame.get(row, i).mul(&zk);
                    frame.set(row, i, v);
                }
            }
        }
        FilteredLattice { level: b.clone(), weights: ws, frame, galois: self.galois.clone() }
    }

    /// Direct sum of two lattices at the same level.
    pub fn direct_sum(&self, o: &Self) -> Result<Self> {
        if self.level != o.level {
            return Err(Error::Incompatible("direct sum of lattices at different levels".into()));
        }
        let mut weights = self.weights.clone();
        weights.extend(o.weights.iter().cloned());
        let galois = match (&self.galois, &o.galois) {
            (Some(a), Some(b)) if a.p == b.p => {
                let mut chars = a.chars.clone();
                chars.extend(&b.chars);
                Some(GaloisAction { p: a.p, chars })
            }
            (None, None) => None,
            _ => return Err(Error::Incompatible("mixed equivariance data".into())),
        };
        Ok(FilteredLattice { level: self.level.clone(), weights, frame: self.frame.direct_sum(&o.frame), galois })
    }
}

/// Jump set, graded dimensions and the parabolic filtration of the fiber.
pub fn grading(l: &FilteredLattice) -> Grading {
    let mut jumps: BTreeMap<Q, usize> = BTreeMap::new();
    for c in &l.weights {
        *jumps.entry(c.clone()).or_default() += 1;
    }
    let jumps: Vec<(Q, usize)> = jumps.into_iter().collect();
    let mut acc = 0;
    let filtration = jumps
        .iter()
        .map(|(b, d)| {
            acc += d;
            (b.clone(), acc)
        })
        .collect();
    Grading { jumps, filtration }
}

/// Dual lattice P_{−a}(E^∨) with weights −c_i renormalized.
pub fn dual_filtered(l: &FilteredLattice) -> Result<FilteredLattice> {
    let level = -l.level.clone();
    let dual_frame = if l.rank() == 0 { l.frame.clone() } else { l.frame.inverse()?.transpose() };
    let raw = FilteredLattice {
        level: level.clone(),
        weights: l.weights.iter().map(|c| -c.clone()).collect(),
        frame: dual_frame,
        galois: l
            .galois
            .as_ref()
            .map(|g| GaloisAction { p: g.p, chars: g.chars.iter().map(|&c| (g.p - c) % g.p).collect() }),
    };
    // Weights −c lie in [−a, −a + 1); relevel moves them into (−a − 1, −a].
    Ok(raw.relevel(&level))
}

/// Kronecker product of frames; weights c_i + d_j at level a + b.
pub fn tensor_filtered(l1: &FilteredLattice, l2: &FilteredLattice) -> Result<FilteredLattice> {
    let (r1, r2) = (l1.rank(), l2.rank());
    let field = l1.field().clone();
    let mut frame = LaurentMatrix::zeros(&field, r1 * r2, r1 * r2);
    for a in 0..r1 {
        for b in 0..r2 {
            for c in 0..r1 {
                for d in 0..r2 {
                    let x = l1.frame.get(a, c);
                    let y = l2.frame.get(b, d);
                    if !x.is_exact_zero() && !y.is_exact_zero() {
                        frame.set(a * r2 + b, c * r2 + d, x.mul(y));
                    }
                }
            }
        }
    }
    let mut weights = Vec::with_capacity(r1 * r2);
    for c in &l1.weights {
        for d in &l2.weights {
            weights.push(c + d);
        }
    }
    let level = &l1.level + &l2.level;
    let raw = FilteredLattice { level: level.clone(), weights, frame, galois: None };
    Ok(raw.relevel(&level))
}

/// Exponents n_i = max{n ∈ Z | n + p·c_i ≤ p·a} of the compatible frame after pull-back.
pub fn pullback_shifts(weights: &[Q], level: &Q, p: u32) -> Vec<i64> {
    let pq = Q::from_integer(p.into());
    weights.iter().map(|c| floor_q(&(&pq * (level - c)))).collect()
}

/// Pull-back along φ_p: z = u^p, frame w_i = u^{−n_i} φ*v_i of weight n_i + p·c_i.
pub fn pullback_covering(l: &FilteredLattice, p: u32) -> Result<FilteredLattice> {
    if p == 0 {
        return Err(Error::Contract("covering degree must be positive".into()));
    }
    if p == 1 {
        return Ok(l.clone());
    }
    let pq = Q::from_integer(p.into());
    let shifts = pullback_shifts(&l.weights, &l.level, p);
    let mut frame = l.frame.substitute_power(p as i64);
    for (i, &n) in shifts.iter().enumerate() {
        let un = TruncatedLaurent::z_pow(l.field(), -n);
        for row in 0..l.rank() {
            let v = frame.get(row, i).mul(&un);
            frame.set(row, i, v);
        }
    }
    let weights = l.weights.iter().zip(&shifts).map(|(c, &n)| Q::from_integer(n.into()) + &pq * c).collect();
    let chars = shifts.iter().map(|&n| (-n).rem_euclid(p as i64) as u32).collect();
    Ok(FilteredLattice { level: &pq * &l.level, weights, frame, galois: Some(GaloisAction { p, chars }) })
}

/// Splits a series in u into its components u^j·g_j(u^p), returning g_j as series in z.
fn split_by_residue(s: &TruncatedLaurent, p: i64) -> Vec<TruncatedLaurent> {
    let field = s.field().clone();
    (0..p)
        .map(|j| {
            let mut terms: Vec<(i64, crate::exact_algebra::Scalar)> = Vec::new();
            for (e, c) in s.terms() {
                if (e - j).rem_euclid(p) == 0 {
                    terms.push(((e - j) / p, c.clone()));
                }
            }
            // g_j is known wherever j + p·k < N.
            let prec = s.precision().map(|n| Integer::div_ceil(&(n - j), &p));
            let Some(start) = terms.first().map(|t| t.0) else {
                return match prec {
                    Some(n) => TruncatedLaurent::zero_to_precision(&field, n),
                    None => TruncatedLaurent::zero(&field),
                };
            };
            let end = terms.last().map(|t| t.0).unwrap_or(start);
            let mut coeffs = vec![crate::exact_algebra::Scalar::zero(&field); (end - start + 1) as usize];
            for (k, c) in terms {
                coeffs[(k - start) as usize] = c;
            }
            TruncatedLaurent::new(&field, start, coeffs, prec)
        })
        .collect()
}

/// Push-forward along φ_p: rank r·p, frame u^j·v'_i of weight (c_i − j)/p.
///
/// The reference basis of φ_*E' is e'_k ⊗ u^j with k major, j minor; frame
/// vectors are ordered the same way.
pub fn pushforward_covering(l: &FilteredLattice, p: u32) -> Result<FilteredLattice> {
    if p == 0 {
        return Err(Error::Contract("covering degree must be positive".into()));
    }
    if p == 1 {
        return Ok(l.clone());
    }
    let pi = p as i64;
    let r = l.rank();
    let field = l.field().clone();
    let mut frame = LaurentMatrix::zeros(&field, r * p as usize, r * p as usize);
    let pq = Q::from_integer(p.into());
    let mut weights = Vec::with_capacity(r * p as usize);
    let mut chars = Vec::with_capacity(r * p as usize);
    for i in 0..r {
        for j in 0..pi {
            let col = i * p as usize + j as usize;
            for k in 0..r {
                let entry = l.frame.get(k, i).shift(j);
                for (jj, g) in split_by_residue(&entry, pi).into_iter().enumerate() {
                    frame.set(k * p as usize + jj, col, g);
                }
            }
            weights.push((&l.weights[i] - Q::from_integer(j.into())) / &pq);
            if let Some(g) = &l.galois {
                chars.push(((g.chars[i] as i64 + j).rem_euclid(pi)) as u32);
            }
        }
    }
    let galois = match &l.galois {
        Some(g) if g.p == p => Some(GaloisAction { p, chars }),
        Some(_) => return Err(Error::Contract("equivariance data for a different covering degree".into())),
        None => None,
    };
    Ok(FilteredLattice { level: &l.level / &pq, weights, frame, galois })
}

/// Galois-invariant part of a push-forward of an equivariant lattice.
pub fn descent(l: &FilteredLattice, p: u32) -> Result<FilteredLattice> {
    if p == 1 {
        let mut out = l.clone();
        out.galois = None;
        return Ok(out);
    }
    let g = l.galois.as_ref().ok_or_else(|| Error::Contract("descent needs equivariance data".into()))?;
    let pu = p as usize;
    if g.p != p || !l.rank().is_multiple_of(pu) {
        return Err(Error::Contract("inconsistent equivariance data".into()));
    }
    let invariant: Vec<usize> = (0..l.rank()).filter(|&i| g.chars[i] == 0).collect();
    let r = l.rank() / pu;
    if invariant.len() != r {
        return Err(Error::Contract(format!(
            "inconsistent equivariance data: {} invariant vectors for rank {r}",
            invariant.len()
        )));
    }
    let rows: Vec<usize> = (0..r).map(|k| k * pu).collect();
    let frame = l.frame.submatrix(&rows, &invariant);
    for (ci, &col) in invariant.iter().enumerate() {
        for k in 0..r {
            for jj in 1..pu {
                if !l.frame.get(k * pu + jj, col).is_zero_to_precision() {
                    return Err(Error::Contract(format!(
                        "invariant frame vector {ci} has a nontrivial isotypic component"
                    )));
                }
            }
        }
    }
    let weights = invariant.iter().map(|&i| l.weights[i].clone()).collect();
    FilteredLattice::new(l.level.clone(), weights, frame)
}

/// δ = Σ_b b·dim Gr_b, after presenting the lattice at level `a`.
pub fn degree_contribution(l: &FilteredLattice, a: &Q) -> Q {
    let lv = if l.level() == a { l.clone() } else { l.relevel(a) };
    lv.weights.iter().fold(Q::zero(), |acc, c| acc + c)
}

/// δ computed from the grading, jump by jump.
pub fn degree_from_grading(g: &Grading) -> Q {
    g.jumps.iter().fold(Q::zero(), |acc, (b, d)| acc + b * Q::from_integer((*d as i64).into()))
}

/// Level-independent local parabolic degree −ord(det frame) − δ.
pub fn local_parabolic_degree(l: &FilteredLattice) -> Result<Q> {
    if l.rank() == 0 {
        return Ok(Q::zero());
    }
    let ord = l
        .frame
        .det()?
        .valuation()
        .ok_or_else(|| Error::PrecisionExhausted("frame determinant vanishes to working precision".into()))?;
    Ok(Q::from_integer((-ord).into()) - degree_contribution(l, &l.level))
}

/// Denominator of a rational, for diagnostics and precision planning.
pub fn denominator(x: &Q) -> i64 {
    i64::try_from(x.denom().clone()).unwrap_or(i64::MAX)
}

/// Least common multiple of weight denominators.
pub fn weight_denominator_lcm(l: &FilteredLattice) -> i64 {
    l.weights.iter().fold(1i64, |acc, c| acc.lcm(&denominator(c)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact_algebra::Field;

    fn lat(weights: &[(i64, i64)]) -> FilteredLattice {
        let k = Field::gaussian();
        FilteredLattice::standard(&k, Q::zero(), weights.iter().map(|&(n, d)| q(n, d)).collect()).unwrap()
    }

    #[test]
    fn grading_examples() {
        let g = grading(&lat(&[(-1, 4), (-3, 4)]));
        assert_eq!(g.jumps, vec![(q(-3, 4), 1), (q(-1, 4), 1)]);
        let g = grading(&lat(&[(0, 1), (0, 1), (-1, 2)]));
        assert_eq!(g.filtration, vec![(q(-1, 2), 1), (q(0, 1), 3)]);
    }

    #[test]
    fn dual_examples() {
        let k = Field::gaussian();
        let l = FilteredLattice::standard(&k, q(1, 3), vec![q(1, 3)]).unwrap();
        assert_eq!(dual_filtered(&l).unwrap().weights(), &[q(-1, 3)]);
        assert_eq!(dual_filtered(&lat(&[(0, 1)])).unwrap().weights(), &[q(0, 1)]);
        let d = dual_filtered(&lat(&[(-1, 4), (-3, 4)])).unwrap();
        assert_eq!(d.weights(), &[q(-3, 4), q(-1, 4)]);
        assert_eq!(dual_filtered(&d).unwrap(), lat(&[(-1, 4), (-3, 4)]));
    }

    #[test]
    fn tensor_examples() {
        let k = Field::gaussian();
        let a = FilteredLattice::standard(&k, q(1, 3), vec![q(1, 3)]).unwrap();
        let b = lat(&[(-1, 3)]);
        assert_eq!(tensor_filtered(&a, &b).unwrap().weights(), &[q(0, 1)]);
        let t = tensor_filtered(&lat(&[(-1, 4), (-3, 4)]), &lat(&[(0, 1)])).unwrap();
        assert_eq!(t.weights(), &[q(-1, 4), q(-3, 4)]);
        let t = tensor_filtered(&lat(&[(-1, 4)]), &lat(&[(-1, 4)])).unwrap();
        assert_eq!(t.weights(), &[q(-1, 2)]);
    }

    #[test]
    fn covering_examples() {
        let up = pullback_covering(&lat(&[(-1, 4)]), 2).unwrap();
        assert_eq!(up.weights(), &[q(-1, 2)]);
        let up = pullback_covering(&lat(&[(-2, 3)]), 3).unwrap();
        assert_eq!(pullback_shifts(&[q(-2, 3)], &Q::zero(), 3), vec![2]);
        assert_eq!(up.weights(), &[q(0, 1)]);
        let k = Field::gaussian();
        let u = FilteredLattice::standard(&k, Q::zero(), vec![q(-1, 2)]).unwrap();
        assert_eq!(pushforward_covering(&u, 2).unwrap().weights(), &[q(-1, 4), q(-3, 4)]);
        let u = FilteredLattice::standard(&k, Q::zero(), vec![q(0, 1)]).unwrap();
        assert_eq!(pushforward_covering(&u, 3).unwrap().weights(), &[q(0, 1), q(-1, 3), q(-2, 3)]);
        assert_eq!(pushforward_covering(&u, 1).unwrap(), u);
        assert_eq!(pullback_covering(&u, 1).unwrap(), u);
    }

    #[test]
    fn descent_roundtrip_and_errors() {
        let l = lat(&[(-1, 4)]);
        let pp = pushforward_covering(&pullback_covering(&l, 2).unwrap(), 2).unwrap();
        assert_eq!(descent(&pp, 2).unwrap(), l);
        assert_eq!(descent(&l, 1).unwrap(), l);
        let plain = pushforward_covering(&lat(&[(-1, 2)]), 2).unwrap();
        assert!(descent(&plain, 2).is_err());
    }

    #[test]
    fn local_parabolic_degree_examples() {
        let l = lat(&[(-1, 4), (-3, 4)]);
        assert_eq!(local_parabolic_degree(&l).unwrap(), q(1, 1));
        assert_eq!(local_parabolic_degree(&l.relevel(&q(5, 2))).unwrap(), q(1, 1));
        assert_eq!(local_parabolic_degree(&dual_filtered(&l).unwrap()).unwrap(), q(-1, 1));
    }

    #[test]
    fn degree_examples() {
        assert_eq!(degree_contribution(&lat(&[(-1, 4), (-3, 4)]), &Q::zero()), q(-1, 1));
        assert_eq!(degree_contribution(&lat(&[(0, 1)]), &Q::zero()), Q::zero());
        // Push-forward shifts δ by −(p−1)/2 per upstairs weight.
        let k = Field::gaussian();
        for p in 1..=4u32 {
            let up = FilteredLattice::standard(&k, Q::zero(), vec![q(-1, 3), q(0, 1)]).unwrap();
            let down = pushforward_covering(&up, p).unwrap();
            let lhs = degree_contribution(&down, &Q::zero());
            let rhs = degree_contribution(&up, &Q::zero()) - q(2 * (p as i64 - 1), 2);
            assert_eq!(lhs, rhs, "p = {p}");
        }
    }
}
