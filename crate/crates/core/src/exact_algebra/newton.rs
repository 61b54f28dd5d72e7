//! Newton polygons of characteristic polynomials with Laurent-series coefficients.

use num_rational::BigRational;
use num_traits::{Signed, Zero};

use super::series::TruncatedLaurent;
use crate::error::{Error, Result};

/// Pole-order slopes of Σ c_i T^i with multiplicities.
///
/// A hull segment of slope σ corresponds to roots of valuation −σ. Roots that
/// are holomorphic (σ ≤ 0) or exactly zero are reported together as slope 0,
/// which is the logarithmic case.
pub fn newton_polygon(charpoly: &[TruncatedLaurent]) -> Result<Vec<(BigRational, usize)>> {
    let d = charpoly.len().checked_sub(1).ok_or_else(|| Error::Contract("empty polynomial".into()))?;
    if charpoly[d].valuation().is_none() {
        return Err(Error::Contract("leading coefficient must be known and nonzero".into()));
    }
    let mut known: Vec<(i64, i64)> = Vec::new();
    let mut uncertain: Vec<(i64, i64)> = Vec::new();
    for (i, c) in charpoly.iter().enumerate() {
        match (c.valuation(), c.precision()) {
            (Some(v), _) => known.push((i as i64, v)),
            (None, Some(p)) => uncertain.push((i as i64, p)),
            (None, None) => {}
        }
    }
    let first = known[0].0;
    if let Some(&(i, _)) = uncertain.iter().find(|(i, _)| *i < first) {
        return Err(Error::PrecisionExhausted(format!(
            "coefficient of T^{i} is zero to working precision but not provably zero"
        )));
    }
    let hull = lower_hull(&known);
    for &(i, p) in &uncertain {
        if below_hull(&hull, i, p) {
            return Err(Error::PrecisionExhausted(format!(
                "coefficient of T^{i} is zero to working precision but not provably zero"
            )));
        }
    }
    let mut out: Vec<(BigRational, usize)> = Vec::new();
    if first > 0 {
        out.push((BigRational::zero(), first as usize));
    }
    for w in hull.windows(2) {
        let (x0, y0) = w[0];
        let (x1, y1) = w[1];
        let mut s = BigRational::new((y1 - y0).into(), (x1 - x0).into());
        if s.is_negative() {
            s = BigRational::zero();
        }
        let m = (x1 - x0) as usize;
        match out.last_mut() {
            Some((ls, lm)) if *ls == s => *lm += m,
            _ => out.push((s, m)),
        }
    }
    Ok(out)
}

fn cross(o: (i64, i64), a: (i64, i64), b: (i64, i64)) -> i128 {
    (a.0 - o.0) as i128 * (b.1 - o.1) as i128 - (a.1 - o.1) as i128 * (b.0 - o.0) as i128
}

fn lower_hull(pts: &[(i64, i64)]) -> Vec<(i64, i64)> {
    let mut h: Vec<(i64, i64)> = Vec::new();
    for &p in pts {
        while h.len() >= 2 && cross(h[h.len() - 2], h[h.len() - 1], p) <= 0 {
            h.pop();
        }
        h.push(p);
    }
    h
}

/// True when the point (x, y) lies strictly below the hull.
fn below_hull(hull: &[(i64, i64)], x: i64, y: i64) -> bool {
    for w in hull.windows(2) {
        let (x0, y0) = w[0];
        let (x1, y1) = w[1];
        if x0 <= x && x <= x1 {
            // y < y0 + (y1-y0)(x-x0)/(x1-x0)
            let lhs = (y - y0) as i128 * (x1 - x0) as i128;
            return lhs < (y1 - y0) as i128 * (x - x0) as i128;
        }
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact_algebra::{Field, Scalar};

    fn r(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn spec_examples() {
        let k = Field::with_symbols(1, 1);
        let a = Scalar::var(&k, 0);
        let one = TruncatedLaurent::one(&k);
        // T − α z^{-1}
        let p1 = vec![TruncatedLaurent::monomial(a.neg(), -1), one.clone()];
        assert_eq!(newton_polygon(&p1).unwrap(), vec![(r(1, 1), 1)]);
        // T² − α² z^{-1}: hull of (0,−1), (2,0)
        let p2 = vec![TruncatedLaurent::monomial(a.mul(&a).neg(), -1), TruncatedLaurent::zero(&k), one.clone()];
        assert_eq!(newton_polygon(&p2).unwrap(), vec![(r(1, 2), 2)]);
        // T²
        let p3 = vec![TruncatedLaurent::zero(&k), TruncatedLaurent::zero(&k), one];
        assert_eq!(newton_polygon(&p3).unwrap(), vec![(r(0, 1), 2)]);
    }

    #[test]
    fn mixed_slopes_and_uncertainty() {
        let k = Field::gaussian();
        // (T − z^{-1})·T = T² − z^{-1}T
        let p = vec![
            TruncatedLaurent::zero(&k),
            TruncatedLaurent::from_ints(&k, -1, &[-1], None),
            TruncatedLaurent::one(&k),
        ];
        assert_eq!(newton_polygon(&p).unwrap(), vec![(r(0, 1), 1), (r(1, 1), 1)]);
        let q = vec![
            TruncatedLaurent::zero_to_precision(&k, 4),
            TruncatedLaurent::from_ints(&k, -1, &[-1], None),
            TruncatedLaurent::one(&k),
        ];
        assert!(newton_polygon(&q).is_err());
    }
}
