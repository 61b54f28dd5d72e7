//! Higgs fields on filtered germs: slope and type structure, goodness, canonical
//! elementary blocks and their realization as matrix germs.
//!
//! A [`HiggsGerm`] stores θ = A·dz/z by the matrix A in the frame of its lattice.
//! An [`ElementaryBlock`] is the push-forward along z = u^p of a rank-s germ
//! (d𝔞 + (α + N)·du/u) with 𝔞 = Σ_{k=1}^{m} a_k u^{−k}.

use std::collections::BTreeMap;

use num_integer::Integer;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::exact_algebra::linalg::{
    self, charpoly, charpoly_series, jordan_matrix, nilpotent_jordan_type, nullspace, poly_eval_matrix, shift_diagonal,
    solve, upoly,
};
use crate::exact_algebra::{
    newton_polygon, FieldRef, LaurentMatrix, Scalar, ScalarMatrix, TruncatedLaurent, DEFAULT_PRECISION,
};
use crate::filtered_disc::{
    denominator, normalize_weight, pullback_shifts, pushforward_covering, q, FilteredLattice, Q,
};

/// Local coordinate of a germ: a finite point (ζ_P) or the point at infinity (τ).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Coordinate {
    Finite,
    Infinity,
}

/// Residue matrices witnessing a slope (p, m), one per graded piece upstairs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SlopeCertificate {
    pub p: u32,
    pub m: u32,
    pub residues: Vec<ScalarMatrix>,
}

/// A Higgs field θ = A·dz/z on a filtered lattice germ.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HiggsGerm {
    lattice: FilteredLattice,
    theta: LaurentMatrix,
    coordinate: Coordinate,
    certificate: Option<SlopeCertificate>,
    precision: i64,
    endomorphism_form: bool,
}

impl HiggsGerm {
    pub fn new(lattice: FilteredLattice, theta: LaurentMatrix, coordinate: Coordinate) -> Result<Self> {
        let r = lattice.rank();
        if theta.rows() != r || theta.cols() != r {
            return Err(Error::Incompatible(format!("Higgs matrix is {}x{} for rank {r}", theta.rows(), theta.cols())));
        }
        Ok(HiggsGerm {
            lattice,
            theta,
            coordinate,
            certificate: None,
            precision: DEFAULT_PRECISION,
            endomorphism_form: false,
        })
    }

    /// Working precision for splittings and certification.
    pub fn with_precision(mut self, n: i64) -> Self {
        self.precision = n;
        self
    }

    pub fn lattice(&self) -> &FilteredLattice {
        &self.lattice
    }

    pub fn theta(&self) -> &LaurentMatrix {
        &self.theta
    }

    pub fn coordinate(&self) -> Coordinate {
        self.coordinate
    }

    pub fn certificate(&self) -> Option<&SlopeCertificate> {
        self.certificate.as_ref()
    }

    pub fn precision(&self) -> i64 {
        self.precision
    }

    /// True for germs built by [`endo_germ_wrap`], whose slopes satisfy p ≥ m.
    pub fn is_endomorphism_form(&self) -> bool {
        self.endomorphism_form
    }

    pub fn rank(&self) -> usize {
        self.lattice.rank()
    }

    pub fn field(&self) -> &FieldRef {
        self.lattice.field()
    }

    /// Attaches a slope certificate after re-verifying it.
    pub fn certify(mut self, p: u32, m: u32) -> Result<Self> {
        let v = slope_check(&self, p, m)?;
        if !v.holds {
            return Err(Error::NotAdmissible(v.reason.unwrap_or_default()));
        }
        self.certificate = v.certificate;
        Ok(self)
    }

    /// The same germ presented at level b.
    pub fn relevel(&self, b: &Q) -> Self {
        let ks: Vec<i64> = self.lattice.weights().iter().map(|c| normalize_weight(c, b).1).collect();
        let mut theta = self.theta.clone();
        for (r, kr) in ks.iter().enumerate() {
            for (c, kc) in ks.iter().enumerate() {
                if kr != kc {
                    theta.set(r, c, self.theta.get(r, c).shift(kr - kc));
                }
            }
        }
        HiggsGerm { lattice: self.lattice.relevel(b), theta, certificate: None, ..self.clone() }
    }

    /// Direct sum at a common level.
    pub fn direct_sum(&self, o: &Self) -> Result<Self> {
        let o = if o.lattice.level() == self.lattice.level() { o.clone() } else { o.relevel(self.lattice.level()) };
        Ok(HiggsGerm {
            lattice: self.lattice.direct_sum(&o.lattice)?,
            theta: self.theta.direct_sum(&o.theta),
            coordinate: self.coordinate,
            certificate: None,
            precision: self.precision.min(o.precision),
            endomorphism_form: self.endomorphism_form && o.endomorphism_form,
        })
    }

    /// The summand spanned by the frame vectors `idx`, assumed θ-invariant.
    fn summand(&self, idx: &[usize]) -> Result<Self> {
        let weights: Vec<Q> = idx.iter().map(|&i| self.lattice.weights()[i].clone()).collect();
        let all: Vec<usize> = (0..self.rank()).collect();
        let others: Vec<usize> = all.iter().copied().filter(|i| !idx.contains(i)).collect();
        let frame = self.lattice.frame();
        let frame_splits = idx.iter().all(|&i| others.iter().all(|&j| frame.get(i, j).is_exact_zero()))
            && others.iter().all(|&i| idx.iter().all(|&j| frame.get(i, j).is_exact_zero()));
        let sub_frame =
            if frame_splits { frame.submatrix(idx, idx) } else { LaurentMatrix::identity(self.field(), idx.len()) };
        let lattice = FilteredLattice::new(self.lattice.level().clone(), weights, sub_frame)?;
        Ok(HiggsGerm {
            lattice,
            theta: self.theta.submatrix(idx, idx),
            coordinate: self.coordinate,
            certificate: None,
            precision: self.precision,
            endomorphism_form: self.endomorphism_form,
        })
    }

    /// A germ on an equal-weight lattice with identity frame.
    fn equal_weight(&self, weight: &Q, theta: LaurentMatrix) -> Result<Self> {
        let n = theta.rows();
        let lattice = FilteredLattice::new(
            self.lattice.level().clone(),
            vec![weight.clone(); n],
            LaurentMatrix::identity(self.field(), n),
        )?;
        Ok(HiggsGerm {
            lattice,
            theta,
            coordinate: self.coordinate,
            certificate: None,
            precision: self.precision,
            endomorphism_form: self.endomorphism_form,
        })
    }
}

/// Precision needed to certify slope (p, m) on a lattice.
pub fn required_precision(p: u32, m: u32, lattice: &FilteredLattice) -> i64 {
    let den = lattice.weights().iter().map(denominator).max().unwrap_or(1);
    p as i64 * (m as i64 + 2) + den
}

fn check_coprime(p: u32, m: u32) -> Result<()> {
    if p == 0 || p.gcd(&m) != 1 {
        return Err(Error::Contract(format!("slope ({p},{m}) needs p ≥ 1 and gcd(p,m) = 1")));
    }
    Ok(())
}

/// u^m·θ^{⟨p⟩} in du/u units, in the compatible frame of the pulled-back lattice,
/// together with that frame's weights.
fn pulled_back_matrix(g: &HiggsGerm, p: u32, m: u32) -> (LaurentMatrix, Vec<Q>) {
    let l = &g.lattice;
    let shifts = pullback_shifts(l.weights(), l.level(), p);
    let pq = Q::from_integer(p.into());
    let weights: Vec<Q> = l.weights().iter().zip(&shifts).map(|(c, &n)| Q::from_integer(n.into()) + &pq * c).collect();
    let ps = Scalar::from_int(g.field(), p as i64);
    let r = g.rank();
    let mut b = LaurentMatrix::zeros(g.field(), r, r);
    for i in 0..r {
        for j in 0..r {
            let e = g.theta.get(i, j);
            if e.is_exact_zero() {
                continue;
            }
            b.set(i, j, e.substitute_power(p as i64).scale(&ps).shift(m as i64 + shifts[i] - shifts[j]));
        }
    }
    (b, weights)
}

/// Outcome of [`slope_check`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SlopeVerdict {
    pub holds: bool,
    pub certificate: Option<SlopeCertificate>,
    pub reason: Option<String>,
}

impl SlopeVerdict {
    fn fail(reason: String) -> Self {
        SlopeVerdict { holds: false, certificate: None, reason: Some(reason) }
    }
}

/// Decides whether z_p^m·θ^{⟨p⟩} preserves every lattice of the pulled-back
/// filtration and, for (p, m) ≠ (1, 0), has invertible residue on each graded piece.
pub fn slope_check(g: &HiggsGerm, p: u32, m: u32) -> Result<SlopeVerdict> {
    check_coprime(p, m)?;
    let need_prec = required_precision(p, m, &g.lattice);
    if g.precision < need_prec {
        return Err(Error::PrecisionExhausted(format!(
            "slope ({p},{m}) needs working precision {need_prec}, have {}",
            g.precision
        )));
    }
    let (b, w) = pulled_back_matrix(g, p, m);
    let r = g.rank();
    for i in 0..r {
        for j in 0..r {
            let e = b.get(i, j);
            let need = if w[i] > w[j] { 1 } else { 0 };
            match e.valuation() {
                Some(v) if v < need => {
                    return Ok(SlopeVerdict::fail(format!(
                        "entry ({i},{j}) of u^{m}θ^<{p}> has valuation {v} < {need}"
                    )))
                }
                Some(_) => {}
                None => {
                    if let Some(n) = e.precision() {
                        if n < need {
                            return Err(Error::PrecisionExhausted(format!("entry ({i},{j}) known only modulo u^{n}")));
                        }
                    }
                }
            }
        }
    }
    let res = b.coefficient(0)?;
    let mut groups: BTreeMap<Q, Vec<usize>> = BTreeMap::new();
    for (i, c) in w.iter().enumerate() {
        groups.entry(c.clone()).or_default().push(i);
    }
    let mut residues = Vec::new();
    for idx in groups.values() {
        let block: ScalarMatrix = idx.iter().map(|&i| idx.iter().map(|&j| res[i][j].clone()).collect()).collect();
        if (p, m) != (1, 0) && linalg::rank(&block, g.field()).0 < idx.len() {
            return Ok(SlopeVerdict::fail(format!(
                "residue of u^{m}θ^<{p}> is singular on a graded piece of dimension {}",
                idx.len()
            )));
        }
        residues.push(block);
    }
    Ok(SlopeVerdict { holds: true, certificate: Some(SlopeCertificate { p, m, residues }), reason: None })
}

/// Reduced (p, m) with slope m/p.
fn slope_pm(s: &Q) -> (u32, u32) {
    let p = u32::try_from(s.denom().clone()).expect("slope denominator");
    let m = u32::try_from(s.numer().clone()).expect("slope numerator");
    (p, m)
}

/// Newton slopes of det(T − A(z)) with multiplicities.
pub fn germ_slopes(g: &HiggsGerm) -> Result<Vec<(Q, usize)>> {
    if g.rank() == 0 {
        return Ok(Vec::new());
    }
    newton_polygon(&charpoly_series(&g.theta)?)
}

/// Connected components of the support graph of θ.
fn components(g: &HiggsGerm) -> Vec<Vec<usize>> {
    let r = g.rank();
    let mut parent: Vec<usize> = (0..r).collect();
    fn find(p: &mut [usize], x: usize) -> usize {
        let mut x = x;
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    for i in 0..r {
        for j in 0..r {
            if i != j && !g.theta.get(i, j).is_exact_zero() {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                parent[a] = b;
            }
        }
    }
    let mut comps: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for i in 0..r {
        let root = find(&mut parent, i);
        comps.entry(root).or_default().push(i);
    }
    let mut out: Vec<Vec<usize>> = comps.into_values().collect();
    out.sort();
    out
}

/// Eigenvalues of a constant matrix that can be certified in the session field,
/// with multiplicities, plus the unresolved cofactor of the characteristic polynomial.
pub fn certified_eigenvalues(a: &ScalarMatrix, field: &FieldRef) -> Result<(Vec<(Scalar, usize)>, Vec<Scalar>)> {
    let n = a.len();
    let mut chi = charpoly(a, field)?;
    let mut cands: Vec<Scalar> = (0..n).map(|i| a[i][i].clone()).collect();
    if n > 0 {
        cands.push(chi[n - 1].neg().div(&Scalar::from_int(field, n as i64))?);
    }
    cands.push(Scalar::zero(field));
    cands.extend(affine_root_candidates(&chi, field));
    cands.sort();
    cands.dedup();
    let mut found = Vec::new();
    for lam in cands {
        let lin = [lam.neg(), Scalar::one(field)];
        let mut e = 0;
        while chi.len() > 1 {
            let (qt, rm) = upoly::divrem(&chi, &lin);
            if !rm.is_empty() {
                break;
            }
            chi = qt;
            e += 1;
        }
        if e > 0 {
            found.push((lam, e));
        }
    }
    Ok((found, chi))
}

/// Candidate roots c + Σ l_i·x_i with rational c, l_i, interpolated from the
/// rational roots of χ specialized at a base point and its unit translates.
fn affine_root_candidates(chi: &[Scalar], field: &FieldRef) -> Vec<Scalar> {
    const MAX_COMBINATIONS: usize = 4096;
    let k = field.nvars();
    let roots_at = |pt: &[Q]| -> Option<Vec<Q>> {
        let specialized: Option<Vec<Q>> = chi.iter().map(|c| c.specialize_rational(pt)).collect();
        upoly::rational_roots(&specialized?)
    };
    for base in [0i64, 3, -7] {
        let b = vec![Q::from_integer(base.into()); k];
        let Some(r0) = roots_at(&b) else { continue };
        let mut per_symbol = Vec::with_capacity(k);
        for i in 0..k {
            let mut pt = b.clone();
            pt[i] += Q::one();
            match roots_at(&pt) {
                Some(r) if !r.is_empty() => per_symbol.push(r),
                _ => break,
            }
        }
        if per_symbol.len() < k {
            continue;
        }
        let count = per_symbol.iter().fold(r0.len(), |acc, r| acc.saturating_mul(r.len()));
        if count > MAX_COMBINATIONS {
            return Vec::new();
        }
        let mut out = Vec::with_capacity(count);
        for c0 in &r0 {
            let mut partial = vec![Scalar::from_rational(field, c0)];
            for (i, ri) in per_symbol.iter().enumerate() {
                let shifted = Scalar::var(field, i).sub(&Scalar::from_rational(field, &b[i]));
                partial = partial
                    .iter()
                    .flat_map(|acc| ri.iter().map(|r| acc.add(&shifted.scale_rational(&(r - c0)))).collect::<Vec<_>>())
                    .collect();
            }
            out.extend(partial);
        }
        return out;
    }
    Vec::new()
}

/// Solves X·S − S·Y = E for S.
fn sylvester(x: &ScalarMatrix, y: &ScalarMatrix, e: &ScalarMatrix, field: &FieldRef) -> Result<ScalarMatrix> {
    let (a, b) = (x.len(), y.len());
    let mut sys = vec![vec![Scalar::zero(field); a * b]; a * b];
    let mut rhs = Vec::with_capacity(a * b);
    for r in 0..a {
        for c in 0..b {
            let row = r * b + c;
            for t in 0..a {
                sys[row][t * b + c] = sys[row][t * b + c].add(&x[r][t]);
            }
            for t in 0..b {
                sys[row][r * b + t] = sys[row][r * b + t].sub(&y[t][c]);
            }
            rhs.push(e[r][c].clone());
        }
    }
    let v = solve(&sys, &rhs, field).ok_or_else(|| Error::NotAdmissible("block spectra are not disjoint".into()))?;
    Ok((0..a).map(|r| (0..b).map(|c| v[r * b + c].clone()).collect()).collect())
}

/// Conjugates a matrix over K[[z]] whose constant term is block diagonal with
/// pairwise disjoint block spectra into block-diagonal form modulo z^prec.
fn hensel_block_diagonalize(c: &LaurentMatrix, sizes: &[usize], prec: i64) -> Result<LaurentMatrix> {
    let field = c.field().clone();
    let n = c.rows();
    let mut offs = vec![0];
    for s in sizes {
        offs.push(offs.last().unwrap() + s);
    }
    let c0 = c.coefficient(0)?;
    let block = |m: &ScalarMatrix, i: usize, j: usize| -> ScalarMatrix {
        (offs[i]..offs[i + 1]).map(|r| (offs[j]..offs[j + 1]).map(|s| m[r][s].clone()).collect()).collect()
    };
    let diag: Vec<ScalarMatrix> = (0..sizes.len()).map(|i| block(&c0, i, i)).collect();
    let mut cur = c.truncate(prec);
    for k in 1..prec {
        let ck = cur.coefficient(k)?;
        let mut s = vec![vec![Scalar::zero(&field); n]; n];
        let mut any = false;
        for i in 0..sizes.len() {
            for j in 0..sizes.len() {
                if i == j {
                    continue;
                }
                let e = block(&ck, i, j);
                if e.iter().all(|row| row.iter().all(Scalar::is_zero)) {
                    continue;
                }
                let neg: ScalarMatrix = e.iter().map(|row| row.iter().map(Scalar::neg).collect()).collect();
                let sij = sylvester(&diag[i], &diag[j], &neg, &field)?;
                for (r, row) in sij.into_iter().enumerate() {
                    for (t, v) in row.into_iter().enumerate() {
                        s[offs[i] + r][offs[j] + t] = v;
                    }
                }
                any = true;
            }
        }
        if !any {
            continue;
        }
        let sm = LaurentMatrix::from_scalars(&field, &s)?.map(|e| e.shift(k));
        let id = LaurentMatrix::identity(&field, n);
        let pmat = id.add(&sm)?;
        let mut pinv = id.clone();
        let mut term = id;
        let neg_sm = sm.map(TruncatedLaurent::neg);
        for _ in 0..(prec / k + 1) {
            term = term.mul(&neg_sm)?;
            pinv = pinv.add(&term)?;
        }
        cur = pinv.truncate(prec).mul(&cur)?.mul(&pmat)?.truncate(prec);
    }
    Ok(cur)
}

/// Splits a germ on an equal-weight lattice along a coprime factorization of
/// the characteristic polynomial of the leading coefficient of z^{−v}θ.
fn split_by_factors(g: &HiggsGerm, v: i64, factors: &[Vec<Scalar>]) -> Result<Vec<HiggsGerm>> {
    let field = g.field().clone();
    let w = &g.lattice.weights()[0];
    if g.lattice.weights().iter().any(|c| c != w) {
        return Err(Error::Contract(
            "splitting a matrix germ with distinct weights is not supported; supply canonical blocks".into(),
        ));
    }
    let a = g.theta.map(|e| e.shift(-v));
    let a0 = a.coefficient(0)?;
    let mut cols: Vec<Vec<Scalar>> = Vec::new();
    let mut sizes = Vec::new();
    for f in factors {
        let ker = nullspace(&poly_eval_matrix(f, &a0, &field), &field);
        if ker.len() != f.len() - 1 {
            return Err(Error::NotAdmissible("generalized eigenspaces do not span the fiber".into()));
        }
        sizes.push(ker.len());
        cols.extend(ker);
    }
    let n = g.rank();
    let basis: ScalarMatrix = (0..n).map(|r| cols.iter().map(|c| c[r].clone()).collect()).collect();
    let q0 = LaurentMatrix::from_scalars(&field, &basis)?;
    let conj = q0.inverse()?.mul(&a)?.mul(&q0)?;
    let diag = hensel_block_diagonalize(&conj, &sizes, g.precision)?;
    let mut out = Vec::new();
    let mut start = 0;
    for s in sizes {
        let idx: Vec<usize> = (start..start + s).collect();
        start += s;
        let theta = diag.submatrix(&idx, &idx).map(|e| e.shift(v));
        out.push(g.equal_weight(w, theta)?);
    }
    Ok(out)
}

/// Minimal valuation of the entries of θ, failing on entries zero to precision.
fn theta_valuation(g: &HiggsGerm) -> Option<i64> {
    g.theta.entries().iter().filter_map(TruncatedLaurent::valuation).min()
}

fn decompose_slopes(g: &HiggsGerm) -> Result<Vec<(HiggsGerm, (u32, u32))>> {
    if g.rank() == 0 {
        return Ok(Vec::new());
    }
    let slopes = germ_slopes(g)?;
    if slopes.len() == 1 {
        let (p, m) = slope_pm(&slopes[0].0);
        let v = slope_check(g, p, m)?;
        if !v.holds {
            return Err(Error::NotAdmissible(format!(
                "Newton slope {m}/{p} is not realized on the lattice: {}",
                v.reason.unwrap_or_default()
            )));
        }
        let mut h = g.clone();
        h.certificate = v.certificate;
        return Ok(vec![(h, (p, m))]);
    }
    let comps = components(g);
    if comps.len() > 1 {
        let mut out = Vec::new();
        for c in comps {
            out.extend(decompose_slopes(&g.summand(&c)?)?);
        }
        return Ok(out);
    }
    let v = theta_valuation(g).ok_or_else(|| Error::PrecisionExhausted("Higgs matrix vanishes to precision".into()))?;
    if v >= 0 {
        return Err(Error::NotAdmissible("holomorphic Higgs matrix with several Newton slopes".into()));
    }
    let field = g.field().clone();
    let lead = g.theta.map(|e| e.shift(-v)).coefficient(0)?;
    let chi = charpoly(&lead, &field)?;
    let e = chi.iter().take_while(|c| c.is_zero()).count();
    if e == 0 || e == g.rank() {
        return Err(Error::NotAdmissible(
            "undecided: leading coefficient has a single characteristic root; a shearing transformation is required, supply canonical blocks".into(),
        ));
    }
    let mut t_e = vec![Scalar::zero(&field); e];
    t_e.push(Scalar::one(&field));
    let h: Vec<Scalar> = chi[e..].to_vec();
    let mut out = Vec::new();
    for piece in split_by_factors(g, v, &[t_e, h])? {
        out.extend(decompose_slopes(&piece)?);
    }
    Ok(out)
}

/// Direct-sum decomposition into pure-slope pieces, one per slope, ordered by slope.
pub fn slope_decomposition(g: &HiggsGerm) -> Result<Vec<(HiggsGerm, (u32, u32))>> {
    let pieces = decompose_slopes(g)?;
    let mut grouped: BTreeMap<Q, (HiggsGerm, (u32, u32))> = BTreeMap::new();
    for (h, pm) in pieces {
        let key = q(pm.1 as i64, pm.0 as i64);
        match grouped.remove(&key) {
            None => {
                grouped.insert(key, (h, pm));
            }
            Some((prev, _)) => {
                let merged = prev.direct_sum(&h)?.certify(pm.0, pm.1)?;
                grouped.insert(key, (merged, pm));
            }
        }
    }
    Ok(grouped.into_values().collect())
}

/// Label of a Galois orbit of leading residue eigenvalues.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct OrbitLabel {
    /// c^p for any member c of the orbit.
    pub power: Scalar,
    /// Least member by the canonical order, when one lies in the session field.
    pub representative: Option<Scalar>,
}

/// Type (p, m, o) of a pure block.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TypeLabel {
    pub p: u32,
    pub m: u32,
    pub orbit: OrbitLabel,
}

impl std::fmt::Display for TypeLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match &self.orbit.representative {
            Some(r) => write!(f, "({},{},{})", self.p, self.m, r),
            None => write!(f, "({},{},[c^{}={}])", self.p, self.m, self.p, self.orbit.power),
        }
    }
}

/// Roots of unity of order dividing p available in the session field.
fn field_roots_of_unity(field: &FieldRef, p: u32) -> Vec<Scalar> {
    let d = p.gcd(&field.order());
    let z = Scalar::root_of_unity(field, d).expect("d divides the order");
    let mut out = vec![Scalar::one(field)];
    for _ in 1..d {
        let next = out.last().unwrap().mul(&z);
        out.push(next);
    }
    out
}

/// Orbit label of c under c ↦ t^m·c, t ∈ μ_p.
pub fn orbit_label(c: &Scalar, p: u32, m: u32) -> OrbitLabel {
    let field = c.field().clone();
    let power = c.pow(p as i64).expect("nonnegative power");
    let rep = field_roots_of_unity(&field, p)
        .iter()
        .map(|t| c.mul(&t.pow(m as i64).expect("power")))
        .min()
        .expect("at least one root");
    OrbitLabel { power, representative: Some(rep) }
}

fn orbit_from_power(power: Scalar, p: u32, m: u32) -> OrbitLabel {
    match power.nth_root(p) {
        Some(c) => orbit_label(&c, p, m),
        None => OrbitLabel { power, representative: None },
    }
}

fn decompose_types(g: &HiggsGerm, p: u32, m: u32) -> Result<Vec<(HiggsGerm, TypeLabel)>> {
    let field = g.field().clone();
    let r = g.rank();
    if !r.is_multiple_of(p as usize) {
        return Err(Error::Contract(format!("rank {r} is not a multiple of the covering degree {p}")));
    }
    let (b, _) = pulled_back_matrix(g, p, m);
    let b0 = b.coefficient(0)?;
    if p == 1 {
        let (eig, rest) = certified_eigenvalues(&b0, &field)?;
        if rest.len() > 1 {
            return Err(Error::FieldExtensionRequired("residue eigenvalues are not in the session field".into()));
        }
        let label = |lam: &Scalar| TypeLabel {
            p,
            m,
            orbit: OrbitLabel { power: lam.clone(), representative: Some(lam.clone()) },
        };
        if eig.len() == 1 {
            let mut h = g.clone();
            h.certificate = slope_check(g, p, m)?.certificate;
            return Ok(vec![(h, label(&eig[0].0))]);
        }
        let comps = components(g);
        if comps.len() > 1 {
            let mut out = Vec::new();
            for c in comps {
                out.extend(decompose_types(&g.summand(&c)?, p, m)?);
            }
            return Ok(out);
        }
        let factors: Vec<Vec<Scalar>> = eig.iter().map(|(l, e)| upoly::linear_power(l, *e)).collect();
        let pieces = split_by_factors(g, -(m as i64), &factors)?;
        let mut out = Vec::new();
        for (piece, (lam, _)) in pieces.into_iter().zip(&eig) {
            let piece = piece.certify(p, m)?;
            out.push((piece, label(lam)));
        }
        return Ok(out);
    }
    let chi = charpoly(&b0, &field)?;
    let s = r / p as usize;
    if chi.iter().enumerate().any(|(i, c)| i % p as usize != 0 && !c.is_zero()) {
        return Err(Error::NotAdmissible("residue spectrum is not stable under the Galois action".into()));
    }
    let psi: Vec<Scalar> = chi.iter().step_by(p as usize).cloned().collect();
    let s0 = psi[s - 1].neg().div(&Scalar::from_int(&field, s as i64))?;
    if psi == upoly::linear_power(&s0, s) {
        let mut h = g.clone();
        h.certificate = slope_check(g, p, m)?.certificate;
        return Ok(vec![(h, TypeLabel { p, m, orbit: orbit_from_power(s0, p, m) })]);
    }
    let comps = components(g);
    if comps.len() > 1 {
        let mut out = Vec::new();
        for c in comps {
            out.extend(decompose_types(&g.summand(&c)?, p, m)?);
        }
        return Ok(out);
    }
    Err(Error::FieldExtensionRequired(
        "several Galois orbits in one indecomposable ramified piece; supply canonical blocks".into(),
    ))
}

/// Refinement of a pure-slope germ by Galois orbits of leading residue eigenvalues.
pub fn type_decomposition(g: &HiggsGerm) -> Result<Vec<(HiggsGerm, TypeLabel)>> {
    let (p, m) = match g.certificate() {
        Some(c) => (c.p, c.m),
        None => {
            let parts = slope_decomposition(g)?;
            match parts.as_slice() {
                [(_, pm)] => *pm,
                [] => return Ok(Vec::new()),
                _ => return Err(Error::Contract("type decomposition needs a germ of pure slope".into())),
            }
        }
    };
    decompose_types(g, p, m)
}

/// Irregular part 𝔞 = Σ_{k=1}^{m} a_k u^{−k} up to the Galois action a_k ↦ t^{−k}a_k.
///
/// Stored by the invariants a_m^p and r_k = a_k·a_m^{e_k} with k + m·e_k ≡ 0 (mod p),
/// which determine the orbit; explicit coefficients are kept when available.
#[derive(Debug, Clone)]
pub struct IrregularPart {
    p: u32,
    m: u32,
    leading_power: Scalar,
    lower: Vec<Scalar>,
    explicit: Option<Vec<Scalar>>,
}

impl PartialEq for IrregularPart {
    fn eq(&self, o: &Self) -> bool {
        self.p == o.p && self.m == o.m && self.leading_power == o.leading_power && self.lower == o.lower
    }
}

impl Eq for IrregularPart {}

fn orbit_exponent(k: u32, m: u32, p: u32) -> u32 {
    (0..p).find(|e| (k + m * e).is_multiple_of(p)).expect("m is invertible mod p")
}

impl IrregularPart {
    /// From explicit coefficients a_1, …, a_m.
    pub fn from_coefficients(p: u32, m: u32, coeffs: Vec<Scalar>) -> Result<Self> {
        check_coprime(p, m)?;
        if m == 0 || coeffs.len() != m as usize {
            return Err(Error::Contract(format!("irregular part of pole order {m} needs {m} coefficients")));
        }
        let am = &coeffs[m as usize - 1];
        if am.is_zero() {
            return Err(Error::Contract("leading irregular coefficient must be nonzero".into()));
        }
        let leading_power = am.pow(p as i64)?;
        let lower = (1..m)
            .map(|k| coeffs[k as usize - 1].mul(&am.pow(orbit_exponent(k, m, p) as i64).expect("power")))
            .collect();
        let explicit = Some(Self::canonical_coefficients(p, m, coeffs));
        Ok(IrregularPart { p, m, leading_power, lower, explicit })
    }

    /// From the orbit invariants a_m^p and r_1, …, r_{m−1}.
    pub fn from_invariants(p: u32, m: u32, leading_power: Scalar, lower: Vec<Scalar>) -> Result<Self> {
        check_coprime(p, m)?;
        if m == 0 || lower.len() != m as usize - 1 || leading_power.is_zero() {
            return Err(Error::Contract("invalid irregular invariants".into()));
        }
        let explicit = leading_power.nth_root(p).map(|am| {
            let mut c: Vec<Scalar> = (1..m)
                .map(|k| {
                    lower[k as usize - 1].div(&am.pow(orbit_exponent(k, m, p) as i64).expect("power")).expect("nonzero")
                })
                .collect();
            c.push(am);
            Self::canonical_coefficients(p, m, c)
        });
        Ok(IrregularPart { p, m, leading_power, lower, explicit })
    }

    /// Least representative of the orbit among those in the session field,
    /// comparing (a_m, a_{m−1}, …, a_1).
    fn canonical_coefficients(p: u32, _m: u32, coeffs: Vec<Scalar>) -> Vec<Scalar> {
        let field = coeffs[0].field().clone();
        field_roots_of_unity(&field, p)
            .iter()
            .map(|t| {
                coeffs
                    .iter()
                    .enumerate()
                    .map(|(i, a)| a.mul(&t.pow(-(i as i64 + 1)).expect("root of unity")))
                    .collect::<Vec<_>>()
            })
            .min_by(|x, y| x.iter().rev().cmp(y.iter().rev()))
            .expect("nonempty")
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    /// a_m^p.
    pub fn leading_power(&self) -> &Scalar {
        &self.leading_power
    }

    /// r_k = a_k·a_m^{e_k} for k = 1, …, m − 1.
    pub fn lower_invariants(&self) -> &[Scalar] {
        &self.lower
    }

    /// Canonical explicit coefficients a_1, …, a_m.
    pub fn coefficients(&self) -> Result<&[Scalar]> {
        self.explicit.as_deref().ok_or_else(|| {
            Error::FieldExtensionRequired(format!(
                "a {}-th root of {} is needed to write the irregular part explicitly",
                self.p, self.leading_power
            ))
        })
    }

    pub fn field(&self) -> &FieldRef {
        self.leading_power.field()
    }

    /// Orbit of the leading residue eigenvalue −m·a_m.
    pub fn orbit(&self) -> OrbitLabel {
        let f = self.field();
        let scale = Scalar::from_int(f, -(self.m as i64)).pow(self.p as i64).expect("power");
        let power = self.leading_power.mul(&scale);
        match &self.explicit {
            Some(c) => orbit_label(&c[self.m as usize - 1].mul(&Scalar::from_int(f, -(self.m as i64))), self.p, self.m),
            None => orbit_from_power(power, self.p, self.m),
        }
    }
}

/// Canonical elementary block φ_{p*}(L(𝔞) ⊗ (α + N)) with upstairs weights.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ElementaryBlock {
    pub p: u32,
    pub m: u32,
    pub irregular: Option<IrregularPart>,
    pub alpha: Scalar,
    /// Strictly upper triangular s×s matrix acting upstairs.
    pub nilpotent: ScalarMatrix,
    /// Upstairs parabolic weights, one per upstairs frame vector.
    pub weights: Vec<Q>,
    /// Auxiliary filtration datum carried by exceptional blocks at infinity.
    pub injection: Option<Box<ElementaryBlock>>,
}

impl ElementaryBlock {
    /// Tame block of type (1, 0, α).
    pub fn tame(alpha: Scalar, nilpotent: ScalarMatrix, weights: Vec<Q>) -> Result<Self> {
        let b = ElementaryBlock { p: 1, m: 0, irregular: None, alpha, nilpotent, weights, injection: None };
        b.validate()?;
        Ok(b)
    }

    /// Rank-one tame block with zero nilpotent part.
    pub fn tame_rank1(alpha: Scalar, weight: Q) -> Self {
        let f = alpha.field().clone();
        Self::tame(alpha, vec![vec![Scalar::zero(&f)]], vec![weight]).expect("valid rank-one block")
    }

    /// Block with irregular part of pole order m ≥ 1 upstairs.
    pub fn irregular(
        irregular: IrregularPart,
        alpha: Scalar,
        nilpotent: ScalarMatrix,
        weights: Vec<Q>,
    ) -> Result<Self> {
        let b = ElementaryBlock {
            p: irregular.p,
            m: irregular.m,
            irregular: Some(irregular),
            alpha,
            nilpotent,
            weights,
            injection: None,
        };
        b.validate()?;
        Ok(b)
    }

    /// Rank-p block φ_{p*}L(𝔞) with 𝔞 = Σ a_k u^{−k}, zero residue and one upstairs weight.
    pub fn pushforward_rank1(p: u32, coeffs: Vec<Scalar>, weight: Q) -> Result<Self> {
        let m = coeffs.len() as u32;
        let f =
            coeffs.first().map(|c| c.field().clone()).ok_or_else(|| Error::Contract("empty irregular part".into()))?;
        let irr = IrregularPart::from_coefficients(p, m, coeffs)?;
        Self::irregular(irr, Scalar::zero(&f), vec![vec![Scalar::zero(&f)]], vec![weight])
    }

    /// The same block over a field with extra trailing symbols.
    pub fn embed(&self, into: &FieldRef) -> Result<Self> {
        let irregular = match &self.irregular {
            None => None,
            Some(irr) => Some(match irr.coefficients() {
                Ok(c) => IrregularPart::from_coefficients(
                    irr.p,
                    irr.m,
                    c.iter().map(|a| a.embed(into)).collect::<Result<_>>()?,
                )?,
                Err(_) => IrregularPart::from_invariants(
                    irr.p,
                    irr.m,
                    irr.leading_power.embed(into)?,
                    irr.lower.iter().map(|a| a.embed(into)).collect::<Result<_>>()?,
                )?,
            }),
        };
        Ok(ElementaryBlock {
            p: self.p,
            m: self.m,
            irregular,
            alpha: self.alpha.embed(into)?,
            nilpotent: self
                .nilpotent
                .iter()
                .map(|row| row.iter().map(|a| a.embed(into)).collect::<Result<_>>())
                .collect::<Result<_>>()?,
            weights: self.weights.clone(),
            injection: match &self.injection {
                Some(b) => Some(Box::new(b.embed(into)?)),
                None => None,
            },
        })
    }

    pub fn validate(&self) -> Result<()> {
        check_coprime(self.p, self.m)?;
        match (&self.irregular, self.m) {
            (None, 0) => {}
            (Some(i), m) if m > 0 && i.p == self.p && i.m == m => {}
            _ => return Err(Error::Contract("irregular part inconsistent with (p,m)".into())),
        }
        let s = self.weights.len();
        if s == 0 {
            return Err(Error::Contract("elementary block of rank zero".into()));
        }
        if self.nilpotent.len() != s || self.nilpotent.iter().any(|r| r.len() != s) {
            return Err(Error::Contract(format!("nilpotent part must be {s}x{s}")));
        }
        for i in 0..s {
            for j in 0..s {
                let x = &self.nilpotent[i][j];
                if x.is_zero() {
                    continue;
                }
                if j <= i {
                    return Err(Error::Contract("nilpotent part must be strictly upper triangular".into()));
                }
            }
        }
        if self.injection.is_some() && !self.is_exceptional() {
            return Err(Error::Contract("injection datum on a non-exceptional block".into()));
        }
        Ok(())
    }

    pub fn field(&self) -> &FieldRef {
        self.alpha.field()
    }

    /// Upstairs rank s.
    pub fn multiplicity(&self) -> usize {
        self.weights.len()
    }

    pub fn rank(&self) -> usize {
        self.p as usize * self.multiplicity()
    }

    /// m/p.
    pub fn slope(&self) -> Q {
        q(self.m as i64, self.p as i64)
    }

    /// Type (1, 0, 0).
    pub fn is_exceptional(&self) -> bool {
        self.p == 1 && self.m == 0 && self.alpha.is_zero()
    }

    pub fn type_label(&self) -> TypeLabel {
        let orbit = match &self.irregular {
            None => OrbitLabel { power: self.alpha.clone(), representative: Some(self.alpha.clone()) },
            Some(i) => i.orbit(),
        };
        TypeLabel { p: self.p, m: self.m, orbit }
    }

    /// Downstairs weights (c_i − j)/p without normalization.
    pub fn downstairs_weights(&self) -> Vec<Q> {
        let pq = Q::from_integer(self.p.into());
        let mut out = Vec::with_capacity(self.rank());
        for c in &self.weights {
            for j in 0..self.p as i64 {
                out.push((c - Q::from_integer(j.into())) / &pq);
            }
        }
        out
    }

    /// δ = Σ of downstairs weights.
    pub fn delta(&self) -> Q {
        self.downstairs_weights().iter().fold(Q::zero(), |a, c| a + c)
    }

    /// Jordan type of the nilpotent part.
    pub fn jordan_type(&self) -> Vec<usize> {
        nilpotent_jordan_type(&self.nilpotent, self.field())
    }

    /// Same germ up to isomorphism: type, irregular part, residue, Jordan type and
    /// weights modulo integers.
    pub fn equivalent(&self, o: &Self) -> bool {
        let frac = |ws: &[Q]| {
            let mut v: Vec<Q> = ws.iter().map(|c| normalize_weight(c, &Q::zero()).0).collect();
            v.sort();
            v
        };
        self.p == o.p
            && self.m == o.m
            && self.irregular == o.irregular
            && self.alpha == o.alpha
            && self.jordan_type() == o.jordan_type()
            && frac(&self.weights) == frac(&o.weights)
    }

    /// The block as a matrix germ via the push-forward rules.
    pub fn realize(&self, coordinate: Coordinate) -> Result<HiggsGerm> {
        self.realize_scaled(coordinate, 0)
    }

    /// Realization of u^k·θ upstairs, pushed forward in the same frame.
    pub fn realize_scaled(&self, coordinate: Coordinate, k: i64) -> Result<HiggsGerm> {
        self.validate()?;
        let field = self.field().clone();
        let s = self.multiplicity();
        let top = self.weights.iter().max().expect("nonempty").clone();
        let up = FilteredLattice::standard(&field, top.clone(), self.weights.clone())?;
        let exps: Vec<i64> = self.weights.iter().map(|c| -normalize_weight(c, &top).1).collect();
        // scalar part α − Σ k a_k u^{−k}
        let mut scalar = TruncatedLaurent::constant(self.alpha.clone());
        if let Some(irr) = &self.irregular {
            for (j, a) in irr.coefficients()?.iter().enumerate() {
                let j = j as i64 + 1;
                scalar = scalar.sub(&TruncatedLaurent::monomial(a.mul(&Scalar::from_int(&field, j)), -j));
            }
        }
        let mut a_up = LaurentMatrix::zeros(&field, s, s);
        for l in 0..s {
            for i in 0..s {
                let mut e = if l == i { scalar.clone() } else { TruncatedLaurent::zero(&field) };
                if !self.nilpotent[l][i].is_zero() {
                    e = e.add(&TruncatedLaurent::constant(self.nilpotent[l][i].clone()));
                }
                if !e.is_exact_zero() {
                    a_up.set(l, i, e.shift(exps[i] - exps[l] + k));
                }
            }
        }
        if self.p == 1 {
            return HiggsGerm::new(up, a_up, coordinate);
        }
        let p = self.p as i64;
        let lattice = pushforward_covering(&up, self.p)?;
        let inv_p = Scalar::from_int(&field, p).inv()?;
        let n = s * self.p as usize;
        let mut rows: Vec<Vec<Vec<(i64, Scalar)>>> = vec![vec![Vec::new(); n]; n];
        for l in 0..s {
            for i in 0..s {
                for (e, c) in a_up.get(l, i).terms() {
                    for j in 0..p {
                        let jp = (j + e).rem_euclid(p);
                        let zexp = (j + e - jp) / p;
                        rows[l * self.p as usize + jp as usize][i * self.p as usize + j as usize]
                            .push((zexp, c.mul(&inv_p)));
                    }
                }
            }
        }
        let mut theta = LaurentMatrix::zeros(&field, n, n);
        for (r, row) in rows.into_iter().enumerate() {
            for (c, terms) in row.into_iter().enumerate() {
                let mut acc = TruncatedLaurent::zero(&field);
                for (k, x) in terms {
                    acc = acc.add(&TruncatedLaurent::monomial(x, k));
                }
                theta.set(r, c, acc);
            }
        }
        HiggsGerm::new(lattice, theta, coordinate)
    }
}

/// A germ given directly as a direct sum of elementary blocks.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CanonicalGerm {
    pub coordinate: Coordinate,
    pub blocks: Vec<ElementaryBlock>,
}

impl CanonicalGerm {
    pub fn new(coordinate: Coordinate, blocks: Vec<ElementaryBlock>) -> Result<Self> {
        for b in &blocks {
            b.validate()?;
        }
        Ok(CanonicalGerm { coordinate, blocks })
    }

    pub fn rank(&self) -> usize {
        self.blocks.iter().map(ElementaryBlock::rank).sum()
    }

    /// Distinct slopes (p, m), ordered by m/p.
    pub fn slopes(&self) -> Vec<(u32, u32)> {
        let mut s: Vec<(Q, (u32, u32))> = self.blocks.iter().map(|b| (b.slope(), (b.p, b.m))).collect();
        s.sort();
        s.dedup();
        s.into_iter().map(|x| x.1).collect()
    }

    /// Every slope satisfies m/p ≤ bound, or < bound when strict.
    pub fn admissible(&self, bound: &Q, strict: bool) -> bool {
        self.blocks.iter().all(|b| if strict { b.slope() < *bound } else { b.slope() <= *bound })
    }

    /// Canonical blocks are good by construction.
    pub fn goodness(&self) -> GoodnessReport {
        let mut report = GoodnessReport { covering_degree: 1, classes: Vec::new() };
        for b in &self.blocks {
            report.add(b.p, b.m, b.irregular.clone(), Some(b.alpha.clone()), b.rank());
        }
        report
    }

    /// Direct sum of the block realizations at level 0.
    pub fn realize(&self, field: &FieldRef) -> Result<HiggsGerm> {
        let empty = HiggsGerm::new(
            FilteredLattice::new(Q::zero(), Vec::new(), LaurentMatrix::zeros(field, 0, 0))?,
            LaurentMatrix::zeros(field, 0, 0),
            self.coordinate,
        )?;
        let g = self
            .blocks
            .iter()
            .try_fold(empty, |acc, b| acc.direct_sum(&b.realize(self.coordinate)?.relevel(&Q::zero())))?;
        // realized entries are exact, so any working precision is honest
        let need = self.blocks.iter().map(|b| required_precision(b.p, b.m, g.lattice())).max().unwrap_or(0);
        let prec = g.precision().max(need);
        Ok(g.with_precision(prec))
    }
}

/// One class of Irr(θ): an irregular part up to Galois action with its pieces.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IrregularClass {
    pub p: u32,
    pub m: u32,
    pub irregular: Option<IrregularPart>,
    /// (residue eigenvalue if certified, downstairs rank) of each refined piece.
    pub pieces: Vec<(Option<Scalar>, usize)>,
}

/// Result of [`goodness_decomposition`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GoodnessReport {
    /// lcm of the minimal covering degrees p_𝔬.
    pub covering_degree: u32,
    pub classes: Vec<IrregularClass>,
}

impl GoodnessReport {
    fn add(&mut self, p: u32, m: u32, irregular: Option<IrregularPart>, alpha: Option<Scalar>, rank: usize) {
        self.covering_degree = self.covering_degree.lcm(&p);
        if let Some(c) = self.classes.iter_mut().find(|c| c.p == p && c.m == m && c.irregular == irregular) {
            match c.pieces.iter_mut().find(|(a, _)| *a == alpha && alpha.is_some()) {
                Some(piece) => piece.1 += rank,
                None => c.pieces.push((alpha, rank)),
            }
            return;
        }
        self.classes.push(IrregularClass { p, m, irregular, pieces: vec![(alpha, rank)] });
    }
}

/// μ(u) with χ_B(μ) ≡ 0 mod u^{m+1}, lifted from a simple root c0 of χ_B mod u.
fn lift_eigenvalue(b: &LaurentMatrix, c0: &Scalar, m: u32) -> Result<Vec<Scalar>> {
    let field = b.field().clone();
    let chi = charpoly_series(b)?;
    let at0: Vec<Scalar> = chi.iter().map(|c| c.coeff(0)).collect::<Result<_>>()?;
    let d0 = upoly::eval(&upoly::derivative(&at0), c0);
    if d0.is_zero() {
        return Err(Error::NotGood("undecided: leading eigenvalue is not a simple root".into()));
    }
    let mut mu = vec![c0.clone()];
    for k in 1..=m as i64 {
        let series = TruncatedLaurent::new(&field, 0, mu.clone(), Some(k + 1));
        let mut pw = TruncatedLaurent::one(&field).truncate(k + 1);
        let mut acc = TruncatedLaurent::zero_to_precision(&field, k + 1);
        for c in &chi {
            acc = acc.add(&c.mul(&pw)).truncate(k + 1);
            pw = pw.mul(&series).truncate(k + 1);
        }
        mu.push(acc.coeff(k)?.neg().div(&d0)?);
    }
    Ok(mu)
}

/// Irregular coefficients and α from μ(u) = α·u^m − Σ k·a_k·u^{m−k}.
fn irregular_from_mu(mu: &[Scalar], m: u32) -> (Vec<Scalar>, Scalar) {
    let field = mu[0].field().clone();
    let coeffs = (1..=m as usize)
        .map(|k| mu[m as usize - k].neg().div(&Scalar::from_int(&field, k as i64)).expect("k ≠ 0"))
        .collect();
    (coeffs, mu[m as usize].clone())
}

/// Single residue eigenvalue of a constant matrix, with the Jordan type of the remainder.
fn single_eigenvalue(a: &ScalarMatrix, field: &FieldRef) -> Result<Option<(Scalar, Vec<usize>)>> {
    let (eig, rest) = certified_eigenvalues(a, field)?;
    if rest.len() > 1 || eig.len() != 1 {
        return Ok(None);
    }
    let lam = eig[0].0.clone();
    let jt = nilpotent_jordan_type(&shift_diagonal(a, &lam), field);
    Ok(Some((lam, jt)))
}

/// Pieces of a type-(1, m) germ: checks B ≡ μ(z)·I mod z^m and reads off μ and the
/// residue eigenvalue with its Jordan type when the residue has a single eigenvalue.
fn unramified_good_piece(g: &HiggsGerm, m: u32) -> Result<(Vec<Scalar>, Option<(Scalar, Vec<usize>)>)> {
    let field = g.field().clone();
    let r = g.rank();
    let (b, _) = pulled_back_matrix(g, 1, m);
    let mut mu = Vec::new();
    for k in 0..m as i64 {
        let ck = b.coefficient(k)?;
        let d = ck[0][0].clone();
        for (i, row) in ck.iter().enumerate() {
            for (j, x) in row.iter().enumerate() {
                let want = if i == j { d.clone() } else { Scalar::zero(&field) };
                if *x != want {
                    return Err(Error::NotGood(format!(
                        "type ({},{}) piece of rank {r}: coefficient z^{k} of z^{m}θ is not scalar, so θ − d𝔞 is not logarithmic",
                        1, m
                    )));
                }
            }
        }
        mu.push(d);
    }
    let res = b.coefficient(m as i64)?;
    Ok((mu, single_eigenvalue(&res, &field)?))
}

/// Irregular decomposition of a good germ, or a structured failure.
pub fn goodness_decomposition(g: &HiggsGerm) -> Result<GoodnessReport> {
    let mut report = GoodnessReport { covering_degree: 1, classes: Vec::new() };
    for (piece, _) in slope_decomposition(g)? {
        for (t, label) in type_decomposition(&piece)? {
            let (p, m) = (label.p, label.m);
            let field = t.field().clone();
            if m == 0 {
                let res = t.theta.coefficient(0)?;
                let alpha = single_eigenvalue(&res, &field)?.map(|x| x.0);
                report.add(1, 0, None, alpha, t.rank());
            } else if p == 1 {
                let (mut mu, res) = unramified_good_piece(&t, m)?;
                let alpha = res.map(|x| x.0);
                mu.push(alpha.clone().unwrap_or_else(|| Scalar::zero(&field)));
                let (coeffs, _) = irregular_from_mu(&mu, m);
                report.add(1, m, Some(IrregularPart::from_coefficients(1, m, coeffs)?), alpha, t.rank());
            } else if t.rank() == p as usize {
                let block = recognize_ramified(&t, p, m, &label)?;
                report.add(p, m, block.irregular, Some(block.alpha), t.rank());
            } else {
                return Err(Error::NotGood(format!(
                    "undecided at precision {}: type ({p},{m}) piece of rank {} needs an upstairs splitting beyond the session field",
                    t.precision,
                    t.rank()
                )));
            }
        }
    }
    Ok(report)
}

fn recognize_ramified(t: &HiggsGerm, p: u32, m: u32, label: &TypeLabel) -> Result<ElementaryBlock> {
    let field = t.field().clone();
    let c0 =
        label.orbit.representative.clone().ok_or_else(|| {
            Error::FieldExtensionRequired(format!("a {p}-th root of {} is needed", label.orbit.power))
        })?;
    let (b, _) = pulled_back_matrix(t, p, m);
    let mu = lift_eigenvalue(&b, &c0, m)?;
    let (coeffs, alpha) = irregular_from_mu(&mu, m);
    let w = t.lattice.weights().iter().max().expect("nonempty") * Q::from_integer(p.into());
    let w = normalize_weight(&w, &Q::zero()).0;
    ElementaryBlock::irregular(
        IrregularPart::from_coefficients(p, m, coeffs)?,
        alpha,
        vec![vec![Scalar::zero(&field)]],
        vec![w],
    )
}

/// Recovers canonical blocks from a matrix germ, up to equivalence.
pub fn recognize(g: &HiggsGerm) -> Result<Vec<ElementaryBlock>> {
    let mut out = Vec::new();
    for (piece, _) in slope_decomposition(g)? {
        for (t, label) in type_decomposition(&piece)? {
            let (p, m) = (label.p, label.m);
            let field = t.field().clone();
            let mut weights: Vec<Q> = t.lattice.weights().iter().map(|c| normalize_weight(c, &Q::zero()).0).collect();
            weights.sort();
            if m == 0 {
                let res = t.theta.coefficient(0)?;
                let (alpha, jt) = single_eigenvalue(&res, &field)?
                    .ok_or_else(|| Error::FieldExtensionRequired("residue eigenvalue not certified".into()))?;
                out.push(ElementaryBlock::tame(alpha, jordan_matrix(&jt, &field), weights)?);
            } else if p == 1 {
                let (mut mu, res) = unramified_good_piece(&t, m)?;
                let (alpha, jt) = res.ok_or_else(|| {
                    Error::FieldExtensionRequired("residue of the logarithmic part has several eigenvalues".into())
                })?;
                mu.push(alpha.clone());
                let (coeffs, _) = irregular_from_mu(&mu, m);
                let irr = IrregularPart::from_coefficients(1, m, coeffs)?;
                out.push(ElementaryBlock::irregular(irr, alpha, jordan_matrix(&jt, &field), weights)?);
            } else if t.rank() == p as usize {
                out.push(recognize_ramified(&t, p, m, &label)?);
            } else {
                return Err(Error::Contract(
                    "recognition of ramified pieces of multiplicity above one needs canonical input".into(),
                ));
            }
        }
    }
    Ok(out)
}

/// True iff the germ splits into pure slopes m/p ≤ bound (< bound when strict).
pub fn admissibility_check(g: &HiggsGerm, bound: &Q, strict: bool) -> Result<bool> {
    let parts = slope_decomposition(g)?;
    Ok(parts.iter().all(|(_, (p, m))| {
        let s = q(*m as i64, *p as i64);
        if strict {
            s < *bound
        } else {
            s <= *bound
        }
    }))
}

/// The germ (P_*V, −τ^{−2}·g·dτ) at infinity, written as A = −τ^{−1}·g in dτ/τ units.
pub fn endo_germ_wrap(v: &FilteredLattice, gmat: &LaurentMatrix) -> Result<HiggsGerm> {
    if gmat.entries().iter().any(|e| e.valuation().is_some_and(|x| x < 0)) {
        return Err(Error::Contract("endomorphism must be holomorphic".into()));
    }
    let theta = gmat.map(|e| e.neg().shift(-1));
    let mut h = HiggsGerm::new(v.clone(), theta, Coordinate::Infinity)?;
    h.endomorphism_form = true;
    Ok(h)
}

/// For endomorphism-form germs the slope condition forces p ≥ m.
pub fn endo_slope_allowed(p: u32, m: u32) -> bool {
    p >= m
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact_algebra::Field;

    fn alpha_field() -> (FieldRef, Scalar) {
        let k = Field::with_symbols(1, 1);
        let a = Scalar::var(&k, 0);
        (k, a)
    }

    /// The (2,1) germ written by hand in the basis (e, u·e).
    fn hand_21(k: &FieldRef, a: &Scalar) -> HiggsGerm {
        let c = a.neg().div(&Scalar::from_int(k, 2)).unwrap();
        let z = TruncatedLaurent::zero(k);
        let theta = LaurentMatrix::from_rows(
            k,
            vec![vec![z.clone(), TruncatedLaurent::constant(c.clone())], vec![TruncatedLaurent::monomial(c, -1), z]],
        )
        .unwrap();
        let lat = FilteredLattice::standard(k, Q::zero(), vec![q(-1, 4), q(-3, 4)]).unwrap();
        HiggsGerm::new(lat, theta, Coordinate::Finite).unwrap()
    }

    #[test]
    fn slope_check_examples() {
        let (k, a) = alpha_field();
        let g = hand_21(&k, &a);
        let v = slope_check(&g, 2, 1).unwrap();
        assert!(v.holds);
        // residue −α·[[0,1],[1,0]] on the single graded piece upstairs
        let res = &v.certificate.unwrap().residues[0];
        assert_eq!(res[0][1], a.neg());
        assert_eq!(res[1][0], a.neg());
        assert!(!slope_check(&g, 1, 0).unwrap().holds);
        let zero = HiggsGerm::new(
            FilteredLattice::standard(&k, Q::zero(), vec![Q::zero()]).unwrap(),
            LaurentMatrix::zeros(&k, 1, 1),
            Coordinate::Finite,
        )
        .unwrap();
        assert!(slope_check(&zero, 1, 0).unwrap().holds);
    }

    #[test]
    fn realization_matches_hand_matrix() {
        let (k, a) = alpha_field();
        let b = ElementaryBlock::pushforward_rank1(2, vec![a.clone()], q(-1, 2)).unwrap();
        let g = b.realize(Coordinate::Finite).unwrap();
        // the realization uses the least member of the orbit {α, −α}
        let rep = b.irregular.as_ref().unwrap().coefficients().unwrap()[0].clone();
        assert!(rep == a || rep == a.neg());
        let h = hand_21(&k, &rep);
        assert_eq!(g.theta(), h.theta());
        assert_eq!(g.lattice().weights(), h.lattice().weights());
    }

    #[test]
    fn slope_decomposition_examples() {
        let (k, a) = alpha_field();
        let g = hand_21(&k, &a);
        let parts = slope_decomposition(&g).unwrap();
        assert_eq!(parts.len(), 1);
        assert_eq!(parts[0].1, (2, 1));
        let tame = ElementaryBlock::tame_rank1(Scalar::from_int(&k, 3), Q::zero()).realize(Coordinate::Finite).unwrap();
        let sum = tame.direct_sum(&g).unwrap();
        let parts = slope_decomposition(&sum).unwrap();
        assert_eq!(parts.iter().map(|x| x.1).collect::<Vec<_>>(), vec![(1, 0), (2, 1)]);
    }

    #[test]
    fn hensel_split_of_distinct_slope_one_eigenvalues() {
        // z^{-1}[[1, 1],[0, 2]] + [[0,0],[1,0]] has leading eigenvalues 1 and 2.
        let k = Field::gaussian();
        let e = |v: &[i64], s: i64| TruncatedLaurent::from_ints(&k, s, v, None);
        let theta =
            LaurentMatrix::from_rows(&k, vec![vec![e(&[1], -1), e(&[1], -1)], vec![e(&[1], 0), e(&[2], -1)]]).unwrap();
        let lat = FilteredLattice::standard(&k, Q::zero(), vec![Q::zero(), Q::zero()]).unwrap();
        let g = HiggsGerm::new(lat, theta, Coordinate::Finite).unwrap();
        let parts = slope_decomposition(&g).unwrap();
        assert_eq!(parts.len(), 1);
        assert_eq!(parts[0].1, (1, 1));
        let types = type_decomposition(&parts[0].0).unwrap();
        assert_eq!(types.len(), 2);
        let reps: Vec<Scalar> = types.iter().map(|t| t.1.orbit.power.clone()).collect();
        assert_eq!(reps, vec![Scalar::from_int(&k, 1), Scalar::from_int(&k, 2)]);
        // each piece is diagonal modulo the working precision
        for (t, _) in &types {
            assert_eq!(t.rank(), 1);
        }
        // mixed slopes split along the leading characteristic polynomial T·(T − 1)
        let theta2 =
            LaurentMatrix::from_rows(&k, vec![vec![e(&[1], -1), e(&[1], 0)], vec![e(&[1], 0), e(&[5], 0)]]).unwrap();
        let lat2 = FilteredLattice::standard(&k, Q::zero(), vec![Q::zero(), Q::zero()]).unwrap();
        let g2 = HiggsGerm::new(lat2, theta2, Coordinate::Finite).unwrap();
        let parts2 = slope_decomposition(&g2).unwrap();
        assert_eq!(parts2.iter().map(|x| x.1).collect::<Vec<_>>(), vec![(1, 0), (1, 1)]);
    }

    #[test]
    fn type_decomposition_examples() {
        let (k, a) = alpha_field();
        let g = hand_21(&k, &a).certify(2, 1).unwrap();
        let types = type_decomposition(&g).unwrap();
        assert_eq!(types.len(), 1);
        // orbit {α, −α}: c^2 = α^2
        assert_eq!(types[0].1.orbit.power, a.mul(&a));
        let b = Scalar::from_int(&k, 7);
        let t1 = ElementaryBlock::tame_rank1(a.clone(), Q::zero()).realize(Coordinate::Finite).unwrap();
        let t2 = ElementaryBlock::tame_rank1(b.clone(), Q::zero()).realize(Coordinate::Finite).unwrap();
        let sum = t1.direct_sum(&t2).unwrap().certify(1, 0).unwrap();
        let labels: Vec<Scalar> = type_decomposition(&sum).unwrap().into_iter().map(|t| t.1.orbit.power).collect();
        assert_eq!(labels.len(), 2);
        assert!(labels.contains(&a) && labels.contains(&b));
        let nil = ElementaryBlock::tame(Scalar::zero(&k), jordan_matrix(&[2], &k), vec![Q::zero(), Q::zero()])
            .unwrap()
            .realize(Coordinate::Finite)
            .unwrap()
            .certify(1, 0)
            .unwrap();
        let t = type_decomposition(&nil).unwrap();
        assert_eq!(t.len(), 1);
        assert!(t[0].1.orbit.power.is_zero());
    }

    #[test]
    fn goodness_examples() {
        let (k, a) = alpha_field();
        let g = hand_21(&k, &a);
        let rep = goodness_decomposition(&g).unwrap();
        assert_eq!(rep.covering_degree, 2);
        assert_eq!(rep.classes.len(), 1);
        let irr = rep.classes[0].irregular.clone().unwrap();
        assert_eq!(irr, IrregularPart::from_coefficients(2, 1, vec![a.clone()]).unwrap());
        // diag(d𝔞₁, d𝔞₂) with distinct polynomials gives two classes
        let b1 = ElementaryBlock::irregular(
            IrregularPart::from_coefficients(1, 1, vec![a.clone()]).unwrap(),
            Scalar::zero(&k),
            vec![vec![Scalar::zero(&k)]],
            vec![Q::zero()],
        )
        .unwrap();
        let b2 = ElementaryBlock::irregular(
            IrregularPart::from_coefficients(1, 2, vec![Scalar::one(&k), a.clone()]).unwrap(),
            Scalar::zero(&k),
            vec![vec![Scalar::zero(&k)]],
            vec![Q::zero()],
        )
        .unwrap();
        let cg = CanonicalGerm::new(Coordinate::Finite, vec![b1, b2]).unwrap();
        let rep = goodness_decomposition(&cg.realize(&k).unwrap()).unwrap();
        assert_eq!(rep.classes.len(), 2);
        // a rank-2 (1,1) piece whose z^0 coefficient is not scalar is not good
        let e = |v: &[i64], s: i64| TruncatedLaurent::from_ints(&k, s, v, None);
        let theta = LaurentMatrix::from_rows(
            &k,
            vec![vec![e(&[1], -1), e(&[1], -1)], vec![TruncatedLaurent::zero(&k), e(&[1], -1)]],
        )
        .unwrap();
        let lat = FilteredLattice::standard(&k, Q::zero(), vec![Q::zero(), Q::zero()]).unwrap();
        let bad = HiggsGerm::new(lat, theta, Coordinate::Finite).unwrap();
        assert!(admissibility_check(&bad, &q(2, 1), false).unwrap());
        assert!(matches!(goodness_decomposition(&bad), Err(Error::NotGood(_))));
    }

    #[test]
    fn admissibility_examples() {
        let (k, a) = alpha_field();
        assert!(admissibility_check(&hand_21(&k, &a), &q(1, 1), true).unwrap());
        let b11 = ElementaryBlock::irregular(
            IrregularPart::from_coefficients(1, 1, vec![a.clone()]).unwrap(),
            Scalar::zero(&k),
            vec![vec![Scalar::zero(&k)]],
            vec![Q::zero()],
        )
        .unwrap()
        .realize(Coordinate::Finite)
        .unwrap();
        assert!(!admissibility_check(&b11, &q(1, 1), true).unwrap());
        let zero = HiggsGerm::new(
            FilteredLattice::standard(&k, Q::zero(), vec![Q::zero()]).unwrap(),
            LaurentMatrix::zeros(&k, 1, 1),
            Coordinate::Finite,
        )
        .unwrap();
        assert!(admissibility_check(&zero, &Q::zero(), false).unwrap());
    }

    #[test]
    fn endo_germ_examples() {
        let (k, a) = alpha_field();
        let lat1 = FilteredLattice::standard(&k, Q::zero(), vec![Q::zero()]).unwrap();
        let g = LaurentMatrix::from_scalars(&k, &[vec![a.clone()]]).unwrap();
        let h = endo_germ_wrap(&lat1, &g).unwrap();
        assert_eq!(slope_decomposition(&h).unwrap()[0].1, (1, 1));
        // eigenvalues ±τ^{1/2}
        let e = |v: &[i64], s: i64| TruncatedLaurent::from_ints(&k, s, v, None);
        let lat2 = FilteredLattice::standard(&k, Q::zero(), vec![q(-3, 4), q(-1, 4)]).unwrap();
        let gm = LaurentMatrix::from_rows(
            &k,
            vec![vec![TruncatedLaurent::zero(&k), e(&[1], 0)], vec![e(&[1], 1), TruncatedLaurent::zero(&k)]],
        )
        .unwrap();
        let h2 = endo_germ_wrap(&lat2, &gm).unwrap();
        assert_eq!(slope_decomposition(&h2).unwrap()[0].1, (2, 1));
        assert!(endo_slope_allowed(2, 1));
        // g = [[0, τ],[0, 0]] gives a nilpotent logarithmic residue
        let lat3 = FilteredLattice::standard(&k, Q::zero(), vec![Q::zero(), Q::zero()]).unwrap();
        let gn = LaurentMatrix::from_rows(
            &k,
            vec![
                vec![TruncatedLaurent::zero(&k), e(&[1], 1)],
                vec![TruncatedLaurent::zero(&k), TruncatedLaurent::zero(&k)],
            ],
        )
        .unwrap();
        let h3 = endo_germ_wrap(&lat3, &gn).unwrap();
        let parts = slope_decomposition(&h3).unwrap();
        assert_eq!(parts[0].1, (1, 0));
        let t = type_decomposition(&parts[0].0).unwrap();
        assert!(t[0].1.orbit.power.is_zero());
    }

    #[test]
    fn irregular_orbits() {
        let (k, a) = alpha_field();
        let x = IrregularPart::from_coefficients(2, 1, vec![a.clone()]).unwrap();
        let y = IrregularPart::from_coefficients(2, 1, vec![a.neg()]).unwrap();
        assert_eq!(x, y);
        assert_eq!(x.coefficients().unwrap(), y.coefficients().unwrap());
        let z = IrregularPart::from_invariants(2, 1, a.clone(), vec![]).unwrap();
        assert!(matches!(z.coefficients(), Err(Error::FieldExtensionRequired(_))));
        // (3,2): a_1 a_2^{e_1} with 1 + 2e ≡ 0 mod 3, e = 1
        let w = IrregularPart::from_coefficients(3, 2, vec![Scalar::from_int(&k, 5), a.clone()]).unwrap();
        assert_eq!(w.lower_invariants(), &[a.mul(&Scalar::from_int(&k, 5))]);
        assert_eq!(w.leading_power(), &a.pow(3).unwrap());
    }

    #[test]
    fn realize_then_recognize() {
        let (k, a) = alpha_field();
        let blocks = vec![
            ElementaryBlock::pushforward_rank1(2, vec![a.clone()], q(-1, 2)).unwrap(),
            ElementaryBlock::pushforward_rank1(3, vec![Scalar::one(&k), a.clone()], q(-1, 3)).unwrap(),
            ElementaryBlock::tame(a.clone(), jordan_matrix(&[2], &k), vec![q(-1, 5), q(-1, 5)]).unwrap(),
            ElementaryBlock::irregular(
                IrregularPart::from_coefficients(1, 2, vec![Scalar::from_int(&k, 2), a.clone()]).unwrap(),
                Scalar::from_int(&k, 3),
                vec![vec![Scalar::zero(&k)]],
                vec![q(-1, 2)],
            )
            .unwrap(),
        ];
        for b in blocks {
            let g = b.realize(Coordinate::Finite).unwrap();
            let r = recognize(&g).unwrap();
            assert_eq!(r.len(), 1, "{b:?}");
            assert!(r[0].equivalent(&b), "{:?} vs {b:?}", r[0]);
        }
    }
}
