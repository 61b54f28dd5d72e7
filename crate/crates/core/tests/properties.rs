//! Property tests for the invariants of the filtered calculus, the transforms,
//! the schema and the CLI.

use std::sync::atomic::{AtomicUsize, Ordering};

use num_traits::Zero;
use proptest::prelude::*;

use nahmkit::cli::catalog::{global_suite, pushforward_block};
use nahmkit::cli::schema::{ConfigDocument, Datum, LatticeJson, RationalJson, ScalarJson};
use nahmkit::cli::{check, run};
use nahmkit::elliptic_side::{g_equiv, EndoPair, GlobalBlock, Side, TorusPoint, TAU_SYMBOL};
use nahmkit::exact_algebra::{Field, FieldRef, LaurentMatrix, Scalar, TruncatedLaurent};
use nahmkit::filtered_disc::{
    descent, dual_filtered, local_parabolic_degree, pullback_covering, pushforward_covering, q, tensor_filtered,
    FilteredLattice, Q,
};
use nahmkit::higgs_local::{CanonicalGerm, Coordinate, ElementaryBlock};
use nahmkit::local_nahm::{local_nahm_0_inf, local_nahm_inf_0};
use nahmkit::nahm_global::AdmissibleHiggsData;
use nahmkit::oracle::block_oracle;

fn level() -> impl Strategy<Value = Q> {
    prop::sample::select(vec![q(0, 1), q(1, 2), q(-1, 3), q(1, 1)])
}

/// Lattice of rank ≤ 3 with frame U·diag(z^{e_i}), U unitriangular over Z.
fn lattice(field: FieldRef) -> impl Strategy<Value = FilteredLattice> {
    (level(), 1..=3usize).prop_flat_map(move |(a, r)| {
        let field = field.clone();
        (
            prop::collection::vec((-18..18i64, 1..=6i64), r),
            prop::collection::vec(-2..=2i64, r),
            prop::collection::vec(-2..=2i64, r * r),
        )
            .prop_map(move |(ws, es, us)| {
                let weights = ws
                    .iter()
                    .map(|&(n, d)| {
                        let raw = q(n, d);
                        let k = (&a - &raw).floor();
                        raw + k
                    })
                    .collect();
                let mut frame = LaurentMatrix::zeros(&field, r, r);
                for c in 0..r {
                    for row in 0..=c {
                        let u = if row == c { 1 } else { us[row * r + c] };
                        if u != 0 {
                            frame.set(row, c, TruncatedLaurent::monomial(Scalar::from_int(&field, u), es[c]));
                        }
                    }
                }
                FilteredLattice::new(a.clone(), weights, frame).expect("valid lattice")
            })
    })
}

fn weight() -> impl Strategy<Value = Q> {
    (1..=6i64).prop_flat_map(|d| (0..d).prop_map(move |n| q(-n, d)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn dual_is_an_involution(l in lattice(Field::gaussian())) {
        prop_assert_eq!(dual_filtered(&dual_filtered(&l).unwrap()).unwrap(), l);
    }

    #[test]
    fn descent_inverts_pushforward_of_pullback(l in lattice(Field::gaussian()), p in 1..=5u32) {
        let back = descent(&pushforward_covering(&pullback_covering(&l, p).unwrap(), p).unwrap(), p).unwrap();
        prop_assert_eq!(back, l);
    }

    #[test]
    fn tensor_is_commutative(l in lattice(Field::gaussian()), m in lattice(Field::gaussian())) {
        let lm = tensor_filtered(&l, &m).unwrap();
        let ml = tensor_filtered(&m, &l).unwrap();
        prop_assert_eq!(lm.rank(), l.rank() * m.rank());
        prop_assert_eq!(lm.sorted_weights(), ml.sorted_weights());
    }

    #[test]
    fn parabolic_degree_is_additive_and_odd(l in lattice(Field::gaussian()), m in lattice(Field::gaussian())) {
        let m = m.relevel(l.level());
        let sum = l.direct_sum(&m).unwrap();
        let d = |x: &FilteredLattice| local_parabolic_degree(x).unwrap();
        prop_assert_eq!(d(&sum), d(&l) + d(&m));
        prop_assert_eq!(d(&dual_filtered(&sum).unwrap()), -d(&sum));
    }

    #[test]
    fn rationals_roundtrip_through_json(n in any::<i64>(), d in 1..i64::MAX) {
        let x = Q::new(n.into(), d.into());
        let j = RationalJson::emit(&x);
        let back: RationalJson = serde_json::from_str(&serde_json::to_string(&j).unwrap()).unwrap();
        prop_assert_eq!(back.parse().unwrap(), x);
    }

    #[test]
    fn scalars_roundtrip_through_json(c0 in -50..50i64, c1 in -9..9i64, c2 in -9..9i64, z in 0..4i64) {
        let k = Field::with_symbols(3, 2);
        let x = Scalar::from_int(&k, c0)
            .add(&Scalar::var(&k, 0).scale_rational(&q(c1, 7)))
            .add(&Scalar::zeta_pow(&k, z).mul(&Scalar::var(&k, 1)).scale_rational(&q(c2, 1)));
        let y = Scalar::var(&k, 0).add(&Scalar::one(&k));
        for s in [x.clone(), x.div(&y).unwrap()] {
            let j = ScalarJson::emit(&s);
            let back: ScalarJson = serde_json::from_str(&serde_json::to_string(&j).unwrap()).unwrap();
            prop_assert_eq!(back.parse(&k).unwrap(), s);
        }
    }

    #[test]
    fn lattices_roundtrip_through_json(l in lattice(Field::gaussian())) {
        let j = serde_json::to_string(&LatticeJson::emit(&l)).unwrap();
        let back: LatticeJson = serde_json::from_str(&j).unwrap();
        prop_assert_eq!(back.parse(l.field()).unwrap(), l);
    }

    #[test]
    fn documents_roundtrip_through_json(seed in any::<u64>()) {
        let k = Field::with_symbols(1, 2);
        let h = global_suite(&k, 1, seed).unwrap().remove(0);
        let datum = Datum::Higgs(h);
        let doc = ConfigDocument::emit(&datum);
        prop_assert_eq!(ConfigDocument::from_json(&doc.to_json()).unwrap().parse().unwrap(), datum);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn local_nahm_roundtrip(p in 1..=4u32, m in 1..=3u32, a in -5..5i64, c in 1..4i64, w in weight()) {
        prop_assume!(num_integer::Integer::gcd(&p, &m) == 1 && a != 0);
        let k = Field::gaussian();
        let mut coeffs = vec![Scalar::from_int(&k, 1); m as usize];
        coeffs[m as usize - 1] = Scalar::from_rational(&k, &q(a, c));
        let b = ElementaryBlock::pushforward_rank1(p, coeffs, w).unwrap();
        let g = CanonicalGerm::new(Coordinate::Finite, vec![b.clone()]).unwrap();
        let fwd = local_nahm_0_inf(&g).unwrap();
        prop_assert_eq!(fwd.germ.blocks[0].rank(), (p + m) as usize);
        let back = local_nahm_inf_0(&fwd.germ).unwrap();
        prop_assert_eq!(back.germ.blocks, vec![b]);
        prop_assert_eq!(back.degree_shift, -fwd.degree_shift);
    }

    #[test]
    fn spectrum_is_invariant_under_lattice_shifts(
        eig in prop::collection::vec((-6..6i64, 1..=4i64, -3..=3i64), 1..=3),
        upper in prop::collection::vec(-2..=2i64, 3),
        nu in (-4..=4i64, -4..=4i64),
    ) {
        let k = Field::new(1, vec![TAU_SYMBOL.into()]);
        let tau = Scalar::symbol(&k, TAU_SYMBOL).unwrap();
        let n = eig.len();
        let mut f = vec![vec![Scalar::zero(&k); n]; n];
        for (i, &(a, b, t)) in eig.iter().enumerate() {
            f[i][i] = Scalar::from_rational(&k, &q(a, b)).add(&tau.scale_rational(&q(t, 1)));
            for j in i + 1..n {
                f[i][j] = Scalar::from_int(&k, upper[i + j - 1]);
            }
        }
        let shift = Scalar::from_int(&k, nu.0).add(&tau.scale_rational(&q(nu.1, 1)));
        let mut g = f.clone();
        for (i, row) in g.iter_mut().enumerate() {
            row[i] = row[i].add(&shift);
        }
        let a = g_equiv(&EndoPair { label: "V".into(), f }, &k).unwrap();
        let b = g_equiv(&EndoPair { label: "V".into(), f: g }, &k).unwrap();
        prop_assert_eq!(a.spectrum, b.spectrum);
        prop_assert_eq!(a.blocks.iter().map(EndoPair::dim).sum::<usize>(), n);
    }

    #[test]
    fn oracle_values_stabilize(p in 1..=3u32, m in 1..=3u32, n in 8..=14usize, w0 in weight()) {
        prop_assume!(num_integer::Integer::gcd(&p, &m) == 1);
        let k = Field::new(1, vec!["x1".into(), "w".into()]);
        let w = Scalar::var(&k, 1);
        let b = pushforward_block(&k, p, m, w0).unwrap();
        let lo = block_oracle(&b, &w, n).unwrap();
        let hi = block_oracle(&b, &w, n + 5).unwrap();
        prop_assert!(lo.certified && hi.certified);
        prop_assert_eq!((lo.kernel, lo.cokernel), (hi.kernel, hi.cokernel));
    }
}

static DOC_COUNTER: AtomicUsize = AtomicUsize::new(0);

fn write_doc(doc: &ConfigDocument) -> std::path::PathBuf {
    let i = DOC_COUNTER.fetch_add(1, Ordering::Relaxed);
    let path = std::env::temp_dir().join(format!("nahmkit-prop-{}-{i}.json", std::process::id()));
    std::fs::write(&path, doc.to_json()).unwrap();
    path
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn cli_verdict_matches_library(seed in any::<u64>(), trivial in any::<bool>()) {
        let k = Field::with_symbols(1, 2);
        let mut h = global_suite(&k, 1, seed).unwrap().remove(0);
        if trivial {
            let b = ElementaryBlock::tame_rank1(Scalar::zero(&k), Q::zero());
            let extra = AdmissibleHiggsData::new(
                k.clone(),
                vec![GlobalBlock::new(TorusPoint::origin(Side::Dual), b, 0).unwrap()],
            )
            .unwrap();
            h = h.direct_sum(&extra);
        }
        let datum = Datum::Higgs(h);
        let expected = if check(&datum).unwrap().iter().all(|r| r.holds) { 0 } else { 1 };
        let path = write_doc(&ConfigDocument::emit(&datum));
        let out = run(["nahmkit", "check", path.to_str().unwrap()]);
        std::fs::remove_file(&path).unwrap();
        prop_assert_eq!(out.code, expected, "{}", out.stderr);
        prop_assert!(!trivial || out.code == 1);
    }
}
