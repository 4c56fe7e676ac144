use super::*;
use crate::ground::GroundSpace;
use crate::optim::gaussian_matrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn re(rows: usize, cols: usize, v: &[f64]) -> CMatrix {
    CMatrix::from_real(rows, cols, v).unwrap()
}

fn est(space: SeqSpaceDesc, x: CMatrix) -> NormEstimate {
    amp_norm(&ElementColumn::new(space, x).unwrap()).unwrap()
}

const R2: f64 = std::f64::consts::SQRT_2;

#[test]
fn hilbert_examples() {
    let e = est(SeqSpaceDesc::hilb(2), CMatrix::identity(2));
    assert!(e.exact && (e.upper - R2).abs() < 1e-12);
    let e = est(SeqSpaceDesc::hilb(2), re(2, 1, &[3.0, 4.0]));
    assert!((e.lower - 5.0).abs() < 1e-12);
}

#[test]
fn minimal_examples() {
    let e = est(SeqSpaceDesc::min(GroundSpace::l2(2)), CMatrix::identity(2));
    assert!(e.exact && (e.upper - 1.0).abs() < 1e-12);
    let e = est(SeqSpaceDesc::min(GroundSpace::linf(2)), re(2, 2, &[1.0, 1.0, 1.0, -1.0]));
    assert!(e.exact && (e.upper - R2).abs() < 1e-12);
    let e = est(SeqSpaceDesc::min(GroundSpace::l2(1)), re(1, 2, &[1.0, 1.0]));
    assert!((e.upper - R2).abs() < 1e-12);
}

#[test]
fn minimal_linf_matches_sphere_sampling() {
    let x = re(2, 2, &[1.0, 1.0, 1.0, -1.0]);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut best: f64 = 0.0;
    for _ in 0..100_000 {
        let xi = gaussian_matrix(&mut rng, 2, 1);
        let v = x.matmul(&xi.scale(1.0 / xi.frob()));
        best = best.max(v.column(0).iter().map(|z| z.norm()).fold(0.0, f64::max));
    }
    assert!((best - R2).abs() < 1e-3);
}

#[test]
fn cstar_examples() {
    let x = re(4, 2, &[1.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0]);
    let e = est(SeqSpaceDesc::cstar_matrix(2), x);
    assert!((e.upper - R2).abs() < 1e-12);
    let e = est(SeqSpaceDesc::cstar_diag(2), CMatrix::identity(2));
    assert!((e.upper - 1.0).abs() < 1e-12);
    let a = re(4, 1, &[1.0, 2.0, 0.0, 1.0]);
    let e = est(SeqSpaceDesc::cstar_matrix(2), a.clone());
    let op = crate::matcore::op_norm(&re(2, 2, &[1.0, 2.0, 0.0, 1.0]));
    assert!((e.upper - op).abs() < 1e-12);
}

#[test]
fn maximal_over_scalars_is_euclidean() {
    let e = est(SeqSpaceDesc::max(GroundSpace::l1(1)), re(1, 2, &[1.0, 1.0]));
    assert!((e.lower - R2).abs() < 1e-6 && (e.upper - R2).abs() < 1e-6);
}

#[test]
fn maximal_l1_pair() {
    let e = est(SeqSpaceDesc::max(GroundSpace::l1(2)), CMatrix::identity(2));
    assert!(e.contains(R2, 1e-9));
    assert!(e.width() <= 0.05 * R2);
}

#[test]
fn maximal_level_one_is_ground_norm() {
    let g = GroundSpace::opmatrix(2, 2);
    let x = re(4, 1, &[1.0, 2.0, -1.0, 0.5]);
    let e = est(SeqSpaceDesc::max(g.clone()), x.clone());
    let n = crate::ground::g_norm(&g, &x.column(0)).unwrap();
    assert!((e.lower - n).abs() < 1e-9 && (e.upper - n).abs() < 1e-9);
}

#[test]
fn sums_examples() {
    let s = SeqSpaceDesc::DSumInf { children: vec![SeqSpaceDesc::hilb(1), SeqSpaceDesc::hilb(1)] };
    let e = est(s, re(2, 1, &[1.0, 2.0]));
    assert!(e.exact && (e.upper - 2.0).abs() < 1e-12);

    let one = SeqSpaceDesc::DSumOne { children: vec![SeqSpaceDesc::scalars(), SeqSpaceDesc::scalars()] };
    let e = est(one.clone(), re(2, 1, &[1.0, 1.0]));
    assert!((e.lower - 2.0).abs() < 1e-9 && (e.upper - 2.0).abs() < 1e-9);
    let e = est(one, CMatrix::identity(2));
    assert!(e.contains(R2, 1e-9));
    assert!(e.width() <= 0.05 * R2);
}

#[test]
fn singleton_sums_match_child() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let x = gaussian_matrix(&mut rng, 3, 2);
    let child = SeqSpaceDesc::min(GroundSpace::l2(3));
    let a = est(child.clone(), x.clone());
    let b = est(SeqSpaceDesc::DSumInf { children: vec![child.clone()] }, x.clone());
    let c = est(SeqSpaceDesc::DSumOne { children: vec![child] }, x);
    assert!((a.upper - b.upper).abs() < 1e-12 && (a.upper - c.upper).abs() < 1e-9);
}

#[test]
fn dual_examples() {
    let d = SeqSpaceDesc::Dual { child: Box::new(SeqSpaceDesc::t2(2)) };
    let e = est(d.clone(), re(2, 1, &[1.0, 1.0]));
    assert!((e.lower - R2).abs() < 1e-9 && (e.upper - R2).abs() < 1e-9);
    let e = est(d, CMatrix::zeros(2, 1));
    assert_eq!((e.lower, e.upper), (0.0, 0.0));
    let d = SeqSpaceDesc::Dual { child: Box::new(SeqSpaceDesc::hilb(3)) };
    let e = est(d, re(3, 1, &[1.0, 2.0, 2.0]));
    assert!((e.upper - 3.0).abs() < 1e-12);
}

#[test]
fn dual_of_t2_by_pairing_search() {
    // sup of |f(x)| over the σ_max ≤ 1 ball, by sampling.
    let f = re(2, 1, &[1.0, 1.0]);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut best: f64 = 0.0;
    for _ in 0..100_000 {
        let x = gaussian_matrix(&mut rng, 2, 1);
        let x = x.scale(1.0 / crate::matcore::op_norm(&x));
        best = best.max(x.transpose().matmul(&f).frob());
    }
    assert!((best - R2).abs() < 1e-3);
}

#[test]
fn dual_of_cstar_is_an_interval() {
    let d = SeqSpaceDesc::Dual { child: Box::new(SeqSpaceDesc::cstar_matrix(2)) };
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let f = gaussian_matrix(&mut rng, 4, 2);
    let e = est(d, f);
    assert!(e.lower <= e.upper + 1e-12);
    assert!(e.lower > 0.0);
}

#[test]
fn subspace_examples() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let x = gaussian_matrix(&mut rng, 2, 2);
    let parent = SeqSpaceDesc::min(GroundSpace::l2(2));
    let s = SeqSpaceDesc::Subspace { child: Box::new(parent.clone()), basis: CMatrix::identity(2) };
    assert!((est(s, x.clone()).upper - est(parent, x).upper).abs() < 1e-12);

    let s = SeqSpaceDesc::Subspace { child: Box::new(SeqSpaceDesc::hilb(2)), basis: re(2, 1, &[1.0, 0.0]) };
    assert!((est(s, re(1, 1, &[3.0])).upper - 3.0).abs() < 1e-12);

    let b = gaussian_matrix(&mut rng, 3, 2);
    let v = gaussian_matrix(&mut rng, 2, 2);
    let parent = SeqSpaceDesc::min(GroundSpace::l2(3));
    let s = SeqSpaceDesc::Subspace { child: Box::new(parent.clone()), basis: b.clone() };
    assert!((est(s, v.clone()).upper - est(parent, b.matmul(&v)).upper).abs() < 1e-12);
}

#[test]
fn quotient_examples() {
    let q = SeqSpaceDesc::Quotient { child: Box::new(SeqSpaceDesc::hilb(2)), kernel: re(2, 1, &[0.0, 1.0]) };
    let e = est(q, re(2, 1, &[3.0, 4.0]));
    assert!(e.exact && (e.upper - 3.0).abs() < 1e-12);

    let parent = SeqSpaceDesc::min(GroundSpace::linf(2));
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let x = gaussian_matrix(&mut rng, 2, 2);
    let q = SeqSpaceDesc::Quotient { child: Box::new(parent.clone()), kernel: CMatrix::zeros(2, 1) };
    assert!((est(q, x.clone()).upper - est(parent, x).upper).abs() < 1e-9);
}

#[test]
fn quotient_of_min_l2_is_tight() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let q = SeqSpaceDesc::Quotient {
        child: Box::new(SeqSpaceDesc::min(GroundSpace::l2(3))),
        kernel: re(3, 1, &[0.0, 0.0, 1.0]),
    };
    for _ in 0..5 {
        let x = gaussian_matrix(&mut rng, 3, 2);
        let e = est(q.clone(), x);
        assert!(e.width() <= 0.02 * e.upper);
    }
}

#[test]
fn quotient_of_min_linf_interval() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let q = SeqSpaceDesc::Quotient {
        child: Box::new(SeqSpaceDesc::min(GroundSpace::linf(3))),
        kernel: re(3, 1, &[1.0, 1.0, 0.0]),
    };
    let x = gaussian_matrix(&mut rng, 3, 2);
    let e = est(q, x);
    assert!(e.lower <= e.upper + 1e-12);
    assert!(e.width() <= 0.1 * e.upper, "{e:?}");
}

#[test]
fn witnesses_reproduce_lower_bounds() {
    let cfg = EvalConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let spaces = vec![
        SeqSpaceDesc::min(GroundSpace::l1(3)),
        SeqSpaceDesc::min(GroundSpace::opmatrix(2, 2)),
        SeqSpaceDesc::max(GroundSpace::l1(2)),
        SeqSpaceDesc::max(GroundSpace::linf(3)),
        SeqSpaceDesc::DSumOne { children: vec![SeqSpaceDesc::hilb(2), SeqSpaceDesc::t2(1)] },
        SeqSpaceDesc::Dual { child: Box::new(SeqSpaceDesc::min(GroundSpace::l1(2))) },
        SeqSpaceDesc::Quotient {
            child: Box::new(SeqSpaceDesc::max(GroundSpace::l1(3))),
            kernel: re(3, 1, &[1.0, 0.0, 1.0]),
        },
    ];
    for s in spaces {
        let x = gaussian_matrix(&mut rng, s.dim(), 2);
        let el = ElementColumn::new(s.clone(), x).unwrap();
        let e = amp_norm(&el).unwrap();
        assert!(e.lower <= e.upper + 1e-12, "{s:?} {e:?}");
        let r = reproduce_lower(&el, &e, &cfg);
        assert!((r - e.lower).abs() <= 1e-9 * (1.0 + e.lower), "{s:?}");
    }
}

#[test]
fn pairing_amplify_examples() {
    let x = ElementColumn::new(SeqSpaceDesc::hilb(2), re(2, 1, &[1.0, 0.0])).unwrap();
    let f = ElementColumn::new(SeqSpaceDesc::Dual { child: Box::new(SeqSpaceDesc::hilb(2)) }, re(2, 1, &[1.0, 0.0]))
        .unwrap();
    assert_eq!(pairing_amplify(&x, &f).unwrap(), vec![C64::new(1.0, 0.0)]);
    let g = ElementColumn::new(SeqSpaceDesc::hilb(3), re(3, 1, &[1.0, 0.0, 0.0])).unwrap();
    assert!(pairing_amplify(&x, &g).is_err());
}

#[test]
fn wrong_tags_and_shapes_are_rejected() {
    let x = ElementColumn::new(SeqSpaceDesc::hilb(2), CMatrix::identity(2)).unwrap();
    assert!(matches!(min_norm(&x), Err(Error::Structure(_))));
    assert!(ElementColumn::new(SeqSpaceDesc::hilb(3), CMatrix::identity(2)).is_err());
    let bad = SeqSpaceDesc::Subspace { child: Box::new(SeqSpaceDesc::hilb(2)), basis: re(2, 2, &[1.0, 1.0, 1.0, 1.0]) };
    assert!(matches!(bad.validate(), Err(Error::Descriptor(_))));
    assert!(SeqSpaceDesc::DSumOne { children: vec![] }.validate().is_err());
}

#[test]
fn descriptor_json_round_trip() {
    let d = SeqSpaceDesc::DSumOne {
        children: vec![
            SeqSpaceDesc::t2(2),
            SeqSpaceDesc::Dual { child: Box::new(SeqSpaceDesc::max(GroundSpace::l1(2))) },
        ],
    };
    let s = serde_json::to_string(&d).unwrap();
    let back: SeqSpaceDesc = serde_json::from_str(&s).unwrap();
    assert_eq!(back, d);
}
