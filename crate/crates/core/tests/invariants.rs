//! Property tests for the structural invariants.

use osscalc::constructions::{make_dsum_inf, make_dsum_one, make_dual, make_quotient, max_tensor_norm, TensorElement};
use osscalc::freeobjects::universal_map;
use osscalc::ground::{g_dual_norm, g_norm, GroundSpace};
use osscalc::harness::{gen_random_element, run_suite};
use osscalc::matcore::{glue_right, hs_norm, mat_apply, op_norm, polar_decompose, CMatrix, C64};
use osscalc::sqoperators::{
    amp_op_norm, amplify_apply, column_to_operator, dual_operator, operator_to_column, sb_norm, SeqOperator,
};
use osscalc::sqspaces::{estimate, reproduce_lower, ElementColumn, EvalConfig, SeqSpaceDesc};
use proptest::prelude::*;

fn matrix(rows: usize, cols: usize) -> impl Strategy<Value = CMatrix> {
    prop::collection::vec((-3.0..3.0f64, -3.0..3.0f64), rows * cols)
        .prop_map(move |v| CMatrix::new(rows, cols, v.into_iter().map(|(a, b)| C64::new(a, b)).collect()).unwrap())
}

fn sized_matrix(max: usize) -> impl Strategy<Value = CMatrix> {
    (1..=max, 1..=max).prop_flat_map(|(r, c)| matrix(r, c))
}

fn ground() -> impl Strategy<Value = GroundSpace> {
    prop_oneof![
        (1..4usize).prop_map(GroundSpace::l1),
        (1..4usize).prop_map(GroundSpace::l2),
        (1..4usize).prop_map(GroundSpace::linf),
        Just(GroundSpace::opmatrix(2, 2)),
    ]
}

/// Structures with cheap, exact or tight evaluators.
fn space() -> impl Strategy<Value = SeqSpaceDesc> {
    prop_oneof![
        (1..4usize).prop_map(SeqSpaceDesc::hilb),
        (1..4usize).prop_map(SeqSpaceDesc::t2),
        (1..4usize).prop_map(|k| SeqSpaceDesc::min(GroundSpace::l2(k))),
        (1..4usize).prop_map(|k| SeqSpaceDesc::min(GroundSpace::linf(k))),
        (1..4usize).prop_map(SeqSpaceDesc::cstar_diag),
        Just(SeqSpaceDesc::cstar_matrix(2)),
        Just(SeqSpaceDesc::max(GroundSpace::l1(2))),
        Just(SeqSpaceDesc::DSumInf { children: vec![SeqSpaceDesc::hilb(2), SeqSpaceDesc::min(GroundSpace::l2(2))] }),
    ]
}

fn element(max_level: usize) -> impl Strategy<Value = ElementColumn> {
    (space(), 1..=max_level, any::<u64>()).prop_map(|(s, n, seed)| gen_random_element(&s, n, seed).unwrap())
}

fn cfg() -> EvalConfig {
    EvalConfig::default()
}

fn rel(a: f64) -> f64 {
    1e-9 * (1.0 + a.abs())
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 48, ..ProptestConfig::default() })]

    #[test]
    fn hs_dominates_operator_norm(a in sized_matrix(4)) {
        prop_assert!(hs_norm(&a) + 1e-12 >= op_norm(&a));
    }

    #[test]
    fn polar_factors_reconstruct(a in sized_matrix(4)) {
        let (pos, rho) = polar_decompose(&a);
        prop_assert!(pos.matmul(&rho).sub(&a).max_abs() <= 1e-9 * (1.0 + a.max_abs()));
        prop_assert!(op_norm(&rho) <= 1.0 + 1e-9);
    }

    #[test]
    fn matrix_json_round_trip(a in sized_matrix(4)) {
        let back: CMatrix = serde_json::from_str(&serde_json::to_string(&a).unwrap()).unwrap();
        prop_assert_eq!(back, a);
    }

    #[test]
    fn ground_norm_is_a_norm(e in ground(), s in -4.0..4.0f64, seed in any::<u64>()) {
        let x = gen_random_element(&SeqSpaceDesc::hilb(e.dim()), 2, seed).unwrap().coords;
        let (u, v) = (x.column(0), x.column(1));
        let nu = g_norm(&e, &u).unwrap();
        let scaled: Vec<C64> = u.iter().map(|z| z * s).collect();
        prop_assert!((g_norm(&e, &scaled).unwrap() - s.abs() * nu).abs() <= rel(nu));
        let sum: Vec<C64> = u.iter().zip(&v).map(|(a, b)| a + b).collect();
        prop_assert!(g_norm(&e, &sum).unwrap() <= nu + g_norm(&e, &v).unwrap() + rel(nu));
        let pairing: C64 = u.iter().zip(&v).map(|(a, b)| a * b).sum();
        prop_assert!(pairing.norm() <= nu * g_dual_norm(&e, &v).unwrap() + rel(nu));
    }

    #[test]
    fn intervals_are_ordered_and_witnessed(x in element(3)) {
        let e = estimate(&x.space, &x.coords, &cfg()).unwrap();
        prop_assert!(e.lower <= e.upper + rel(e.upper));
        prop_assert!(e.lower >= 0.0);
        let again = reproduce_lower(&x, &e, &cfg());
        prop_assert!(again.is_nan() || (again - e.lower).abs() <= 1e-9 * (1.0 + e.lower));
    }

    #[test]
    fn contraction_axiom(x in element(3), seed in any::<u64>(), m in 1..4usize) {
        let alpha = gen_random_element(&SeqSpaceDesc::hilb(m), x.level(), seed).unwrap().coords;
        let ax = mat_apply(&alpha, &x.coords).unwrap();
        let lhs = estimate(&x.space, &ax, &cfg()).unwrap().lower;
        let rhs = op_norm(&alpha) * estimate(&x.space, &x.coords, &cfg()).unwrap().upper;
        prop_assert!(lhs <= rhs + rel(rhs));
    }

    #[test]
    fn column_axiom(x in element(2), seed in any::<u64>(), m in 1..3usize) {
        let y = gen_random_element(&x.space, m, seed).unwrap().coords;
        let glued = glue_right(&[x.coords.clone(), y.clone()]).unwrap();
        let lhs = estimate(&x.space, &glued, &cfg()).unwrap().lower;
        let ux = estimate(&x.space, &x.coords, &cfg()).unwrap().upper;
        let uy = estimate(&x.space, &y, &cfg()).unwrap().upper;
        prop_assert!(lhs * lhs <= ux * ux + uy * uy + rel(ux * ux + uy * uy));
    }

    #[test]
    fn padding_changes_nothing(x in element(3), extra in 1..3usize) {
        let a = estimate(&x.space, &x.coords, &cfg()).unwrap();
        let b = estimate(&x.space, &x.coords.pad_cols(x.level() + extra), &cfg()).unwrap();
        prop_assert!(a.overlaps(&b, rel(a.upper)));
    }

    #[test]
    fn sandwich(x in element(4)) {
        let whole = estimate(&x.space, &x.coords, &cfg()).unwrap();
        let parts: Vec<_> = (0..x.level())
            .map(|i| estimate(&x.space, &CMatrix::column_vector(&x.coords.column(i)), &cfg()).unwrap())
            .collect();
        for p in &parts {
            prop_assert!(p.lower <= whole.upper + rel(whole.upper));
        }
        let sum: f64 = parts.iter().map(|p| p.upper).sum();
        prop_assert!(whole.lower <= sum + rel(sum));
    }

    #[test]
    fn amplification_commutes_with_scalar_matrices(m in matrix(2, 3), x in matrix(3, 2), alpha in matrix(3, 2)) {
        let phi = SeqOperator::new(SeqSpaceDesc::hilb(3), SeqSpaceDesc::hilb(2), m).unwrap();
        let x = ElementColumn::new(SeqSpaceDesc::hilb(3), x).unwrap();
        let left = mat_apply(&alpha, &amplify_apply(&phi, &x).unwrap().coords).unwrap();
        let ax = ElementColumn::new(SeqSpaceDesc::hilb(3), mat_apply(&alpha, &x.coords).unwrap()).unwrap();
        let right = amplify_apply(&phi, &ax).unwrap().coords;
        prop_assert!(left.sub(&right).max_abs() <= 1e-12 * (1.0 + left.max_abs()));
    }

    #[test]
    fn amplified_norms_increase(m in matrix(2, 3), n in 1..4usize) {
        let phi = SeqOperator::new(SeqSpaceDesc::min(GroundSpace::l2(3)), SeqSpaceDesc::hilb(2), m).unwrap();
        let lo = amp_op_norm(&phi, n).unwrap();
        let hi = amp_op_norm(&phi, n + 1).unwrap();
        prop_assert!(lo.lower <= hi.upper + 1e-9);
    }

    #[test]
    fn dual_operator_has_the_same_sb_norm(m in matrix(2, 2), t2_dom in any::<bool>(), t2_cod in any::<bool>()) {
        let pick = |t2: bool| if t2 { SeqSpaceDesc::t2(2) } else { SeqSpaceDesc::hilb(2) };
        let phi = SeqOperator::new(pick(t2_dom), pick(t2_cod), m).unwrap();
        let a = sb_norm(&phi).unwrap().estimate;
        let b = sb_norm(&dual_operator(&phi)).unwrap().estimate;
        prop_assert!(a.overlaps(&b, rel(a.upper)));
    }

    #[test]
    fn columns_and_operators_correspond(x in element(3)) {
        let psi = column_to_operator(&x);
        prop_assert_eq!(&operator_to_column(&psi).unwrap(), &x);
        if matches!(x.space, SeqSpaceDesc::HilbMax { .. }) {
            let a = sb_norm(&psi).unwrap().estimate;
            let b = estimate(&x.space, &x.coords, &cfg()).unwrap();
            prop_assert!(a.overlaps(&b, 1e-9 * (1.0 + b.upper)));
        }
    }

    #[test]
    fn universal_map_hits_its_column(x in element(3)) {
        let up = estimate(&x.space, &x.coords, &cfg()).unwrap().upper;
        prop_assume!(up > 0.0);
        let unit = ElementColumn::new(x.space.clone(), x.coords.scale(0.5 / up)).unwrap();
        let psi = universal_map(&unit).unwrap();
        let id = ElementColumn::new(SeqSpaceDesc::t2(unit.level()), CMatrix::identity(unit.level())).unwrap();
        prop_assert_eq!(amplify_apply(&psi, &id).unwrap().coords, unit.coords);
    }

    #[test]
    fn quotient_by_zero_is_the_parent(x in element(2)) {
        let q = make_quotient(&x.space, CMatrix::zeros(x.space.dim(), 1)).unwrap();
        let a = estimate(&x.space, &x.coords, &cfg()).unwrap();
        let b = estimate(&q, &x.coords, &cfg()).unwrap();
        prop_assert!(a.overlaps(&b, rel(a.upper)));
    }

    #[test]
    fn singleton_sums_are_the_child(x in element(2)) {
        for s in [make_dsum_inf(vec![x.space.clone()]).unwrap(), make_dsum_one(vec![x.space.clone()]).unwrap()] {
            let a = estimate(&x.space, &x.coords, &cfg()).unwrap();
            let b = estimate(&s, &x.coords, &cfg()).unwrap();
            prop_assert!(a.overlaps(&b, rel(a.upper)));
        }
    }

    #[test]
    fn dual_of_t2_is_frobenius(n in 1..4usize, seed in any::<u64>(), m in 1..3usize) {
        let d = make_dual(&SeqSpaceDesc::t2(n)).unwrap();
        let f = gen_random_element(&d, m, seed).unwrap();
        let e = estimate(&d, &f.coords, &cfg()).unwrap();
        let target = f.coords.frob();
        prop_assert!((e.lower - target).abs() <= 1e-3 * target && (e.upper - target).abs() <= 1e-3 * target);
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 16, ..ProptestConfig::default() })]

    #[test]
    fn elementary_tensors_are_cross(x in element(1), y in element(1)) {
        let ex = estimate(&x.space, &x.coords, &cfg()).unwrap();
        let ey = estimate(&y.space, &y.coords, &cfg()).unwrap();
        let e = max_tensor_norm(&TensorElement::elementary(x, y).unwrap()).unwrap();
        prop_assert!(e.upper <= ex.upper * ey.upper + 1e-9);
        prop_assert!(e.lower >= 0.98 * ex.lower * ey.lower);
    }

    #[test]
    fn reports_are_reproducible(seed in any::<u64>(), trials in 0..20usize) {
        let a = run_suite("sandwich", trials, seed, 3).unwrap();
        let b = run_suite("sandwich", trials, seed, 3).unwrap();
        prop_assert_eq!(a.canonical_json(), b.canonical_json());
        prop_assert_eq!(a.passed(), a.worst_slack <= 0.0);
    }
}
