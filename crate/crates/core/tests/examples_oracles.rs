use osscalc::freeobjects::{build_free, check_universal_property};
use osscalc::ground::GroundSpace;
use osscalc::harness::{gen_random_element, gen_unit_element, run_suite};
use osscalc::matcore::{glue_right, op_norm, CMatrix};
use osscalc::sqoperators::{classify, SeqOperator};
use osscalc::sqspaces::{estimate, EvalConfig, SeqSpaceDesc};

#[test]
fn random_draws_have_full_rank() {
    let s = SeqSpaceDesc::hilb(3);
    let full = (0..1000u64).filter(|&i| gen_random_element(&s, 2, i).unwrap().coords.rank(1e-10) == 2).count();
    assert!(full as f64 / 1000.0 >= 0.999, "{full}");
}

#[test]
fn normalized_draws_stay_in_the_ball() {
    let cfg = EvalConfig::default();
    for (i, s) in [SeqSpaceDesc::max(GroundSpace::l1(2)), SeqSpaceDesc::min(GroundSpace::linf(3))].iter().enumerate() {
        let x = gen_unit_element(s, 2, i as u64, &cfg).unwrap();
        assert!(estimate(s, &x.coords, &cfg).unwrap().upper <= 1.0 + 1e-12);
    }
}

#[test]
fn glue_of_orthogonal_rows_scales_by_root_m() {
    let a = CMatrix::from_real(2, 2, &[0.6, -0.8, 0.8, 0.6]).unwrap().scale(2.0);
    for m in 1..5 {
        let g = glue_right(&vec![a.clone(); m]).unwrap();
        assert!((op_norm(&g) - (m as f64).sqrt() * op_norm(&a)).abs() < 1e-12);
    }
}

#[test]
fn suite_examples() {
    let c = run_suite("c-unique", 100, 42, 4).unwrap();
    assert!(c.passed() && c.worst_slack <= 1e-6);
    assert!(run_suite("smith", 100, 7, 4).unwrap().passed());
}

#[test]
fn universal_property_into_max_l1() {
    let r = check_universal_property(
        &build_free(2, 1).unwrap(),
        &SeqSpaceDesc::max(GroundSpace::l1(2)),
        50,
        1,
        &EvalConfig::default(),
    )
    .unwrap();
    assert!(r.passed(), "{r:?}");
}

#[test]
fn identity_classifies_as_isometric() {
    let phi = SeqOperator::identity(SeqSpaceDesc::cstar_matrix(2)).unwrap();
    let c = classify(&phi, 3).unwrap();
    assert!(c.isometric.iter().all(|b| *b) && c.coisometric.iter().all(|b| *b));
    for k in c.c_inj.iter().chain(&c.c_surj) {
        assert!((k.lower - 1.0).abs() < 1e-9 && (k.upper - 1.0).abs() < 1e-9, "{k:?}");
    }
}
