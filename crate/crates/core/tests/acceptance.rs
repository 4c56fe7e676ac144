//! The thirteen acceptance criteria, one line each. Runs without the
//! libtest harness so the verdicts always reach the output.

use std::time::{Duration, Instant};

use osscalc::constructions::{make_quotient, max_tensor_norm, TensorElement};
use osscalc::freeobjects::{build_free, check_universal_property};
use osscalc::ground::GroundSpace;
use osscalc::harness::{run_default, run_suite, suite_ids, HarnessConfig, PropertyReport};
use osscalc::matcore::CMatrix;
use osscalc::sqoperators::{amp_op_norm, SeqOperator};
use osscalc::sqspaces::{estimate, t2n_norm, ElementColumn, EvalConfig, SeqSpaceDesc};

const SEED: u64 = 42;

type Criterion = (&'static str, fn() -> Verdict);

struct Verdict {
    ok: bool,
    detail: String,
}

fn suite(id: &str, trials: usize, n_max: usize) -> (bool, String) {
    match run_suite(id, trials, SEED, n_max) {
        Ok(r) => (r.passed(), summary(&r)),
        Err(e) => (false, format!("{id}: error {e}")),
    }
}

fn summary(r: &PropertyReport) -> String {
    format!("{} {} trials, {} failures, worst slack {:.2e}", r.suite_id, r.trials, r.failures.len(), r.worst_slack)
}

fn timed(limit: Duration, f: impl FnOnce() -> Verdict) -> Verdict {
    let start = Instant::now();
    let mut v = f();
    let took = start.elapsed();
    if took > limit {
        v.ok = false;
    }
    v.detail = format!("{}; {:.1}s (limit {}s)", v.detail, took.as_secs_f64(), limit.as_secs());
    v
}

fn all(parts: Vec<(bool, String)>) -> Verdict {
    Verdict { ok: parts.iter().all(|p| p.0), detail: parts.into_iter().map(|p| p.1).collect::<Vec<_>>().join("; ") }
}

fn check(ok: bool, detail: String) -> (bool, String) {
    (ok, detail)
}

fn diag34() -> SeqOperator {
    SeqOperator::new(SeqSpaceDesc::t2(2), SeqSpaceDesc::hilb(2), CMatrix::diag_real(&[3.0, 4.0])).unwrap()
}

fn c1() -> Verdict {
    timed(Duration::from_secs(10), || all(vec![suite("c-unique", 100, 4)]))
}

fn c2() -> Verdict {
    timed(Duration::from_secs(30), || all(vec![suite("axioms", 200, 4)]))
}

fn c3() -> Verdict {
    all(vec![suite("sandwich", 500, 4)])
}

fn c4() -> Verdict {
    let phi = diag34();
    let levels: Vec<f64> = (1..=4).map(|n| amp_op_norm(&phi, n).unwrap().lower).collect();
    let pinched = (1..=4).all(|n| {
        let e = amp_op_norm(&phi, n).unwrap();
        (e.upper - e.lower).abs() < 1e-9
    });
    let anchor = pinched && (levels[0] - 4.0).abs() < 1e-9 && levels[1..].iter().all(|v| (v - 5.0).abs() < 1e-9);
    all(vec![suite("smith", 100, 4), check(anchor, format!("diag(3,4) levels {levels:?}"))])
}

fn c5() -> Verdict {
    all(vec![suite("functional", 100, 4)])
}

fn c6() -> Verdict {
    all(vec![suite("op-duality", 100, 4), suite("class-duality", 20, 3)])
}

fn c7() -> Verdict {
    all(vec![suite("t2-dual", 100, 4)])
}

fn c8() -> Verdict {
    let x = CMatrix::from_real(1, 2, &[3.0, 4.0]).unwrap();
    let t = t2n_norm(&SeqSpaceDesc::scalars(), &x).unwrap();
    let ok = (t.estimate.lower - 5.0).abs() <= 1e-6 && (t.estimate.upper - 5.0).abs() <= 1e-6;
    let anchor = format!("(3,4) -> [{:.9}, {:.9}]", t.estimate.lower, t.estimate.upper);
    all(vec![suite("t2-invertible", 50, 4), check(ok, anchor)])
}

fn c9() -> Verdict {
    all(vec![suite("cstar-min", 500, 4)])
}

fn c10() -> Verdict {
    let sum = SeqSpaceDesc::DSumOne { children: vec![SeqSpaceDesc::scalars(), SeqSpaceDesc::scalars()] };
    let e = estimate(&sum, &CMatrix::identity(2), &EvalConfig::default()).unwrap();
    let r2 = 2f64.sqrt();
    let ok = (e.lower - r2).abs() <= 0.05 * r2 && (e.upper - r2).abs() <= 0.05 * r2;
    all(vec![
        suite("minmax-dual", 100, 3),
        suite("sum-dual", 100, 3),
        suite("l1-max", 100, 3),
        check(ok, format!("1-sum anchor [{:.6}, {:.6}]", e.lower, e.upper)),
    ])
}

fn c11() -> Verdict {
    let q = make_quotient(&SeqSpaceDesc::hilb(2), CMatrix::from_real(2, 1, &[0.0, 1.0]).unwrap()).unwrap();
    let e = estimate(&q, &CMatrix::from_real(2, 1, &[3.0, 4.0]).unwrap(), &EvalConfig::default()).unwrap();
    let ok = e.lower == 3.0 && e.upper == 3.0;
    all(vec![suite("quotient-coiso", 50, 3), check(ok, format!("coset of (3,4) -> [{}, {}]", e.lower, e.upper))])
}

fn c12() -> Verdict {
    let free = build_free(3, 1).unwrap();
    let cfg = EvalConfig::default();
    let targets = [
        SeqSpaceDesc::scalars(),
        SeqSpaceDesc::min(GroundSpace::linf(2)),
        SeqSpaceDesc::max(GroundSpace::l1(2)),
        SeqSpaceDesc::hilb(2),
    ];
    let mut parts = Vec::new();
    for t in &targets {
        parts.push(match check_universal_property(&free, t, 200, SEED, &cfg) {
            Ok(r) => check(r.passed(), format!("{} into {}", summary(&r), t.tag())),
            Err(e) => check(false, format!("free-universal into {}: error {e}", t.tag())),
        });
    }
    parts.push(suite("cofree-dual", 100, 3));
    let config = HarnessConfig::builtin();
    let start = Instant::now();
    let every = suite_ids().into_iter().all(|id| run_default(id, config.seed, &config).is_ok_and(|r| r.passed()));
    let took = start.elapsed();
    parts.push(check(
        every && took < Duration::from_secs(300),
        format!("verify all {} in {:.1}s", if every { "passed" } else { "failed" }, took.as_secs_f64()),
    ));
    all(parts)
}

fn c13() -> Verdict {
    let one = ElementColumn::new(SeqSpaceDesc::scalars(), CMatrix::identity(1)).unwrap();
    let e = max_tensor_norm(&TensorElement::elementary(one.clone(), one).unwrap()).unwrap();
    let ok = (e.lower - 1.0).abs() <= 1e-9 && (e.upper - 1.0).abs() <= 1e-9;
    all(vec![suite("tensor-cross", 100, 1), check(ok, format!("C (x) C -> [{}, {}]", e.lower, e.upper))])
}

fn main() {
    let criteria: [Criterion; 13] = [
        ("uniqueness of the scalar structure", c1),
        ("axioms", c2),
        ("sandwich inequalities", c3),
        ("smith plateau", c4),
        ("functional flatness", c5),
        ("operator duality", c6),
        ("t2 duality", c7),
        ("t2 invertible factorization", c8),
        ("commutative C* is min", c9),
        ("min/max and sum dualities", c10),
        ("quotient coisometry", c11),
        ("free universal property", c12),
        ("tensor cross-norm", c13),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let v = f();
        if !v.ok {
            failed += 1;
        }
        println!("criterion {:>2} {:<36} {}  ({})", i + 1, name, if v.ok { "PASS" } else { "FAIL" }, v.detail);
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
