//! Duals, subspaces, quotients and direct sums built from smaller spaces.

use osscalc::constructions::{make_dsum_inf, make_dsum_one, make_dual, make_quotient, make_subspace};
use osscalc::ground::GroundSpace;
use osscalc::matcore::CMatrix;
use osscalc::sqspaces::{estimate, EvalConfig, SeqSpaceDesc};

fn show(label: &str, s: &SeqSpaceDesc, x: &CMatrix) -> osscalc::Result<()> {
    let e = estimate(s, x, &EvalConfig::default())?;
    println!("{label:<32} [{:.6}, {:.6}]  {}", e.lower, e.upper, e.certificate);
    Ok(())
}

fn main() -> osscalc::Result<()> {
    let ones = CMatrix::from_real(2, 1, &[1.0, 1.0])?;
    show("dual of t2(2), f = (1, 1)", &make_dual(&SeqSpaceDesc::t2(2))?, &ones)?;
    show("dual of min(l1), f = (1, 1)", &make_dual(&SeqSpaceDesc::min(GroundSpace::l1(2)))?, &ones)?;

    let axis = CMatrix::from_real(2, 1, &[1.0, 0.0])?;
    let sub = make_subspace(&SeqSpaceDesc::hilb(2), axis)?;
    show("first axis of Hilbert space, x = 3", &sub, &CMatrix::from_real(1, 1, &[3.0])?)?;

    let e2 = CMatrix::from_real(2, 1, &[0.0, 1.0])?;
    let q = make_quotient(&SeqSpaceDesc::hilb(2), e2)?;
    show("coset of (3, 4) modulo e2", &q, &CMatrix::from_real(2, 1, &[3.0, 4.0])?)?;

    let scalars = vec![SeqSpaceDesc::scalars(), SeqSpaceDesc::scalars()];
    show("1-sum of two scalars, (e1, e2)", &make_dsum_one(scalars.clone())?, &CMatrix::identity(2))?;
    show("inf-sum of two scalars, (e1, e2)", &make_dsum_inf(scalars)?, &CMatrix::identity(2))?;
    Ok(())
}
