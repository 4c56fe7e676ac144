//! Certified norm intervals at higher levels for the standard structures.

use osscalc::ground::GroundSpace;
use osscalc::matcore::CMatrix;
use osscalc::sqspaces::{estimate, EvalConfig, SeqSpaceDesc};

fn main() -> osscalc::Result<()> {
    let cfg = EvalConfig::default();
    let pair = CMatrix::identity(2);
    let spaces = [
        ("column Hilbert", SeqSpaceDesc::hilb(2)),
        ("t2", SeqSpaceDesc::t2(2)),
        ("min l2", SeqSpaceDesc::min(GroundSpace::l2(2))),
        ("min linf", SeqSpaceDesc::min(GroundSpace::linf(2))),
        ("max l1", SeqSpaceDesc::max(GroundSpace::l1(2))),
        ("diagonal C*", SeqSpaceDesc::cstar_diag(2)),
    ];
    println!("the pair (e1, e2) at level 2:");
    for (name, s) in &spaces {
        let e = estimate(s, &pair, &cfg)?;
        println!("  {name:<15} [{:.6}, {:.6}]  {}", e.lower, e.upper, e.certificate);
    }

    let x = CMatrix::from_real(1, 2, &[3.0, 4.0])?;
    let e = estimate(&SeqSpaceDesc::max(GroundSpace::l1(1)), &x, &cfg)?;
    println!("(3, 4) over the scalars with the max structure: [{:.9}, {:.9}]", e.lower, e.upper);
    Ok(())
}
