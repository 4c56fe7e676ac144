//! Amplified operator norms, the level plateau and the classification of
//! an operator as contractive, isometric or coisometric.

use osscalc::ground::GroundSpace;
use osscalc::matcore::CMatrix;
use osscalc::sqoperators::{amp_op_norm, classify, dual_operator, sb_norm, SeqOperator};
use osscalc::sqspaces::SeqSpaceDesc;

fn main() -> osscalc::Result<()> {
    let phi = SeqOperator::new(SeqSpaceDesc::t2(2), SeqSpaceDesc::hilb(2), CMatrix::diag_real(&[3.0, 4.0]))?;
    for n in 1..=4 {
        let e = amp_op_norm(&phi, n)?;
        println!("level {n}: [{:.6}, {:.6}]", e.lower, e.upper);
    }
    let sb = sb_norm(&phi)?;
    println!("sb norm reached at level {}: {:.6}", sb.level, sb.estimate.upper);
    let dual = sb_norm(&dual_operator(&phi))?;
    println!("dual operator sb norm: {:.6}", dual.estimate.upper);

    let f = SeqOperator::new(
        SeqSpaceDesc::min(GroundSpace::l2(2)),
        SeqSpaceDesc::scalars(),
        CMatrix::from_real(1, 2, &[1.0, 1.0])?,
    )?;
    println!("functional (1, 1): sb norm {:.6}", sb_norm(&f)?.estimate.upper);

    let half = SeqOperator::new(SeqSpaceDesc::hilb(2), SeqSpaceDesc::hilb(2), CMatrix::diag_real(&[1.0, 0.5]))?;
    let c = classify(&half, 2)?;
    println!("{}", serde_json::to_string_pretty(&c).expect("serializes"));
    Ok(())
}
