//! Truncated free and cofree objects, and the universal map of a column.

use osscalc::freeobjects::{build_cofree, build_free, check_universal_property, universal_map};
use osscalc::ground::GroundSpace;
use osscalc::matcore::CMatrix;
use osscalc::sqoperators::{amplify_apply, sb_norm};
use osscalc::sqspaces::{ElementColumn, EvalConfig, SeqSpaceDesc};

fn main() -> osscalc::Result<()> {
    let free = build_free(3, 2)?;
    let cofree = build_cofree(3, 2)?;
    println!("free object: dimension {}, {} marked columns", free.dim(), free.marked().len());
    println!("cofree object: dimension {}", cofree.space.dim());

    let x = ElementColumn::new(SeqSpaceDesc::hilb(2), CMatrix::identity(2).scale(0.5f64.sqrt()))?;
    let psi = universal_map(&x)?;
    let unit = ElementColumn::new(SeqSpaceDesc::t2(2), CMatrix::identity(2))?;
    let image = amplify_apply(&psi, &unit)?;
    println!("psi(I_2) == x: {}", image.coords == x.coords);
    let sb = sb_norm(&psi)?.estimate;
    println!("sb norm of psi: [{:.9}, {:.9}]", sb.lower, sb.upper);

    let target = SeqSpaceDesc::min(GroundSpace::linf(2));
    let report = check_universal_property(&free, &target, 50, 7, &EvalConfig::default())?;
    println!("universal property over min(linf 2): {} failures in {} trials", report.failures.len(), report.trials);
    Ok(())
}
