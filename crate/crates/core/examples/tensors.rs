//! Max tensor norm of elementary and summed tensors.

use osscalc::constructions::{max_tensor_norm, TensorElement, TensorTerm};
use osscalc::ground::GroundSpace;
use osscalc::matcore::CMatrix;
use osscalc::sqspaces::{ElementColumn, SeqSpaceDesc};

fn main() -> osscalc::Result<()> {
    let x = ElementColumn::new(SeqSpaceDesc::hilb(2), CMatrix::from_real(2, 1, &[3.0, 4.0])?)?;
    let y = ElementColumn::new(SeqSpaceDesc::min(GroundSpace::linf(2)), CMatrix::from_real(2, 1, &[1.0, -2.0])?)?;
    let u = TensorElement::elementary(x.clone(), y.clone())?;
    let e = max_tensor_norm(&u)?;
    println!("|x (x) y| in [{:.6}, {:.6}], expected 10", e.lower, e.upper);

    // x (x) y + y' (x) y with y' the first axis.
    let axis = ElementColumn::new(SeqSpaceDesc::hilb(2), CMatrix::from_real(2, 1, &[1.0, 0.0])?)?;
    let mut sum = u.clone();
    sum.terms.push(TensorTerm { alpha: CMatrix::identity(1), x: axis, y });
    let e = max_tensor_norm(&sum)?;
    println!("two-term tensor in [{:.6}, {:.6}] ({})", e.lower, e.upper, e.certificate);
    Ok(())
}
