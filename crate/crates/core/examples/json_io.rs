//! The JSON forms read by the command-line tool: space descriptors,
//! elements and operators.

use osscalc::constructions::make_quotient;
use osscalc::ground::GroundSpace;
use osscalc::matcore::CMatrix;
use osscalc::sqoperators::SeqOperator;
use osscalc::sqspaces::{ElementColumn, SeqSpaceDesc};

fn main() -> osscalc::Result<()> {
    let q = make_quotient(&SeqSpaceDesc::min(GroundSpace::linf(3)), CMatrix::from_real(3, 1, &[1.0, 1.0, 0.0])?)?;
    let text = serde_json::to_string_pretty(&q)?;
    println!("quotient descriptor:\n{text}");
    let back: SeqSpaceDesc = serde_json::from_str(&text)?;
    back.validate()?;
    assert_eq!(back, q);

    let x = ElementColumn::new(SeqSpaceDesc::hilb(2), CMatrix::identity(2))?;
    println!("element: {}", serde_json::to_string(&x)?);

    let phi = SeqOperator::new(SeqSpaceDesc::t2(2), SeqSpaceDesc::hilb(2), CMatrix::diag_real(&[3.0, 4.0]))?;
    println!("operator: {}", serde_json::to_string(&phi)?);

    // Bad input is rejected when validated.
    let bad: SeqSpaceDesc = serde_json::from_str(r#"{"tag":"HilbMax","dim":0}"#)?;
    println!("dim 0 rejected: {}", bad.validate().is_err());
    Ok(())
}
