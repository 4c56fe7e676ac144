//! Scalar matrix helpers: norms, polar decomposition, gluing and the
//! matrix action on columns.

use osscalc::matcore::{glue_right, hs_norm, mat_apply, nuclear_norm, op_norm, polar_decompose, CMatrix};

fn main() -> osscalc::Result<()> {
    let a = CMatrix::from_real(3, 2, &[1.0, 2.0, 0.0, 1.0, -1.0, 0.5])?;
    println!("operator norm     {:.6}", op_norm(&a));
    println!("Hilbert-Schmidt   {:.6}", hs_norm(&a));
    println!("nuclear           {:.6}", nuclear_norm(&a));

    let (pos, rho) = polar_decompose(&a);
    let err = pos.matmul(&rho).sub(&a).max_abs();
    println!("polar: |pos*rho - a| = {err:.2e}, |rho| = {:.6}", op_norm(&rho));

    let glued = glue_right(&[a.clone(), CMatrix::zeros(3, 1)])?;
    println!("glued shape       {}x{}", glued.rows(), glued.cols());

    // Columns of `x` are ground vectors; alpha mixes them.
    let x = CMatrix::from_real(2, 3, &[1.0, 0.0, 2.0, 0.0, 1.0, -1.0])?;
    let alpha = CMatrix::from_real(2, 3, &[1.0, 1.0, 0.0, 0.0, 0.0, 1.0])?;
    let ax = mat_apply(&alpha, &x)?;
    for j in 0..ax.cols() {
        let col: Vec<String> = ax.column(j).iter().map(|z| format!("{z}")).collect();
        println!("column {j} of alpha . x: ({})", col.join(", "));
    }
    Ok(())
}
