//! The t2 level norm by factorization search, with and without the
//! invertibility restriction on the scalar factor.

use osscalc::matcore::CMatrix;
use osscalc::sqspaces::{t2n_norm, SeqSpaceDesc};

fn main() -> osscalc::Result<()> {
    let x = CMatrix::from_real(1, 2, &[3.0, 4.0])?;
    let t = t2n_norm(&SeqSpaceDesc::scalars(), &x)?;
    println!("scalars, (3, 4): [{:.9}, {:.9}]", t.estimate.lower, t.estimate.upper);
    println!("  unrestricted {:.9}, invertible {:.9}", t.unrestricted, t.invertible);

    let y = CMatrix::from_real(2, 2, &[1.0, 2.0, 0.0, 1.0])?;
    let t = t2n_norm(&SeqSpaceDesc::hilb(2), &y)?;
    println!("column Hilbert space: [{:.6}, {:.6}]", t.estimate.lower, t.estimate.upper);
    println!("  unrestricted {:.6}, invertible {:.6}", t.unrestricted, t.invertible);
    Ok(())
}
