//! Concrete spaces identified with sequential duals.
//!
//! For a space `X`, [`dual_form`] returns a space `D` and two coordinate
//! maps: a column `c` of `D` is the functional `map · c` on `X`, and a
//! functional `f` on `X` has `D`-coordinates `lift · f`. Norms agree:
//! `‖f‖_{X^△} = ‖lift · f‖_D`.

use super::SeqSpaceDesc;
use crate::ground::GroundSpace;
use crate::matcore::{block_diag, CMatrix};

#[derive(Clone, Debug)]
pub(crate) struct DualForm {
    pub space: SeqSpaceDesc,
    pub map: Option<CMatrix>,
    pub lift: Option<CMatrix>,
}

impl DualForm {
    fn plain(space: SeqSpaceDesc) -> Self {
        DualForm { space, map: None, lift: None }
    }

    pub fn lift_coords(&self, f: &CMatrix) -> CMatrix {
        match &self.lift {
            Some(l) => l.matmul(f),
            None => f.clone(),
        }
    }

    /// Gradient with respect to `f` of a function of `lift · f`.
    pub fn pull_grad(&self, g: &CMatrix) -> CMatrix {
        match &self.lift {
            Some(l) => l.adjoint().matmul(g),
            None => g.clone(),
        }
    }

    /// `H` with `x^T (map c) = H^T c`.
    pub fn pairing_matrix(&self, x: &CMatrix) -> CMatrix {
        match &self.map {
            Some(m) => m.transpose().matmul(x),
            None => x.clone(),
        }
    }

    fn map_or_identity(&self, rows: usize) -> CMatrix {
        self.map.clone().unwrap_or_else(|| CMatrix::identity(rows))
    }
}

fn sum_form(children: &[SeqSpaceDesc], to_one: bool) -> DualForm {
    let forms: Vec<DualForm> = children.iter().map(dual_form).collect();
    let spaces: Vec<SeqSpaceDesc> = forms.iter().map(|f| f.space.clone()).collect();
    let space =
        if to_one { SeqSpaceDesc::DSumOne { children: spaces } } else { SeqSpaceDesc::DSumInf { children: spaces } };
    let needs_maps = forms.iter().any(|f| f.map.is_some() || f.lift.is_some());
    if !needs_maps {
        return DualForm::plain(space);
    }
    let maps: Vec<CMatrix> =
        forms.iter().zip(children).map(|(f, c)| f.map.clone().unwrap_or_else(|| CMatrix::identity(c.dim()))).collect();
    let lifts: Vec<CMatrix> =
        forms.iter().zip(children).map(|(f, c)| f.lift.clone().unwrap_or_else(|| CMatrix::identity(c.dim()))).collect();
    DualForm { space, map: Some(block_diag(&maps)), lift: Some(block_diag(&lifts)) }
}

pub(crate) fn dual_form(d: &SeqSpaceDesc) -> DualForm {
    match d {
        SeqSpaceDesc::HilbMax { dim } => DualForm::plain(SeqSpaceDesc::T2 { n: *dim }),
        SeqSpaceDesc::T2 { n } => DualForm::plain(SeqSpaceDesc::HilbMax { dim: *n }),
        SeqSpaceDesc::Min { ground } => {
            DualForm::plain(SeqSpaceDesc::Max { ground: GroundSpace::dual_of(ground.clone()) })
        }
        SeqSpaceDesc::Max { ground } => {
            DualForm::plain(SeqSpaceDesc::Min { ground: GroundSpace::dual_of(ground.clone()) })
        }
        SeqSpaceDesc::CstarDiag { dim } => DualForm::plain(SeqSpaceDesc::Max { ground: GroundSpace::l1(*dim) }),
        SeqSpaceDesc::CstarMatrix { .. } => DualForm::plain(SeqSpaceDesc::Dual { child: Box::new(d.clone()) }),
        SeqSpaceDesc::DSumInf { children } => sum_form(children, true),
        SeqSpaceDesc::DSumOne { children } => sum_form(children, false),
        SeqSpaceDesc::Dual { child } => DualForm::plain(child.as_ref().clone()),
        SeqSpaceDesc::Subspace { child, basis } => {
            let fx = dual_form(child);
            let m = fx.map_or_identity(child.dim());
            let btm = basis.transpose().matmul(&m);
            let kernel = btm.null_space(1e-10).unwrap_or_else(|| CMatrix::zeros(fx.space.dim(), 1));
            let lift = btm.pinv();
            DualForm {
                space: SeqSpaceDesc::Quotient { child: Box::new(fx.space), kernel },
                map: Some(btm),
                lift: Some(lift),
            }
        }
        SeqSpaceDesc::Quotient { child, kernel } => {
            let fx = dual_form(child);
            let Some(q) = kernel.range_basis(1e-10) else {
                return fx;
            };
            let m = fx.map_or_identity(child.dim());
            let ann =
                q.transpose().matmul(&m).null_space(1e-10).expect("validated kernel leaves a nonzero annihilator");
            let map = m.matmul(&ann);
            let lift = map.pinv();
            DualForm {
                space: SeqSpaceDesc::Subspace { child: Box::new(fx.space), basis: ann },
                map: Some(map),
                lift: Some(lift),
            }
        }
    }
}
