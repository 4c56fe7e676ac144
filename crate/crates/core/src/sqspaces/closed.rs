//! Closed-form amplified norms, their gradients and unit-ball projections.

use super::{dual_form, SeqSpaceDesc};
use crate::ground::Kind;
use crate::matcore::{CMatrix, C64};

/// Norm shapes that have a closed form at every level.
#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) enum Shape {
    /// Frobenius norm of the coordinates.
    Frob,
    /// Largest singular value of the coordinates.
    Sigma,
    /// Largest Euclidean row norm.
    RowMax,
    /// Largest singular value of the stacked `a × a` blocks.
    Stack(usize),
}

pub(crate) fn shape(d: &SeqSpaceDesc) -> Option<Shape> {
    match d {
        SeqSpaceDesc::HilbMax { .. } => Some(Shape::Frob),
        SeqSpaceDesc::T2 { .. } => Some(Shape::Sigma),
        SeqSpaceDesc::CstarDiag { .. } => Some(Shape::RowMax),
        SeqSpaceDesc::CstarMatrix { a } => Some(Shape::Stack(*a)),
        SeqSpaceDesc::Min { .. } => match d.ground_kind()? {
            Kind::L2(_) => Some(Shape::Sigma),
            Kind::Linf(_) => Some(Shape::RowMax),
            _ => None,
        },
        SeqSpaceDesc::Max { .. } => match d.ground_kind()? {
            Kind::L2(_) => Some(Shape::Frob),
            _ => None,
        },
        _ => None,
    }
}

fn cert(s: Shape) -> &'static str {
    match s {
        Shape::Frob => "hilbert-schmidt",
        Shape::Sigma => "column-operator-norm",
        Shape::RowMax => "row-norm",
        Shape::Stack(_) => "stacked-operator-norm",
    }
}

/// Blocks `[A_1; …; A_n]` with `A_i` the `a × a` matrix of column `i`.
pub(crate) fn stack(x: &CMatrix, a: usize) -> CMatrix {
    let n = x.cols();
    let mut s = CMatrix::zeros(n * a, a);
    for i in 0..n {
        for r in 0..a {
            for c in 0..a {
                s.set(i * a + r, c, x.get(r * a + c, i));
            }
        }
    }
    s
}

fn unstack(s: &CMatrix, a: usize, n: usize) -> CMatrix {
    let mut x = CMatrix::zeros(a * a, n);
    for i in 0..n {
        for r in 0..a {
            for c in 0..a {
                x.set(r * a + c, i, s.get(i * a + r, c));
            }
        }
    }
    x
}

fn row_max(x: &CMatrix) -> (f64, usize) {
    x.row_norms().into_iter().enumerate().fold((0.0, 0), |acc, (i, v)| if v > acc.0 { (v, i) } else { acc })
}

pub(crate) fn shape_value(s: Shape, x: &CMatrix) -> f64 {
    match s {
        Shape::Frob => x.frob(),
        Shape::Sigma => crate::matcore::op_norm(x),
        Shape::RowMax => row_max(x).0,
        Shape::Stack(a) => crate::matcore::op_norm(&stack(x, a)),
    }
}

fn sigma_grad(x: &CMatrix) -> CMatrix {
    let svd = x.svd();
    let mut g = CMatrix::zeros(x.rows(), x.cols());
    if svd.s[0] == 0.0 {
        return g;
    }
    let u = svd.u.column(0);
    let vt = svd.v_t.row(0);
    for (i, ui) in u.iter().enumerate() {
        for (j, vj) in vt.iter().enumerate() {
            g.set(i, j, ui * vj);
        }
    }
    g
}

fn shape_grad(s: Shape, x: &CMatrix) -> CMatrix {
    match s {
        Shape::Frob => {
            let n = x.frob();
            if n == 0.0 {
                CMatrix::zeros(x.rows(), x.cols())
            } else {
                x.scale(1.0 / n)
            }
        }
        Shape::Sigma => sigma_grad(x),
        Shape::RowMax => {
            let (v, i) = row_max(x);
            let mut g = CMatrix::zeros(x.rows(), x.cols());
            if v > 0.0 {
                for j in 0..x.cols() {
                    g.set(i, j, x.get(i, j) / v);
                }
            }
            g
        }
        Shape::Stack(a) => unstack(&sigma_grad(&stack(x, a)), a, x.cols()),
    }
}

fn clip_singular(x: &CMatrix) -> CMatrix {
    let svd = x.svd();
    if svd.s[0] <= 1.0 {
        return x.clone();
    }
    let clipped: Vec<f64> = svd.s.iter().map(|s| s.min(1.0)).collect();
    svd.u.matmul(&CMatrix::diag_real(&clipped)).matmul(&svd.v_t)
}

fn shape_project(s: Shape, x: &CMatrix) -> CMatrix {
    match s {
        Shape::Frob => {
            let n = x.frob();
            if n > 1.0 {
                x.scale(1.0 / n)
            } else {
                x.clone()
            }
        }
        Shape::Sigma => clip_singular(x),
        Shape::RowMax => {
            let mut y = x.clone();
            for (i, r) in x.row_norms().into_iter().enumerate() {
                if r > 1.0 {
                    for j in 0..x.cols() {
                        y.set(i, j, x.get(i, j) / r);
                    }
                }
            }
            y
        }
        Shape::Stack(a) => unstack(&clip_singular(&stack(x, a)), a, x.cols()),
    }
}

fn column(x: &CMatrix) -> Vec<C64> {
    x.column(0)
}

/// Closed-form value when the structure admits one at this level.
pub(crate) fn exact_value(d: &SeqSpaceDesc, x: &CMatrix) -> Option<(f64, &'static str)> {
    if let Some(s) = shape(d) {
        return Some((shape_value(s, x), cert(s)));
    }
    match d {
        SeqSpaceDesc::Min { .. } | SeqSpaceDesc::Max { .. } if x.cols() == 1 => {
            Some((d.ground_kind()?.norm(&column(x)), "ground-norm"))
        }
        SeqSpaceDesc::DSumInf { children } => {
            let mut best: f64 = 0.0;
            let mut start = 0;
            for c in children {
                best = best.max(exact_value(c, &x.rows_block(start, c.dim()))?.0);
                start += c.dim();
            }
            Some((best, "componentwise-max"))
        }
        SeqSpaceDesc::DSumOne { children } if children.len() == 1 => exact_value(&children[0], x),
        SeqSpaceDesc::DSumOne { children } if x.cols() == 1 => {
            let mut total = 0.0;
            let mut start = 0;
            for c in children {
                total += exact_value(c, &x.rows_block(start, c.dim()))?.0;
                start += c.dim();
            }
            Some((total, "level-sum"))
        }
        SeqSpaceDesc::Subspace { child, basis } => exact_value(child, &basis.matmul(x)),
        SeqSpaceDesc::Dual { child } => match child.as_ref() {
            SeqSpaceDesc::CstarMatrix { a } if x.cols() == 1 => {
                Some((Kind::Nuclear { a: *a, b: *a }.norm(&column(x)), "trace-norm"))
            }
            SeqSpaceDesc::CstarMatrix { .. } => None,
            other => {
                let form = dual_form(other);
                exact_value(&form.space, &form.lift_coords(x))
            }
        },
        SeqSpaceDesc::Quotient { child, kernel } => {
            let Some(q) = kernel.range_basis(1e-10) else {
                return exact_value(child, x);
            };
            match shape(child) {
                Some(s @ (Shape::Frob | Shape::Sigma)) => {
                    let r = x.sub(&q.matmul(&q.adjoint().matmul(x)));
                    Some((shape_value(s, &r), "orthogonal-coset"))
                }
                _ => None,
            }
        }
        _ => None,
    }
}

/// Gradient of the closed form, when [`exact_value`] has one.
pub(crate) fn exact_grad(d: &SeqSpaceDesc, x: &CMatrix) -> Option<CMatrix> {
    if let Some(s) = shape(d) {
        return Some(shape_grad(s, x));
    }
    match d {
        SeqSpaceDesc::Min { .. } | SeqSpaceDesc::Max { .. } if x.cols() == 1 => {
            let f = d.ground_kind()?.norming(&column(x));
            let g: Vec<C64> = f.iter().map(|z| z.conj()).collect();
            CMatrix::from_columns(&[g]).ok()
        }
        SeqSpaceDesc::DSumInf { children } => {
            let mut best = (-1.0, 0usize, 0usize);
            let mut start = 0;
            for (i, c) in children.iter().enumerate() {
                let v = exact_value(c, &x.rows_block(start, c.dim()))?.0;
                if v > best.0 {
                    best = (v, i, start);
                }
                start += c.dim();
            }
            let c = &children[best.1];
            let g = exact_grad(c, &x.rows_block(best.2, c.dim()))?;
            Some(embed_rows(&g, best.2, x.rows()))
        }
        SeqSpaceDesc::DSumOne { children } if children.len() == 1 => exact_grad(&children[0], x),
        SeqSpaceDesc::DSumOne { children } if x.cols() == 1 => {
            let mut parts = Vec::new();
            let mut start = 0;
            for c in children {
                parts.push(exact_grad(c, &x.rows_block(start, c.dim()))?);
                start += c.dim();
            }
            CMatrix::vstack(&parts).ok()
        }
        SeqSpaceDesc::Subspace { child, basis } => Some(basis.adjoint().matmul(&exact_grad(child, &basis.matmul(x))?)),
        SeqSpaceDesc::Dual { child } => match child.as_ref() {
            SeqSpaceDesc::CstarMatrix { a } if x.cols() == 1 => {
                let f = Kind::Nuclear { a: *a, b: *a }.norming(&column(x));
                CMatrix::from_columns(&[f.iter().map(|z| z.conj()).collect()]).ok()
            }
            SeqSpaceDesc::CstarMatrix { .. } => None,
            other => {
                let form = dual_form(other);
                let g = exact_grad(&form.space, &form.lift_coords(x))?;
                Some(form.pull_grad(&g))
            }
        },
        SeqSpaceDesc::Quotient { child, kernel } => {
            let Some(q) = kernel.range_basis(1e-10) else {
                return exact_grad(child, x);
            };
            match shape(child) {
                Some(s @ (Shape::Frob | Shape::Sigma)) => {
                    let r = x.sub(&q.matmul(&q.adjoint().matmul(x)));
                    Some(shape_grad(s, &r))
                }
                _ => None,
            }
        }
        _ => None,
    }
}

pub(crate) fn embed_rows(g: &CMatrix, start: usize, rows: usize) -> CMatrix {
    let mut out = CMatrix::zeros(rows, g.cols());
    for i in 0..g.rows() {
        for j in 0..g.cols() {
            out.set(start + i, j, g.get(i, j));
        }
    }
    out
}

/// Nearest-ish point of the closed unit ball, for structures with a cheap
/// exact projection.
pub(crate) fn project_ball(d: &SeqSpaceDesc, x: &CMatrix) -> Option<CMatrix> {
    if let Some(s) = shape(d) {
        return Some(shape_project(s, x));
    }
    match d {
        SeqSpaceDesc::Min { .. } | SeqSpaceDesc::Max { .. } if x.cols() == 1 => match d.ground_kind()? {
            Kind::Linf(_) => {
                let mut y = x.clone();
                for i in 0..x.rows() {
                    let z = x.get(i, 0);
                    if z.norm() > 1.0 {
                        y.set(i, 0, z / z.norm());
                    }
                }
                Some(y)
            }
            _ => None,
        },
        SeqSpaceDesc::DSumInf { children } => {
            let mut parts = Vec::new();
            let mut start = 0;
            for c in children {
                parts.push(project_ball(c, &x.rows_block(start, c.dim()))?);
                start += c.dim();
            }
            CMatrix::vstack(&parts).ok()
        }
        _ => None,
    }
}
