//! Builders for derived spaces and bounds for the maximal tensor norm.

use serde::{Deserialize, Serialize};

use crate::error::{dim_err, Error, Result};
use crate::matcore::{op_norm, CMatrix, C64};
use crate::sqspaces::{
    estimate, level1_functional, upper, Effort, ElementColumn, EvalConfig, NormEstimate, SeqSpaceDesc, Witness,
};

fn built(d: SeqSpaceDesc) -> Result<SeqSpaceDesc> {
    d.validate()?;
    Ok(d)
}

pub fn make_dual(x: &SeqSpaceDesc) -> Result<SeqSpaceDesc> {
    built(SeqSpaceDesc::Dual { child: Box::new(x.clone()) })
}

/// The subspace spanned by the columns of `basis`.
pub fn make_subspace(x: &SeqSpaceDesc, basis: CMatrix) -> Result<SeqSpaceDesc> {
    built(SeqSpaceDesc::Subspace { child: Box::new(x.clone()), basis })
}

/// The quotient by the span of the columns of `kernel`.
pub fn make_quotient(x: &SeqSpaceDesc, kernel: CMatrix) -> Result<SeqSpaceDesc> {
    built(SeqSpaceDesc::Quotient { child: Box::new(x.clone()), kernel })
}

pub fn make_dsum_inf(children: Vec<SeqSpaceDesc>) -> Result<SeqSpaceDesc> {
    built(SeqSpaceDesc::DSumInf { children })
}

pub fn make_dsum_one(children: Vec<SeqSpaceDesc>) -> Result<SeqSpaceDesc> {
    built(SeqSpaceDesc::DSumOne { children })
}

/// One summand `α (x ⊗ y)` where `x ⊗ y` lists `x_a ⊗ y_b` in the order
/// `a · l + b`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TensorTerm {
    /// `n × l²`.
    pub alpha: CMatrix,
    pub x: ElementColumn,
    pub y: ElementColumn,
}

/// An element of `(X ⊗ Y)ⁿ` given as `Σ_i α_i (x_i ⊗ y_i)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TensorElement {
    pub left: SeqSpaceDesc,
    pub right: SeqSpaceDesc,
    pub level: usize,
    pub terms: Vec<TensorTerm>,
}

impl TensorElement {
    /// `x ⊗ y` for two elements of level one.
    pub fn elementary(x: ElementColumn, y: ElementColumn) -> Result<Self> {
        let u = TensorElement {
            left: x.space.clone(),
            right: y.space.clone(),
            level: 1,
            terms: vec![TensorTerm { alpha: CMatrix::identity(1), x, y }],
        };
        u.validate()?;
        Ok(u)
    }

    pub fn validate(&self) -> Result<()> {
        self.left.validate()?;
        self.right.validate()?;
        if self.level == 0 {
            return dim_err("tensor element of level 0");
        }
        for (i, t) in self.terms.iter().enumerate() {
            if t.x.space != self.left || t.y.space != self.right {
                return Err(Error::Structure(format!("term {i} lives over different spaces")));
            }
            let l = t.x.level();
            if t.y.level() != l {
                return dim_err(format!("term {i} pairs levels {l} and {}", t.y.level()));
            }
            if t.alpha.rows() != self.level || t.alpha.cols() != l * l {
                return dim_err(format!(
                    "term {i}: coefficient matrix is {}×{}, expected {}×{}",
                    t.alpha.rows(),
                    t.alpha.cols(),
                    self.level,
                    l * l
                ));
            }
            if t.x.coords.rows() != self.left.dim() || t.y.coords.rows() != self.right.dim() {
                return dim_err(format!("term {i} has coordinates of the wrong length"));
            }
        }
        Ok(())
    }

    /// Coordinates in `X ⊗ Y`, index `p · dim Y + q`, one column per component.
    pub fn coords(&self) -> CMatrix {
        let (kx, ky) = (self.left.dim(), self.right.dim());
        let mut u = CMatrix::zeros(kx * ky, self.level);
        for t in &self.terms {
            let l = t.x.level();
            for r in 0..self.level {
                for a in 0..l {
                    for b in 0..l {
                        let c = t.alpha.get(r, a * l + b);
                        if c == C64::new(0.0, 0.0) {
                            continue;
                        }
                        for p in 0..kx {
                            let xp = c * t.x.coords.get(p, a);
                            for q in 0..ky {
                                let z = u.get(p * ky + q, r) + xp * t.y.coords.get(q, b);
                                u.set(p * ky + q, r, z);
                            }
                        }
                    }
                }
            }
        }
        u
    }
}

/// `[α_1/w_1, …, α_k/w_k]` glued side by side.
fn glued(alphas: &[CMatrix], w: &[f64]) -> CMatrix {
    let parts: Vec<CMatrix> = alphas.iter().zip(w).map(|(a, &wi)| a.scale(1.0 / wi)).collect();
    crate::matcore::glue_right(&parts).expect("equal row counts")
}

/// Minimizes `‖[α_i / w_i]‖ · ‖w‖₂` over positive weights, starting from
/// `w_i = p_i`.
fn rescaled_upper(alphas: &[CMatrix], p: &[f64]) -> f64 {
    let active: Vec<usize> = (0..p.len()).filter(|&i| p[i] > 0.0 && alphas[i].max_abs() > 0.0).collect();
    if active.is_empty() {
        return 0.0;
    }
    let b: Vec<CMatrix> = active.iter().map(|&i| alphas[i].scale(p[i])).collect();
    let value = |w: &[f64]| op_norm(&glued(&b, w)) * w.iter().map(|x| x * x).sum::<f64>().sqrt();
    let mut w = vec![1.0; b.len()];
    let mut best = value(&w);
    for _ in 0..30 {
        let g = glued(&b, &w);
        let u = g.svd().u.column(0);
        let uc = CMatrix::column_vector(&u).adjoint();
        let next: Vec<f64> = b.iter().map(|bi| uc.matmul(bi).frob().sqrt().max(1e-300)).collect();
        let v = value(&next);
        w = next;
        if v < best * (1.0 - 1e-12) {
            best = v;
        } else {
            best = best.min(v);
            break;
        }
    }
    best
}

/// Slices `U_r` of the tensor coordinates as `dim X × dim Y` matrices.
fn slices(u: &CMatrix, kx: usize, ky: usize) -> Vec<CMatrix> {
    (0..u.cols())
        .map(|r| {
            let mut m = CMatrix::zeros(kx, ky);
            for p in 0..kx {
                for q in 0..ky {
                    m.set(p, q, u.get(p * ky + q, r));
                }
            }
            m
        })
        .collect()
}

fn dual_norm(d: &SeqSpaceDesc, f: &[C64], cfg: &EvalConfig) -> f64 {
    upper(&SeqSpaceDesc::Dual { child: Box::new(d.clone()) }, &CMatrix::column_vector(f), Effort::Fast, cfg).0
}

/// `‖(fᵀ U_r g)_r‖₂ / (‖f‖ ‖g‖)`.
fn product_value(u: &TensorElement, f: &[C64], g: &[C64], cfg: &EvalConfig) -> f64 {
    let (kx, ky) = (u.left.dim(), u.right.dim());
    let fm = CMatrix::column_vector(f).transpose();
    let gm = CMatrix::column_vector(g);
    let num =
        slices(&u.coords(), kx, ky).iter().map(|s| fm.matmul(s).matmul(&gm).get(0, 0).norm_sqr()).sum::<f64>().sqrt();
    let den = dual_norm(&u.left, f, cfg) * dual_norm(&u.right, g, cfg);
    if den > 0.0 {
        num / den
    } else {
        0.0
    }
}

/// Best functional on `d` for the columns of `m`: power iteration on
/// `sup_ξ N(m ξ)`.
fn best_functional(d: &SeqSpaceDesc, m: &CMatrix, cfg: &EvalConfig) -> Option<Vec<C64>> {
    let svd = m.svd();
    let mut xi = CMatrix::column_vector(&svd.v_t.row(0).iter().map(|z| z.conj()).collect::<Vec<_>>());
    let mut f = None;
    for _ in 0..20 {
        let next = level1_functional(d, &m.matmul(&xi), cfg)?;
        let h = m.transpose().matmul(&CMatrix::column_vector(&next));
        f = Some(next);
        let hn = h.frob();
        if hn == 0.0 {
            break;
        }
        let moved = h.conj().scale(1.0 / hn);
        let step = moved.sub(&xi).frob();
        xi = moved;
        if step < 1e-12 {
            break;
        }
    }
    f
}

fn product_lower(u: &TensorElement, cfg: &EvalConfig) -> (f64, Vec<C64>, Vec<C64>) {
    let (kx, ky) = (u.left.dim(), u.right.dim());
    let sl = slices(&u.coords(), kx, ky);
    let inner = cfg.inner();
    let mut starts: Vec<Vec<C64>> = Vec::new();
    for t in &u.terms {
        for b in 0..t.y.level() {
            if let Some(g) = level1_functional(&u.right, &CMatrix::column_vector(&t.y.coords.column(b)), &inner) {
                starts.push(g);
            }
        }
    }
    let stacked = crate::matcore::glue_right(&sl.iter().map(|s| s.transpose()).collect::<Vec<_>>()).expect("slices");
    starts.push(stacked.svd().u.column(0).iter().map(|z| z.conj()).collect());
    let mut best = (0.0, vec![C64::new(0.0, 0.0); kx], vec![C64::new(0.0, 0.0); ky]);
    for g0 in starts.into_iter().take(8) {
        let mut g = g0;
        let mut last = 0.0;
        for _ in 0..15 {
            let mg = crate::matcore::glue_right(
                &sl.iter().map(|s| s.matmul(&CMatrix::column_vector(&g))).collect::<Vec<_>>(),
            )
            .expect("slices");
            let Some(f) = best_functional(&u.left, &mg, &inner) else { break };
            let mf = crate::matcore::glue_right(
                &sl.iter().map(|s| s.transpose().matmul(&CMatrix::column_vector(&f))).collect::<Vec<_>>(),
            )
            .expect("slices");
            let Some(g2) = best_functional(&u.right, &mf, &inner) else { break };
            g = g2;
            let v = product_value(u, &f, &g, cfg);
            if v > best.0 {
                best = (v, f.clone(), g.clone());
            }
            if v <= last * (1.0 + 1e-12) {
                break;
            }
            last = v;
        }
    }
    best
}

/// Re-evaluates the lower bound carried by a tensor norm estimate.
pub fn reproduce_tensor_lower(u: &TensorElement, est: &NormEstimate, cfg: &EvalConfig) -> f64 {
    match &est.witness {
        Witness::Product { left, right } => product_value(u, &left.column(0), &right.column(0), cfg),
        Witness::Zero => 0.0,
        _ => f64::NAN,
    }
}

pub fn max_tensor_norm(u: &TensorElement) -> Result<NormEstimate> {
    max_tensor_norm_with(u, &EvalConfig::default())
}

/// Bounds on the maximal tensor norm: the given representation, rescaled,
/// above, and the best product functional found below.
pub fn max_tensor_norm_with(u: &TensorElement, cfg: &EvalConfig) -> Result<NormEstimate> {
    u.validate()?;
    if u.coords().is_zero() {
        return Ok(NormEstimate::zero());
    }
    let mut alphas = Vec::new();
    let mut p = Vec::new();
    for t in &u.terms {
        let nx = estimate(&u.left, &t.x.coords, cfg)?.upper;
        let ny = estimate(&u.right, &t.y.coords, cfg)?.upper;
        alphas.push(t.alpha.clone());
        p.push(nx * ny);
    }
    let up = rescaled_upper(&alphas, &p);
    let (lo, f, g) = product_lower(u, cfg);
    let lo = if lo > up && lo - up <= 1e-10 * (1.0 + up) { up } else { lo };
    Ok(NormEstimate {
        lower: lo,
        upper: up,
        exact: up - lo <= 1e-9 * (1.0 + up),
        witness: Witness::Product { left: CMatrix::column_vector(&f), right: CMatrix::column_vector(&g) },
        certificate: "rescaled-representation".into(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ground::GroundSpace;
    use crate::sqspaces::amp_norm;

    fn col(space: SeqSpaceDesc, v: &[f64]) -> ElementColumn {
        ElementColumn::new(space, CMatrix::from_real(v.len(), 1, v).unwrap()).unwrap()
    }

    #[test]
    fn scalar_tensor_is_one() {
        let one = col(SeqSpaceDesc::scalars(), &[1.0]);
        let u = TensorElement::elementary(one.clone(), one).unwrap();
        let e = max_tensor_norm(&u).unwrap();
        assert!((e.lower - 1.0).abs() < 1e-9 && (e.upper - 1.0).abs() < 1e-9);
    }

    #[test]
    fn zero_tensor_is_exact_zero() {
        let z = col(SeqSpaceDesc::hilb(2), &[0.0, 0.0]);
        let e = max_tensor_norm(&TensorElement::elementary(z.clone(), z).unwrap()).unwrap();
        assert!(e.exact && e.upper == 0.0);
    }

    #[test]
    fn elementary_tensor_is_cross() {
        let x = col(SeqSpaceDesc::min(GroundSpace::linf(3)), &[1.0, -2.0, 0.5]);
        let y = col(SeqSpaceDesc::max(GroundSpace::l1(2)), &[0.3, 1.0]);
        let nx = amp_norm(&x).unwrap();
        let ny = amp_norm(&y).unwrap();
        let e = max_tensor_norm(&TensorElement::elementary(x, y).unwrap()).unwrap();
        assert!(e.upper <= nx.upper * ny.upper + 1e-9);
        assert!(e.lower >= 0.98 * nx.lower * ny.lower, "{} vs {}", e.lower, nx.lower * ny.lower);
    }

    #[test]
    fn builders_reject_bad_input() {
        assert!(make_dsum_inf(vec![]).is_err());
        let flat = CMatrix::from_real(2, 2, &[1.0, 2.0, 2.0, 4.0]).unwrap();
        assert!(make_subspace(&SeqSpaceDesc::hilb(2), flat).is_err());
    }

    #[test]
    fn coords_follow_the_pair_order() {
        let x = ElementColumn::new(SeqSpaceDesc::hilb(2), CMatrix::identity(2)).unwrap();
        let y = ElementColumn::new(SeqSpaceDesc::hilb(1), CMatrix::from_real(1, 2, &[1.0, 10.0]).unwrap()).unwrap();
        let alpha = CMatrix::from_real(1, 4, &[0.0, 1.0, 0.0, 0.0]).unwrap();
        let u = TensorElement {
            left: x.space.clone(),
            right: y.space.clone(),
            level: 1,
            terms: vec![TensorTerm { alpha, x, y }],
        };
        assert_eq!(u.coords(), CMatrix::from_real(2, 1, &[10.0, 0.0]).unwrap());
    }
}
