//! Upper bounds from factorizations `x = α x̃`.
//!
//! Any structure with level-one norm `N` is dominated by the maximal one,
//! `‖x‖ ≤ inf ‖α‖ (Σ_j N(x̃_j)²)^{1/2}`. Coordinates factor as
//! `X = X̃ · αᵀ` with `X̃` of size `k × m` and `αᵀ` of size `m × n`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{Effort, EvalConfig};
use crate::matcore::{op_norm, CMatrix, C64};
use crate::optim::{gaussian_matrix, minimize, stream_seed};

pub(crate) type NormFn<'a> = dyn Fn(&[C64]) -> f64 + Sync + 'a;
pub(crate) type GradFn<'a> = dyn Fn(&[C64]) -> Option<Vec<C64>> + Sync + 'a;

pub(crate) struct Level1<'a> {
    pub norm: &'a NormFn<'a>,
    pub grad: Option<&'a GradFn<'a>>,
}

impl Level1<'_> {
    fn column_sum(&self, m: &CMatrix) -> f64 {
        (0..m.cols()).map(|j| (self.norm)(&m.column(j)).powi(2)).sum::<f64>().sqrt()
    }
}

/// Value of a factorization, including a triangle correction for the
/// rounding residual so the bound stays sound.
fn value(l1: &Level1, x: &CMatrix, xt: &CMatrix, at: &CMatrix) -> f64 {
    let residual = x.sub(&xt.matmul(at));
    op_norm(at) * l1.column_sum(xt) + l1.column_sum(&residual)
}

fn dft(r: usize) -> CMatrix {
    let mut q = CMatrix::zeros(r, r);
    let s = 1.0 / (r as f64).sqrt();
    for i in 0..r {
        for j in 0..r {
            let t = 2.0 * std::f64::consts::PI * (i * j) as f64 / r as f64;
            q.set(i, j, C64::from_polar(s, t));
        }
    }
    q
}

/// Deterministic seeded candidates: identity, SVD-aligned splits and
/// row splits.
fn candidates(x: &CMatrix) -> Vec<(CMatrix, CMatrix)> {
    let (k, n) = (x.rows(), x.cols());
    let mut out = vec![(x.clone(), CMatrix::identity(n))];
    let svd = x.svd();
    let smax = svd.s[0];
    let r = svd.s.iter().filter(|&&s| s > 1e-13 * smax).count();
    if r > 0 {
        let u = svd.u.cols_block(0, r);
        let s = CMatrix::diag_real(&svd.s[..r]);
        let vt = svd.v_t.rows_block(0, r);
        let xt = u.matmul(&s);
        let q = dft(r);
        out.push((xt.matmul(&q), q.adjoint().matmul(&vt)));
        out.push((xt, vt));
    }
    let norms = x.row_norms();
    let rows: Vec<usize> = (0..k).filter(|&c| norms[c] > 1e-300).collect();
    for p in [0.5, 1.0] {
        let mut xt = CMatrix::zeros(k, rows.len());
        let mut at = CMatrix::zeros(rows.len(), n);
        for (j, &c) in rows.iter().enumerate() {
            let rho = norms[c].powf(p);
            xt.set(c, j, C64::new(rho, 0.0));
            for i in 0..n {
                at.set(j, i, x.get(c, i) / rho);
            }
        }
        if !rows.is_empty() {
            out.push((xt, at));
        }
    }
    out
}

fn refine(l1: &Level1, x: &CMatrix, mut xt: CMatrix, mut at: CMatrix, rounds: usize) -> f64 {
    let grad = l1.grad.expect("refine needs a gradient");
    let mut best = value(l1, x, &xt, &at);
    for _ in 0..rounds {
        let proj_m = CMatrix::identity(at.rows()).sub(&at.matmul(&at.pinv()));
        let f = |y: &CMatrix| -> (f64, Option<CMatrix>) {
            let norms: Vec<f64> = (0..y.cols()).map(|j| (l1.norm)(&y.column(j))).collect();
            let s = norms.iter().map(|v| v * v).sum::<f64>().sqrt();
            if s == 0.0 {
                return (0.0, None);
            }
            let mut cols = Vec::with_capacity(y.cols());
            for (j, nj) in norms.iter().enumerate() {
                match grad(&y.column(j)) {
                    Some(g) => cols.push(g.iter().map(|z| z * (nj / s)).collect::<Vec<C64>>()),
                    None => return (s, None),
                }
            }
            (s, CMatrix::from_columns(&cols).ok())
        };
        let project = |d: &CMatrix| d.matmul(&proj_m);
        let scale = xt.frob() / (xt.cols() as f64).sqrt();
        let (_, y) = minimize(&f, Some(&project), xt.clone(), 25, scale);
        let new_at = y.pinv().matmul(x);
        let v = value(l1, x, &y, &new_at);
        xt = y;
        at = new_at;
        if v < best * (1.0 - 1e-10) {
            best = v;
        } else {
            best = best.min(v);
            break;
        }
    }
    best
}

/// Best factorization bound found within the budget.
pub(crate) fn factor_upper(l1: &Level1, x: &CMatrix, effort: Effort, cfg: &EvalConfig) -> f64 {
    let cands = candidates(x);
    let mut scored: Vec<(f64, usize)> =
        cands.iter().enumerate().map(|(i, (xt, at))| (value(l1, x, xt, at), i)).collect();
    scored.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut best = scored[0].0;
    if effort == Effort::Fast || l1.grad.is_none() || x.cols() == 1 {
        return best;
    }
    let (xt, at) = cands[scored[0].1].clone();
    best = best.min(refine(l1, x, xt, at, cfg.factor_rounds));
    let n = x.cols();
    let m = n * cfg.factor_blocks.max(1);
    for r in 0..cfg.factor_restarts.saturating_sub(1) {
        let mut rng = ChaCha8Rng::seed_from_u64(stream_seed(cfg.seed ^ 0xFAC7, r as u64));
        let at = gaussian_matrix(&mut rng, m, n);
        let xt = x.matmul(&at.pinv());
        best = best.min(refine(l1, x, xt, at, cfg.factor_rounds));
    }
    best
}
