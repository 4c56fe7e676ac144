//! The normed space `t_2^n(X)`: `X^n` with
//! `‖x‖ = inf { ‖α‖_hs ‖x̃‖ : x = α x̃ }`.
//!
//! Upper bounds come from explicit factorizations, first with an arbitrary
//! `n × m` matrix `α`, then rebuilt with an invertible `n × n` one through
//! the polar decomposition. Lower bounds come from the trace pairing
//! `|Σ_i f_i(x_i)|` against functional columns of the dual.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{
    check_coords, dual_form, project_ball, upper, upper_grad, Effort, EvalConfig, NormEstimate, SeqSpaceDesc, Witness,
};
use crate::error::Result;
use crate::matcore::{polar_decompose, CMatrix, C64};
use crate::optim::{gaussian_matrix, maximize_ratio, minimize, stream_seed, RatioProblem, SearchBudget};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct T2nEstimate {
    pub estimate: NormEstimate,
    /// Best bound over factorizations with any `α`.
    pub unrestricted: f64,
    /// Best bound over factorizations with invertible square `α`.
    pub invertible: f64,
}

struct Factorization {
    xt: CMatrix,
    at: CMatrix,
}

fn value(space: &SeqSpaceDesc, x: &CMatrix, f: &Factorization, cfg: &EvalConfig) -> f64 {
    let n = x.cols() as f64;
    let residual = x.sub(&f.xt.matmul(&f.at));
    let main = f.at.frob() * upper(space, &f.xt, Effort::Fast, cfg).0;
    let fix = if residual.is_zero() { 0.0 } else { n.sqrt() * upper(space, &residual, Effort::Fast, cfg).0 };
    main + fix
}

fn candidates(x: &CMatrix) -> Vec<Factorization> {
    let n = x.cols();
    let mut out = vec![Factorization { xt: x.clone(), at: CMatrix::identity(n) }];
    let svd = x.svd();
    let smax = svd.s[0];
    let r = svd.s.iter().filter(|&&s| s > 1e-13 * smax).count();
    if r > 0 {
        let half: Vec<f64> = svd.s[..r].iter().map(|s| s.sqrt()).collect();
        let h = CMatrix::diag_real(&half);
        out.push(Factorization { xt: svd.u.cols_block(0, r).matmul(&h), at: h.matmul(&svd.v_t.rows_block(0, r)) });
    }
    let support: Vec<usize> = (0..n).filter(|&i| x.column(i).iter().any(|z| z.norm() > 0.0)).collect();
    if !support.is_empty() && support.len() < n {
        let cols: Vec<Vec<C64>> = support.iter().map(|&i| x.column(i)).collect();
        let mut at = CMatrix::zeros(support.len(), n);
        for (j, &i) in support.iter().enumerate() {
            at.set(j, i, C64::new(1.0, 0.0));
        }
        out.push(Factorization { xt: CMatrix::from_columns(&cols).expect("nonempty"), at });
    }
    out
}

fn refine(
    space: &SeqSpaceDesc,
    x: &CMatrix,
    mut f: Factorization,
    rounds: usize,
    cfg: &EvalConfig,
) -> (f64, Factorization) {
    let mut best = value(space, x, &f, cfg);
    if upper_grad(space, &f.xt, cfg).is_none() {
        return (best, f);
    }
    for _ in 0..rounds {
        let proj_m = CMatrix::identity(f.at.rows()).sub(&f.at.matmul(&f.at.pinv()));
        let obj = |y: &CMatrix| (upper(space, y, Effort::Fast, cfg).0, upper_grad(space, y, cfg));
        let project = |d: &CMatrix| d.matmul(&proj_m);
        let (_, y) = minimize(&obj, Some(&project), f.xt.clone(), 40, f.xt.frob().max(1e-300));
        let at = y.pinv().matmul(x);
        let cand = Factorization { xt: y, at };
        let v = value(space, x, &cand, cfg);
        if v < best * (1.0 - 1e-10) {
            best = v;
            f = cand;
        } else {
            break;
        }
    }
    (best, f)
}

fn best_unrestricted(space: &SeqSpaceDesc, x: &CMatrix, cfg: &EvalConfig) -> (f64, Factorization) {
    let mut best: Option<(f64, Factorization)> = None;
    let mut consider = |v: f64, f: Factorization| {
        if best.as_ref().is_none_or(|b| v < b.0) {
            best = Some((v, f));
        }
    };
    for c in candidates(x) {
        let (v, f) = refine(space, x, c, cfg.factor_rounds, cfg);
        consider(v, f);
    }
    let n = x.cols();
    let m = n * cfg.factor_blocks.max(1);
    for r in 0..cfg.factor_restarts / 4 {
        let mut rng = ChaCha8Rng::seed_from_u64(stream_seed(cfg.seed ^ 0x72A, r as u64));
        let at = gaussian_matrix(&mut rng, m, n);
        let xt = x.matmul(&at.pinv());
        let (v, f) = refine(space, x, Factorization { xt, at }, cfg.factor_rounds, cfg);
        consider(v, f);
    }
    best.expect("at least one candidate")
}

/// Rebuilds `x = α̃ x̃` as `x = α' x'` with `α' = |α̃*| + δ p` invertible
/// and `x' = ρ x̃`, where `α̃ = |α̃*| ρ` and `p` projects onto `ker |α̃*|`.
fn invertible_from(space: &SeqSpaceDesc, x: &CMatrix, f: &Factorization, cfg: &EvalConfig) -> f64 {
    let n = x.cols();
    let alpha = f.at.transpose();
    let (pos, rho) = polar_decompose(&alpha);
    let delta = 1e-9 * alpha.frob().max(1e-300);
    let svd = pos.svd();
    let smax = svd.s[0];
    let mut p = CMatrix::zeros(n, n);
    for (i, &s) in svd.s.iter().enumerate() {
        if s <= 1e-12 * smax {
            let u = CMatrix::column_vector(&svd.u.column(i));
            p = p.add(&u.matmul(&u.adjoint()));
        }
    }
    let a2 = pos.add_scaled(&p, delta);
    if a2.inverse().is_none() {
        return f64::INFINITY;
    }
    let x2 = f.xt.matmul(&rho.transpose());
    value(space, x, &Factorization { xt: x2, at: a2.transpose() }, cfg)
}

fn trace_lower(space: &SeqSpaceDesc, x: &CMatrix, cfg: &EvalConfig) -> (f64, CMatrix) {
    let form = dual_form(space);
    let h = form.pairing_matrix(x);
    let d = &form.space;
    let hc = h.conj();
    let objective = |c: &CMatrix| {
        let s = h.bilinear_dot(c);
        let a = s.norm();
        let g = if a > 0.0 { hc.scale_c(s / a) } else { hc.clone() };
        (a, g)
    };
    let inner = cfg.inner();
    let gauge = |c: &CMatrix| upper(d, c, Effort::Fast, &inner).0;
    let projector = |c: &CMatrix| project_ball(d, c).expect("checked projectable");
    let projectable = project_ball(d, &hc).is_some();
    let problem = RatioProblem {
        objective: &objective,
        gauge: &gauge,
        project: if projectable { Some(&projector) } else { None },
    };
    let svd = h.svd();
    let polar = svd.u.matmul(&svd.v_t).conj();
    let seeds = vec![polar, hc.clone()];
    let budget = SearchBudget { restarts: cfg.restarts, steps: cfg.steps, seed: cfg.seed ^ 0x7A2 };
    match maximize_ratio(&problem, seeds, h.rows(), h.cols(), budget) {
        Some((_, c)) => (trace_witness_value(space, x, &c, cfg), c),
        None => (0.0, CMatrix::zeros(h.rows(), h.cols())),
    }
}

/// Value certified by a trace-pairing functional `c` in the dual.
pub fn trace_witness_value(space: &SeqSpaceDesc, x: &CMatrix, c: &CMatrix, cfg: &EvalConfig) -> f64 {
    let form = dual_form(space);
    let s = form.pairing_matrix(x).bilinear_dot(c).norm();
    let g = upper(&form.space, c, Effort::Fast, &cfg.inner()).0;
    if g > 0.0 {
        s / g
    } else {
        0.0
    }
}

pub fn t2n_norm(space: &SeqSpaceDesc, x: &CMatrix) -> Result<T2nEstimate> {
    t2n_norm_with(space, x, &EvalConfig::default())
}

pub fn t2n_norm_with(space: &SeqSpaceDesc, x: &CMatrix, cfg: &EvalConfig) -> Result<T2nEstimate> {
    space.validate()?;
    check_coords(space, x)?;
    if x.is_zero() {
        return Ok(T2nEstimate { estimate: NormEstimate::zero(), unrestricted: 0.0, invertible: 0.0 });
    }
    let (unrestricted, f) = best_unrestricted(space, x, cfg);
    let invertible = invertible_from(space, x, &f, cfg);
    let (lo, c) = trace_lower(space, x, cfg);
    let up = unrestricted.min(invertible);
    let lo = if lo > up && lo - up <= 1e-10 * (1.0 + up) { up } else { lo };
    let estimate = NormEstimate {
        lower: lo,
        upper: up,
        exact: up - lo <= 1e-9 * (1.0 + up),
        witness: Witness::Pairing { functional: c },
        certificate: "hilbert-schmidt-factorization".into(),
    };
    Ok(T2nEstimate { estimate, unrestricted, invertible })
}

/// Upper bound restricted to invertible square factors.
pub fn t2n_upper_invertible(space: &SeqSpaceDesc, x: &CMatrix, cfg: &EvalConfig) -> Result<f64> {
    Ok(t2n_norm_with(space, x, cfg)?.invertible)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scalars_give_euclidean_norm() {
        let x = CMatrix::from_real(1, 2, &[3.0, 4.0]).unwrap();
        let t = t2n_norm(&SeqSpaceDesc::scalars(), &x).unwrap();
        assert!((t.estimate.lower - 5.0).abs() < 1e-6);
        assert!((t.estimate.upper - 5.0).abs() < 1e-6);
        assert!((t.invertible - 5.0).abs() < 1e-6);
    }

    #[test]
    fn single_component_pinches_its_norm() {
        let x = CMatrix::from_real(2, 2, &[0.0, 3.0, 0.0, 4.0]).unwrap();
        let t = t2n_norm(&SeqSpaceDesc::t2(2), &x).unwrap();
        assert!((t.estimate.upper - 5.0).abs() < 1e-6);
        assert!((t.estimate.lower - 5.0).abs() < 1e-6);
    }
}
