//! The registered suites. Each trial function draws its inputs from the
//! given seed and returns the worst slack of its inequalities.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use super::{gen_random_element, gen_unit_element, rng, Trial};
use crate::constructions::{make_dsum_inf, make_dsum_one, make_dual, max_tensor_norm_with, TensorElement};
use crate::error::Result;
use crate::freeobjects::{build_cofree, build_free, universal_slack};
use crate::ground::GroundSpace;
use crate::matcore::{glue_right, mat_apply, op_norm, CMatrix};
use crate::optim::gaussian_matrix;
use crate::sqoperators::{
    amp_op_norm_with, classify_with, dual_operator, injectivity_constant, sb_norm_with, surjectivity_constant,
    SeqOperator,
};
use crate::sqspaces::{estimate, t2n_norm_with, EvalConfig, NormEstimate, SeqSpaceDesc};

pub(crate) struct Ctx {
    pub tol: f64,
    pub n_max: usize,
    pub cfg: EvalConfig,
}

pub(crate) type SuiteFn = fn(&Ctx, u64) -> Result<Trial>;

pub(crate) const REGISTRY: &[(&str, SuiteFn)] = &[
    ("axioms", axioms),
    ("padding-unitary", padding_unitary),
    ("sandwich", sandwich),
    ("c-unique", c_unique),
    ("smith", smith),
    ("functional", functional),
    ("op-duality", op_duality),
    ("class-duality", class_duality),
    ("t2-dual", t2_dual),
    ("t2-invertible", t2_invertible),
    ("cstar-min", cstar_min),
    ("minmax-dual", minmax_dual),
    ("l1-max", l1_max),
    ("sum-dual", sum_dual),
    ("quotient-coiso", quotient_coiso),
    ("free-universal", free_universal),
    ("cofree-dual", cofree_dual),
    ("tensor-cross", tensor_cross),
    ("compose-constants", compose_constants),
];

/// Slack of `lhs ≤ rhs` with relative tolerance.
fn le(lhs: f64, rhs: f64, tol: f64) -> f64 {
    lhs - rhs - tol * (1.0 + rhs.abs())
}

/// Slack of `|a - b| ≤ tol · scale`.
fn close(a: f64, b: f64, tol: f64, scale: f64) -> f64 {
    (a - b).abs() - tol * scale
}

fn overlap(a: &NormEstimate, b: &NormEstimate, tol: f64) -> f64 {
    le(a.lower, b.upper, tol).max(le(b.lower, a.upper, tol))
}

fn level(r: &mut ChaCha8Rng, n_max: usize) -> usize {
    r.random_range(1..=n_max)
}

fn pick<T: Clone>(r: &mut ChaCha8Rng, items: &[T]) -> T {
    items[r.random_range(0..items.len())].clone()
}

fn exact_structures() -> Vec<SeqSpaceDesc> {
    vec![
        SeqSpaceDesc::hilb(3),
        SeqSpaceDesc::min(GroundSpace::l2(3)),
        SeqSpaceDesc::min(GroundSpace::linf(3)),
        SeqSpaceDesc::cstar_matrix(2),
        SeqSpaceDesc::cstar_diag(3),
        SeqSpaceDesc::DSumInf { children: vec![SeqSpaceDesc::min(GroundSpace::l2(2)), SeqSpaceDesc::hilb(2)] },
        SeqSpaceDesc::t2(3),
    ]
}

fn unitary(r: &mut ChaCha8Rng, n: usize) -> CMatrix {
    let svd = gaussian_matrix(r, n, n).svd();
    svd.u.matmul(&svd.v_t)
}

/// An `m × k` matrix with orthonormal columns, `k ≤ m`.
fn isometry(r: &mut ChaCha8Rng, m: usize, k: usize) -> CMatrix {
    gaussian_matrix(r, m, k).svd().u.matmul(&unitary(r, k))
}

fn axioms(ctx: &Ctx, seed: u64) -> Result<Trial> {
    let mut r = rng(seed);
    let mut slack = f64::NEG_INFINITY;
    let mut inputs = Vec::new();
    for s in exact_structures() {
        let (n, m) = (level(&mut r, ctx.n_max), level(&mut r, ctx.n_max));
        let x = gaussian_matrix(&mut r, s.dim(), n);
        let y = gaussian_matrix(&mut r, s.dim(), m);
        let alpha = gaussian_matrix(&mut r, m, n);
        let ex = estimate(&s, &x, &ctx.cfg)?;
        let ey = estimate(&s, &y, &ctx.cfg)?;
        let eax = estimate(&s, &mat_apply(&alpha, &x)?, &ctx.cfg)?;
        let exy = estimate(&s, &glue_right(&[x.clone(), y.clone()])?, &ctx.cfg)?;
        slack = slack.max(le(eax.lower, op_norm(&alpha) * ex.upper, ctx.tol));
        slack = slack.max(le(exy.lower.powi(2), ex.upper.powi(2) + ey.upper.powi(2), ctx.tol));
        inputs.push(json!({ "space": s, "x": x, "y": y, "alpha": alpha }));
    }
    Ok(Trial::new(json!(inputs), slack))
}

fn padding_unitary(ctx: &Ctx, seed: u64) -> Result<Trial> {
    let mut r = rng(seed);
    let mut spaces = exact_structures();
    spaces.push(SeqSpaceDesc::max(GroundSpace::l1(2)));
    spaces.push(SeqSpaceDesc::DSumOne { children: vec![SeqSpaceDesc::scalars(), SeqSpaceDesc::scalars()] });
    let s = pick(&mut r, &spaces);
    let (n, m) = (level(&mut r, ctx.n_max), level(&mut r, ctx.n_max));
    let x = gaussian_matrix(&mut r, s.dim(), n);
    let u = unitary(&mut r, n);
    let ex = estimate(&s, &x, &ctx.cfg)?;
    let padded = estimate(&s, &x.pad_cols(n + m), &ctx.cfg)?;
    let rotated = estimate(&s, &mat_apply(&u, &x)?, &ctx.cfg)?;
    let slack = overlap(&ex, &padded, ctx.tol).max(overlap(&ex, &rotated, ctx.tol));
    Ok(Trial::new(json!({ "space": s, "x": x, "pad": m, "unitary": u }), slack))
}

fn sandwich(ctx: &Ctx, seed: u64) -> Result<Trial> {
    let mut r = rng(seed);
    let s = pick(&mut r, &exact_structures());
    let n = level(&mut r, ctx.n_max);
    let x = gaussian_matrix(&mut r, s.dim(), n);
    let ex = estimate(&s, &x, &ctx.cfg)?;
    let mut parts = Vec::new();
    for i in 0..n {
        parts.push(estimate(&s, &CMatrix::column_vector(&x.column(i)), &ctx.cfg)?);
    }
    let mut slack = f64::NEG_INFINITY;
    for p in &parts {
        slack = slack.max(le(p.lower, ex.upper, ctx.tol));
    }
    let sum_up: f64 = parts.iter().map(|p| p.upper).sum();
    let sum_lo: f64 = parts.iter().map(|p| p.lower).sum();
    slack = slack.max(le(ex.lower, sum_up, ctx.tol));
    slack = slack.max(le(sum_lo, n as f64 * ex.upper, ctx.tol));
    Ok(Trial::new(json!({ "space": s, "x": x }), slack))
}

fn c_unique(ctx: &Ctx, seed: u64) -> Result<Trial> {
    let mut r = rng(seed);
    let mut slack = f64::NEG_INFINITY;
    let mut inputs = Vec::new();
    let min = SeqSpaceDesc::min(GroundSpace::l2(1));
    let max = SeqSpaceDesc::max(GroundSpace::l1(1));
    for n in 1..=ctx.n_max {
        let xi = gaussian_matrix(&mut r, 1, n);
        let l2 = xi.frob();
        let a = estimate(&min, &xi, &ctx.cfg)?;
        let b = estimate(&max, &xi, &ctx.cfg)?;
        let scale = l2.max(1.0);
        for v in [close(a.lower, l2, ctx.tol, scale), close(a.upper, l2, ctx.tol, scale)] {
            slack = slack.max(v);
        }
        slack = slack.max(close(b.midpoint(), l2, ctx.tol, scale));
        slack = slack.max(b.width() - ctx.tol * scale);
        inputs.push(xi);
    }
    Ok(Trial::new(json!(inputs), slack))
}

/// `(Σ_{i ≤ n} σ_i²)^{1/2}`.
fn top_hs(m: &CMatrix, n: usize) -> f64 {
    m.singular_values().iter().take(n).map(|s| s * s).sum::<f64>().sqrt()
}

fn smith(ctx: &Ctx, seed: u64) -> Result<Trial> {
    let mut r = rng(seed);
    let m = gaussian_matrix(&mut r, 2, 3);
    let phi = SeqOperator::new(SeqSpaceDesc::min(GroundSpace::l2(3)), SeqSpaceDesc::hilb(2), m.clone())?;
    let d = 2;
    let formula: Vec<f64> = (d..=d + 2).map(|n| top_hs(&m, n)).collect();
    let mut slack = f64::NEG_INFINITY;
    for w in formula.windows(2) {
        slack = slack.max(close(w[0], w[1], 1e-9, 1.0 + w[0]));
    }
    let ests: Vec<NormEstimate> = (d..=d + 2).map(|n| amp_op_norm_with(&phi, n, &ctx.cfg)).collect::<Result<_>>()?;
    for (e, f) in ests.iter().zip(&formula) {
        slack = slack.max(close(e.lower, *f, ctx.tol, *f));
        slack = slack.max(e.lower - ests[0].upper * (1.0 + ctx.tol));
    }
    for a in &ests {
        for b in &ests {
            slack = slack.max(overlap(a, b, 1e-9));
        }
    }
    Ok(Trial::new(json!({ "matrix": m }), slack))
}

fn functional(ctx: &Ctx, seed: u64) -> Result<Trial> {
    let mut r = rng(seed);
    let spaces = [
        SeqSpaceDesc::min(GroundSpace::l2(3)),
        SeqSpaceDesc::min(GroundSpace::linf(3)),
        SeqSpaceDesc::min(GroundSpace::l1(3)),
        SeqSpaceDesc::hilb(3),
        SeqSpaceDesc::t2(2),
    ];
    let s = pick(&mut r, &spaces);
    let f = gaussian_matrix(&mut r, 1, s.dim());
    let phi = SeqOperator::new(s.clone(), SeqSpaceDesc::scalars(), f.clone())?;
    let base = amp_op_norm_with(&phi, 1, &ctx.cfg)?.upper;
    let mut slack = f64::NEG_INFINITY;
    for n in 1..=ctx.n_max {
        let e = amp_op_norm_with(&phi, n, &ctx.cfg)?;
        slack = slack.max(close(e.lower, base, ctx.tol, base));
    }
    Ok(Trial::new(json!({ "space": s, "functional": f }), slack))
}

fn hilbert_like(r: &mut ChaCha8Rng, k: usize) -> SeqSpaceDesc {
    if r.random_bool(0.5) {
        SeqSpaceDesc::t2(k)
    } else {
        SeqSpaceDesc::hilb(k)
    }
}

fn op_duality(ctx: &Ctx, seed: u64) -> Result<Trial> {
    let mut r = rng(seed);
    let (kd, kc) = (r.random_range(1..=3), r.random_range(1..=3));
    let dom = hilbert_like(&mut r, kd);
    let cod = hilbert_like(&mut r, kc);
    let m = gaussian_matrix(&mut r, kc, kd);
    let phi = SeqOperator::new(dom, cod, m)?;
    let a = sb_norm_with(&phi, &ctx.cfg)?.estimate;
    let b = sb_norm_with(&dual_operator(&phi), &ctx.cfg)?.estimate;
    Ok(Trial::new(json!({ "operator": phi }), overlap(&a, &b, ctx.tol)))
}

fn class_duality(ctx: &Ctx, seed: u64) -> Result<Trial> {
    let mut r = rng(seed);
    let kd = r.random_range(1..=3);
    let kc = r.random_range(kd..=3);
    let t2 = r.random_bool(0.5);
    let space = |k| if t2 { SeqSpaceDesc::t2(k) } else { SeqSpaceDesc::hilb(k) };
    let phi = SeqOperator::new(space(kd), space(kc), isometry(&mut r, kc, kd))?;
    let c = classify_with(&phi, ctx.n_max, &ctx.cfg)?;
    let dual = dual_operator(&phi);
    let mut slack = f64::NEG_INFINITY;
    for (i, n) in c.levels.iter().enumerate() {
        if !c.isometric[i] {
            slack = slack.max(1.0);
        }
        let s = surjectivity_constant(&dual, *n, &ctx.cfg)?;
        slack = slack.max(le(s.upper, 1.0, ctx.tol));
    }
    Ok(Trial::new(json!({ "operator": phi }), slack))
}

fn t2_dual(ctx: &Ctx, seed: u64) -> Result<Trial> {
    let mut r = rng(seed);
    let n = level(&mut r, ctx.n_max);
    let m = level(&mut r, ctx.n_max);
    let space = make_dual(&SeqSpaceDesc::t2(n))?;
    let f = gaussian_matrix(&mut r, n, m);
    let e = estimate(&space, &f, &ctx.cfg)?;
    let closed = f.frob();
    let slack = close(e.lower, closed, ctx.tol, closed).max(close(e.upper, closed, ctx.tol, closed));
    Ok(Trial::new(json!({ "n": n, "functional": f }), slack))
}

fn t2_invertible(ctx: &Ctx, seed: u64) -> Result<Trial> {
    let mut r = rng(seed);
    let scalar = r.random_bool(0.5);
    let space = if scalar { SeqSpaceDesc::scalars() } else { SeqSpaceDesc::hilb(2) };
    let n = level(&mut r, ctx.n_max);
    let x = gaussian_matrix(&mut r, space.dim(), n);
    let t = t2n_norm_with(&space, &x, &ctx.cfg)?;
    let mut slack = close(t.unrestricted, t.invertible, ctx.tol, 1.0 + t.unrestricted);
    if scalar {
        let l2 = x.frob();
        slack = slack.max(close(t.estimate.upper, l2, 1e-6, 1.0 + l2));
        slack = slack.max(close(t.estimate.lower, l2, 1e-6, 1.0 + l2));
    }
    Ok(Trial::new(json!({ "space": space, "x": x }), slack))
}

fn cstar_min(ctx: &Ctx, seed: u64) -> Result<Trial> {
    let mut r = rng(seed);
    let k = r.random_range(1..=4);
    let n = level(&mut r, ctx.n_max);
    let x = gaussian_matrix(&mut r, k, n);
    let a = estimate(&SeqSpaceDesc::cstar_diag(k), &x, &ctx.cfg)?;
    let b = estimate(&SeqSpaceDesc::min(GroundSpace::linf(k)), &x, &ctx.cfg)?;
    let slack = close(a.upper, b.upper, ctx.tol, 1.0 + a.upper).max(close(a.lower, b.lower, ctx.tol, 1.0 + a.lower));
    Ok(Trial::new(json!({ "x": x }), slack))
}

fn minmax_dual(ctx: &Ctx, seed: u64) -> Result<Trial> {
    let mut r = rng(seed);
    let grounds = [GroundSpace::l1(2), GroundSpace::linf(2), GroundSpace::l2(3), GroundSpace::linf(3)];
    let e = pick(&mut r, &grounds);
    let dual_ground = GroundSpace::dual_of(e.clone());
    let n = level(&mut r, ctx.n_max);
    let f = gaussian_matrix(&mut r, e.dim(), n);
    let a = estimate(&make_dual(&SeqSpaceDesc::min(e.clone()))?, &f, &ctx.cfg)?;
    let b = estimate(&SeqSpaceDesc::max(dual_ground.clone()), &f, &ctx.cfg)?;
    let c = estimate(&make_dual(&SeqSpaceDesc::max(e.clone()))?, &f, &ctx.cfg)?;
    let d = estimate(&SeqSpaceDesc::min(dual_ground), &f, &ctx.cfg)?;
    let slack = overlap(&a, &b, ctx.tol).max(overlap(&c, &d, ctx.tol));
    Ok(Trial::new(json!({ "ground": e, "functional": f }), slack))
}

/// Level-two norm of `(e₁, e₂)` in the 1-sum of two copies of `ℂ`.
fn l1_anchor(cfg: &EvalConfig) -> Result<f64> {
    let s = make_dsum_one(vec![SeqSpaceDesc::scalars(), SeqSpaceDesc::scalars()])?;
    let e = estimate(&s, &CMatrix::identity(2), cfg)?;
    let root2 = 2f64.sqrt();
    Ok((e.lower - root2).abs().max((e.upper - root2).abs()) - 0.05 * root2)
}

fn l1_max(ctx: &Ctx, seed: u64) -> Result<Trial> {
    let mut r = rng(seed);
    let k = r.random_range(2..=3);
    let n = level(&mut r, ctx.n_max);
    let x = gaussian_matrix(&mut r, k, n);
    let sum = make_dsum_one(vec![SeqSpaceDesc::scalars(); k])?;
    let a = estimate(&sum, &x, &ctx.cfg)?;
    let b = estimate(&SeqSpaceDesc::max(GroundSpace::l1(k)), &x, &ctx.cfg)?;
    let slack = overlap(&a, &b, ctx.tol).max(l1_anchor(&ctx.cfg)?);
    Ok(Trial::new(json!({ "x": x }), slack))
}

fn sum_dual(ctx: &Ctx, seed: u64) -> Result<Trial> {
    let mut r = rng(seed);
    let sets = [
        vec![SeqSpaceDesc::min(GroundSpace::l2(2)), SeqSpaceDesc::hilb(2)],
        vec![SeqSpaceDesc::max(GroundSpace::l1(2)), SeqSpaceDesc::t2(2)],
        vec![SeqSpaceDesc::min(GroundSpace::linf(2)), SeqSpaceDesc::scalars()],
    ];
    let children = pick(&mut r, &sets);
    let lhs = make_dual(&make_dsum_one(children.clone())?)?;
    let rhs = make_dsum_inf(children.iter().map(make_dual).collect::<Result<_>>()?)?;
    let n = level(&mut r, ctx.n_max);
    let f = gaussian_matrix(&mut r, lhs.dim(), n);
    let a = estimate(&lhs, &f, &ctx.cfg)?;
    let b = estimate(&rhs, &f, &ctx.cfg)?;
    Ok(Trial::new(json!({ "children": children, "functional": f }), overlap(&a, &b, ctx.tol)))
}

/// The coset of `(3, 4)` modulo `e₂` in `ℓ₂²` has norm 3.
fn quotient_anchor(cfg: &EvalConfig) -> Result<f64> {
    let k = CMatrix::from_real(2, 1, &[0.0, 1.0])?;
    let q = crate::constructions::make_quotient(&SeqSpaceDesc::hilb(2), k)?;
    let e = estimate(&q, &CMatrix::from_real(2, 1, &[3.0, 4.0])?, cfg)?;
    Ok((e.lower - 3.0).abs().max((e.upper - 3.0).abs()) - 1e-12)
}

fn quotient_coiso(ctx: &Ctx, seed: u64) -> Result<Trial> {
    let mut r = rng(seed);
    let spaces =
        [SeqSpaceDesc::hilb(3), SeqSpaceDesc::min(GroundSpace::l2(3)), SeqSpaceDesc::min(GroundSpace::linf(3))];
    let x = pick(&mut r, &spaces);
    let kernel = gaussian_matrix(&mut r, 3, 1);
    let q = crate::constructions::make_quotient(&x, kernel.clone())?;
    let pi = SeqOperator::new(x.clone(), q, CMatrix::identity(3))?;
    let mut slack = quotient_anchor(&ctx.cfg)?;
    for n in 1..=ctx.n_max {
        let c = surjectivity_constant(&pi, n, &ctx.cfg)?;
        slack = slack.max(le(c.upper, 1.0, ctx.tol)).max(le(c.lower, 1.0, ctx.tol));
    }
    Ok(Trial::new(json!({ "space": x, "kernel": kernel }), slack))
}

fn free_universal(ctx: &Ctx, seed: u64) -> Result<Trial> {
    let mut r = rng(seed);
    let targets = [
        SeqSpaceDesc::scalars(),
        SeqSpaceDesc::min(GroundSpace::linf(2)),
        SeqSpaceDesc::max(GroundSpace::l1(2)),
        SeqSpaceDesc::hilb(2),
    ];
    let target = pick(&mut r, &targets);
    let n = level(&mut r, ctx.n_max);
    let x = gen_unit_element(&target, n, seed, &ctx.cfg)?;
    let slack = universal_slack(&x, &ctx.cfg)?;
    Ok(Trial::new(json!({ "space": target, "x": x.coords }), slack))
}

fn cofree_dual(ctx: &Ctx, seed: u64) -> Result<Trial> {
    let mut r = rng(seed);
    let big_n = level(&mut r, ctx.n_max);
    let base = r.random_range(1..=2);
    let free = build_free(big_n, base)?;
    let cofree = build_cofree(big_n, base)?;
    let dual = make_dual(&free.space)?;
    let n = level(&mut r, ctx.n_max);
    let f = gen_random_element(&cofree.space, n, seed)?.coords;
    let a = estimate(&dual, &f, &ctx.cfg)?;
    let b = estimate(&cofree.space, &f, &ctx.cfg)?;
    Ok(Trial::new(json!({ "levels": big_n, "base": base, "functional": f }), overlap(&a, &b, 1e-9)))
}

fn tensor_cross(ctx: &Ctx, seed: u64) -> Result<Trial> {
    let mut r = rng(seed);
    let spaces = [
        SeqSpaceDesc::scalars(),
        SeqSpaceDesc::hilb(2),
        SeqSpaceDesc::t2(2),
        SeqSpaceDesc::min(GroundSpace::linf(2)),
        SeqSpaceDesc::max(GroundSpace::l1(2)),
    ];
    let (sx, sy) = (pick(&mut r, &spaces), pick(&mut r, &spaces));
    let x = gen_random_element(&sx, 1, seed ^ 1)?;
    let y = gen_random_element(&sy, 1, seed ^ 2)?;
    let ex = estimate(&sx, &x.coords, &ctx.cfg)?;
    let ey = estimate(&sy, &y.coords, &ctx.cfg)?;
    let u = TensorElement::elementary(x.clone(), y.clone())?;
    let e = max_tensor_norm_with(&u, &ctx.cfg)?;
    let below = (1.0 - ctx.tol) * ex.lower * ey.lower - e.lower;
    let above = e.upper - ex.upper * ey.upper - 1e-9;
    Ok(Trial::new(json!({ "x": x, "y": y }), below.max(above)))
}

fn compose_constants(ctx: &Ctx, seed: u64) -> Result<Trial> {
    let mut r = rng(seed);
    let a = hilbert_like(&mut r, 2);
    let b = hilbert_like(&mut r, 2);
    let c = hilbert_like(&mut r, 2);
    let phi = SeqOperator::new(a, b.clone(), gaussian_matrix(&mut r, 2, 2))?;
    let psi = SeqOperator::new(b, c, gaussian_matrix(&mut r, 2, 2))?;
    let both = phi.then(&psi)?;
    let n = level(&mut r, ctx.n_max);
    let ci = |op: &SeqOperator| injectivity_constant(op, n, &ctx.cfg);
    let (c1, c2, c12) = (ci(&phi)?, ci(&psi)?, ci(&both)?);
    let mut slack = c12.lower - c1.upper * c2.upper * (1.0 + ctx.tol);
    let (s1, s2, s12) = (
        sb_norm_with(&phi, &ctx.cfg)?.estimate,
        sb_norm_with(&psi, &ctx.cfg)?.estimate,
        sb_norm_with(&both, &ctx.cfg)?.estimate,
    );
    slack = slack.max(s12.lower - s1.upper * s2.upper - 1e-9);
    Ok(Trial::new(json!({ "phi": phi, "psi": psi, "level": n }), slack))
}
