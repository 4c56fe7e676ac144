//! Upper and lower bound dispatch for every structure.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::closed::embed_rows;
use super::factor::{factor_upper, Level1};
use super::{dual_form, exact_grad, exact_value, project_ball, Effort, EvalConfig, SeqSpaceDesc, Witness};
use crate::ground::Kind;
use crate::matcore::{op_norm, CMatrix, C64};
use crate::optim::{gaussian_matrix, maximize_ratio, minimize, stream_seed, RatioProblem, SearchBudget};

fn blocks<'a>(
    children: &'a [SeqSpaceDesc],
    x: &'a CMatrix,
) -> impl Iterator<Item = (usize, &'a SeqSpaceDesc, CMatrix)> + 'a {
    let mut start = 0;
    children.iter().enumerate().map(move |(i, c)| {
        let b = x.rows_block(start, c.dim());
        start += c.dim();
        (i, c, b)
    })
}

fn starts(children: &[SeqSpaceDesc]) -> Vec<usize> {
    let mut s = Vec::with_capacity(children.len());
    let mut acc = 0;
    for c in children {
        s.push(acc);
        acc += c.dim();
    }
    s
}

/// Sound upper bound with the name of the bound used.
pub(crate) fn upper(d: &SeqSpaceDesc, x: &CMatrix, e: Effort, cfg: &EvalConfig) -> (f64, String) {
    if x.is_zero() {
        return (0.0, "zero".into());
    }
    if let Some((v, c)) = exact_value(d, x) {
        return (v, c.into());
    }
    match d {
        SeqSpaceDesc::Min { .. } => (min_upper(d.ground_kind().expect("min has a ground"), x), "analytic-bound".into()),
        SeqSpaceDesc::Max { .. } => {
            let k = d.ground_kind().expect("max has a ground");
            (ground_factor_upper(k, x, e, cfg), "factorization".into())
        }
        SeqSpaceDesc::DSumInf { children } => {
            let v = blocks(children, x).map(|(_, c, b)| upper(c, &b, e, cfg).0).fold(0.0, f64::max);
            (v, "componentwise-max".into())
        }
        SeqSpaceDesc::DSumOne { children } => dsum_one_upper(children, x, e, cfg),
        SeqSpaceDesc::Dual { child } => match child.as_ref() {
            SeqSpaceDesc::CstarMatrix { a } => {
                let k = Kind::Nuclear { a: *a, b: *a };
                (ground_factor_upper(k, x, e, cfg), "minimal-predual-factorization".into())
            }
            other => {
                let form = dual_form(other);
                let (v, c) = upper(&form.space, &form.lift_coords(x), e, cfg);
                (v, format!("dual:{c}"))
            }
        },
        SeqSpaceDesc::Subspace { child, basis } => {
            let (v, c) = upper(child, &basis.matmul(x), e, cfg);
            (v, format!("embedded:{c}"))
        }
        SeqSpaceDesc::Quotient { child, kernel } => (quotient_upper(child, kernel, x, e, cfg), "coset-descent".into()),
        _ => unreachable!("leaf structures have closed forms"),
    }
}

/// Analytic bounds for the minimal structure over a ground without a
/// closed form.
fn min_upper(k: Kind, x: &CMatrix) -> f64 {
    let n = x.cols();
    let cols: f64 = (0..n).map(|i| k.norm(&x.column(i)).powi(2)).sum::<f64>().sqrt();
    let (_, hi) = k.l2_equivalence();
    let mut best = cols.min(hi * op_norm(x));
    match k {
        Kind::L1(_) => best = best.min(x.row_norms().iter().sum()),
        Kind::Op { a, b } => {
            let mut v = CMatrix::zeros(n * a, b);
            let mut h = CMatrix::zeros(a, n * b);
            for i in 0..n {
                for r in 0..a {
                    for c in 0..b {
                        let z = x.get(r * b + c, i);
                        v.set(i * a + r, c, z);
                        h.set(r, i * b + c, z);
                    }
                }
            }
            best = best.min(op_norm(&v)).min(op_norm(&h));
        }
        _ => {}
    }
    best
}

fn ground_factor_upper(k: Kind, x: &CMatrix, e: Effort, cfg: &EvalConfig) -> f64 {
    let norm = move |v: &[C64]| k.norm(v);
    let grad = move |v: &[C64]| Some(k.norming(v).iter().map(|z| z.conj()).collect::<Vec<_>>());
    factor_upper(&Level1 { norm: &norm, grad: Some(&grad) }, x, e, cfg)
}

fn dsum_one_upper(children: &[SeqSpaceDesc], x: &CMatrix, e: Effort, cfg: &EvalConfig) -> (f64, String) {
    let triangle: f64 = blocks(children, x).map(|(_, c, b)| upper(c, &b, e, cfg).0).sum();
    if x.cols() == 1 {
        return (triangle, "level-sum".into());
    }
    let offs = starts(children);
    let norm = |v: &[C64]| {
        children
            .iter()
            .zip(&offs)
            .map(|(c, &s)| {
                let col = CMatrix::column_vector(&v[s..s + c.dim()]);
                upper(c, &col, Effort::Fast, cfg).0
            })
            .sum::<f64>()
    };
    let grad = |v: &[C64]| {
        let mut out = Vec::with_capacity(v.len());
        for (c, &s) in children.iter().zip(&offs) {
            let col = CMatrix::column_vector(&v[s..s + c.dim()]);
            out.extend(upper_grad(c, &col, cfg)?.column(0));
        }
        Some(out)
    };
    let f = factor_upper(&Level1 { norm: &norm, grad: Some(&grad) }, x, e, cfg);
    if f < triangle {
        (f, "factorization".into())
    } else {
        (triangle, "triangle".into())
    }
}

fn quotient_upper(child: &SeqSpaceDesc, kernel: &CMatrix, x: &CMatrix, e: Effort, cfg: &EvalConfig) -> f64 {
    let Some(q) = kernel.range_basis(1e-10) else {
        return upper(child, x, e, cfg).0;
    };
    let at = |w: &CMatrix| x.add(&q.matmul(w));
    let w0 = q.adjoint().matmul(x).scale(-1.0);
    let mut best = upper(child, &at(&w0), Effort::Fast, cfg).0.min(upper(child, x, Effort::Fast, cfg).0);
    if e == Effort::Fast || upper_grad(child, &at(&w0), cfg).is_none() {
        return best;
    }
    let inner = cfg.inner();
    let f = |w: &CMatrix| {
        let y = at(w);
        let v = upper(child, &y, Effort::Fast, &inner).0;
        (v, upper_grad(child, &y, &inner).map(|g| q.adjoint().matmul(&g)))
    };
    let scale = x.frob().max(1e-300);
    for r in 0..cfg.quotient_restarts.max(1) {
        let start = if r == 0 {
            w0.clone()
        } else {
            let mut rng = ChaCha8Rng::seed_from_u64(stream_seed(cfg.seed ^ 0x0C05, r as u64));
            let noise = gaussian_matrix(&mut rng, w0.rows(), w0.cols());
            w0.add_scaled(&noise, 0.3 * scale / noise.frob().max(1e-300))
        };
        let (_, w) = minimize(&f, None, start, cfg.quotient_iters, scale);
        best = best.min(upper(child, &at(&w), Effort::Fast, cfg).0);
    }
    best
}

/// Gradient of the fast upper bound, where one is available.
pub(crate) fn upper_grad(d: &SeqSpaceDesc, x: &CMatrix, cfg: &EvalConfig) -> Option<CMatrix> {
    if exact_value(d, x).is_some() {
        return exact_grad(d, x);
    }
    match d {
        SeqSpaceDesc::Subspace { child, basis } => {
            Some(basis.adjoint().matmul(&upper_grad(child, &basis.matmul(x), cfg)?))
        }
        SeqSpaceDesc::Dual { child } if !matches!(child.as_ref(), SeqSpaceDesc::CstarMatrix { .. }) => {
            let form = dual_form(child);
            Some(form.pull_grad(&upper_grad(&form.space, &form.lift_coords(x), cfg)?))
        }
        SeqSpaceDesc::DSumInf { children } => {
            let offs = starts(children);
            let (i, _) = blocks(children, x)
                .map(|(i, c, b)| (i, upper(c, &b, Effort::Fast, cfg).0))
                .fold((0, -1.0), |acc, (i, v)| if v > acc.1 { (i, v) } else { acc });
            let c = &children[i];
            let g = upper_grad(c, &x.rows_block(offs[i], c.dim()), cfg)?;
            Some(embed_rows(&g, offs[i], x.rows()))
        }
        SeqSpaceDesc::DSumOne { children } if x.cols() == 1 => {
            let parts: Option<Vec<CMatrix>> = blocks(children, x).map(|(_, c, b)| upper_grad(c, &b, cfg)).collect();
            CMatrix::vstack(&parts?).ok()
        }
        SeqSpaceDesc::Quotient { child, kernel } => {
            let q = kernel.range_basis(1e-10)?;
            let r = x.sub(&q.matmul(&q.adjoint().matmul(x)));
            upper_grad(child, &r, cfg)
        }
        _ => None,
    }
}

/// Certified lower bound and the witness that reproduces it.
pub(crate) fn lower(d: &SeqSpaceDesc, x: &CMatrix, e: Effort, cfg: &EvalConfig) -> (f64, Witness) {
    if x.is_zero() {
        return (0.0, Witness::Zero);
    }
    if let Some((v, _)) = exact_value(d, x) {
        return (v, Witness::ClosedForm);
    }
    match d {
        SeqSpaceDesc::Min { .. } => min_lower(d.ground_kind().expect("min has a ground"), x, e, cfg),
        SeqSpaceDesc::Max { ground } => {
            let (p, pw) = pairing_lower(d, x, e, cfg);
            let floor = SeqSpaceDesc::Min { ground: ground.clone() };
            let (m, mw) = lower(&floor, x, e, cfg);
            if m > p {
                (m, Witness::Minimal { inner: Box::new(mw) })
            } else {
                (p, pw)
            }
        }
        SeqSpaceDesc::DSumInf { children } => best_child(children, x, e, cfg),
        SeqSpaceDesc::DSumOne { children } => {
            if x.cols() == 1 {
                let mut total = 0.0;
                let mut parts = Vec::new();
                for (_, c, b) in blocks(children, x) {
                    let (v, w) = lower(c, &b, e, cfg);
                    total += v;
                    parts.push(w);
                }
                return (total, Witness::Sum { parts });
            }
            let (p, pw) = pairing_lower(d, x, e, cfg);
            let (c, cw) = best_child(children, x, e, cfg);
            if c > p {
                (c, cw)
            } else {
                (p, pw)
            }
        }
        SeqSpaceDesc::Dual { child } => match child.as_ref() {
            SeqSpaceDesc::CstarMatrix { .. } => pairing_lower(d, x, e, cfg),
            other => {
                let form = dual_form(other);
                let (v, w) = lower(&form.space, &form.lift_coords(x), e, cfg);
                (v, Witness::Rewrite { inner: Box::new(w) })
            }
        },
        SeqSpaceDesc::Subspace { child, basis } => {
            let (v, w) = lower(child, &basis.matmul(x), e, cfg);
            (v, Witness::Embedded { inner: Box::new(w) })
        }
        SeqSpaceDesc::Quotient { .. } => pairing_lower(d, x, e, cfg),
        _ => unreachable!("leaf structures have closed forms"),
    }
}

fn best_child(children: &[SeqSpaceDesc], x: &CMatrix, e: Effort, cfg: &EvalConfig) -> (f64, Witness) {
    let mut best = (0.0, Witness::Zero);
    for (i, c, b) in blocks(children, x) {
        let (v, w) = lower(c, &b, e, cfg);
        if v > best.0 {
            best = (v, Witness::Child { index: i, inner: Box::new(w) });
        }
    }
    best
}

/// Alternating maximization of `‖Σ ξ_i x_i‖` over unit vectors `ξ`.
fn min_lower(k: Kind, x: &CMatrix, e: Effort, cfg: &EvalConfig) -> (f64, Witness) {
    let n = x.cols();
    let mut seeds: Vec<Vec<C64>> = (0..n)
        .map(|i| {
            let mut v = vec![C64::new(0.0, 0.0); n];
            v[i] = C64::new(1.0, 0.0);
            v
        })
        .collect();
    let svd = x.svd();
    seeds.push(svd.v_t.row(0).iter().map(|z| z.conj()).collect());
    if e == Effort::Full {
        for r in 0..cfg.restarts {
            let mut rng = ChaCha8Rng::seed_from_u64(stream_seed(cfg.seed ^ 0x31A1, r as u64));
            seeds.push(gaussian_matrix(&mut rng, n, 1).column(0));
        }
    }
    let iters = if e == Effort::Full { 100 } else { 20 };
    let eval = |xi: &[C64]| {
        let nrm = xi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let v = x.matmul(&CMatrix::column_vector(xi)).column(0);
        k.norm(&v) / nrm
    };
    let mut best = (0.0, seeds[0].clone());
    for s in seeds {
        let mut xi = s;
        let mut val = eval(&xi);
        for _ in 0..iters {
            let v = x.matmul(&CMatrix::column_vector(&xi)).column(0);
            let f = k.norming(&v);
            let h = x.transpose().matmul(&CMatrix::column_vector(&f)).column(0);
            let hn = h.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            if hn == 0.0 {
                break;
            }
            let next: Vec<C64> = h.iter().map(|z| z.conj() / hn).collect();
            let nv = eval(&next);
            if nv <= val * (1.0 + 1e-13) {
                if nv > val {
                    xi = next;
                    val = nv;
                }
                break;
            }
            xi = next;
            val = nv;
        }
        if val > best.0 {
            best = (val, xi);
        }
    }
    let xi = CMatrix::column_vector(&best.1);
    (eval(&best.1), Witness::UnitVector { xi })
}

/// Lower bound `‖Xᵀ f‖_F / ‖f‖` over functional columns `f` of the dual.
fn pairing_lower(d: &SeqSpaceDesc, x: &CMatrix, e: Effort, cfg: &EvalConfig) -> (f64, Witness) {
    let form = dual_form(d);
    let h = form.pairing_matrix(x);
    let space = &form.space;
    let inner = cfg.inner();
    let hc = h.conj();
    let objective = |c: &CMatrix| {
        let p = h.transpose().matmul(c);
        let n = p.frob();
        let g = if n > 0.0 { hc.matmul(&p).scale(1.0 / n) } else { hc.clone() };
        (n, g)
    };
    let gauge = |c: &CMatrix| upper(space, c, Effort::Fast, &inner).0;
    let projector = |c: &CMatrix| project_ball(space, c).expect("checked projectable");
    let projectable = project_ball(space, &hc).is_some();
    let problem = RatioProblem {
        objective: &objective,
        gauge: &gauge,
        project: if projectable { Some(&projector) } else { None },
    };
    let mut seeds = vec![hc.clone()];
    let svd = h.svd();
    let top = CMatrix::column_vector(&svd.u.column(0)).conj();
    let right = CMatrix::from_columns(&[svd.v_t.row(0)]).expect("nonempty").transpose();
    seeds.push(top.matmul(&right));
    let iters = if e == Effort::Full { 20 } else { 3 };
    for f in rank_one_functionals(d, x, iters, &inner) {
        let mut c = CMatrix::zeros(h.rows(), h.cols());
        for (r, z) in form.lift_coords(&CMatrix::column_vector(&f)).column(0).into_iter().enumerate() {
            c.set(r, 0, z);
        }
        seeds.push(c);
    }
    let budget = match e {
        Effort::Full => SearchBudget { restarts: cfg.restarts, steps: cfg.steps, seed: cfg.seed ^ 0x9A1D },
        Effort::Fast => SearchBudget { restarts: 0, steps: 30, seed: cfg.seed ^ 0x9A1D },
    };
    match maximize_ratio(&problem, seeds, h.rows(), h.cols(), budget) {
        Some((_, c)) => {
            let w = Witness::Pairing { functional: c };
            (witness_value(d, x, &w, cfg), w)
        }
        None => (0.0, Witness::Zero),
    }
}

/// A functional of norm at most about one that nearly norms `v`, from the
/// gradient of the level-one upper bound.
pub(crate) fn level1_functional(d: &SeqSpaceDesc, v: &CMatrix, cfg: &EvalConfig) -> Option<Vec<C64>> {
    if let SeqSpaceDesc::Quotient { child, kernel } = d {
        let Some(q) = kernel.range_basis(1e-10) else {
            return level1_functional(child, v, cfg);
        };
        let rep = quotient_rep(child, &q, v, cfg);
        let f: Vec<C64> = level1_functional(child, &rep, cfg)?;
        let fm = CMatrix::column_vector(&f);
        let fixed = fm.sub(&q.conj().matmul(&q.transpose().matmul(&fm)));
        return Some(fixed.column(0));
    }
    let g = upper_grad(d, v, cfg)?;
    Some(g.column(0).iter().map(|z| z.conj()).collect())
}

/// Best coset representative found by descent.
fn quotient_rep(child: &SeqSpaceDesc, q: &CMatrix, x: &CMatrix, cfg: &EvalConfig) -> CMatrix {
    let at = |w: &CMatrix| x.add(&q.matmul(w));
    let w0 = q.adjoint().matmul(x).scale(-1.0);
    if upper_grad(child, &at(&w0), cfg).is_none() {
        return at(&w0);
    }
    let f = |w: &CMatrix| {
        let y = at(w);
        (upper(child, &y, Effort::Fast, cfg).0, upper_grad(child, &y, cfg).map(|g| q.adjoint().matmul(&g)))
    };
    let (_, w) = minimize(&f, None, w0, cfg.quotient_iters, x.frob().max(1e-300));
    at(&w)
}

/// Level-one power iteration `ξ ← conj(Xᵀ f)`, `f ← norming(X ξ)`, started
/// from the coordinate vectors and the top right singular vector.
fn rank_one_functionals(d: &SeqSpaceDesc, x: &CMatrix, iters: usize, cfg: &EvalConfig) -> Vec<Vec<C64>> {
    let n = x.cols();
    let mut starts: Vec<Vec<C64>> = (0..n)
        .map(|i| {
            let mut v = vec![C64::new(0.0, 0.0); n];
            v[i] = C64::new(1.0, 0.0);
            v
        })
        .collect();
    starts.push(x.svd().v_t.row(0).iter().map(|z| z.conj()).collect());
    let mut out = Vec::new();
    for xi in starts {
        let mut xi = CMatrix::column_vector(&xi);
        let mut last = None;
        for _ in 0..iters.max(1) {
            let Some(f) = level1_functional(d, &x.matmul(&xi), cfg) else { break };
            let h = x.transpose().matmul(&CMatrix::column_vector(&f));
            let hn = h.frob();
            last = Some(f);
            if hn == 0.0 {
                break;
            }
            let next = h.conj().scale(1.0 / hn);
            let moved = next.sub(&xi).frob();
            xi = next;
            if moved < 1e-12 {
                break;
            }
        }
        out.extend(last);
    }
    out
}

/// Recomputes the lower bound certified by a witness.
pub(crate) fn witness_value(d: &SeqSpaceDesc, x: &CMatrix, w: &Witness, cfg: &EvalConfig) -> f64 {
    match w {
        Witness::Zero => 0.0,
        Witness::ClosedForm => exact_value(d, x).map_or(f64::NAN, |v| v.0),
        Witness::UnitVector { xi } => match d.ground_kind() {
            Some(k) => k.norm(&x.matmul(xi).column(0)) / xi.frob(),
            None => f64::NAN,
        },
        Witness::Pairing { functional } => {
            let form = dual_form(d);
            let p = form.pairing_matrix(x).transpose().matmul(functional).frob();
            let g = upper(&form.space, functional, Effort::Fast, &cfg.inner()).0;
            if g > 0.0 {
                p / g
            } else {
                0.0
            }
        }
        Witness::Child { index, inner } => match d {
            SeqSpaceDesc::DSumInf { children } | SeqSpaceDesc::DSumOne { children } => {
                let s = starts(children)[*index];
                let c = &children[*index];
                witness_value(c, &x.rows_block(s, c.dim()), inner, cfg)
            }
            _ => f64::NAN,
        },
        Witness::Sum { parts } => match d {
            SeqSpaceDesc::DSumOne { children } => {
                blocks(children, x).zip(parts).map(|((_, c, b), p)| witness_value(c, &b, p, cfg)).sum()
            }
            _ => f64::NAN,
        },
        Witness::Minimal { inner } => match d {
            SeqSpaceDesc::Max { ground } => witness_value(&SeqSpaceDesc::Min { ground: ground.clone() }, x, inner, cfg),
            _ => f64::NAN,
        },
        Witness::Embedded { inner } => match d {
            SeqSpaceDesc::Subspace { child, basis } => witness_value(child, &basis.matmul(x), inner, cfg),
            _ => f64::NAN,
        },
        Witness::Rewrite { inner } => match d {
            SeqSpaceDesc::Dual { child } => {
                let form = dual_form(child);
                witness_value(&form.space, &form.lift_coords(x), inner, cfg)
            }
            _ => f64::NAN,
        },
        Witness::Point { .. } | Witness::Product { .. } => f64::NAN,
    }
}
