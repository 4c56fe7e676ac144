//! Sequentially bounded operators between operator sequence spaces.
//!
//! An operator is a ground matrix `Φ` acting on coordinate columns, so its
//! `n`-th amplification sends `X` to `Φ X`. Norm bounds come in pairs: the
//! lower end is certified by a point of the domain, the upper end by an
//! analytic inequality named in the certificate.

use serde::{Deserialize, Serialize};

use crate::error::{dim_err, Error, Result};
use crate::matcore::{block_diag, op_norm, CMatrix, C64};
use crate::optim::{maximize_ratio, RatioProblem, SearchBudget};
use crate::sqspaces::{
    dual_form, estimate, exact_value, lower, project_ball, shape, upper, upper_grad, Effort, ElementColumn, EvalConfig,
    NormEstimate, SeqSpaceDesc, Shape, Witness,
};

/// A linear map between two spaces, given by its ground matrix.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeqOperator {
    pub domain: SeqSpaceDesc,
    pub codomain: SeqSpaceDesc,
    /// `codomain.dim() × domain.dim()`.
    pub matrix: CMatrix,
}

impl SeqOperator {
    pub fn new(domain: SeqSpaceDesc, codomain: SeqSpaceDesc, matrix: CMatrix) -> Result<Self> {
        let op = SeqOperator { domain, codomain, matrix };
        op.validate()?;
        Ok(op)
    }

    pub fn identity(space: SeqSpaceDesc) -> Result<Self> {
        let k = space.dim();
        SeqOperator::new(space.clone(), space, CMatrix::identity(k))
    }

    pub fn validate(&self) -> Result<()> {
        self.domain.validate()?;
        self.codomain.validate()?;
        let (r, c) = (self.codomain.dim(), self.domain.dim());
        if self.matrix.rows() != r || self.matrix.cols() != c {
            return dim_err(format!(
                "operator matrix is {}×{}, spaces need {r}×{c}",
                self.matrix.rows(),
                self.matrix.cols()
            ));
        }
        let tol = 1e-9 * (1.0 + op_norm(&self.matrix));
        let fd = feasible(&self.domain);
        let fc = feasible(&self.codomain);
        let img = self.matrix.matmul(&fd);
        if img.sub(&fc.matmul(&fc.adjoint().matmul(&img))).frob() > tol {
            return Err(Error::Structure("operator image leaves the admissible coordinates".into()));
        }
        if let Some(q) = ignored(&self.domain) {
            let ec = effective(&self.codomain);
            if ec.adjoint().matmul(&self.matrix.matmul(&q)).frob() > tol {
                return Err(Error::Structure("operator does not vanish on the quotient kernel".into()));
            }
        }
        Ok(())
    }

    /// The composition `after ∘ self`.
    pub fn then(&self, after: &SeqOperator) -> Result<SeqOperator> {
        if after.domain != self.codomain {
            return Err(Error::Structure("composition of operators with mismatched spaces".into()));
        }
        SeqOperator::new(self.domain.clone(), after.codomain.clone(), after.matrix.matmul(&self.matrix))
    }
}

/// Orthonormal basis of the coordinates that represent elements.
pub(crate) fn feasible(d: &SeqSpaceDesc) -> CMatrix {
    match d {
        SeqSpaceDesc::Dual { child } => match child.as_ref() {
            SeqSpaceDesc::Quotient { child: c, kernel } => {
                let f = feasible(&SeqSpaceDesc::Dual { child: c.clone() });
                restrict(&f, &kernel.transpose())
            }
            SeqSpaceDesc::Dual { child: c } => feasible(c),
            SeqSpaceDesc::DSumInf { children } | SeqSpaceDesc::DSumOne { children } => {
                let blocks: Vec<CMatrix> =
                    children.iter().map(|c| feasible(&SeqSpaceDesc::Dual { child: Box::new(c.clone()) })).collect();
                block_diag(&blocks)
            }
            _ => CMatrix::identity(d.dim()),
        },
        SeqSpaceDesc::Quotient { child, .. } => feasible(child),
        SeqSpaceDesc::DSumInf { children } | SeqSpaceDesc::DSumOne { children } => {
            block_diag(&children.iter().map(feasible).collect::<Vec<_>>())
        }
        _ => CMatrix::identity(d.dim()),
    }
}

/// Orthonormal basis of the directions identified with zero.
fn ignored(d: &SeqSpaceDesc) -> Option<CMatrix> {
    match d {
        SeqSpaceDesc::Quotient { child, kernel } => {
            let mut cols: Vec<Vec<C64>> = ignored(child).map(|q| cols_of(&q)).unwrap_or_default();
            cols.extend(cols_of(kernel));
            CMatrix::from_columns(&cols).ok()?.range_basis(1e-10)
        }
        SeqSpaceDesc::DSumInf { children } | SeqSpaceDesc::DSumOne { children } => {
            let k = d.dim();
            let mut cols = Vec::new();
            let mut start = 0;
            for c in children {
                if let Some(q) = ignored(c) {
                    for v in cols_of(&q) {
                        let mut full = vec![C64::new(0.0, 0.0); k];
                        full[start..start + v.len()].copy_from_slice(&v);
                        cols.push(full);
                    }
                }
                start += c.dim();
            }
            CMatrix::from_columns(&cols).ok()
        }
        SeqSpaceDesc::Dual { child } => match child.as_ref() {
            SeqSpaceDesc::Dual { child: c } => ignored(c),
            _ => None,
        },
        _ => None,
    }
}

/// Orthonormal coordinates of the space: admissible and modulo the kernel.
fn effective(d: &SeqSpaceDesc) -> CMatrix {
    let f = feasible(d);
    match ignored(d) {
        Some(q) => restrict(&f, &q.adjoint()),
        None => f,
    }
}

fn cols_of(m: &CMatrix) -> Vec<Vec<C64>> {
    (0..m.cols()).map(|j| m.column(j)).collect()
}

/// Columns of `s` combined into an orthonormal basis of `{s w : a s w = 0}`.
fn restrict(s: &CMatrix, a: &CMatrix) -> CMatrix {
    match a.matmul(s).null_space(1e-10) {
        Some(nb) => s.matmul(&nb),
        None => s.clone(),
    }
}

/// Constants with `lo ‖v‖₂ ≤ N(v) ≤ hi ‖v‖₂` for the level-one norm on
/// effective coordinates.
fn l2_bounds(d: &SeqSpaceDesc) -> (f64, f64) {
    match d {
        SeqSpaceDesc::HilbMax { .. } | SeqSpaceDesc::T2 { .. } => (1.0, 1.0),
        SeqSpaceDesc::Min { .. } | SeqSpaceDesc::Max { .. } => {
            d.ground_kind().map_or((1.0, 1.0), |k| k.l2_equivalence())
        }
        SeqSpaceDesc::CstarMatrix { a } => (1.0 / (*a as f64).sqrt(), 1.0),
        SeqSpaceDesc::CstarDiag { dim } => (1.0 / (*dim as f64).sqrt(), 1.0),
        SeqSpaceDesc::DSumInf { children } => {
            let (lo, hi) = fold_bounds(children);
            (lo / (children.len() as f64).sqrt(), hi)
        }
        SeqSpaceDesc::DSumOne { children } => {
            let (lo, hi) = fold_bounds(children);
            (lo, hi * (children.len() as f64).sqrt())
        }
        SeqSpaceDesc::Dual { child } => {
            let (lo, hi) = l2_bounds(child);
            (1.0 / hi, 1.0 / lo)
        }
        SeqSpaceDesc::Subspace { child, basis } => {
            let (lo, hi) = l2_bounds(child);
            let s = basis.singular_values();
            (lo * s.last().copied().unwrap_or(0.0), hi * s[0])
        }
        SeqSpaceDesc::Quotient { child, .. } => l2_bounds(child),
    }
}

fn fold_bounds(children: &[SeqSpaceDesc]) -> (f64, f64) {
    children.iter().map(l2_bounds).fold((f64::INFINITY, 0.0), |(lo, hi), (l, h)| (lo.min(l), hi.max(h)))
}

/// Closed-form shape, following plain dual identifications.
fn resolved_shape(d: &SeqSpaceDesc) -> Option<Shape> {
    if let Some(s) = shape(d) {
        return Some(s);
    }
    match d {
        SeqSpaceDesc::Dual { child } => {
            let form = dual_form(child);
            if form.map.is_none() && form.lift.is_none() && !matches!(form.space, SeqSpaceDesc::Dual { .. }) {
                resolved_shape(&form.space)
            } else {
                None
            }
        }
        _ => None,
    }
}

fn is_unit_scalar(d: &SeqSpaceDesc) -> bool {
    d.dim() == 1 && l2_bounds(d) == (1.0, 1.0)
}

/// Level-one norm is `ℓ₁` in the given coordinates.
fn is_ell1(d: &SeqSpaceDesc) -> bool {
    match d {
        SeqSpaceDesc::DSumOne { children } => children.iter().all(is_unit_scalar),
        SeqSpaceDesc::Dual { child } => is_ellinf(child),
        _ => is_unit_scalar(d) || matches!(d.ground_kind(), Some(crate::ground::Kind::L1(_))),
    }
}

/// Level-one norm is `ℓ∞` in the given coordinates.
fn is_ellinf(d: &SeqSpaceDesc) -> bool {
    match d {
        SeqSpaceDesc::CstarDiag { .. } => true,
        SeqSpaceDesc::DSumInf { children } => children.iter().all(is_unit_scalar),
        SeqSpaceDesc::Dual { child } => is_ell1(child),
        _ => is_unit_scalar(d) || matches!(d.ground_kind(), Some(crate::ground::Kind::Linf(_))),
    }
}

fn is_max_type(d: &SeqSpaceDesc) -> bool {
    match d {
        SeqSpaceDesc::Max { .. } | SeqSpaceDesc::HilbMax { .. } => true,
        SeqSpaceDesc::DSumOne { children } => children.iter().all(is_unit_scalar),
        SeqSpaceDesc::Dual { child } => is_min_type(child),
        _ => is_unit_scalar(d),
    }
}

fn is_min_type(d: &SeqSpaceDesc) -> bool {
    match d {
        SeqSpaceDesc::Min { .. } | SeqSpaceDesc::T2 { .. } | SeqSpaceDesc::CstarDiag { .. } => true,
        SeqSpaceDesc::DSumInf { children } => children.iter().all(is_unit_scalar),
        SeqSpaceDesc::Dual { child } => is_max_type(child),
        _ => is_unit_scalar(d),
    }
}

fn is_identity(m: &CMatrix) -> bool {
    m.rows() == m.cols() && m.sub(&CMatrix::identity(m.rows())).max_abs() <= 1e-14
}

/// `(Σ_{i ≤ n} σ_i²)^{1/2}`.
fn hs_top(m: &CMatrix, n: usize) -> f64 {
    m.singular_values().iter().take(n).map(|s| s * s).sum::<f64>().sqrt()
}

fn max_row(m: &CMatrix, p1: bool) -> f64 {
    (0..m.rows())
        .map(|i| {
            let r = m.row(i);
            if p1 {
                r.iter().map(|z| z.norm()).sum()
            } else {
                r.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
            }
        })
        .fold(0.0, f64::max)
}

fn effective_matrix(phi: &SeqOperator) -> CMatrix {
    effective(&phi.codomain).adjoint().matmul(&phi.matrix).matmul(&effective(&phi.domain))
}

/// Norm-preserving identity maps between identified spaces.
fn isometric_identity(phi: &SeqOperator) -> bool {
    if !is_identity(&phi.matrix) {
        return false;
    }
    if phi.domain == phi.codomain {
        return true;
    }
    match (&phi.domain, &phi.codomain) {
        (SeqSpaceDesc::Dual { child: d }, SeqSpaceDesc::Dual { child: c }) => {
            matches!(d.as_ref(), SeqSpaceDesc::Quotient { child, .. } if child == c)
        }
        _ => false,
    }
}

fn contractive_identity(phi: &SeqOperator) -> bool {
    isometric_identity(phi)
        || (is_identity(&phi.matrix)
            && matches!(&phi.codomain, SeqSpaceDesc::Quotient { child, .. } if child.as_ref() == &phi.domain))
}

fn pair_upper(phi: &SeqOperator, n: usize) -> Option<(f64, &'static str)> {
    let sd = resolved_shape(&phi.domain)?;
    let sc = resolved_shape(&phi.codomain)?;
    let m = &phi.matrix;
    match (sd, sc) {
        (Shape::Frob, Shape::Frob) | (Shape::Frob, Shape::Sigma) | (Shape::Sigma, Shape::Sigma) => {
            Some((op_norm(m), "operator-norm"))
        }
        (Shape::Frob, Shape::RowMax) | (Shape::Sigma, Shape::RowMax) => Some((max_row(m, false), "row-norm")),
        (Shape::Sigma, Shape::Frob) => Some((hs_top(m, n), "top-singular-values")),
        (Shape::RowMax, Shape::RowMax) => Some((max_row(m, true), "absolute-row-sum")),
        _ => None,
    }
}

fn level1_upper(phi: &SeqOperator, cfg: &EvalConfig) -> (f64, String) {
    let (lo_d, _) = l2_bounds(&phi.domain);
    let (_, hi_c) = l2_bounds(&phi.codomain);
    let mut best = (hi_c / lo_d * op_norm(&effective_matrix(phi)), "norm-equivalence".to_string());
    let mut consider = |v: f64, c: &str| {
        if v < best.0 {
            best = (v, c.to_string());
        }
    };
    if let Some((v, c)) = pair_upper(phi, 1) {
        consider(v, c);
    }
    if is_ell1(&phi.domain) {
        let v = (0..phi.matrix.cols())
            .map(|j| upper(&phi.codomain, &CMatrix::column_vector(&phi.matrix.column(j)), Effort::Fast, cfg).0)
            .fold(0.0, f64::max);
        consider(v, "extreme-points");
    }
    if is_ellinf(&phi.codomain) {
        let dual = SeqSpaceDesc::Dual { child: Box::new(phi.domain.clone()) };
        let v = (0..phi.matrix.rows())
            .map(|i| upper(&dual, &CMatrix::column_vector(&phi.matrix.row(i)), Effort::Fast, cfg).0)
            .fold(0.0, f64::max);
        consider(v, "coordinate-functionals");
    }
    best
}

fn op_upper(phi: &SeqOperator, n: usize, cfg: &EvalConfig) -> (f64, String) {
    if contractive_identity(phi) {
        return (1.0, "identity".into());
    }
    let (lo_d, _) = l2_bounds(&phi.domain);
    let (_, hi_c) = l2_bounds(&phi.codomain);
    let mut best = (hi_c / lo_d * hs_top(&effective_matrix(phi), n), "norm-equivalence".to_string());
    if let Some((v, c)) = pair_upper(phi, n) {
        if v < best.0 {
            best = (v, c.to_string());
        }
    }
    if resolved_shape(&phi.domain) == Some(Shape::Sigma) {
        if let Ok(e) = estimate(&phi.codomain, &phi.matrix, cfg) {
            if e.upper < best.0 {
                best = (e.upper, "column-identification".into());
            }
        }
    }
    if n == 1 || is_max_type(&phi.domain) || is_min_type(&phi.codomain) {
        let (v, c) = level1_upper(phi, cfg);
        if v < best.0 {
            best = (v, format!("level-one:{c}"));
        }
    }
    best
}

/// Sound lower norm of `y`, cheap when a closed form exists.
fn lower_of(d: &SeqSpaceDesc, y: &CMatrix, cfg: &EvalConfig) -> f64 {
    if y.is_zero() {
        return 0.0;
    }
    exact_value(d, y).map_or_else(|| lower(d, y, Effort::Fast, cfg).0, |v| v.0)
}

fn rank_one(v: &[C64], n: usize) -> CMatrix {
    CMatrix::column_vector(v).pad_cols(n)
}

fn unit(v: Vec<C64>) -> Option<Vec<C64>> {
    let s = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    (s > 0.0).then(|| v.into_iter().map(|z| z / s).collect())
}

/// Right singular vectors of `m` mapped back through `basis`, largest first.
fn right_vectors(m: &CMatrix, basis: &CMatrix) -> Vec<Vec<C64>> {
    let svd = m.svd();
    (0..svd.v_t.rows())
        .map(|i| {
            let v: Vec<C64> = svd.v_t.row(i).iter().map(|z| z.conj()).collect();
            basis.matmul(&CMatrix::column_vector(&v)).column(0)
        })
        .collect()
}

fn from_cols(cols: &[Vec<C64>], k: usize, n: usize) -> CMatrix {
    let mut x = CMatrix::zeros(k, n);
    for (j, c) in cols.iter().take(n).enumerate() {
        for (i, z) in c.iter().enumerate() {
            x.set(i, j, *z);
        }
    }
    x
}

fn op_seeds(phi: &SeqOperator, n: usize) -> Vec<CMatrix> {
    let k = phi.domain.dim();
    let ed = effective(&phi.domain);
    let vs = right_vectors(&effective_matrix(phi), &ed);
    let mut seeds = vec![from_cols(&vs, k, n), rank_one(&vs[0], n)];
    for i in 0..phi.matrix.rows().min(16) {
        let row = phi.matrix.row(i);
        if let Some(u) = unit(row.iter().map(|z| z.conj()).collect()) {
            seeds.push(rank_one(&u, n));
        }
        let phase: Vec<C64> =
            row.iter().map(|z| if z.norm() > 0.0 { z.conj() / z.norm() } else { C64::new(0.0, 0.0) }).collect();
        if phase.iter().any(|z| z.norm() > 0.0) {
            seeds.push(rank_one(&phase, n));
        }
    }
    for j in 0..k.min(16) {
        seeds.push(rank_one(&ed.row(j).iter().map(|z| z.conj()).collect::<Vec<_>>(), n));
    }
    seeds
}

fn certify_point(phi: &SeqOperator, v: &CMatrix, cfg: &EvalConfig) -> f64 {
    let g = upper(&phi.domain, v, Effort::Fast, cfg).0;
    if !(g > 0.0) {
        return 0.0;
    }
    lower_of(&phi.codomain, &phi.matrix.matmul(v), cfg) / g
}

fn feasible_projector(d: &SeqSpaceDesc) -> Option<CMatrix> {
    let f = feasible(d);
    (f.cols() < d.dim()).then(|| f.matmul(&f.adjoint()))
}

fn op_lower(phi: &SeqOperator, n: usize, restarts: usize, cfg: &EvalConfig) -> (f64, CMatrix) {
    let m = &phi.matrix;
    let ma = m.adjoint();
    let cod = &phi.codomain;
    let dom = &phi.domain;
    let objective = |v: &CMatrix| {
        let y = m.matmul(v);
        let val = upper(cod, &y, Effort::Fast, cfg).0;
        let g = match upper_grad(cod, &y, cfg) {
            Some(g) => ma.matmul(&g),
            None => ma.matmul(&y),
        };
        (val, g)
    };
    let gauge = |v: &CMatrix| upper(dom, v, Effort::Fast, cfg).0;
    let pf = feasible_projector(dom);
    let ball = project_ball(dom, &CMatrix::zeros(dom.dim(), n)).is_some();
    let projector = |v: &CMatrix| {
        let w = pf.as_ref().map_or_else(|| v.clone(), |p| p.matmul(v));
        if ball {
            project_ball(dom, &w).unwrap_or(w)
        } else {
            w
        }
    };
    let problem = RatioProblem {
        objective: &objective,
        gauge: &gauge,
        project: if pf.is_some() || ball { Some(&projector) } else { None },
    };
    let seeds = op_seeds(phi, n);
    let budget = SearchBudget { restarts: restarts.max(seeds.len()), steps: cfg.steps, seed: cfg.seed ^ 0x0B5 };
    let budget = if restarts == 0 { SearchBudget { restarts: 0, ..budget } } else { budget };
    match maximize_ratio(&problem, seeds, dom.dim(), n, budget) {
        Some((_, v)) => (certify_point(phi, &v, cfg), v),
        None => (0.0, CMatrix::zeros(dom.dim(), n)),
    }
}

fn check_level(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::Precondition("level must be at least 1".into()));
    }
    Ok(())
}

/// Columnwise image `φ⁽ⁿ⁾(x)`.
pub fn amplify_apply(phi: &SeqOperator, x: &ElementColumn) -> Result<ElementColumn> {
    if x.space != phi.domain {
        return Err(Error::Structure("element does not live in the operator domain".into()));
    }
    Ok(ElementColumn { space: phi.codomain.clone(), coords: phi.matrix.matmul(&x.coords) })
}

pub fn amp_op_norm(phi: &SeqOperator, n: usize) -> Result<NormEstimate> {
    amp_op_norm_with(phi, n, &EvalConfig::default())
}

/// Certified bounds on `‖φ⁽ⁿ⁾‖`.
pub fn amp_op_norm_with(phi: &SeqOperator, n: usize, cfg: &EvalConfig) -> Result<NormEstimate> {
    check_level(n)?;
    phi.validate()?;
    if effective_matrix(phi).max_abs() == 0.0 {
        return Ok(NormEstimate::zero());
    }
    let (up, cert) = op_upper(phi, n, cfg);
    let (mut lo, mut v) = op_lower(phi, n, 0, cfg);
    if up - lo > 1e-9 * (1.0 + up) {
        let (l2, v2) = op_lower(phi, n, cfg.restarts, cfg);
        if l2 > lo {
            lo = l2;
            v = v2;
        }
    }
    let lo = if lo > up && lo - up <= 1e-10 * (1.0 + up) { up } else { lo };
    Ok(NormEstimate {
        lower: lo,
        upper: up,
        exact: up - lo <= 1e-9 * (1.0 + up),
        witness: Witness::Point { coords: v },
        certificate: cert,
    })
}

/// Recomputes the lower bound carried by an operator norm estimate.
pub fn reproduce_op_lower(phi: &SeqOperator, est: &NormEstimate, cfg: &EvalConfig) -> f64 {
    match &est.witness {
        Witness::Point { coords } => certify_point(phi, coords, cfg),
        Witness::Zero => 0.0,
        _ => f64::NAN,
    }
}

/// Sequential norm, attained at the level of the codomain dimension.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SbNorm {
    pub level: usize,
    pub estimate: NormEstimate,
}

pub fn sb_norm(phi: &SeqOperator) -> Result<SbNorm> {
    sb_norm_with(phi, &EvalConfig::default())
}

pub fn sb_norm_with(phi: &SeqOperator, cfg: &EvalConfig) -> Result<SbNorm> {
    let level = phi.codomain.dim();
    Ok(SbNorm { level, estimate: amp_op_norm_with(phi, level, cfg)? })
}

/// The dual operator, acting on functionals by the transpose.
pub fn dual_operator(phi: &SeqOperator) -> SeqOperator {
    SeqOperator {
        domain: SeqSpaceDesc::Dual { child: Box::new(phi.codomain.clone()) },
        codomain: SeqSpaceDesc::Dual { child: Box::new(phi.domain.clone()) },
        matrix: phi.matrix.transpose(),
    }
}

/// The operator `ξ ↦ Σ ξ_i x_i` on `t₂ⁿ`.
pub fn column_to_operator(x: &ElementColumn) -> SeqOperator {
    SeqOperator { domain: SeqSpaceDesc::t2(x.level()), codomain: x.space.clone(), matrix: x.coords.clone() }
}

pub fn operator_to_column(psi: &SeqOperator) -> Result<ElementColumn> {
    match psi.domain {
        SeqSpaceDesc::T2 { n } if n == psi.matrix.cols() => {
            ElementColumn::new(psi.codomain.clone(), psi.matrix.clone())
        }
        _ => Err(Error::Structure(format!("expected an operator on T2, got one on {}", psi.domain.tag()))),
    }
}

/// Two-sided bounds on a constant that may be infinite.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConstBound {
    #[serde(with = "ext_real")]
    pub lower: f64,
    #[serde(with = "ext_real")]
    pub upper: f64,
}

impl ConstBound {
    const INFINITE: ConstBound = ConstBound { lower: f64::INFINITY, upper: f64::INFINITY };
}

mod ext_real {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_infinite() && *v > 0.0 {
            s.serialize_str("inf")
        } else {
            s.serialize_f64(*v)
        }
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Text(String),
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Num(v) => Ok(v),
            Repr::Text(t) if t == "inf" => Ok(f64::INFINITY),
            Repr::Text(t) => Err(serde::de::Error::custom(format!("expected a number or \"inf\", got {t}"))),
        }
    }
}

/// Lower bound on `inf ‖φ⁽ⁿ⁾x‖ / ‖x‖` from analytic inequalities.
fn inj_floor(phi: &SeqOperator, m: &CMatrix, smin: f64, n: usize) -> f64 {
    if isometric_identity(phi) {
        return 1.0;
    }
    let r = (n.min(m.cols()) as f64).sqrt();
    let (lo_c, _) = l2_bounds(&phi.codomain);
    let (_, hi_d) = l2_bounds(&phi.domain);
    let mut best = lo_c * smin / (hi_d * r);
    if let (Some(sd), Some(sc)) = (resolved_shape(&phi.domain), resolved_shape(&phi.codomain)) {
        let v = match (sd, sc) {
            (Shape::Frob, Shape::Frob) | (Shape::Sigma, Shape::Sigma) | (Shape::Sigma, Shape::Frob) => smin,
            (Shape::Frob, Shape::Sigma) => smin / r,
            _ => 0.0,
        };
        best = best.max(v);
    }
    best
}

fn inj_seeds(phi: &SeqOperator, n: usize) -> Vec<CMatrix> {
    let k = phi.domain.dim();
    let mut vs = right_vectors(&effective_matrix(phi), &effective(&phi.domain));
    vs.reverse();
    vec![rank_one(&vs[0], n), from_cols(&vs, k, n)]
}

fn certify_inj(phi: &SeqOperator, v: &CMatrix, cfg: &EvalConfig) -> f64 {
    let g = upper(&phi.codomain, &phi.matrix.matmul(v), Effort::Fast, cfg).0;
    if !(g > 0.0) {
        return 0.0;
    }
    lower_of(&phi.domain, v, cfg) / g
}

fn inj_sample(phi: &SeqOperator, n: usize, restarts: usize, cfg: &EvalConfig) -> f64 {
    let m = &phi.matrix;
    let dom = &phi.domain;
    let objective = |v: &CMatrix| {
        let val = upper(dom, v, Effort::Fast, cfg).0;
        let g = upper_grad(dom, v, cfg).unwrap_or_else(|| v.clone());
        (val, g)
    };
    let gauge = |v: &CMatrix| upper(&phi.codomain, &m.matmul(v), Effort::Fast, cfg).0;
    let ed = effective(dom);
    let pe = ed.matmul(&ed.adjoint());
    let projector = |v: &CMatrix| pe.matmul(v);
    let reduced = ed.cols() < dom.dim();
    let problem =
        RatioProblem { objective: &objective, gauge: &gauge, project: if reduced { Some(&projector) } else { None } };
    let seeds = inj_seeds(phi, n);
    let budget = SearchBudget { restarts, steps: cfg.steps, seed: cfg.seed ^ 0x1AC };
    maximize_ratio(&problem, seeds, dom.dim(), n, budget).map_or(0.0, |(_, v)| certify_inj(phi, &v, cfg))
}

/// Bounds on the injectivity constant of `φ⁽ⁿ⁾`.
pub fn injectivity_constant(phi: &SeqOperator, n: usize, cfg: &EvalConfig) -> Result<ConstBound> {
    check_level(n)?;
    phi.validate()?;
    let m = effective_matrix(phi);
    let s = m.singular_values();
    let smax = s.first().copied().unwrap_or(0.0);
    if m.cols() > m.rows() || smax == 0.0 || s[m.cols() - 1] <= 1e-12 * smax {
        return Ok(ConstBound::INFINITE);
    }
    let smin = s[m.cols() - 1];
    let up = 1.0 / inj_floor(phi, &m, smin, n);
    let mut lo = inj_sample(phi, n, 0, cfg);
    if up - lo > 1e-9 * (1.0 + up) {
        lo = lo.max(inj_sample(phi, n, cfg.restarts, cfg));
    }
    let lo = if lo > up && lo - up <= 1e-9 * (1.0 + up) { up } else { lo };
    Ok(ConstBound { lower: lo, upper: up })
}

/// Bounds on the surjectivity constant of `φ⁽ⁿ⁾`, read off the dual.
pub fn surjectivity_constant(phi: &SeqOperator, n: usize, cfg: &EvalConfig) -> Result<ConstBound> {
    injectivity_constant(&dual_operator(phi), n, cfg)
}

pub const FLAG_TOL: f64 = 1e-6;

/// Per-level constants and flags. A flag is set when the computed bounds do
/// not refute the property within [`FLAG_TOL`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Classification {
    pub levels: Vec<usize>,
    pub op_norm: Vec<NormEstimate>,
    pub c_inj: Vec<ConstBound>,
    pub c_surj: Vec<ConstBound>,
    pub contractive: Vec<bool>,
    pub isometric: Vec<bool>,
    pub coisometric: Vec<bool>,
}

pub fn classify(phi: &SeqOperator, n_max: usize) -> Result<Classification> {
    classify_with(phi, n_max, &EvalConfig::default())
}

pub fn classify_with(phi: &SeqOperator, n_max: usize, cfg: &EvalConfig) -> Result<Classification> {
    check_level(n_max)?;
    phi.validate()?;
    let mut out = Classification {
        levels: Vec::new(),
        op_norm: Vec::new(),
        c_inj: Vec::new(),
        c_surj: Vec::new(),
        contractive: Vec::new(),
        isometric: Vec::new(),
        coisometric: Vec::new(),
    };
    for n in 1..=n_max {
        let op = amp_op_norm_with(phi, n, cfg)?;
        let inj = injectivity_constant(phi, n, cfg)?;
        let surj = surjectivity_constant(phi, n, cfg)?;
        let contractive = op.lower <= 1.0 + FLAG_TOL;
        out.levels.push(n);
        out.contractive.push(contractive);
        out.isometric.push(contractive && inj.lower <= 1.0 + FLAG_TOL);
        out.coisometric.push(contractive && surj.lower <= 1.0 + FLAG_TOL);
        out.op_norm.push(op);
        out.c_inj.push(inj);
        out.c_surj.push(surj);
    }
    Ok(out)
}
