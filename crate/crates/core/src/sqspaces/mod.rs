//! Amplified norms of operator sequence spaces.
//!
//! A space is described by a [`SeqSpaceDesc`] tree. An element at level `n`
//! is stored as a `k × n` coordinate matrix whose columns are ground vectors.
//! Every evaluator returns a [`NormEstimate`]: a certified interval whose
//! lower end is reproduced by a stored [`Witness`].

mod closed;
mod dualform;
mod eval;
mod factor;
mod t2n;

use serde::{Deserialize, Serialize};

use crate::error::{dim_err, Error, Result};
use crate::ground::{GroundSpace, Kind};
use crate::matcore::{CMatrix, C64};

pub(crate) use closed::{exact_grad, exact_value, project_ball, shape, Shape};
pub(crate) use dualform::dual_form;
pub(crate) use eval::{level1_functional, lower, upper, upper_grad, witness_value};
pub use t2n::{t2n_norm, t2n_norm_with, t2n_upper_invertible, T2nEstimate};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "tag")]
pub enum SeqSpaceDesc {
    /// `l_2^k` with the Frobenius norm at every level.
    HilbMax {
        dim: usize,
    },
    Min {
        ground: GroundSpace,
    },
    Max {
        ground: GroundSpace,
    },
    /// `M_a` with its C*-algebra structure, coordinates row-major.
    CstarMatrix {
        a: usize,
    },
    /// The diagonal algebra `l_∞^k`.
    CstarDiag {
        dim: usize,
    },
    /// `min(l_2^n)`.
    T2 {
        n: usize,
    },
    DSumInf {
        children: Vec<SeqSpaceDesc>,
    },
    DSumOne {
        children: Vec<SeqSpaceDesc>,
    },
    Dual {
        child: Box<SeqSpaceDesc>,
    },
    /// Elements are coordinates in the columns of `basis`.
    Subspace {
        child: Box<SeqSpaceDesc>,
        basis: CMatrix,
    },
    /// Cosets are represented by parent coordinates; `kernel` spans the
    /// subspace being factored out.
    Quotient {
        child: Box<SeqSpaceDesc>,
        kernel: CMatrix,
    },
}

impl SeqSpaceDesc {
    pub fn hilb(dim: usize) -> Self {
        SeqSpaceDesc::HilbMax { dim }
    }
    pub fn t2(n: usize) -> Self {
        SeqSpaceDesc::T2 { n }
    }
    pub fn min(ground: GroundSpace) -> Self {
        SeqSpaceDesc::Min { ground }
    }
    pub fn max(ground: GroundSpace) -> Self {
        SeqSpaceDesc::Max { ground }
    }
    pub fn cstar_matrix(a: usize) -> Self {
        SeqSpaceDesc::CstarMatrix { a }
    }
    pub fn cstar_diag(dim: usize) -> Self {
        SeqSpaceDesc::CstarDiag { dim }
    }
    /// The scalar field with its unique structure.
    pub fn scalars() -> Self {
        SeqSpaceDesc::HilbMax { dim: 1 }
    }

    /// Ground dimension of the space.
    pub fn dim(&self) -> usize {
        match self {
            SeqSpaceDesc::HilbMax { dim } | SeqSpaceDesc::CstarDiag { dim } => *dim,
            SeqSpaceDesc::T2 { n } => *n,
            SeqSpaceDesc::Min { ground } | SeqSpaceDesc::Max { ground } => ground.dim(),
            SeqSpaceDesc::CstarMatrix { a } => a * a,
            SeqSpaceDesc::DSumInf { children } | SeqSpaceDesc::DSumOne { children } => {
                children.iter().map(|c| c.dim()).sum()
            }
            SeqSpaceDesc::Dual { child } => child.dim(),
            SeqSpaceDesc::Subspace { basis, .. } => basis.cols(),
            SeqSpaceDesc::Quotient { child, .. } => child.dim(),
        }
    }

    pub fn tag(&self) -> &'static str {
        match self {
            SeqSpaceDesc::HilbMax { .. } => "HilbMax",
            SeqSpaceDesc::Min { .. } => "Min",
            SeqSpaceDesc::Max { .. } => "Max",
            SeqSpaceDesc::CstarMatrix { .. } => "CstarMatrix",
            SeqSpaceDesc::CstarDiag { .. } => "CstarDiag",
            SeqSpaceDesc::T2 { .. } => "T2",
            SeqSpaceDesc::DSumInf { .. } => "DSumInf",
            SeqSpaceDesc::DSumOne { .. } => "DSumOne",
            SeqSpaceDesc::Dual { .. } => "Dual",
            SeqSpaceDesc::Subspace { .. } => "Subspace",
            SeqSpaceDesc::Quotient { .. } => "Quotient",
        }
    }

    /// Checks sizes, ranks and nonempty child lists recursively.
    pub fn validate(&self) -> Result<()> {
        let positive = |v: usize, what: &str| {
            if v == 0 {
                Err(Error::Descriptor(format!("{what} must be positive")))
            } else {
                Ok(())
            }
        };
        match self {
            SeqSpaceDesc::HilbMax { dim } | SeqSpaceDesc::CstarDiag { dim } => positive(*dim, "dim"),
            SeqSpaceDesc::T2 { n } => positive(*n, "n"),
            SeqSpaceDesc::CstarMatrix { a } => positive(*a, "a"),
            SeqSpaceDesc::Min { ground } | SeqSpaceDesc::Max { ground } => ground.validate(),
            SeqSpaceDesc::DSumInf { children } | SeqSpaceDesc::DSumOne { children } => {
                if children.is_empty() {
                    return Err(Error::Descriptor("direct sum needs at least one child".into()));
                }
                children.iter().try_for_each(|c| c.validate())
            }
            SeqSpaceDesc::Dual { child } => child.validate(),
            SeqSpaceDesc::Subspace { child, basis } => {
                child.validate()?;
                if basis.rows() != child.dim() {
                    return Err(Error::Descriptor(format!(
                        "subspace basis has {} rows, parent dimension is {}",
                        basis.rows(),
                        child.dim()
                    )));
                }
                if basis.rank(1e-10) != basis.cols() {
                    return Err(Error::Descriptor("subspace basis is rank deficient".into()));
                }
                Ok(())
            }
            SeqSpaceDesc::Quotient { child, kernel } => {
                child.validate()?;
                if kernel.rows() != child.dim() {
                    return Err(Error::Descriptor(format!(
                        "kernel has {} rows, parent dimension is {}",
                        kernel.rows(),
                        child.dim()
                    )));
                }
                if kernel.rank(1e-10) >= child.dim() {
                    return Err(Error::Descriptor("kernel spans the whole space".into()));
                }
                Ok(())
            }
        }
    }

    /// Canonical ground kind when the space is `Min(E)` or `Max(E)`.
    pub(crate) fn ground_kind(&self) -> Option<Kind> {
        match self {
            SeqSpaceDesc::Min { ground } | SeqSpaceDesc::Max { ground } => Some(ground.kind().canonical()),
            _ => None,
        }
    }
}

/// An element of `X^(n)`: `coords` is `dim × n`, column `i` is `x_i`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ElementColumn {
    pub space: SeqSpaceDesc,
    pub coords: CMatrix,
}

impl ElementColumn {
    pub fn new(space: SeqSpaceDesc, coords: CMatrix) -> Result<Self> {
        space.validate()?;
        check_coords(&space, &coords)?;
        Ok(ElementColumn { space, coords })
    }

    pub fn level(&self) -> usize {
        self.coords.cols()
    }
}

/// Certified interval for an amplified norm.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormEstimate {
    pub lower: f64,
    pub upper: f64,
    pub exact: bool,
    pub witness: Witness,
    pub certificate: String,
}

impl NormEstimate {
    pub fn exact(value: f64, certificate: &str) -> Self {
        NormEstimate {
            lower: value,
            upper: value,
            exact: true,
            witness: Witness::ClosedForm,
            certificate: certificate.into(),
        }
    }

    pub fn zero() -> Self {
        NormEstimate { lower: 0.0, upper: 0.0, exact: true, witness: Witness::Zero, certificate: "zero".into() }
    }

    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lower + self.upper)
    }

    pub fn overlaps(&self, other: &NormEstimate, tol: f64) -> bool {
        self.lower <= other.upper + tol && other.lower <= self.upper + tol
    }

    pub fn contains(&self, v: f64, tol: f64) -> bool {
        self.lower - tol <= v && v <= self.upper + tol
    }
}

/// Evidence for a lower bound. Re-evaluating it against the same space and
/// coordinates reproduces the bound.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Witness {
    ClosedForm,
    Zero,
    /// `‖Σ ξ_i x_i‖ / ‖ξ‖_2` for a minimal structure.
    UnitVector {
        xi: CMatrix,
    },
    /// A functional column in the dual space, normalized by its upper norm.
    Pairing {
        functional: CMatrix,
    },
    /// Bound of one summand or one block.
    Child {
        index: usize,
        inner: Box<Witness>,
    },
    /// Level-one sum of the summands of a 1-sum.
    Sum {
        parts: Vec<Witness>,
    },
    /// Bound read in the minimal structure over the same ground.
    Minimal {
        inner: Box<Witness>,
    },
    /// Bound of the parent evaluated on the embedded column.
    Embedded {
        inner: Box<Witness>,
    },
    /// Bound in the concrete space identified with a dual.
    Rewrite {
        inner: Box<Witness>,
    },
    /// A domain point whose image certifies an operator norm bound.
    Point {
        coords: CMatrix,
    },
    /// A product functional `f ⊗ g` on a tensor product.
    Product {
        left: CMatrix,
        right: CMatrix,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Effort {
    /// Closed forms, analytic bounds and seeded candidates only.
    Fast,
    /// Adds restarted ascents and factorization searches.
    Full,
}

/// Search parameters shared by all interval evaluators.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalConfig {
    pub seed: u64,
    pub restarts: usize,
    pub steps: usize,
    pub factor_rounds: usize,
    pub factor_restarts: usize,
    pub factor_blocks: usize,
    pub quotient_iters: usize,
    pub quotient_restarts: usize,
}

pub const DEFAULT_SEED: u64 = 0x5001;

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig {
            seed: DEFAULT_SEED,
            restarts: 64,
            steps: 300,
            factor_rounds: 20,
            factor_restarts: 16,
            factor_blocks: 3,
            quotient_iters: 200,
            quotient_restarts: 8,
        }
    }
}

impl EvalConfig {
    /// Reduced budget for searches nested inside another search.
    pub fn inner(&self) -> Self {
        EvalConfig {
            seed: self.seed.wrapping_add(0x1F),
            restarts: (self.restarts / 8).max(4),
            steps: (self.steps / 3).max(40),
            factor_rounds: (self.factor_rounds / 4).max(3),
            factor_restarts: (self.factor_restarts / 4).max(2),
            factor_blocks: self.factor_blocks.min(2),
            quotient_iters: (self.quotient_iters / 4).max(30),
            quotient_restarts: (self.quotient_restarts / 4).max(2),
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }
}

pub(crate) fn check_coords(space: &SeqSpaceDesc, coords: &CMatrix) -> Result<()> {
    if coords.rows() != space.dim() {
        return dim_err(format!(
            "element has {} coordinates, {} space has ground dimension {}",
            coords.rows(),
            space.tag(),
            space.dim()
        ));
    }
    check_functional(space, coords)
}

/// Elements of the dual of a quotient must annihilate the kernel.
fn check_functional(space: &SeqSpaceDesc, coords: &CMatrix) -> Result<()> {
    match space {
        SeqSpaceDesc::Dual { child } => {
            if let SeqSpaceDesc::Quotient { kernel, .. } = child.as_ref() {
                let r = kernel.transpose().matmul(coords);
                if r.frob() > 1e-9 * (1.0 + kernel.frob() * coords.frob()) {
                    return Err(Error::Structure("functional does not vanish on the quotient kernel".into()));
                }
            }
            Ok(())
        }
        SeqSpaceDesc::DSumInf { children } | SeqSpaceDesc::DSumOne { children } => {
            let mut start = 0;
            for c in children {
                check_functional(c, &coords.rows_block(start, c.dim()))?;
                start += c.dim();
            }
            Ok(())
        }
        _ => Ok(()),
    }
}

/// Certified amplified norm of `x` with the default search budget.
pub fn amp_norm(x: &ElementColumn) -> Result<NormEstimate> {
    amp_norm_with(x, &EvalConfig::default())
}

pub fn amp_norm_with(x: &ElementColumn, cfg: &EvalConfig) -> Result<NormEstimate> {
    estimate(&x.space, &x.coords, cfg)
}

/// Certified amplified norm of the column with coordinates `coords`.
pub fn estimate(space: &SeqSpaceDesc, coords: &CMatrix, cfg: &EvalConfig) -> Result<NormEstimate> {
    space.validate()?;
    check_coords(space, coords)?;
    Ok(estimate_unchecked(space, coords, cfg))
}

pub(crate) fn estimate_unchecked(space: &SeqSpaceDesc, coords: &CMatrix, cfg: &EvalConfig) -> NormEstimate {
    if coords.is_zero() {
        return NormEstimate::zero();
    }
    if let Some((v, cert)) = exact_value(space, coords) {
        return NormEstimate::exact(v, cert);
    }
    let (lo, witness) = lower(space, coords, Effort::Full, cfg);
    let (mut up, mut cert) = upper(space, coords, Effort::Fast, cfg);
    if up - lo > 1e-9 * (1.0 + up) {
        let (u2, c2) = upper(space, coords, Effort::Full, cfg);
        if u2 < up {
            up = u2;
            cert = c2;
        }
    }
    let lo = if lo > up && lo - up <= 1e-10 * (1.0 + up) { up } else { lo };
    NormEstimate { lower: lo, upper: up, exact: up - lo <= 1e-9 * (1.0 + up), witness, certificate: cert }
}

fn require(x: &ElementColumn, ok: bool, want: &str) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::Structure(format!("expected a {want} space, got {}", x.space.tag())))
    }
}

pub fn hilb_norm(x: &ElementColumn) -> Result<NormEstimate> {
    require(x, matches!(x.space, SeqSpaceDesc::HilbMax { .. }), "HilbMax")?;
    amp_norm(x)
}

pub fn min_norm(x: &ElementColumn) -> Result<NormEstimate> {
    require(x, matches!(x.space, SeqSpaceDesc::Min { .. } | SeqSpaceDesc::T2 { .. }), "Min")?;
    amp_norm(x)
}

pub fn cstar_norm(x: &ElementColumn) -> Result<NormEstimate> {
    require(x, matches!(x.space, SeqSpaceDesc::CstarMatrix { .. } | SeqSpaceDesc::CstarDiag { .. }), "C*")?;
    amp_norm(x)
}

pub fn max_norm(x: &ElementColumn) -> Result<NormEstimate> {
    require(x, matches!(x.space, SeqSpaceDesc::Max { .. }), "Max")?;
    amp_norm(x)
}

pub fn dsum_inf_norm(x: &ElementColumn) -> Result<NormEstimate> {
    require(x, matches!(x.space, SeqSpaceDesc::DSumInf { .. }), "DSumInf")?;
    amp_norm(x)
}

pub fn dsum_one_norm(x: &ElementColumn) -> Result<NormEstimate> {
    require(x, matches!(x.space, SeqSpaceDesc::DSumOne { .. }), "DSumOne")?;
    amp_norm(x)
}

pub fn dual_amp_norm(f: &ElementColumn) -> Result<NormEstimate> {
    require(f, matches!(f.space, SeqSpaceDesc::Dual { .. }), "Dual")?;
    amp_norm(f)
}

pub fn subspace_norm(x: &ElementColumn) -> Result<NormEstimate> {
    require(x, matches!(x.space, SeqSpaceDesc::Subspace { .. }), "Subspace")?;
    amp_norm(x)
}

pub fn quotient_norm(x: &ElementColumn) -> Result<NormEstimate> {
    require(x, matches!(x.space, SeqSpaceDesc::Quotient { .. }), "Quotient")?;
    amp_norm(x)
}

/// Entries `f_j(x_i)` of the amplified duality pairing, row-major in `(i, j)`.
pub fn pairing_amplify(x: &ElementColumn, f: &ElementColumn) -> Result<Vec<C64>> {
    if x.coords.rows() != f.coords.rows() {
        return dim_err(format!("pairing between ground dimensions {} and {}", x.coords.rows(), f.coords.rows()));
    }
    Ok(x.coords.transpose().matmul(&f.coords).entries())
}

/// Re-evaluates the lower bound carried by `est` for the given element.
pub fn reproduce_lower(x: &ElementColumn, est: &NormEstimate, cfg: &EvalConfig) -> f64 {
    match est.witness {
        Witness::ClosedForm => exact_value(&x.space, &x.coords).map_or(f64::NAN, |v| v.0),
        _ => witness_value(&x.space, &x.coords, &est.witness, cfg),
    }
}

#[cfg(test)]
mod tests;
