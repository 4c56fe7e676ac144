//! Truncated free and cofree objects and their universal property.
//!
//! The free object over a base `Λ` is the 1-sum over `Λ` of the 1-sums of
//! `t₂ⁿ`, the cofree one the ∞-sum over `Λ` of the ∞-sums of `ℓ₂ⁿ`. Levels
//! are cut off at `N`. Sums with one summand collapse to the summand, so
//! `N = 1` over a one-point base is `t₂¹ = ℂ`.

use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::error::{Error, Result};
use crate::harness::{gen_unit_element, rng, run_trials, HarnessConfig, PropertyReport, Trial};
use crate::matcore::CMatrix;
use crate::sqoperators::{amplify_apply, column_to_operator, sb_norm_with, SeqOperator};
use crate::sqspaces::{estimate, ElementColumn, EvalConfig, SeqSpaceDesc};

/// Tolerance on the sequential norm of a universal map.
pub const CONTRACTIVITY_TOL: f64 = 1e-3;

/// The identity column `I_n` of one leaf, embedded in the whole space.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MarkedElement {
    pub point: usize,
    pub level: usize,
    pub element: ElementColumn,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FreeTruncation {
    pub max_level: usize,
    pub base_size: usize,
    pub space: SeqSpaceDesc,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CofreeTruncation {
    pub max_level: usize,
    pub base_size: usize,
    pub space: SeqSpaceDesc,
}

fn collapse(mut children: Vec<SeqSpaceDesc>, one: bool) -> SeqSpaceDesc {
    if children.len() == 1 {
        return children.pop().expect("one child");
    }
    if one {
        SeqSpaceDesc::DSumOne { children }
    } else {
        SeqSpaceDesc::DSumInf { children }
    }
}

fn check_sizes(max_level: usize, base_size: usize) -> Result<()> {
    if max_level == 0 || base_size == 0 {
        return Err(Error::Precondition("truncation level and base size must be at least 1".into()));
    }
    Ok(())
}

pub fn build_free(max_level: usize, base_size: usize) -> Result<FreeTruncation> {
    check_sizes(max_level, base_size)?;
    let block = collapse((1..=max_level).map(SeqSpaceDesc::t2).collect(), true);
    let space = collapse(vec![block; base_size], true);
    Ok(FreeTruncation { max_level, base_size, space })
}

pub fn build_cofree(max_level: usize, base_size: usize) -> Result<CofreeTruncation> {
    check_sizes(max_level, base_size)?;
    let block = collapse((1..=max_level).map(SeqSpaceDesc::hilb).collect(), false);
    let space = collapse(vec![block; base_size], false);
    Ok(CofreeTruncation { max_level, base_size, space })
}

impl FreeTruncation {
    pub fn dim(&self) -> usize {
        self.space.dim()
    }

    /// Offset of the leaf `t₂ⁿ` over `point` in the ground coordinates.
    pub fn leaf_offset(&self, point: usize, level: usize) -> usize {
        let block = self.max_level * (self.max_level + 1) / 2;
        point * block + (level - 1) * level / 2
    }

    /// The marked columns `I_n`, one per point and level.
    pub fn marked(&self) -> Vec<MarkedElement> {
        let mut out = Vec::new();
        for point in 0..self.base_size {
            for level in 1..=self.max_level {
                let off = self.leaf_offset(point, level);
                let mut coords = CMatrix::zeros(self.dim(), level);
                for i in 0..level {
                    coords.set(off + i, i, crate::matcore::ONE);
                }
                let element = ElementColumn { space: self.space.clone(), coords };
                out.push(MarkedElement { point, level, element });
            }
        }
        out
    }
}

pub fn universal_map(x: &ElementColumn) -> Result<SeqOperator> {
    universal_map_with(x, &EvalConfig::default())
}

/// The operator `ψ` on `t₂ⁿ` with `ψ⁽ⁿ⁾(I_n) = x`, for `x` in the unit ball.
pub fn universal_map_with(x: &ElementColumn, cfg: &EvalConfig) -> Result<SeqOperator> {
    let up = estimate(&x.space, &x.coords, cfg)?.upper;
    if up > 1.0 + 1e-9 {
        return Err(Error::Precondition(format!("element norm may be {up}, outside the unit ball")));
    }
    Ok(column_to_operator(x))
}

/// Slack of one universal-property trial for `x`.
pub(crate) fn universal_slack(x: &ElementColumn, cfg: &EvalConfig) -> Result<f64> {
    let psi = universal_map_with(x, cfg)?;
    let n = x.level();
    let unit = ElementColumn::new(SeqSpaceDesc::t2(n), CMatrix::identity(n))?;
    let image = amplify_apply(&psi, &unit)?;
    let mismatch = image.coords.sub(&x.coords).max_abs();
    let recovered = SeqOperator::new(psi.domain.clone(), psi.codomain.clone(), image.coords.clone())?;
    let unique = recovered.matrix.sub(&psi.matrix).max_abs();
    let sb = sb_norm_with(&psi, cfg)?.estimate.upper;
    let contraction = sb - 1.0 - CONTRACTIVITY_TOL;
    let exact = if mismatch == 0.0 && unique == 0.0 { f64::NEG_INFINITY } else { mismatch.max(unique) };
    Ok(contraction.max(exact))
}

/// Draws unit-ball columns over `target` at levels up to the truncation
/// level and checks the universal property for each.
pub fn check_universal_property(
    free: &FreeTruncation,
    target: &SeqSpaceDesc,
    trials: usize,
    seed: u64,
    cfg: &EvalConfig,
) -> Result<PropertyReport> {
    target.validate()?;
    let mut config = HarnessConfig::builtin();
    config.eval = *cfg;
    run_trials("free-universal", trials, seed, config.digest(), |s| {
        let n = 1 + (rand::Rng::random_range(&mut rng(s), 0..free.max_level));
        let x = gen_unit_element(target, n, s, cfg)?;
        let slack = universal_slack(&x, cfg)?;
        Ok(Trial::new(json!({ "space": target, "coords": x.coords }), slack))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ground::GroundSpace;

    #[test]
    fn one_level_one_point_is_scalars() {
        let f = build_free(1, 1).unwrap();
        assert_eq!(f.space, SeqSpaceDesc::t2(1));
        assert_eq!(f.dim(), 1);
    }

    #[test]
    fn dimension_count() {
        let f = build_free(2, 1).unwrap();
        assert_eq!(f.space, SeqSpaceDesc::DSumOne { children: vec![SeqSpaceDesc::t2(1), SeqSpaceDesc::t2(2)] });
        assert_eq!(f.dim(), 3);
        assert_eq!(build_free(3, 2).unwrap().dim(), 12);
        assert_eq!(build_cofree(3, 2).unwrap().space.dim(), 12);
    }

    #[test]
    fn marked_elements_sit_in_their_leaves() {
        let f = build_free(2, 2).unwrap();
        let m = f.marked();
        assert_eq!(m.len(), 4);
        let last = &m[3];
        assert_eq!((last.point, last.level), (1, 2));
        assert_eq!(last.element.coords.get(4, 0), crate::matcore::ONE);
        assert_eq!(last.element.coords.get(5, 1), crate::matcore::ONE);
    }

    #[test]
    fn identity_column_gives_identity_map() {
        let x = ElementColumn::new(SeqSpaceDesc::t2(2), CMatrix::identity(2)).unwrap();
        let psi = universal_map(&x).unwrap();
        assert_eq!(psi.matrix, CMatrix::identity(2));
        let sb = crate::sqoperators::sb_norm(&psi).unwrap().estimate;
        assert!((sb.upper - 1.0).abs() < 1e-12 && (sb.lower - 1.0).abs() < 1e-12);
    }

    #[test]
    fn boundary_column_pinches_one() {
        let x = ElementColumn::new(SeqSpaceDesc::hilb(2), CMatrix::identity(2).scale(0.5f64.sqrt())).unwrap();
        let sb = crate::sqoperators::sb_norm(&universal_map(&x).unwrap()).unwrap().estimate;
        assert!((sb.lower - 1.0).abs() < 1e-9 && (sb.upper - 1.0).abs() < 1e-9, "{sb:?}");
    }

    #[test]
    fn zero_column_gives_zero_map() {
        let x = ElementColumn::new(SeqSpaceDesc::hilb(2), CMatrix::zeros(2, 2)).unwrap();
        let psi = universal_map(&x).unwrap();
        assert!(psi.matrix.is_zero());
        assert_eq!(crate::sqoperators::sb_norm(&psi).unwrap().estimate.upper, 0.0);
    }

    #[test]
    fn outside_the_ball_is_rejected() {
        let x = ElementColumn::new(SeqSpaceDesc::hilb(2), CMatrix::identity(2)).unwrap();
        assert!(matches!(universal_map(&x), Err(Error::Precondition(_))));
    }

    #[test]
    fn property_holds_on_small_targets() {
        let f = build_free(3, 1).unwrap();
        let cfg = EvalConfig::default();
        for target in [SeqSpaceDesc::scalars(), SeqSpaceDesc::min(GroundSpace::linf(2))] {
            let r = check_universal_property(&f, &target, 20, 5, &cfg).unwrap();
            assert!(r.passed(), "{r:?}");
        }
    }
}
