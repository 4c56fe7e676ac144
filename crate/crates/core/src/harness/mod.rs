//! Randomized property suites with deterministic seeding.
//!
//! Every suite checks one family of interval-sound inequalities over a
//! number of trials. Trial `i` of a run with seed `s` draws its inputs from
//! its own stream, so trials run in parallel and reports are reproducible.
//! A trial records a slack: the amount by which its worst inequality is
//! violated beyond the tolerance. Nonpositive slack means the trial passed.

mod suites;

use std::collections::BTreeMap;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::matcore::CMatrix;
use crate::optim::{gaussian_matrix, stream_seed};
use crate::sqoperators::feasible;
use crate::sqspaces::{estimate, ElementColumn, EvalConfig, SeqSpaceDesc};

/// The built-in suite configuration.
pub const SUITES_TOML: &str = include_str!("../../config/suites.toml");

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteSettings {
    pub trials: usize,
    pub n_max: usize,
    pub tolerance: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HarnessConfig {
    pub version: u32,
    pub seed: u64,
    pub suites: BTreeMap<String, SuiteSettings>,
    #[serde(default)]
    pub eval: EvalConfig,
}

impl HarnessConfig {
    pub fn builtin() -> Self {
        Self::from_toml(SUITES_TOML).expect("built-in suite configuration parses")
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: HarnessConfig = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        for id in cfg.suites.keys() {
            if !suite_ids().contains(&id.as_str()) {
                return Err(Error::Registry(id.clone()));
            }
        }
        Ok(cfg)
    }

    /// Hex SHA-256 of the canonical JSON form.
    pub fn digest(&self) -> String {
        digest_hex(&serde_json::to_vec(self).expect("config serializes"))
    }

    pub fn settings(&self, suite_id: &str) -> Result<SuiteSettings> {
        self.suites.get(suite_id).cloned().ok_or_else(|| Error::Registry(suite_id.to_string()))
    }
}

fn digest_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Failure {
    pub seed: u64,
    pub inputs_digest: String,
    pub slack: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PropertyReport {
    pub suite_id: String,
    pub trials: usize,
    pub seed: u64,
    pub failures: Vec<Failure>,
    pub worst_slack: f64,
    pub elapsed_ms: u64,
    pub config_digest: String,
}

impl PropertyReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    /// JSON without the timing field, identical across reruns.
    pub fn canonical_json(&self) -> String {
        let mut v = serde_json::to_value(self).expect("report serializes");
        if let Some(m) = v.as_object_mut() {
            m.remove("elapsed_ms");
        }
        v.to_string()
    }
}

/// Outcome of one trial: the inputs it drew and its slack.
pub(crate) struct Trial {
    pub inputs: serde_json::Value,
    pub slack: f64,
}

impl Trial {
    pub fn new(inputs: serde_json::Value, slack: f64) -> Self {
        Trial { inputs, slack }
    }
}

pub(crate) fn run_trials<F>(
    suite_id: &str,
    trials: usize,
    seed: u64,
    config_digest: String,
    f: F,
) -> Result<PropertyReport>
where
    F: Fn(u64) -> Result<Trial> + Sync,
{
    let start = Instant::now();
    let outcomes: Vec<Result<(u64, Trial)>> = (0..trials as u64)
        .into_par_iter()
        .map(|i| {
            let s = stream_seed(seed, i);
            f(s).map(|t| (s, t))
        })
        .collect();
    let mut failures = Vec::new();
    let mut worst = if trials == 0 { 0.0 } else { f64::NEG_INFINITY };
    for o in outcomes {
        let (s, t) = o?;
        let slack = if t.slack.is_nan() { f64::MAX } else { t.slack };
        worst = f64::max(worst, slack);
        if slack > 0.0 {
            let inputs_digest = digest_hex(t.inputs.to_string().as_bytes());
            failures.push(Failure { seed: s, inputs_digest, slack });
        }
    }
    failures.sort_by_key(|f| f.seed);
    Ok(PropertyReport {
        suite_id: suite_id.to_string(),
        trials,
        seed,
        failures,
        worst_slack: worst,
        elapsed_ms: start.elapsed().as_millis() as u64,
        config_digest,
    })
}

/// Names of all registered suites.
pub fn suite_ids() -> Vec<&'static str> {
    suites::REGISTRY.iter().map(|(id, _)| *id).collect()
}

/// Runs a suite with the built-in configuration.
pub fn run_suite(suite_id: &str, trials: usize, seed: u64, n_max: usize) -> Result<PropertyReport> {
    run_suite_with(suite_id, trials, seed, n_max, &HarnessConfig::builtin())
}

pub fn run_suite_with(
    suite_id: &str,
    trials: usize,
    seed: u64,
    n_max: usize,
    config: &HarnessConfig,
) -> Result<PropertyReport> {
    let (_, f) =
        suites::REGISTRY.iter().find(|(id, _)| *id == suite_id).ok_or_else(|| Error::Registry(suite_id.to_string()))?;
    if n_max == 0 {
        return Err(Error::Precondition("n_max must be at least 1".into()));
    }
    let settings = config.settings(suite_id)?;
    let ctx = suites::Ctx { tol: settings.tolerance, n_max, cfg: config.eval };
    run_trials(suite_id, trials, seed, config.digest(), |s| f(&ctx, s))
}

/// Runs a suite with its configured trial count and level bound.
pub fn run_default(suite_id: &str, seed: u64, config: &HarnessConfig) -> Result<PropertyReport> {
    let s = config.settings(suite_id)?;
    run_suite_with(suite_id, s.trials, seed, s.n_max, config)
}

pub(crate) fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Complex Gaussian coordinates at the given level, restricted to the
/// admissible coordinates of the space.
pub fn gen_random_element(space: &SeqSpaceDesc, level: usize, seed: u64) -> Result<ElementColumn> {
    if level == 0 {
        return Err(Error::Precondition("level must be at least 1".into()));
    }
    space.validate()?;
    let mut r = rng(seed);
    let g = gaussian_matrix(&mut r, space.dim(), level);
    let f = feasible(space);
    let coords = if f.cols() < space.dim() { f.matmul(&f.adjoint().matmul(&g)) } else { g };
    ElementColumn::new(space.clone(), coords)
}

/// A random element scaled so that its certified upper norm is one.
pub fn gen_unit_element(space: &SeqSpaceDesc, level: usize, seed: u64, cfg: &EvalConfig) -> Result<ElementColumn> {
    let x = gen_random_element(space, level, seed)?;
    let up = estimate(space, &x.coords, cfg)?.upper;
    if !(up > 0.0) {
        return Ok(x);
    }
    let mut coords: CMatrix = x.coords.scale(1.0 / up);
    for _ in 0..8 {
        let u = estimate(space, &coords, cfg)?.upper;
        if u <= 1.0 {
            return ElementColumn::new(space.clone(), coords);
        }
        coords = coords.scale((1.0 - 1e-15) / u);
    }
    Err(Error::Precondition("could not scale the draw into the certified unit ball".into()))
}
