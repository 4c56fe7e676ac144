//! Deterministic first-order search routines over complex matrices.
//!
//! Gradients follow one convention throughout: `G` is the gradient of `f`
//! at `V` when `f(V + tD) ≈ f(V) + t·Re⟨G, D⟩` with `⟨A, B⟩ = Σ conj(a) b`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::matcore::{CMatrix, C64};

pub(crate) type Objective<'a> = dyn Fn(&CMatrix) -> (f64, CMatrix) + Sync + 'a;
pub(crate) type Gauge<'a> = dyn Fn(&CMatrix) -> f64 + Sync + 'a;
pub(crate) type Projection<'a> = dyn Fn(&CMatrix) -> CMatrix + Sync + 'a;

#[derive(Clone, Copy, Debug)]
pub(crate) struct SearchBudget {
    pub restarts: usize,
    pub steps: usize,
    pub seed: u64,
}

/// Stream seed for restart `index` of a search seeded with `seed`.
pub(crate) fn stream_seed(seed: u64, index: u64) -> u64 {
    let mut z = seed ^ index.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub(crate) fn gaussian_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> CMatrix {
    let mut m = CMatrix::zeros(rows, cols);
    for i in 0..rows {
        for j in 0..cols {
            let re: f64 = StandardNormal.sample(rng);
            let im: f64 = StandardNormal.sample(rng);
            m.set(i, j, C64::new(re, im));
        }
    }
    m
}

pub(crate) struct RatioProblem<'a> {
    pub objective: &'a Objective<'a>,
    pub gauge: &'a Gauge<'a>,
    pub project: Option<&'a Projection<'a>>,
}

fn ratio(p: &RatioProblem, v: &CMatrix) -> Option<(f64, CMatrix, CMatrix)> {
    let g = (p.gauge)(v);
    if !(g > 0.0) || !g.is_finite() {
        return None;
    }
    let v = v.scale(1.0 / g);
    let (val, grad) = (p.objective)(&v);
    if !val.is_finite() {
        return None;
    }
    Some((val, v, grad))
}

fn climb(p: &RatioProblem, start: CMatrix, steps: usize) -> Option<(f64, CMatrix)> {
    let start = match p.project {
        Some(proj) => proj(&start),
        None => start,
    };
    let (mut val, mut v, mut grad) = ratio(p, &start)?;
    let mut t = 0.5;
    let mut stall = 0usize;
    for _ in 0..steps {
        let gn = grad.frob();
        if gn == 0.0 {
            break;
        }
        let dir = grad.scale(v.frob() / gn);
        let mut moved = false;
        while t > 1e-9 {
            let mut cand = v.add_scaled(&dir, t);
            if let Some(proj) = p.project {
                cand = proj(&cand);
            }
            match ratio(p, &cand) {
                Some((cv, cvv, cg)) if cv > val * (1.0 + 1e-14) => {
                    stall = if cv - val <= 1e-12 * val.abs() { stall + 1 } else { 0 };
                    val = cv;
                    v = cvv;
                    grad = cg;
                    t = (t * 1.6).min(4.0);
                    moved = true;
                    break;
                }
                _ => t *= 0.5,
            }
        }
        if !moved || stall >= 20 {
            break;
        }
    }
    Some((val, v))
}

/// Maximizes `objective(V) / gauge(V)` over nonzero `V` of the given shape.
///
/// Both functions must be positively homogeneous of degree one. Every
/// explicit seed is climbed, and random starts fill up to `budget.restarts`.
pub(crate) fn maximize_ratio(
    p: &RatioProblem,
    seeds: Vec<CMatrix>,
    rows: usize,
    cols: usize,
    budget: SearchBudget,
) -> Option<(f64, CMatrix)> {
    let n_random = budget.restarts.saturating_sub(seeds.len());
    let mut starts = seeds;
    for r in 0..n_random {
        let mut rng = ChaCha8Rng::seed_from_u64(stream_seed(budget.seed, r as u64));
        starts.push(gaussian_matrix(&mut rng, rows, cols));
    }
    let results: Vec<Option<(f64, CMatrix)>> = starts.into_par_iter().map(|s| climb(p, s, budget.steps)).collect();
    let mut best: Option<(f64, CMatrix)> = None;
    for (val, v) in results.into_iter().flatten() {
        if best.as_ref().is_none_or(|(b, _)| val > *b) {
            best = Some((val, v));
        }
    }
    best
}

/// Nonsmooth descent for a convex function.
///
/// `f` returns the value and a subgradient. `project` maps a direction onto
/// the feasible directions. Backtracking steps are tried first; when none
/// helps, a diminishing step is taken anyway and the best point is kept.
pub(crate) fn minimize(
    f: &(dyn Fn(&CMatrix) -> (f64, Option<CMatrix>) + Sync),
    project: Option<&Projection>,
    x0: CMatrix,
    iters: usize,
    scale: f64,
) -> (f64, CMatrix) {
    let (mut val, mut grad) = f(&x0);
    let mut x = x0;
    let mut best = (val, x.clone());
    let mut t = 0.5 * scale.max(1e-12);
    let mut window_start = val;
    for it in 0..iters {
        let Some(g) = grad.clone() else { break };
        let g = match project {
            Some(p) => p(&g),
            None => g,
        };
        let gn = g.frob();
        if gn <= 1e-15 * (1.0 + val.abs()) {
            break;
        }
        let dir = g.scale(-1.0 / gn);
        let mut moved = false;
        let mut tt = t;
        while tt > 1e-10 * scale.max(1e-12) {
            let cand = x.add_scaled(&dir, tt);
            let (cv, cg) = f(&cand);
            if cv < val {
                x = cand;
                val = cv;
                grad = cg;
                t = tt * 1.5;
                moved = true;
                break;
            }
            tt *= 0.5;
        }
        if !moved {
            let step = 0.1 * scale / ((it + 1) as f64).sqrt();
            let cand = x.add_scaled(&dir, step);
            let (cv, cg) = f(&cand);
            x = cand;
            val = cv;
            grad = cg;
            t = step;
        }
        if val < best.0 {
            best = (val, x.clone());
        }
        if (it + 1) % 20 == 0 {
            if window_start - best.0 <= 1e-8 * best.0.abs().max(1e-300) {
                break;
            }
            window_start = best.0;
        }
    }
    best
}
