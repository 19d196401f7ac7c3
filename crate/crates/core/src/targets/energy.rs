use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::measure::{Cursor, MeasureSpec};
use crate::error::{Error, Result};
use crate::symbolic::{displacement, SymbolWord};

pub const MIN_PAIRS: usize = 1000;

/// How pairs `(i, j)` are drawn from `μ × μ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum EnergyMethod {
    /// For each sampled `i`, one `j` per split level `s`, drawn from the
    /// sibling cylinder `[i|s ī_{s+1}]` and weighted by its mass.
    Stratified,
    /// Independent `i` and `j`.
    Pairs,
}

#[derive(Debug, Clone, Serialize)]
pub struct EnergyEstimate {
    pub t: f64,
    pub depth: usize,
    pub pairs: usize,
    pub method: EnergyMethod,
    pub mean: f64,
    pub std_error: f64,
}

/// Sup-metric distance of two depth-`d` codings, floored at the cylinder
/// diameter `λ^d`.
fn distance(a: &SymbolWord, b: &SymbolWord, lambda: f64, depth: usize) -> f64 {
    let d = displacement(a, b, lambda);
    d.x.abs().max(d.y.abs()).max(floor(lambda, depth))
}

fn floor(lambda: f64, depth: usize) -> f64 {
    lambda.powi(depth as i32).max(0.5f64.powi(depth as i32))
}

fn check(ms: &MeasureSpec, t: f64, pairs: usize, depth: usize) -> Result<()> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::invalid("t", "must be finite and nonnegative"));
    }
    if pairs < MIN_PAIRS {
        return Err(Error::invalid("pairs", format!("must be at least {MIN_PAIRS}")));
    }
    if depth == 0 || depth > ms.coverage() {
        return Err(Error::ScheduleTooShort {
            len: depth,
            coverage: ms.coverage(),
        });
    }
    Ok(())
}

/// One stratified sample: `Σ_s μ[i|s ī_{s+1}] · |π(i) − π(j_s)|^{−t}` plus
/// the diagonal term `μ[i|d] · λ^{−td}`.
fn stratified_sample(ms: &MeasureSpec, t: f64, depth: usize, rng: &mut ChaCha8Rng) -> Result<f64> {
    let lambda = ms.params().lambda;
    let mut i = SymbolWord::with_capacity(depth);
    let leaf = ms.descend(ms.root(), &mut i, depth, rng)?;
    let mut path: Vec<Cursor> = Vec::with_capacity(depth + 1);
    let mut c = ms.root();
    path.push(c);
    for s in i.iter() {
        c = ms.child(&c, s)?.expect("sampled path has positive weight");
        path.push(c);
    }
    let mut total = leaf.weight * floor(lambda, depth).powf(-t);
    for s in 0..depth {
        let Some(sib) = ms.child(&path[s], 1 - i.get(s))? else {
            continue;
        };
        let mut j = i.prefix(s);
        j.push(1 - i.get(s));
        ms.descend(sib, &mut j, depth, rng)?;
        total += sib.weight * distance(&i, &j, lambda, depth).powf(-t);
    }
    Ok(total)
}

fn pair_sample(ms: &MeasureSpec, t: f64, depth: usize, rng: &mut ChaCha8Rng) -> Result<f64> {
    let mut i = SymbolWord::with_capacity(depth);
    let mut j = SymbolWord::with_capacity(depth);
    ms.descend(ms.root(), &mut i, depth, rng)?;
    ms.descend(ms.root(), &mut j, depth, rng)?;
    Ok(distance(&i, &j, ms.params().lambda, depth).powf(-t))
}

/// Monte Carlo estimate of `∬ |π(i) − π(j)|^{−t} dμ dμ` with codings
/// truncated at `depth`, using the stratified estimator.
pub fn energy_estimate(ms: &MeasureSpec, t: f64, pairs: usize, depth: usize, seed: u64) -> Result<EnergyEstimate> {
    energy_estimate_with(ms, t, pairs, depth, seed, EnergyMethod::Stratified)
}

pub fn energy_estimate_with(
    ms: &MeasureSpec,
    t: f64,
    pairs: usize,
    depth: usize,
    seed: u64,
    method: EnergyMethod,
) -> Result<EnergyEstimate> {
    check(ms, t, pairs, depth)?;
    let mut est = EnergyEstimate {
        t,
        depth,
        pairs,
        method,
        mean: 1.0,
        std_error: 0.0,
    };
    if t == 0.0 {
        return Ok(est);
    }
    let samples = (0..pairs as u64)
        .into_par_iter()
        .map(|k| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(k);
            match method {
                EnergyMethod::Stratified => stratified_sample(ms, t, depth, &mut rng),
                EnergyMethod::Pairs => pair_sample(ms, t, depth, &mut rng),
            }
        })
        .collect::<Result<Vec<f64>>>()?;
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    let var = samples.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    est.mean = mean;
    est.std_error = (var / n).sqrt();
    Ok(est)
}

/// Energy means at increasing depths and how they evolve.
#[derive(Debug, Clone, Serialize)]
pub struct EnergyTrend {
    pub t: f64,
    pub estimates: Vec<EnergyEstimate>,
    /// `mean(d_{k+1}) / mean(d_k)`.
    pub ratios: Vec<f64>,
    /// `mean(d_last) / mean(d_first)`.
    pub growth: f64,
    /// No step drops by more than three combined standard errors.
    pub monotone: bool,
    /// Monotone with `growth ≥ GROWTH_RATIO`.
    pub growing: bool,
    /// `growth < GROWTH_RATIO`.
    pub bounded: bool,
}

/// Total growth separating a divergent trend from a bounded one.
pub const GROWTH_RATIO: f64 = 2.0;

/// Estimates at each of `depths` (increasing) with a common seed.
pub fn energy_trend(ms: &MeasureSpec, t: f64, pairs: usize, depths: &[usize], seed: u64, method: EnergyMethod) -> Result<EnergyTrend> {
    if depths.len() < 2 || depths.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::invalid("depths", "need at least two increasing depths"));
    }
    let estimates = depths
        .iter()
        .map(|&d| energy_estimate_with(ms, t, pairs, d, seed, method))
        .collect::<Result<Vec<_>>>()?;
    let ratios: Vec<f64> = estimates.windows(2).map(|w| w[1].mean / w[0].mean).collect();
    let monotone = estimates
        .windows(2)
        .all(|w| w[1].mean >= w[0].mean - 3.0 * w[0].std_error.hypot(w[1].std_error));
    let growth = estimates.last().unwrap().mean / estimates[0].mean;
    Ok(EnergyTrend {
        t,
        estimates,
        ratios,
        growth,
        monotone,
        growing: monotone && growth >= GROWTH_RATIO,
        bounded: growth < GROWTH_RATIO,
    })
}
