use rayon::prelude::*;
use serde::Serialize;

use super::measure::{Cursor, MeasureCase, MeasureSpec, Schedule};
use crate::error::{Error, Result};
use crate::fit::least_squares;
use crate::scales::k_of_r;
use crate::symbolic::{Coefficients, SymbolWord};

pub const MU_BALL_NODE_BUDGET: u64 = 100_000_000;
/// Extra depth beyond `k(r)` at which cylinders are summed.
pub const DEPTH_SLACK: usize = 4;

/// `μ(Q(π(x), R))` bracketed by cylinders at depth `d(R)`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct BallMass {
    /// Mass of depth-`d` cylinders inside the cube.
    pub lower: f64,
    /// Mass of depth-`d` cylinders meeting the cube.
    pub upper: f64,
    pub depth: usize,
    pub nodes: u64,
    /// The node budget ran out; unexplored mass went into `upper`.
    pub partial: bool,
}

/// `d(R) = k(⌈−log₂ R⌉) + 4`.
pub fn ball_depth(lambda: f64, radius: f64) -> usize {
    let r = (-radius.log2()).ceil().max(0.0) as u64;
    k_of_r(r, lambda) as usize + DEPTH_SLACK
}

fn check_support(ms: &MeasureSpec, x: &SymbolWord) -> Result<()> {
    let n = x.len().min(ms.coverage());
    if ms.walk(&x.prefix(n))?.is_none() {
        return Err(Error::invalid("x", "point is outside the support of the measure"));
    }
    Ok(())
}

/// Mass of the closed cube of side `2R` centred at `π(x)`.
pub fn mu_ball(ms: &MeasureSpec, x: &SymbolWord, radius: f64) -> Result<BallMass> {
    mu_ball_with_budget(ms, x, radius, MU_BALL_NODE_BUDGET)
}

pub fn mu_ball_with_budget(ms: &MeasureSpec, x: &SymbolWord, radius: f64, budget: u64) -> Result<BallMass> {
    if !(radius > 0.0) || !radius.is_finite() {
        return Err(Error::invalid("R", "must be positive and finite"));
    }
    check_support(ms, x)?;
    if radius >= 2.0 {
        return Ok(BallMass {
            lower: 1.0,
            upper: 1.0,
            depth: 0,
            nodes: 0,
            partial: false,
        });
    }
    let lambda = ms.params().lambda;
    let depth = ball_depth(lambda, radius);
    if depth > ms.coverage() {
        return Err(Error::ScheduleTooShort {
            len: depth,
            coverage: ms.coverage(),
        });
    }
    if x.len() < depth {
        return Err(Error::Insufficient(format!("x has {} symbols, the ball needs {depth}", x.len())));
    }
    ball_sum(ms, x, radius, depth, budget)
}

/// Pruned DFS over cylinders, with every rectangle held as an offset from
/// the centre so that radii far below the spacing of doubles near 1 stay
/// resolvable.
fn ball_sum(ms: &MeasureSpec, x: &SymbolWord, radius: f64, depth: usize, budget: u64) -> Result<BallMass> {
    let coef = Coefficients::new(ms.params().lambda, x.len());
    // tails of the centre beyond each depth: π(x) − f_{x|t}(0, 0)
    let mut tail = vec![(0.0, 0.0); x.len() + 1];
    for t in (0..x.len()).rev() {
        let b = x.get(t) as f64;
        tail[t] = (tail[t + 1].0 + b * coef.digit[t], tail[t + 1].1 + b * 0.5f64.powi(t as i32 + 1));
    }
    let mut out = BallMass {
        lower: 0.0,
        upper: 0.0,
        depth,
        nodes: 0,
        partial: false,
    };
    let mut stack: Vec<(Cursor, f64, f64)> = vec![(ms.root(), 0.0, 0.0)];
    while let Some((cur, ox, oy)) = stack.pop() {
        let t = cur.depth;
        let (x0, y0) = (ox - tail[t].0, oy - tail[t].1);
        let (x1, y1) = (x0 + coef.power[t], y0 + 0.5f64.powi(t as i32));
        if x1 < -radius || x0 > radius || y1 < -radius || y0 > radius {
            continue;
        }
        out.nodes += 1;
        if x0 >= -radius && x1 <= radius && y0 >= -radius && y1 <= radius {
            out.lower += cur.weight;
            out.upper += cur.weight;
            continue;
        }
        if t == depth || out.nodes > budget {
            out.partial |= t < depth;
            out.upper += cur.weight;
            continue;
        }
        let dy = 0.5f64.powi(t as i32 + 1);
        let xt = x.get(t) as f64;
        for s in [1u8, 0] {
            if let Some(next) = ms.child(&cur, s)? {
                let d = s as f64 - xt;
                stack.push((next, ox + d * coef.digit[t], oy + d * dy));
            }
        }
    }
    out.upper = out.upper.min(1.0);
    Ok(out)
}

#[derive(Debug, Clone, Serialize)]
pub struct ProbeRow {
    pub r: u32,
    pub log_mu: f64,
    #[serde(rename = "log_R")]
    pub log_r: f64,
    /// `log μ(Q(x, 2^{−r})) / log 2^{−r}` from the upper mass.
    pub slope: f64,
    pub log_mu_lower: f64,
    pub partial: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ProbeReport {
    pub case: u8,
    pub lambda: f64,
    pub gamma: f64,
    pub schedule: Schedule,
    /// The cube `Q(x, R)` has side `2R`.
    pub side_convention: &'static str,
    pub rows: Vec<ProbeRow>,
    /// Minimum slope over the window.
    pub summary: f64,
    /// Least-squares slope of `log μ` against `log R` over the window.
    pub fit_slope: Option<f64>,
    /// `L_{m−1}/n_m` per return.
    pub bias: Vec<f64>,
}

/// Slopes `log μ(Q(x, 2^{−r}))/log 2^{−r}` for `r ∈ [r_lo, r_hi]`.
pub fn local_dim_probe(ms: &MeasureSpec, x: &SymbolWord, r_lo: u32, r_hi: u32) -> Result<ProbeReport> {
    if r_hi < r_lo {
        return Err(Error::invalid("r", "need r_lo ≤ r_hi"));
    }
    if r_hi > 1000 {
        return Err(Error::invalid("r_hi", "must be at most 1000"));
    }
    let rows = (r_lo..=r_hi)
        .into_par_iter()
        .map(|r| {
            let radius = 0.5f64.powi(r as i32);
            let m = mu_ball(ms, x, radius)?;
            let log_r = radius.ln();
            Ok(ProbeRow {
                r,
                log_mu: m.upper.ln(),
                log_r,
                slope: if r == 0 { 0.0 } else { m.upper.ln() / log_r },
                log_mu_lower: m.lower.ln(),
                partial: m.partial,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let summary = rows.iter().map(|r| r.slope).fold(f64::INFINITY, f64::min);
    let (xs, ys): (Vec<f64>, Vec<f64>) = rows.iter().filter(|r| r.r > 0).map(|r| (r.log_r, r.log_mu)).unzip();
    let fit_slope = least_squares(&xs, &ys).map(|f| f.slope);
    let p = ms.params();
    Ok(ProbeReport {
        case: ms.case.index(),
        lambda: p.lambda,
        gamma: p.gamma,
        schedule: ms.schedule.clone(),
        side_convention: "2R",
        rows,
        summary,
        fit_slope,
        bias: ms.schedule.bias(&p),
    })
}

/// Probe summaries at `points` `μ`-random points, sampled with seeds
/// `seed, seed + 1, …`.
pub fn sampled_probes(ms: &MeasureSpec, points: usize, r_lo: u32, r_hi: u32, seed: u64) -> Result<Vec<ProbeReport>> {
    let depth = ball_depth(ms.params().lambda, 0.5f64.powi(r_hi as i32)).min(ms.coverage());
    (0..points as u64)
        .into_par_iter()
        .map(|i| {
            let x = ms.sample_path(depth, seed.wrapping_add(i))?;
            local_dim_probe(ms, &x, r_lo, r_hi)
        })
        .collect()
}

impl MeasureCase {
    pub fn label(self) -> &'static str {
        match self {
            MeasureCase::One => "case1",
            MeasureCase::Two => "case2",
            MeasureCase::Three => "case3",
        }
    }
}
