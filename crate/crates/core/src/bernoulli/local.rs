use serde::Serialize;

use super::histogram::DyadicHistogram;
use crate::error::{Error, Result};
use crate::fit::least_squares;

#[derive(Debug, Clone, Serialize)]
pub struct LocalDimFit {
    pub x: f64,
    pub slope: f64,
    pub intercept: f64,
    pub rms: f64,
    /// `(ln r, ln ν(B(x, r)))` for every scale used in the fit.
    pub points: Vec<(f64, f64)>,
    /// Dyadic exponents `j` whose ball had zero mass.
    pub excluded: Vec<u32>,
}

/// Slope of `ln ν(B(x, 2^{−j}))` against `ln 2^{−j}` for `j ∈ [j_lo, j_hi]`.
pub fn local_dim_estimate(h: &DyadicHistogram, x: f64, j_lo: u32, j_hi: u32) -> Result<LocalDimFit> {
    if !(x > 0.0 && x < 1.0) {
        return Err(Error::invalid("x", "must lie in (0, 1)"));
    }
    if j_lo > j_hi || j_hi > h.level {
        return Err(Error::invalid("r_range", format!("need j_lo ≤ j_hi ≤ level {}", h.level)));
    }
    let mut points = Vec::new();
    let mut excluded = Vec::new();
    for j in j_lo..=j_hi {
        let r = 0.5f64.powi(j as i32);
        let m = h.measure_interval((x - r).max(0.0), (x + r).min(1.0));
        if m > 0.0 {
            points.push((r.ln(), m.ln()));
        } else {
            excluded.push(j);
        }
    }
    let (xs, ys): (Vec<f64>, Vec<f64>) = points.iter().cloned().unzip();
    let fit = least_squares(&xs, &ys).ok_or_else(|| Error::Insufficient("fewer than two scales with positive mass".into()))?;
    Ok(LocalDimFit {
        x,
        slope: fit.slope,
        intercept: fit.intercept,
        rms: fit.rms,
        points,
        excluded,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct FrostmanReport {
    pub exponent: f64,
    /// Level and bin index of the interval attaining the minimum.
    pub level: u32,
    pub bin: usize,
    /// Minimum of `ln ν(I)/ln |I|` at each level `1..=m`.
    pub per_level: Vec<f64>,
}

/// Empirical uniform lower exponent `min_I ln ν(I)/ln |I|` over all dyadic
/// intervals of levels `1..=m`.
pub fn frostman_exponent(h: &DyadicHistogram) -> Result<FrostmanReport> {
    if h.level == 0 {
        return Err(Error::Insufficient("level-0 histogram has no proper dyadic intervals".into()));
    }
    let mut per_level = vec![f64::INFINITY; h.level as usize];
    let mut best = (f64::INFINITY, h.level, 0usize);
    let mut cur = h.clone();
    loop {
        let l = cur.level;
        let log_len = -(l as f64) * std::f64::consts::LN_2;
        for (j, &m) in cur.mass.iter().enumerate() {
            if m > 0.0 {
                let e = (m.ln() / log_len).max(0.0);
                if e < per_level[l as usize - 1] {
                    per_level[l as usize - 1] = e;
                }
                if e < best.0 {
                    best = (e, l, j);
                }
            }
        }
        match cur.coarsen() {
            Some(c) if c.level >= 1 => cur = c,
            _ => break,
        }
    }
    Ok(FrostmanReport {
        exponent: best.0,
        level: best.1,
        bin: best.2,
        per_level,
    })
}
