use serde::Serialize;

use crate::error::{Error, Result};
use crate::symbolic::check_lambda;

/// L¹ residual at which the fixed-point iteration stops.
pub const RESIDUAL_TOLERANCE: f64 = 1e-9;
pub const MAX_LEVEL: u32 = 24;

/// Level-`m` dyadic approximation of the Bernoulli convolution `ν_λ`.
///
/// `mass[j]` is the measure of `[j·2^{−m}, (j+1)·2^{−m})`; mass is assumed
/// uniformly spread inside each bin when partial bins are queried.
#[derive(Debug, Clone, Serialize)]
pub struct DyadicHistogram {
    pub lambda: Option<f64>,
    pub level: u32,
    pub mass: Vec<f64>,
    pub residual: f64,
    pub iterations: usize,
    #[serde(skip)]
    cdf: Vec<f64>,
}

impl DyadicHistogram {
    /// Wraps arbitrary nonnegative bin masses (normalised to total 1).
    pub fn from_masses(level: u32, masses: Vec<f64>) -> Result<Self> {
        if level > MAX_LEVEL {
            return Err(Error::invalid("level", format!("{level} exceeds {MAX_LEVEL}")));
        }
        if masses.len() != 1usize << level {
            return Err(Error::invalid("mass", format!("expected {} bins, got {}", 1usize << level, masses.len())));
        }
        if masses.iter().any(|m| !(m.is_finite() && *m >= 0.0)) {
            return Err(Error::invalid("mass", "bin masses must be finite and nonnegative"));
        }
        let total: f64 = masses.iter().sum();
        if total <= 0.0 {
            return Err(Error::invalid("mass", "total mass is zero"));
        }
        let mass = masses.into_iter().map(|m| m / total).collect();
        Ok(Self::assemble(None, level, mass, 0.0, 0))
    }

    fn assemble(lambda: Option<f64>, level: u32, mass: Vec<f64>, residual: f64, iterations: usize) -> Self {
        let mut cdf = Vec::with_capacity(mass.len() + 1);
        let mut acc = 0.0;
        cdf.push(0.0);
        for m in &mass {
            acc += m;
            cdf.push(acc);
        }
        DyadicHistogram {
            lambda,
            level,
            mass,
            residual,
            iterations,
            cdf,
        }
    }

    pub fn bins(&self) -> usize {
        self.mass.len()
    }

    pub fn total(&self) -> f64 {
        self.cdf[self.bins()]
    }

    /// `ν([0, x])` under the piecewise-uniform reading.
    pub fn cdf(&self, x: f64) -> f64 {
        let n = self.bins();
        let t = x.clamp(0.0, 1.0) * n as f64;
        let j = (t.floor() as usize).min(n - 1);
        let frac = (t - j as f64).clamp(0.0, 1.0);
        self.cdf[j] + frac * self.mass[j]
    }

    /// Mass of `[a, b]`.
    pub fn measure_interval(&self, a: f64, b: f64) -> f64 {
        if b <= a {
            return 0.0;
        }
        (self.cdf(b) - self.cdf(a)).clamp(0.0, 1.0)
    }

    /// Histogram of the next coarser level.
    pub fn coarsen(&self) -> Option<DyadicHistogram> {
        if self.level == 0 {
            return None;
        }
        let mass = self.mass.chunks_exact(2).map(|c| c[0] + c[1]).collect();
        Some(Self::assemble(self.lambda, self.level - 1, mass, self.residual, self.iterations))
    }

    /// Rows `(bin_index, mass)` for CSV export.
    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(self.bins() * 24 + 16);
        out.push_str("bin_index,mass\n");
        for (j, m) in self.mass.iter().enumerate() {
            out.push_str(&format!("{j},{m:e}\n"));
        }
        out
    }
}

/// Pushes `src` forward under `g0(x) = λx` into `dst` with weight ½.
///
/// Bin `j` maps to `[λj, λ(j+1)]` in bin units, which straddles at most two
/// bins because λ < 1.
fn push_g0(lambda: f64, src: &[f64], dst: &mut [f64]) {
    for (j, &p) in src.iter().enumerate() {
        if p == 0.0 {
            continue;
        }
        let a = lambda * j as f64;
        let b = lambda * (j + 1) as f64;
        let ia = a.floor() as usize;
        let ib = b.floor() as usize;
        if ib == ia || b == ib as f64 {
            dst[ia] += 0.5 * p;
        } else {
            let left = (ib as f64 - a) / lambda;
            dst[ia] += 0.5 * p * left;
            dst[ib] += 0.5 * p * (1.0 - left);
        }
    }
}

/// One application of `T h = ½ h∘g0⁻¹ + ½ h∘g1⁻¹`.
///
/// The `g1` branch is the mirror image of the `g0` branch applied to the
/// mirrored histogram, so `T` commutes with `x ↦ 1 − x` by construction.
fn transfer(lambda: f64, h: &[f64], out: &mut [f64], scratch: &mut [f64], mirror: &mut [f64]) {
    out.iter_mut().for_each(|v| *v = 0.0);
    push_g0(lambda, h, out);
    let n = h.len();
    for j in 0..n {
        mirror[j] = h[n - 1 - j];
    }
    scratch.iter_mut().for_each(|v| *v = 0.0);
    push_g0(lambda, mirror, scratch);
    for j in 0..n {
        out[j] += scratch[n - 1 - j];
    }
}

/// Fixed point of the self-similarity relation, iterated from the uniform
/// histogram until the L¹ residual drops below [`RESIDUAL_TOLERANCE`] or
/// `iterations` steps have run.
pub fn build_histogram(lambda: f64, level: u32, iterations: usize) -> Result<DyadicHistogram> {
    check_lambda(lambda)?;
    if level > MAX_LEVEL {
        return Err(Error::invalid("level", format!("{level} exceeds {MAX_LEVEL}")));
    }
    if iterations < 4 * level as usize {
        return Err(Error::invalid("iterations", format!("need at least 4·level = {}", 4 * level)));
    }
    let n = 1usize << level;
    let mut h = vec![1.0 / n as f64; n];
    let mut next = vec![0.0; n];
    let mut scratch = vec![0.0; n];
    let mut mirror = vec![0.0; n];
    let mut residual = f64::INFINITY;
    let mut done = 0;
    for it in 1..=iterations {
        transfer(lambda, &h, &mut next, &mut scratch, &mut mirror);
        let total: f64 = next.iter().sum();
        next.iter_mut().for_each(|v| *v /= total);
        residual = h.iter().zip(&next).map(|(a, b)| (a - b).abs()).sum();
        std::mem::swap(&mut h, &mut next);
        done = it;
        if residual < RESIDUAL_TOLERANCE {
            break;
        }
    }
    if residual >= RESIDUAL_TOLERANCE {
        return Err(Error::NotConverged {
            residual,
            iterations: done,
        });
    }
    Ok(DyadicHistogram::assemble(Some(lambda), level, h, residual, done))
}

/// Default iteration cap, `10·level`.
pub fn default_iterations(level: u32) -> usize {
    (10 * level as usize).max(40)
}
