use serde::Serialize;

use crate::error::{Error, Result};
use crate::scales::ell_n_dynamical;
use crate::symbolic::{map_rect, pi_2d, CylinderRect, Params, Point, SymbolWord};

/// Largest `n` for which all `2ⁿ` preimages are materialised.
pub const MAX_PREIMAGE_DEPTH: usize = 26;

/// A shrinking-target problem: centre coding `z̄` and parameters `(λ, γ)`.
///
/// The target at time `n` is the closed cube `Q(π(z̄), γⁿ)` of side `2γⁿ`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TargetSpec {
    pub z: SymbolWord,
    pub params: Params,
}

impl TargetSpec {
    pub fn new(z: SymbolWord, params: Params) -> Result<Self> {
        if z.is_empty() {
            return Err(Error::invalid("z", "centre coding must be nonempty"));
        }
        Ok(TargetSpec { z, params })
    }

    pub fn center(&self) -> Point {
        pi_2d(&self.z, self.params.lambda)
    }

    /// `Q_n = Q(z, γⁿ)`, unclipped.
    pub fn cube(&self, n: usize) -> CylinderRect {
        CylinderRect::cube(self.center(), self.params.gamma.powi(n as i32))
    }
}

/// `f_w(Q_n ∩ [0,1]²)` for every `|w| = n`, in lexicographic order of `w`.
///
/// When `Q_n` lies inside the unit square every rectangle is
/// `2γⁿλⁿ × 2γⁿ2^{−n}`.
pub fn preimage_rects(t: &TargetSpec, n: usize) -> Result<Vec<CylinderRect>> {
    if n > MAX_PREIMAGE_DEPTH {
        return Err(Error::invalid("n", format!("{n} exceeds {MAX_PREIMAGE_DEPTH}")));
    }
    let q = match t.cube(n).intersection(&CylinderRect::UNIT) {
        Some(q) => q,
        None => return Ok(Vec::new()),
    };
    let lambda = t.params.lambda;
    let mut out = Vec::with_capacity(1 << n);
    for bits in 0u64..1 << n {
        let digits: Vec<u8> = (0..n).map(|i| (bits >> (n - 1 - i) & 1) as u8).collect();
        let w = SymbolWord::from_digits(&digits)?;
        out.push(map_rect(&w, lambda, &q));
    }
    Ok(out)
}

/// `σⁿ(i) ∈ [z̄|_{ℓ_n}]` with `ℓ_n = ⌈n log λ / log γ⌉`.
pub fn dynamical_membership(i: &SymbolWord, t: &TargetSpec, n: usize) -> Result<bool> {
    let l = ell_n_dynamical(n as u64, &t.params) as usize;
    if i.len() < n + l {
        return Err(Error::Insufficient(format!("word of length {} needs {} symbols", i.len(), n + l)));
    }
    if t.z.len() < l {
        return Err(Error::Insufficient(format!("centre coding needs {l} symbols")));
    }
    Ok((0..l).all(|k| i.get(n + k) == t.z.get(k)))
}
