use std::f64::consts::LN_2;

use serde::Serialize;

use super::target::TargetSpec;
use crate::bernoulli::{count_nk_with_budget, sample_nk};
use crate::error::{Error, Result};
use crate::scales::ell2;
use crate::symbolic::{pi_i, SymbolWord, MAX_DEPTH};

/// Node budget for counting `N_k` exactly for strategy C.
pub const NK_NODE_BUDGET: u64 = 4_000_000;
/// Random descents when `N_k` is too large to count.
pub const NK_PROBES: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Strategy {
    /// One cube of side `λ^{n+ℓ₂(n)}` per preimage.
    A,
    /// Cubes of side `(γ/2)ⁿ`.
    B,
    /// Cylinders at depth `n + ℓ₂(n)` meeting the target.
    C,
}

impl Strategy {
    pub const ALL: [Strategy; 3] = [Strategy::A, Strategy::B, Strategy::C];
}

/// `ln N_k(x)` at `ρ = 1`, counted exactly or sampled.
#[derive(Debug, Clone, Serialize)]
pub struct NkEstimate {
    pub k: usize,
    pub log_count: f64,
    pub exact: bool,
    /// Random descents behind a sampled value (0 when exact).
    pub probes: usize,
    /// Relative standard error of a sampled count.
    pub rel_std_error: f64,
}

/// `N_k(π_I(z))`, counted exactly while the pruned tree fits in `budget`
/// nodes and estimated by [`sample_nk`] beyond that.
pub fn estimate_log_nk(z: &SymbolWord, k: usize, lambda: f64, budget: u64) -> Result<NkEstimate> {
    if k <= MAX_DEPTH {
        match count_nk_with_budget(pi_i(z, lambda).value, 1.0, k, lambda, budget) {
            Ok(c) => {
                return Ok(NkEstimate {
                    k,
                    log_count: (c.count as f64).ln(),
                    exact: true,
                    probes: 0,
                    rel_std_error: 0.0,
                })
            }
            Err(Error::Budget(_)) => {}
            Err(e) => return Err(e),
        }
    }
    let s = sample_nk(z, 1.0, k, lambda, NK_PROBES, 0)?;
    Ok(NkEstimate {
        k,
        log_count: s.log_count,
        exact: false,
        probes: s.probes,
        rel_std_error: s.rel_std_error,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct CoverCount {
    pub strategy: Strategy,
    pub n: usize,
    pub log_side: f64,
    pub log_count: f64,
    /// `ln(count)/(−ln(side))`, the cost exponent of the cover.
    pub exponent: f64,
    pub nk: Option<NkEstimate>,
}

/// `ln ⌈bⁿ⌉` without overflow.
fn ln_ceil_pow(b: f64, n: usize) -> f64 {
    let v = b.powi(n as i32);
    if v.is_finite() && v < 2f64.powi(52) {
        v.ceil().ln()
    } else {
        n as f64 * b.ln()
    }
}

/// Cover of `E^{−n}(Q_n)` by the given strategy.
pub fn cover_count(strategy: Strategy, t: &TargetSpec, n: usize) -> Result<CoverCount> {
    if n == 0 {
        return Err(Error::invalid("n", "must be at least 1"));
    }
    let p = t.params;
    let l2 = ell2(n as u64, &p) as usize;
    let nf = n as f64;
    let (log_side, log_count, nk) = match strategy {
        Strategy::A => ((nf + l2 as f64) * p.lambda.ln(), nf * LN_2, None),
        Strategy::B => (nf * (p.gamma / 2.0).ln(), nf * LN_2 + ln_ceil_pow(2.0 * p.lambda, n), None),
        Strategy::C => {
            let nk = estimate_log_nk(&t.z, l2, p.lambda, NK_NODE_BUDGET)?;
            let log_count = nf * LN_2 + nk.log_count + ln_ceil_pow(2.0 * p.lambda, n + l2);
            (-((n + l2) as f64) * LN_2, log_count, Some(nk))
        }
    };
    Ok(CoverCount {
        strategy,
        n,
        log_side,
        log_count,
        exponent: log_count / -log_side,
        nk,
    })
}

/// The strategy with the smallest cost exponent, with all three covers.
pub fn best_strategy(t: &TargetSpec, n: usize) -> Result<(Strategy, Vec<CoverCount>)> {
    let covers = Strategy::ALL.iter().map(|s| cover_count(*s, t, n)).collect::<Result<Vec<_>>>()?;
    let best = covers
        .iter()
        .min_by(|a, b| a.exponent.total_cmp(&b.exponent))
        .map(|c| c.strategy)
        .unwrap_or(Strategy::A);
    Ok((best, covers))
}

/// CSV rows `strategy,n,log_side,log_count,exponent`.
pub fn covers_to_csv(rows: &[CoverCount]) -> String {
    let mut out = String::from("strategy,n,log_side,log_count,exponent,nk_exact\n");
    for r in rows {
        let exact = r.nk.as_ref().map_or(String::new(), |e| e.exact.to_string());
        out.push_str(&format!(
            "{:?},{},{:e},{:e},{:e},{}\n",
            r.strategy, r.n, r.log_side, r.log_count, r.exponent, exact
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scales::{dim_formula, DimCase};
    use crate::symbolic::{Params, SymbolWord};

    fn spec(lambda: f64, gamma: f64, z: SymbolWord) -> TargetSpec {
        TargetSpec::new(z, Params::new(lambda, gamma).unwrap()).unwrap()
    }

    #[test]
    fn exponents_approach_closed_forms() {
        let t = spec(0.6, 0.5, SymbolWord::zeros(200));
        let a = cover_count(Strategy::A, &t, 2000).unwrap();
        assert!((a.exponent - dim_formula(DimCase::One, &t.params)).abs() < 1e-3);
        let t = spec(0.63, 0.8, SymbolWord::zeros(200));
        let b = cover_count(Strategy::B, &t, 2000).unwrap();
        assert!((b.exponent - dim_formula(DimCase::Three, &t.params)).abs() < 1e-3);
        // 0^∞ has a unique expansion, so N_k grows subexponentially
        let c = cover_count(Strategy::C, &t, 400).unwrap();
        assert!((c.exponent - dim_formula(DimCase::Two, &t.params)).abs() < 0.02, "{}", c.exponent);
    }

    #[test]
    fn first_step_values_are_finite() {
        let t = spec(0.7, 0.6, SymbolWord::repeat(&[0, 1], 100));
        for s in Strategy::ALL {
            let c = cover_count(s, &t, 1).unwrap();
            assert!(c.exponent.is_finite() && c.exponent > 0.0);
        }
        assert!(cover_count(Strategy::A, &t, 0).is_err());
    }

    #[test]
    fn sampled_nk_tracks_exact_counts() {
        let z = SymbolWord::repeat(&[0, 1, 1, 0, 1], 300);
        let exact = estimate_log_nk(&z, 24, 0.8, u64::MAX).unwrap();
        assert!(exact.exact && exact.probes == 0);
        let approx = estimate_log_nk(&z, 24, 0.8, 20_000).unwrap();
        assert!(!approx.exact && approx.probes == NK_PROBES);
        assert!((approx.log_count - exact.log_count).abs() < 0.1, "{} vs {}", approx.log_count, exact.log_count);
        // beyond the maximal word depth the count is sampled
        let deep = estimate_log_nk(&SymbolWord::zeros(1), 10_000, 0.9, NK_NODE_BUDGET).unwrap();
        assert!(!deep.exact && deep.log_count.is_finite());
    }
}
