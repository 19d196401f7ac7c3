use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::symbolic::{check_lambda, SymbolWord};

pub const MIN_PROBES: usize = 100;
/// Cap on `probes · k` steps.
pub const MAX_PROBE_STEPS: u64 = 2_000_000_000;

/// Knuth's random-descent estimate of a branch count.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SampledCount {
    pub k: usize,
    pub probes: usize,
    /// `ln` of the mean probe product.
    pub log_count: f64,
    /// Standard error of the mean over the mean.
    pub rel_std_error: f64,
}

/// Estimates `N_k(π_I(c), ρ)` without enumerating the tree.
///
/// Each probe descends from the root, choosing uniformly among the children
/// whose cylinder still meets the window, and multiplies the numbers of
/// choices; a descent that dies scores 0. The mean is unbiased for the leaf
/// count.
///
/// The descent tracks `e_t = (π(w|t) − x)/λ^t`, written as the offset of `w`
/// from the centre minus the shifted tail `π_I(σ^t c)`. Survivors keep
/// `e_t ∈ [−1 − ρλ^{k−t}, ρλ^{k−t}]`, so the state stays O(1) at any depth
/// and `k` is not limited by the range of `λ^k`. The centre is padded
/// with zeros, as in `pi_i`.
pub fn sample_nk(center: &SymbolWord, rho: f64, k: usize, lambda: f64, probes: usize, seed: u64) -> Result<SampledCount> {
    check_lambda(lambda)?;
    if !(rho > 0.0 && rho.is_finite()) {
        return Err(Error::invalid("rho", "must be positive"));
    }
    if probes < MIN_PROBES {
        return Err(Error::invalid("probes", format!("must be at least {MIN_PROBES}")));
    }
    if (probes as u64).saturating_mul(k as u64) > MAX_PROBE_STEPS {
        return Err(Error::Budget(format!("{probes} probes of depth {k} exceed {MAX_PROBE_STEPS} steps")));
    }
    let c = 1.0 - lambda;
    let len = center.len();
    // tail[t] = π_I(σ^t center)
    let mut tail = vec![0.0; len + 1];
    for t in (0..len).rev() {
        tail[t] = center.get(t) as f64 * c + lambda * tail[t + 1];
    }
    let tail_at = |t: usize| if t < len { tail[t] } else { 0.0 };
    let z_at = |t: usize| if t < len { center.get(t) as f64 } else { 0.0 };
    // slack[j] = ρλ^j for the j = k − t still to go, flushed to 0 once tiny
    let slack = |j: usize| rho * lambda.powi(j.min(i32::MAX as usize) as i32);

    let logs: Vec<f64> = (0..probes as u64)
        .into_par_iter()
        .map(|p| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(p);
            let mut d = 0.0f64;
            let mut log_prod = 0.0f64;
            for t in 0..k {
                let s = slack(k - t - 1);
                let tail_next = tail_at(t + 1);
                let mut kids = [0.0f64; 2];
                let mut n = 0;
                for sym in 0..2u8 {
                    let dn = (d + (sym as f64 - z_at(t)) * c) / lambda;
                    let e = dn - tail_next;
                    if e <= s && e >= -1.0 - s {
                        kids[n] = dn;
                        n += 1;
                    }
                }
                match n {
                    0 => return f64::NEG_INFINITY,
                    1 => d = kids[0],
                    _ => {
                        log_prod += std::f64::consts::LN_2;
                        d = kids[rng.gen_range(0..2)];
                    }
                }
            }
            log_prod
        })
        .collect();

    let top = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if top == f64::NEG_INFINITY {
        return Err(Error::Insufficient("every probe died; the window misses the attractor".into()));
    }
    let scaled: Vec<f64> = logs.iter().map(|l| (l - top).exp()).collect();
    let n = probes as f64;
    let mean = scaled.iter().sum::<f64>() / n;
    let var = scaled.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    Ok(SampledCount {
        k,
        probes,
        log_count: top + mean.ln(),
        rel_std_error: (var / n).sqrt() / mean,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bernoulli::count_nk;
    use crate::symbolic::pi_i;

    #[test]
    fn agrees_with_exact_counts() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for lambda in [0.55, 0.7, 0.9] {
            for _ in 0..3 {
                let z = SymbolWord::random(200, &mut rng);
                let x = pi_i(&z, lambda).value;
                let exact = count_nk(x, 1.0, 18, lambda).unwrap().count as f64;
                let est = sample_nk(&z, 1.0, 18, lambda, 20_000, 3).unwrap();
                let rel = (est.log_count.exp() - exact).abs() / exact;
                assert!(rel < 5.0 * est.rel_std_error + 0.02, "λ {lambda}: {} vs {exact}", est.log_count.exp());
            }
        }
    }

    #[test]
    fn deterministic_trees_are_exact() {
        // every cylinder meets a window wider than [0, 1]
        let z = SymbolWord::zeros(10);
        let e = sample_nk(&z, 1e6, 12, 0.6, 100, 0).unwrap();
        assert!((e.log_count - 12.0 * std::f64::consts::LN_2).abs() < 1e-12);
        assert_eq!(e.rel_std_error, 0.0);
    }

    #[test]
    fn deep_unique_point_stays_finite() {
        // x = 0 at λ close to 1: the count saturates instead of growing with k
        let z = SymbolWord::zeros(1);
        let a = sample_nk(&z, 1.0, 2_000, 0.96, 500, 1).unwrap();
        let b = sample_nk(&z, 1.0, 8_000, 0.96, 500, 1).unwrap();
        assert!(a.log_count.is_finite() && (a.log_count - b.log_count).abs() < 0.5 * a.log_count);
    }

    #[test]
    fn validation() {
        let z = SymbolWord::zeros(4);
        assert!(sample_nk(&z, 1.0, 10, 0.4, 100, 0).is_err());
        assert!(sample_nk(&z, 0.0, 10, 0.6, 100, 0).is_err());
        assert!(sample_nk(&z, 1.0, 10, 0.6, 10, 0).is_err());
        assert!(matches!(sample_nk(&z, 1.0, 1 << 30, 0.6, 100, 0), Err(Error::Budget(_))));
    }
}
