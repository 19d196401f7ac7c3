use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::scales::LAMBDA_BAR;
use crate::symbolic::SymbolWord;

pub const MAX_SERIES_DEGREE: usize = 64;
/// Resolution of the sub-level set bisection.
pub const MEASURE_RESOLUTION: f64 = 1e-8;
/// Width below which root isolation stops subdividing.
const ISOLATION_WIDTH: f64 = 1e-7;

/// Truncated power series `g(λ) = 1 + Σ_{n=1..d} b_n λⁿ`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeriesSample {
    /// `b_1..b_d`.
    pub b: Vec<i8>,
}

impl SeriesSample {
    pub fn random<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Self {
        SeriesSample {
            b: (0..d).map(|_| rng.gen_range(-1i8..=1)).collect(),
        }
    }

    /// `(g(λ), g′(λ))`.
    pub fn eval(&self, lambda: f64) -> (f64, f64) {
        let mut g = 0.0;
        let mut dg = 0.0;
        for &c in self.b.iter().rev() {
            dg = dg * lambda + g;
            g = g * lambda + c as f64;
        }
        // g currently holds Σ b_n λ^{n−1}
        let dg_full = g + lambda * dg;
        (1.0 + lambda * g, dg_full)
    }

    /// Upper bound of `|g′|` on `(0, x]`.
    fn lipschitz(&self, x: f64) -> f64 {
        let mut l = 0.0;
        let mut p = 1.0;
        for (k, &c) in self.b.iter().enumerate() {
            l += (k + 1) as f64 * c.unsigned_abs() as f64 * p;
            p *= x;
        }
        l
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ViolationKind {
    /// A sign-change root with small derivative.
    SignChange,
    /// An unresolved window where both `|g|` and `|g′|` are small.
    Tangency,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Root {
    pub lambda: f64,
    pub derivative: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub sample: usize,
    pub kind: ViolationKind,
    pub lambda: f64,
    pub g: f64,
    pub derivative: f64,
    pub b: Vec<i8>,
}

#[derive(Debug, Clone, Serialize)]
pub struct DoubleZeroReport {
    pub samples: usize,
    pub degree: usize,
    pub delta: f64,
    pub roots_found: usize,
    /// Smallest `|g′|` over every located root.
    pub min_abs_derivative: Option<f64>,
    pub violations: Vec<Violation>,
}

struct Isolation {
    roots: Vec<Root>,
    tangencies: Vec<(f64, f64, f64)>,
}

/// Sign-change roots of `g` in `[lo, hi]` plus windows that cannot exclude a
/// zero yet show no sign change (candidate tangencies).
fn isolate(g: &SeriesSample, lo: f64, hi: f64, delta: f64) -> Isolation {
    let mut out = Isolation {
        roots: Vec::new(),
        tangencies: Vec::new(),
    };
    let l = g.lipschitz(hi);
    let (ga, _) = g.eval(lo);
    let (gb, _) = g.eval(hi);
    let mut stack = vec![(lo, hi, ga, gb)];
    while let Some((a, b, ga, gb)) = stack.pop() {
        let m = 0.5 * (a + b);
        let hw = 0.5 * (b - a);
        let (gm, dm) = g.eval(m);
        let sign_change = ga * gb < 0.0 || gb == 0.0;
        if !sign_change && gm.abs() > l * hw {
            continue;
        }
        if b - a > ISOLATION_WIDTH {
            stack.push((m, b, gm, gb));
            stack.push((a, m, ga, gm));
            continue;
        }
        if sign_change {
            let r = bisect(g, a, b, ga);
            out.roots.push(Root {
                lambda: r,
                derivative: g.eval(r).1,
            });
        } else if dm.abs() < delta && gm.abs() < delta {
            out.tangencies.push((m, gm, dm));
        }
    }
    out
}

fn bisect(g: &SeriesSample, mut a: f64, mut b: f64, mut ga: f64) -> f64 {
    for _ in 0..60 {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        let gm = g.eval(m).0;
        if gm == 0.0 {
            return m;
        }
        if (gm < 0.0) == (ga < 0.0) {
            a = m;
            ga = gm;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

/// All sign-change roots of `g` in `[lo, hi]`.
pub fn series_roots(g: &SeriesSample, lo: f64, hi: f64) -> Vec<Root> {
    let mut r = isolate(g, lo, hi, 0.0).roots;
    r.sort_by(|a, b| a.lambda.total_cmp(&b.lambda));
    r
}

fn check_range(lo: f64, hi: f64) -> Result<()> {
    if !(lo >= 0.5 && lo < hi && hi < LAMBDA_BAR) {
        return Err(Error::invalid("lambda_range", format!("need 1/2 ≤ lo < hi < {LAMBDA_BAR}")));
    }
    Ok(())
}

/// Sampled search for double zeros of `1 + Σ b_n λⁿ`.
///
/// Sample `i` draws its coefficients from a ChaCha stream keyed by
/// `(seed, i)`, so reports do not depend on the thread count. Sampling can
/// falsify but never certify the absence of double zeros.
pub fn double_zero_scan(lo: f64, hi: f64, degree: usize, delta: f64, samples: usize, seed: u64) -> Result<DoubleZeroReport> {
    check_range(lo, hi)?;
    if degree == 0 || degree > MAX_SERIES_DEGREE {
        return Err(Error::invalid("degree", format!("need 1 ≤ d ≤ {MAX_SERIES_DEGREE}")));
    }
    if !(delta > 0.0) {
        return Err(Error::invalid("delta", "must be positive"));
    }
    let per_sample: Vec<(usize, Option<f64>, Vec<Violation>)> = (0..samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            let g = SeriesSample::random(degree, &mut rng);
            let iso = isolate(&g, lo, hi, delta);
            let mut v = Vec::new();
            let mut min_d: Option<f64> = None;
            for r in &iso.roots {
                let d = r.derivative.abs();
                min_d = Some(min_d.map_or(d, |m| m.min(d)));
                if d < delta {
                    v.push(Violation {
                        sample: i,
                        kind: ViolationKind::SignChange,
                        lambda: r.lambda,
                        g: g.eval(r.lambda).0,
                        derivative: r.derivative,
                        b: g.b.clone(),
                    });
                }
            }
            for &(m, gm, dm) in &iso.tangencies {
                v.push(Violation {
                    sample: i,
                    kind: ViolationKind::Tangency,
                    lambda: m,
                    g: gm,
                    derivative: dm,
                    b: g.b.clone(),
                });
            }
            (iso.roots.len(), min_d, v)
        })
        .collect();
    let mut report = DoubleZeroReport {
        samples,
        degree,
        delta,
        roots_found: 0,
        min_abs_derivative: None,
        violations: Vec::new(),
    };
    for (n, d, v) in per_sample {
        report.roots_found += n;
        if let Some(d) = d {
            report.min_abs_derivative = Some(report.min_abs_derivative.map_or(d, |m| m.min(d)));
        }
        report.violations.extend(v);
    }
    Ok(report)
}

#[derive(Debug, Clone, Serialize)]
pub struct TransversalityMeasure {
    pub rho: f64,
    pub measure: f64,
    /// `measure / ρ`.
    pub constant: f64,
    /// `λ_hi^{d+1}/(1 − λ_hi)`, the neglected tail.
    pub tail: f64,
}

/// Lebesgue measure of `{λ ∈ [lo, hi] : |Σ_{k≤d} (i_k − j_k)λ^k| < ρ}`.
pub fn transversality_measure(i: &SymbolWord, j: &SymbolWord, rho: f64, lo: f64, hi: f64, d: usize) -> Result<TransversalityMeasure> {
    check_range(lo, hi)?;
    if i.len() < d || j.len() < d || d == 0 {
        return Err(Error::invalid("depth", "words must have at least d ≥ 1 symbols"));
    }
    if i.get(0) == j.get(0) {
        return Err(Error::invalid("words", "first symbols must differ"));
    }
    if !(rho > 0.0) {
        return Err(Error::invalid("rho", "must be positive"));
    }
    let tail = hi.powi(d as i32 + 1) / (1.0 - hi);
    if tail >= rho / 10.0 {
        return Err(Error::invalid("depth", format!("tail {tail:.3e} is not below ρ/10; increase d")));
    }
    // f(λ) = λ·h(λ) with h = Σ c_k λ^{k−1}
    let c: Vec<f64> = (0..d).map(|k| i.get(k) as f64 - j.get(k) as f64).collect();
    let f = |x: f64| x * c.iter().rev().fold(0.0, |acc, v| acc * x + v);
    let lip = {
        let mut l = 0.0;
        let mut p = 1.0;
        for (k, v) in c.iter().enumerate() {
            l += (k + 1) as f64 * v.abs() * p;
            p *= hi;
        }
        l
    };
    let mut measure = 0.0;
    let mut stack = vec![(lo, hi)];
    while let Some((a, b)) = stack.pop() {
        let m = 0.5 * (a + b);
        let hw = 0.5 * (b - a);
        let v = f(m).abs();
        if v - lip * hw >= rho {
            continue;
        }
        if v + lip * hw < rho {
            measure += b - a;
            continue;
        }
        if b - a <= MEASURE_RESOLUTION {
            if v < rho {
                measure += b - a;
            }
            continue;
        }
        stack.push((m, b));
        stack.push((a, m));
    }
    Ok(TransversalityMeasure {
        rho,
        measure,
        constant: measure / rho,
        tail,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eval_matches_direct_sum() {
        let g = SeriesSample { b: vec![1, -1, 0, 1] };
        let x: f64 = 0.6;
        let direct = 1.0 + x - x * x + x.powi(4);
        let deriv = 1.0 - 2.0 * x + 4.0 * x.powi(3);
        let (v, d) = g.eval(x);
        assert!((v - direct).abs() < 1e-15 && (d - deriv).abs() < 1e-15);
    }

    #[test]
    fn zero_series_has_no_roots() {
        let g = SeriesSample { b: vec![0; 40] };
        assert!(series_roots(&g, 0.5, 0.66).is_empty());
    }

    #[test]
    fn golden_root_is_simple() {
        // 1 − λ − λ² vanishes at (√5 − 1)/2 with g′ = −√5
        let g = SeriesSample { b: vec![-1, -1] };
        let r = series_roots(&g, 0.5, 0.66);
        assert_eq!(r.len(), 1);
        assert!((r[0].lambda - (5f64.sqrt() - 1.0) / 2.0).abs() < 1e-12);
        assert!((r[0].derivative + 5f64.sqrt()).abs() < 1e-9);
        assert!(r[0].derivative.abs() > 1e-4);
    }

    #[test]
    fn scan_is_clean_and_deterministic() {
        let a = double_zero_scan(0.5, 0.66, 40, 1e-4, 300, 11).unwrap();
        let b = double_zero_scan(0.5, 0.66, 40, 1e-4, 300, 11).unwrap();
        assert!(a.violations.is_empty());
        assert!(a.roots_found > 0);
        assert_eq!(a.roots_found, b.roots_found);
        assert_eq!(a.min_abs_derivative, b.min_abs_derivative);
    }

    #[test]
    fn measure_limits() {
        let i = SymbolWord::ones(1).concat(&SymbolWord::zeros(79));
        let j = SymbolWord::zeros(1).concat(&SymbolWord::ones(79));
        let whole = transversality_measure(&i, &j, 10.0, 0.52, 0.66, 40).unwrap();
        assert!((whole.measure - 0.14).abs() < 1e-12);
        let small = transversality_measure(&i, &j, 1e-3, 0.52, 0.66, 40).unwrap();
        assert!(small.constant <= 20.0, "C = {}", small.constant);
        // λ − λ² − λ³ has a simple root at the golden ratio
        let g = SymbolWord::zeros(1).concat(&SymbolWord::ones(2)).concat(&SymbolWord::zeros(77));
        let coarse = transversality_measure(&i, &g, 1e-3, 0.52, 0.66, 60).unwrap();
        let fine = transversality_measure(&i, &g, 1e-6, 0.52, 0.66, 60).unwrap();
        assert!(coarse.measure > 0.0);
        assert!(fine.measure < 1e-3 * coarse.measure * 1.01);
        assert!(transversality_measure(&i, &j, 1e-3, 0.52, 0.66, 10).is_err());
        assert!(transversality_measure(&i, &i, 1e-1, 0.52, 0.66, 40).is_err());
    }
}
