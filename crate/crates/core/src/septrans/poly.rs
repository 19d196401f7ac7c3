use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};

/// Largest half stored in memory (`3^15` values).
pub const MAX_STORED_DIGITS: usize = 15;
/// Largest half streamed against the stored one.
pub const MAX_STREAMED_DIGITS: usize = 14;
pub const MAX_MITM_DEGREE: usize = MAX_STORED_DIGITS + MAX_STREAMED_DIGITS - 1;
pub const MAX_BRUTE_DEGREE: usize = 14;

/// Polynomials `Σ_{i=0..n} c_i λ^i` with `c_i ∈ {−1, 0, 1}`, not all zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct PolyClass {
    pub degree: usize,
}

impl PolyClass {
    pub fn size(&self) -> u128 {
        3u128.pow(self.degree as u32 + 1) - 1
    }

    pub fn contains(&self, c: &[i8]) -> bool {
        c.len() <= self.degree + 1 && c.iter().all(|v| (-1..=1).contains(v)) && c.iter().any(|v| *v != 0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PolyMin {
    pub degree: usize,
    pub value: f64,
    /// Minimiser, `c_0` first.
    pub coefficients: Vec<i8>,
}

/// `|Σ c_i λ^i|` by Horner's rule.
pub fn horner(c: &[i8], lambda: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &v| acc * lambda + v as f64).abs()
}

fn digits(index: u64, len: usize) -> Vec<i8> {
    let mut out = Vec::with_capacity(len);
    let mut k = index;
    for _ in 0..len {
        out.push((k % 3) as i8 - 1);
        k /= 3;
    }
    out
}

/// Values `Σ_{i<len} c_i x^i` for every ternary index, where index digit
/// `d_i` stands for `c_i = d_i − 1`.
fn partial_sums(len: usize, scale: f64, lambda: f64) -> Vec<f64> {
    let mut vals = vec![0.0];
    let mut p = scale;
    for _ in 0..len {
        let mut next = Vec::with_capacity(vals.len() * 3);
        for d in [-1.0, 0.0, 1.0] {
            next.extend(vals.iter().map(|v| v + d * p));
        }
        // the new digit becomes the most significant one
        vals = next;
        p *= lambda;
    }
    vals
}

fn better(a: &PolyMin, b: &PolyMin) -> bool {
    a.value < b.value || (a.value == b.value && a.coefficients < b.coefficients)
}

/// Exact `min_{P ∈ P_n} |P(λ)|` by meet in the middle.
///
/// The low coefficients `c_0..c_{h−1}` are tabulated and sorted; each high
/// combination is matched against its nearest neighbours by binary search.
/// All pairs within rounding distance of the best approximate sum are then
/// re-evaluated with [`horner`], so the result agrees with [`min_poly_brute`].
pub fn min_poly_value(lambda: f64, n: usize) -> Result<PolyMin> {
    if !(lambda > 0.0 && lambda < 1.0) {
        return Err(Error::invalid("lambda", "must lie in (0, 1)"));
    }
    if n > MAX_MITM_DEGREE {
        return Err(Error::Budget(format!("degree {n} exceeds the in-memory limit {MAX_MITM_DEGREE}")));
    }
    let total = n + 1;
    let low_len = total.div_ceil(2).min(MAX_STORED_DIGITS);
    let high_len = total - low_len;
    let low_vals = partial_sums(low_len, 1.0, lambda);
    let mut low: Vec<(f64, u32)> = low_vals.iter().enumerate().map(|(i, v)| (*v, i as u32)).collect();
    low.par_sort_unstable_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let low_zero = (3u64.pow(low_len as u32) - 1) / 2;
    let high_zero = (3u64.pow(high_len as u32) - 1) / 2;
    let high_vals = partial_sums(high_len, lambda.powi(low_len as i32), lambda);

    // Pass 1: best approximate |a + b|.
    let best = high_vals
        .par_iter()
        .enumerate()
        .map(|(hi, &b)| {
            let pos = low.partition_point(|e| e.0 < -b);
            let mut best = f64::INFINITY;
            for idx in [pos.wrapping_sub(1), pos, pos + 1, pos.wrapping_sub(2)] {
                if let Some(&(a, li)) = low.get(idx) {
                    if li as u64 == low_zero && hi as u64 == high_zero {
                        continue;
                    }
                    best = best.min((a + b).abs());
                }
            }
            best
        })
        .reduce(|| f64::INFINITY, f64::min);

    // Pass 2: Horner on every pair within rounding distance of the best.
    let bound = 1.0 / (1.0 - lambda);
    let tol = 8.0 * total as f64 * f64::EPSILON * bound;
    let window = best + tol;
    let seed = PolyMin {
        degree: n,
        value: f64::INFINITY,
        coefficients: Vec::new(),
    };
    let found = high_vals
        .par_iter()
        .enumerate()
        .map(|(hi, &b)| {
            let mut local = seed.clone();
            let start = low.partition_point(|e| e.0 < -b - window);
            for &(a, li) in &low[start..] {
                if a > -b + window {
                    break;
                }
                if li as u64 == low_zero && hi as u64 == high_zero {
                    continue;
                }
                let mut c = digits(li as u64, low_len);
                c.extend(digits(hi as u64, high_len));
                let cand = PolyMin {
                    degree: n,
                    value: horner(&c, lambda),
                    coefficients: c,
                };
                if better(&cand, &local) {
                    local = cand;
                }
            }
            local
        })
        .reduce(|| seed.clone(), |a, b| if better(&b, &a) { b } else { a });
    Ok(found)
}

/// Oracle: Horner on every nonzero coefficient vector.
pub fn min_poly_brute(lambda: f64, n: usize) -> Result<PolyMin> {
    if n > MAX_BRUTE_DEGREE {
        return Err(Error::invalid("n", format!("brute force is limited to n ≤ {MAX_BRUTE_DEGREE}")));
    }
    let count = 3u64.pow(n as u32 + 1);
    let zero = (count - 1) / 2;
    let mut best = PolyMin {
        degree: n,
        value: f64::INFINITY,
        coefficients: Vec::new(),
    };
    for idx in 0..count {
        if idx == zero {
            continue;
        }
        let c = digits(idx, n + 1);
        let cand = PolyMin {
            degree: n,
            value: horner(&c, lambda),
            coefficients: c,
        };
        if better(&cand, &best) {
            best = cand;
        }
    }
    Ok(best)
}

#[derive(Debug, Clone, Serialize)]
pub struct ProfileRow {
    pub n: usize,
    pub min: f64,
    /// `ln(min)/n`, or `−∞` once the minimum is indistinguishable from zero.
    pub log_min_per_n: f64,
    /// The minimiser evaluates below its own Horner rounding bound.
    pub exact_zero: bool,
    pub seconds: f64,
}

/// Forward-error bound of Horner's rule on `c` at `λ`.
fn horner_error_bound(c: &[i8], lambda: f64) -> f64 {
    let mut s = 0.0;
    let mut p = 1.0;
    for v in c {
        s += v.unsigned_abs() as f64 * p;
        p *= lambda;
    }
    2.0 * c.len() as f64 * f64::EPSILON * s
}

/// `|d/dλ Σ c_i λ^i|`.
fn horner_derivative(c: &[i8], lambda: f64) -> f64 {
    c.iter().enumerate().skip(1).rev().fold(0.0, |acc, (i, &v)| acc * lambda + i as f64 * v as f64).abs()
}

/// `(n, ln(min_n)/n)` for `n = 1..=n_max`.
pub fn separation_profile(lambda: f64, n_max: usize) -> Result<Vec<ProfileRow>> {
    separation_profile_with_resolution(lambda, n_max, 0.0)
}

/// As [`separation_profile`] for a `λ` known only to within `±resolution`
/// (a rounded decimal, say). A minimiser counts as an exact zero when it
/// stays below its rounding bound plus `|P′(λ)|·resolution`, i.e. when a
/// root of `P` may lie inside the uncertainty interval.
pub fn separation_profile_with_resolution(lambda: f64, n_max: usize, resolution: f64) -> Result<Vec<ProfileRow>> {
    if !(resolution >= 0.0 && resolution < 1e-3) {
        return Err(Error::invalid("resolution", "must lie in [0, 1e-3)"));
    }
    let mut rows = Vec::with_capacity(n_max);
    for n in 1..=n_max {
        let t = Instant::now();
        let m = min_poly_value(lambda, n)?;
        let slack = horner_derivative(&m.coefficients, lambda) * resolution;
        let exact_zero = m.value <= horner_error_bound(&m.coefficients, lambda) + slack;
        rows.push(ProfileRow {
            n,
            min: m.value,
            log_min_per_n: if exact_zero { f64::NEG_INFINITY } else { m.value.ln() / n as f64 },
            exact_zero,
            seconds: t.elapsed().as_secs_f64(),
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    const GOLDEN: f64 = 0.618_033_988_749_894_8;

    #[test]
    fn class_size_and_nesting() {
        assert_eq!(PolyClass { degree: 0 }.size(), 2);
        assert_eq!(PolyClass { degree: 3 }.size(), 80);
        assert!(PolyClass { degree: 3 }.contains(&[0, 1, -1]));
        assert!(!PolyClass { degree: 3 }.contains(&[0, 0]));
    }

    #[test]
    fn constants_only() {
        let m = min_poly_value(0.7, 0).unwrap();
        assert_eq!(m.value, 1.0);
        assert_eq!(min_poly_brute(0.7, 0).unwrap().value, 1.0);
    }

    #[test]
    fn golden_ratio_vanishes() {
        for n in 2..8 {
            assert!(min_poly_value(GOLDEN, n).unwrap().value < 1e-14);
        }
        let p = separation_profile(GOLDEN, 6).unwrap();
        assert!(!p[0].exact_zero);
        assert!(p[1].exact_zero);
    }

    #[test]
    fn mitm_equals_brute_force() {
        let a = min_poly_value(0.7, 12).unwrap();
        let b = min_poly_brute(0.7, 12).unwrap();
        assert_eq!(a, b);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let lambda = rng.gen_range(0.5..0.99);
            let n = rng.gen_range(0..=10);
            assert_eq!(min_poly_value(lambda, n).unwrap(), min_poly_brute(lambda, n).unwrap());
        }
    }

    #[test]
    fn rounded_golden_ratio_vanishes_within_its_resolution() {
        let p = separation_profile(0.6180339887, 3).unwrap();
        assert!(!p[1].exact_zero);
        let p = separation_profile_with_resolution(0.6180339887, 3, 0.5e-10).unwrap();
        assert!(!p[0].exact_zero && p[1].exact_zero);
        assert!(separation_profile_with_resolution(0.7, 12, 0.5e-10).unwrap().iter().all(|r| !r.exact_zero));
    }

    #[test]
    fn derivative_by_horner() {
        // d/dλ (1 − λ − λ²) = −1 − 2λ
        assert!((horner_derivative(&[1, -1, -1], 0.5) - 2.0).abs() < 1e-15);
    }

    #[test]
    fn minimum_is_nonincreasing() {
        let p = separation_profile(0.7, 16).unwrap();
        assert!(p.windows(2).all(|w| w[1].min <= w[0].min));
        assert!(p.iter().all(|r| !r.exact_zero && r.log_min_per_n.is_finite()));
    }

    #[test]
    fn degree_guard() {
        assert!(matches!(min_poly_value(0.7, MAX_MITM_DEGREE + 1), Err(Error::Budget(_))));
        assert!(min_poly_brute(0.7, 15).is_err());
    }
}
