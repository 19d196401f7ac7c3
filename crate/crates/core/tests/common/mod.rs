//! Brute-force oracles. Each one enumerates every word and shares no code
//! with the library beyond the public types.

#![allow(dead_code)]

/// `π_I` of the word whose `i`-th symbol is bit `k − 1 − i` of `bits`.
pub fn project(bits: u64, k: usize, lambda: f64) -> f64 {
    let mut v = 0.0;
    let mut p = 1.0 - lambda;
    for i in 0..k {
        if bits >> (k - 1 - i) & 1 == 1 {
            v += p;
        }
        p *= lambda;
    }
    v
}

/// Depth-`k` cylinders `[π, π + λ^k]` meeting `[x − r, x + r]`.
pub fn cylinders_meeting(x: f64, r: f64, k: usize, lambda: f64) -> u64 {
    let len = lambda.powi(k as i32);
    (0u64..1 << k)
        .filter(|&b| {
            let lo = project(b, k, lambda);
            lo <= x + r && lo + len >= x - r
        })
        .count() as u64
}

pub fn nk(x: f64, rho: f64, k: usize, lambda: f64) -> u64 {
    cylinders_meeting(x, rho * lambda.powi(k as i32), k, lambda)
}

pub fn expansions(x: f64, lambda: f64, k: usize) -> u64 {
    cylinders_meeting(x, 0.0, k, lambda)
}

/// Words `j` of length `m` with `|Σ_{i=1..m} (j_i − c_i) λ^i| < ρ`.
pub fn d_count(center: &[u8], rho: f64, m: usize, lambda: f64) -> u64 {
    (0u64..1 << m)
        .filter(|&b| {
            let s: f64 = (0..m)
                .map(|i| (((b >> (m - 1 - i)) & 1) as f64 - center[i] as f64) * lambda.powi(i as i32 + 1))
                .sum();
            s.abs() < rho
        })
        .count() as u64
}

/// `min |Σ_{i≤n} c_i λ^i|` over nonzero `c ∈ {−1,0,1}^{n+1}`, by Horner.
pub fn min_poly(lambda: f64, n: usize) -> f64 {
    let mut c = vec![-1i8; n + 1];
    let mut best = f64::INFINITY;
    loop {
        if c.iter().any(|&v| v != 0) {
            let v = c.iter().rev().fold(0.0, |acc, &ci| acc * lambda + ci as f64).abs();
            best = best.min(v);
        }
        // odometer over {−1, 0, 1}
        let mut i = 0;
        while i <= n && c[i] == 1 {
            c[i] = -1;
            i += 1;
        }
        if i > n {
            return best;
        }
        c[i] += 1;
    }
}
