//! Integer scale functions, return-time thresholds and the closed-form
//! dimension values.
//!
//! Every integer scale is the least (or largest) integer satisfying a power
//! inequality. We start from the logarithmic estimate and then repair it by
//! comparing the powers directly, so the inequality itself is the contract.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::symbolic::{check_lambda, Params, TIE_RELATIVE};

/// Upper end of the region of transversality.
pub const LAMBDA_BAR: f64 = 0.668;

/// `base^e ≤ bound^f`, compared directly while the powers are representable
/// and in log space once either side leaves the normal range. Equality up to
/// `TIE_RELATIVE` counts as `≤`.
fn pow_le(base: f64, e: u64, bound: f64, f: u64) -> bool {
    let lhs = base.powf(e as f64);
    let rhs = bound.powf(f as f64);
    if lhs.is_normal() && rhs.is_normal() {
        lhs <= rhs * (1.0 + TIE_RELATIVE)
    } else {
        let l = e as f64 * base.ln();
        let r = f as f64 * bound.ln();
        l <= r + TIE_RELATIVE * r.abs().max(1.0)
    }
}

/// Least integer `k ≥ 0` with `base^k ≤ bound^f`, for `0 < base < 1`.
fn least_power(base: f64, bound: f64, f: u64) -> u64 {
    let guess = (f as f64 * bound.ln() / base.ln()).ceil().max(0.0) as u64;
    let mut k = guess;
    while !pow_le(base, k, bound, f) {
        k += 1;
    }
    while k > 0 && pow_le(base, k - 1, bound, f) {
        k -= 1;
    }
    k
}

/// Largest integer `r ≥ 0` with `2^{−r} ≥ λ^n`.
fn largest_dyadic_above(lambda: f64, n: u64) -> u64 {
    // 2^{-r} ≥ λ^n  ⇔  λ^n ≤ (1/2)^r
    let guess = (n as f64 * lambda.ln() / 0.5f64.ln()).floor().max(0.0) as u64;
    let mut r = guess;
    while r > 0 && !pow_le(lambda, n, 0.5, r) {
        r -= 1;
    }
    while pow_le(lambda, n, 0.5, r + 1) {
        r += 1;
    }
    r
}

/// `ℓ₁(n)`: least `ℓ` with `(1/2)^ℓ ≤ γⁿ`.
pub fn ell1(n: u64, gamma: f64) -> u64 {
    least_power(0.5, gamma, n)
}

/// `ℓ₂(n)`: least `ℓ` with `λ^ℓ ≤ γⁿ`.
pub fn ell2(n: u64, p: &Params) -> u64 {
    ell2_with(n, p.lambda, p.gamma)
}

pub(crate) fn ell2_with(n: u64, lambda: f64, gamma: f64) -> u64 {
    least_power(lambda, gamma, n)
}

/// `k(r)`: least `k` with `λ^k ≤ (1/2)^r`.
pub fn k_of_r(r: u64, lambda: f64) -> u64 {
    least_power(lambda, 0.5, r)
}

/// `ℓ_n = ⌈n log λ / log γ⌉` for cylinder targets.
pub fn ell_n_dynamical(n: u64, p: &Params) -> u64 {
    let v = n as f64 * p.lambda.ln() / p.gamma.ln();
    let r = v.round();
    if (v - r).abs() <= 1e-9 * v.abs().max(1.0) {
        r as u64
    } else {
        v.ceil() as u64
    }
}

/// Scales attached to one return time `n_m`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScaleTable {
    pub n_m: u64,
    pub ell1: u64,
    pub ell2: u64,
    /// Largest `r` with `2^{−r} ≥ λ^{n_m}`.
    pub r_minus1: u64,
    /// Least `r` with `k(r) ≥ n_m + ℓ₂(n_m)`.
    pub r_0: u64,
    /// Largest `r` with `2^{−r} ≥ λ^{n_{m+1}}`, when the next return is known.
    pub r_1: Option<u64>,
}

pub fn thresholds(n_m: u64, next: Option<u64>, p: &Params) -> Result<ScaleTable> {
    if n_m == 0 {
        return Err(Error::invalid("n_m", "return time must be at least 1"));
    }
    let l2 = ell2(n_m, p);
    let target = n_m + l2;
    // k is nondecreasing, so bracket from the log estimate and walk.
    let mut r0 = ((target as f64) * (-p.lambda.ln()) / std::f64::consts::LN_2).floor().max(1.0) as u64;
    while k_of_r(r0, p.lambda) < target {
        r0 += 1;
    }
    while r0 > 1 && k_of_r(r0 - 1, p.lambda) >= target {
        r0 -= 1;
    }
    Ok(ScaleTable {
        n_m,
        ell1: ell1(n_m, p.gamma),
        ell2: l2,
        r_minus1: largest_dyadic_above(p.lambda, n_m),
        r_0: r0,
        r_1: next.map(|n| largest_dyadic_above(p.lambda, n)),
    })
}

/// The three dimension values, keyed by case.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DimCase {
    One,
    Two,
    Three,
}

impl DimCase {
    pub fn from_index(i: u8) -> Result<Self> {
        match i {
            1 => Ok(DimCase::One),
            2 => Ok(DimCase::Two),
            3 => Ok(DimCase::Three),
            _ => Err(Error::invalid("case", format!("{i} is not one of 1, 2, 3"))),
        }
    }

    pub fn index(self) -> u8 {
        match self {
            DimCase::One => 1,
            DimCase::Two => 2,
            DimCase::Three => 3,
        }
    }
}

pub fn dim_formula(case: DimCase, p: &Params) -> f64 {
    let (l, g) = (p.lambda.ln(), p.gamma.ln());
    let ln2 = std::f64::consts::LN_2;
    match case {
        DimCase::One => -ln2 / (l + g),
        DimCase::Two => 2.0 + l / ln2 - g / (g + l),
        DimCase::Three => (2.0 * ln2 + l) / (2.0f64.ln() - g),
    }
}

/// Hausdorff dimension of the attractor when `dim ν_λ = 1`.
pub fn dim_attractor(lambda: f64) -> f64 {
    2.0 + lambda.ln() / std::f64::consts::LN_2
}

/// Evaluates the case-2 value `t(γ)` in each of its algebraically equal
/// forms and returns the largest deviation from the first one. The partition
/// `1/(1 + a) + log γ/log(γλ) = 1`, `a = log γ/log λ`, is checked as well.
pub fn t_gamma_identity_check(p: &Params) -> f64 {
    let (l, g) = (p.lambda.ln(), p.gamma.ln());
    let ln2 = std::f64::consts::LN_2;
    let a = g / l;
    let gl = g + l;
    let t = 2.0 + l / ln2 - g / gl;
    let forms = [
        (ln2 * (2.0 + a) + gl) / (ln2 * (1.0 + a)),
        2.0 / (1.0 + a) + g / gl + g / (ln2 * (1.0 + a)) + l / (ln2 * (1.0 + a)),
        (2.0 + l / ln2) / (1.0 + a) + (g / gl) * (1.0 + l / ln2),
        (2.0 + l / ln2) / (1.0 + a) + (g / gl) * (2.0 + l / ln2) - g / gl,
    ];
    let partition = (1.0 / (1.0 + a) + g / gl - 1.0).abs();
    forms.iter().map(|f| (f - t).abs()).fold(partition, f64::max)
}

/// Constants of the typical-centre construction on `[λ₀, λ₁]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Case3Constants {
    pub xi: f64,
    pub s: f64,
    pub eta: f64,
    pub lambda0: f64,
    pub lambda1: f64,
}

pub fn case3_constants(lambda0: f64, lambda1: f64, gamma: f64) -> Result<Case3Constants> {
    check_lambda(lambda0)?;
    check_lambda(lambda1)?;
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(Error::invalid("gamma", format!("{gamma} is outside (0, 1)")));
    }
    let lower = 1.0 / (2.0 * gamma);
    if lambda0 <= lower || lambda1 >= LAMBDA_BAR || lambda0 > lambda1 {
        return Err(Error::invalid(
            "lambda0",
            format!("need 1/(2γ) = {lower:.6} < λ₀ ≤ λ₁ < {LAMBDA_BAR}, got [{lambda0}, {lambda1}]"),
        ));
    }
    let ln2 = std::f64::consts::LN_2;
    let (l0, l1, g) = (lambda0.ln(), lambda1.ln(), gamma.ln());
    let xi = g * (2.0 * lambda0).ln() / (l0 * ln2);
    let s = (2.0 * ln2 + l0) / (2.0f64.ln() - g);
    let eta = (l0 / l1 - 1.0) + (s + 1.0) * (g / l1 - g / l0);
    Ok(Case3Constants {
        xi,
        s,
        eta,
        lambda0,
        lambda1,
    })
}
