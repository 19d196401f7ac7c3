use std::sync::atomic::{AtomicU64, Ordering};

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::symbolic::{check_lambda, pi_i, Coefficients, SymbolWord, MAX_DEPTH};

/// Node budget shared by all pruned counters.
pub const DEFAULT_NODE_BUDGET: u64 = 2_000_000_000;

/// Depth at which the search tree is split into independent parallel tasks.
const SPLIT_DEPTH: usize = 12;
const FLUSH_EVERY: u64 = 1 << 12;

/// Absolute slack on the tail-bound pruning of `count_d`; leaves are tested
/// exactly, so slack only costs visited nodes.
const TAIL_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BranchCount {
    pub k: usize,
    pub x: f64,
    pub rho: f64,
    pub count: u64,
}

struct Budget {
    used: AtomicU64,
    limit: u64,
}

impl Budget {
    fn charge(&self, n: u64) -> Result<()> {
        let used = self.used.fetch_add(n, Ordering::Relaxed) + n;
        if used > self.limit {
            return Err(Error::Budget(format!("search visited more than {} nodes", self.limit)));
        }
        Ok(())
    }
}

/// Counts depth-`depth` leaves of a binary tree pruned by `step`.
///
/// `step(t, state, symbol)` returns the child state at depth `t + 1` or
/// `None` when the branch is cut. The top of the tree is expanded breadth
/// first and the subtrees are counted in parallel; the sum of integer counts
/// does not depend on the schedule.
fn count_leaves<S, F>(root: S, depth: usize, budget: u64, step: &F) -> Result<u64>
where
    S: Copy + Send + Sync,
    F: Fn(usize, S, u8) -> Option<S> + Sync,
{
    let budget = Budget {
        used: AtomicU64::new(0),
        limit: budget,
    };
    let split = depth.min(SPLIT_DEPTH);
    let mut frontier = vec![root];
    for t in 0..split {
        let mut next = Vec::with_capacity(frontier.len() * 2);
        for &s in &frontier {
            for sym in 0..2 {
                if let Some(c) = step(t, s, sym) {
                    next.push(c);
                }
            }
        }
        budget.charge(next.len() as u64)?;
        frontier = next;
    }
    if split == depth {
        return Ok(frontier.len() as u64);
    }
    frontier
        .par_iter()
        .map(|&s| {
            let mut local = 0u64;
            let n = subtree(s, split, depth, step, &budget, &mut local)?;
            budget.charge(local)?;
            Ok(n)
        })
        .try_reduce(|| 0, |a, b| Ok(a + b))
}

fn subtree<S, F>(s: S, t: usize, depth: usize, step: &F, budget: &Budget, local: &mut u64) -> Result<u64>
where
    S: Copy,
    F: Fn(usize, S, u8) -> Option<S>,
{
    if t == depth {
        return Ok(1);
    }
    *local += 1;
    if *local >= FLUSH_EVERY {
        budget.charge(*local)?;
        *local = 0;
    }
    let mut n = 0;
    for sym in 0..2 {
        if let Some(c) = step(t, s, sym) {
            n += subtree(c, t + 1, depth, step, budget, local)?;
        }
    }
    Ok(n)
}

/// Prefix value `v`; the cylinder interval is `[v, v + λ^t]`.
#[derive(Clone, Copy)]
struct Span {
    v: f64,
}

fn interval_step<'a>(c: &'a Coefficients, lo: f64, hi: f64) -> impl Fn(usize, Span, u8) -> Option<Span> + Sync + 'a {
    move |t, s, sym| {
        let v = if sym == 1 { s.v + c.digit[t] } else { s.v };
        (v <= hi && v + c.power[t + 1] >= lo).then_some(Span { v })
    }
}

fn check_depth(k: usize) -> Result<()> {
    if k > MAX_DEPTH {
        return Err(Error::invalid("k", format!("{k} exceeds {MAX_DEPTH}")));
    }
    Ok(())
}

/// Counts cylinders meeting `[x − r, x + r]`.
///
/// The flip `w ↦ w̄` maps the cylinder of `w` onto the mirror image of the
/// cylinder of `w̄`, so the count at `x` equals the count at `1 − x`. Points
/// in the upper half are reflected because prefix values near 1 carry only
/// absolute precision while values near 0 keep full relative precision.
fn count_interval(x: f64, r: f64, k: usize, lambda: f64, budget: u64) -> Result<u64> {
    let x = if x > 0.5 { 1.0 - x } else { x };
    let (lo, hi) = (x - r, x + r);
    let c = Coefficients::new(lambda, k);
    let step = interval_step(&c, lo, hi);
    count_leaves(Span { v: 0.0 }, k, budget, &step)
}

/// `N_k(x)`: depth-`k` cylinders whose interval meets `[x − ρλ^k, x + ρλ^k]`.
pub fn count_nk(x: f64, rho: f64, k: usize, lambda: f64) -> Result<BranchCount> {
    count_nk_with_budget(x, rho, k, lambda, DEFAULT_NODE_BUDGET)
}

pub fn count_nk_with_budget(x: f64, rho: f64, k: usize, lambda: f64, budget: u64) -> Result<BranchCount> {
    check_lambda(lambda)?;
    check_depth(k)?;
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::invalid("x", "must lie in [0, 1]"));
    }
    if !(rho > 0.0 && rho.is_finite()) {
        return Err(Error::invalid("rho", "must be positive and finite"));
    }
    let r = rho * lambda.powi(k as i32);
    let count = count_interval(x, r, k, lambda, budget)?;
    Ok(BranchCount { k, x, rho, count })
}

/// Depth-`k` prefixes that extend to a λ-expansion of `x`.
pub fn count_expansions(x: f64, lambda: f64, k: usize) -> Result<u64> {
    check_lambda(lambda)?;
    check_depth(k)?;
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::invalid("x", "must lie in [0, 1]"));
    }
    count_interval(x, 0.0, k, lambda, DEFAULT_NODE_BUDGET)
}

/// Partial sum of `Σ (j_i − c_i)λ^i`.
#[derive(Clone, Copy)]
struct Partial {
    s: f64,
}

struct DWindow {
    /// `coef[i] = λ^{i+1}`.
    coef: Vec<f64>,
    center: Vec<u8>,
    /// Sum of `λ^{i+1}` over `i ≥ t` with `c_i = 1` (resp. `0`).
    neg_tail: Vec<f64>,
    pos_tail: Vec<f64>,
    rho: f64,
}

impl DWindow {
    fn new(center: &SymbolWord, rho: f64, m: usize, lambda: f64) -> Self {
        let mut coef = Vec::with_capacity(m);
        let mut p = lambda;
        for _ in 0..m {
            coef.push(p);
            p *= lambda;
        }
        let center: Vec<u8> = (0..m).map(|i| center.get(i)).collect();
        let mut neg_tail = vec![0.0; m + 1];
        let mut pos_tail = vec![0.0; m + 1];
        for i in (0..m).rev() {
            neg_tail[i] = neg_tail[i + 1] + if center[i] == 1 { coef[i] } else { 0.0 };
            pos_tail[i] = pos_tail[i + 1] + if center[i] == 0 { coef[i] } else { 0.0 };
        }
        DWindow {
            coef,
            center,
            neg_tail,
            pos_tail,
            rho,
        }
    }

    fn step(&self, t: usize, p: Partial, sym: u8) -> Option<Partial> {
        let d = sym as i32 - self.center[t] as i32;
        let s = match d {
            0 => p.s,
            1 => p.s + self.coef[t],
            _ => p.s - self.coef[t],
        };
        if t + 1 == self.coef.len() {
            return (s.abs() < self.rho).then_some(Partial { s });
        }
        let lo = s - self.neg_tail[t + 1];
        let hi = s + self.pos_tail[t + 1];
        (lo < self.rho + TAIL_SLACK && hi > -self.rho - TAIL_SLACK).then_some(Partial { s })
    }
}

fn check_d(center: &SymbolWord, rho: f64, m: usize, lambda: f64) -> Result<()> {
    check_lambda(lambda)?;
    check_depth(m)?;
    if center.len() < m {
        return Err(Error::invalid("center", format!("length {} shorter than m = {m}", center.len())));
    }
    if !(rho > 0.0) {
        return Err(Error::invalid("rho", "must be positive"));
    }
    Ok(())
}

/// `#D_m`: length-`m` words `j` with `|Σ_{i≤m} (j_i − c_i)λ^i| < ρ`.
pub fn count_d(center: &SymbolWord, rho: f64, m: usize, lambda: f64) -> Result<BranchCount> {
    check_d(center, rho, m, lambda)?;
    let count = if m == 0 {
        // the empty sum is 0 < ρ
        1
    } else {
        let w = DWindow::new(center, rho, m, lambda);
        count_leaves(Partial { s: 0.0 }, m, DEFAULT_NODE_BUDGET, &|t, p, s| w.step(t, p, s))?
    };
    Ok(BranchCount {
        k: m,
        x: pi_i(center, lambda).value,
        rho,
        count,
    })
}

/// The members of `D_m` in lexicographic order, or a budget error once more
/// than `limit` are found.
pub fn enumerate_d(center: &SymbolWord, rho: f64, m: usize, lambda: f64, limit: usize) -> Result<Vec<SymbolWord>> {
    check_d(center, rho, m, lambda)?;
    let w = DWindow::new(center, rho, m, lambda);
    let mut out = Vec::new();
    let mut path = SymbolWord::with_capacity(m);
    collect(&w, 0, Partial { s: 0.0 }, &mut path, &mut out, limit)?;
    Ok(out)
}

fn collect(w: &DWindow, t: usize, p: Partial, path: &mut SymbolWord, out: &mut Vec<SymbolWord>, limit: usize) -> Result<()> {
    if t == w.coef.len() {
        if out.len() == limit {
            return Err(Error::Budget(format!("more than {limit} ambiguous words")));
        }
        out.push(path.clone());
        return Ok(());
    }
    for sym in 0..2 {
        if let Some(c) = w.step(t, p, sym) {
            path.push(sym);
            collect(w, t + 1, c, path, out, limit)?;
            path.pop();
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    // Oracles: every word, interval computed as [π_I(w), π_I(w) + λ^k].
    fn brute_nk(x: f64, rho: f64, k: usize, lambda: f64) -> u64 {
        let r = rho * lambda.powi(k as i32);
        (0u64..1 << k)
            .filter(|bits| {
                let w = SymbolWord::from_digits(&(0..k).map(|i| (bits >> i & 1) as u8).collect::<Vec<_>>()).unwrap();
                let lo = pi_i(&w, lambda).value;
                lo <= x + r && lo + lambda.powi(k as i32) >= x - r
            })
            .count() as u64
    }

    fn brute_d(c: &[u8], rho: f64, lambda: f64) -> u64 {
        let m = c.len();
        (0u64..1 << m)
            .filter(|bits| {
                let mut s = 0.0;
                let mut p = lambda;
                for (i, ci) in c.iter().enumerate() {
                    let j = (bits >> i & 1) as f64;
                    s += (j - *ci as f64) * p;
                    p *= lambda;
                }
                s.abs() < rho
            })
            .count() as u64
    }

    #[test]
    fn nk_examples() {
        assert_eq!(count_nk(0.5, 0.1, 3, 0.7).unwrap().count, brute_nk(0.5, 0.1, 3, 0.7));
        assert_eq!(count_nk(0.5, 0.1, 3, 0.7).unwrap().count, 6);
        assert_eq!(count_nk(0.3, 1.0, 0, 0.7).unwrap().count, 1);
        let k = 10;
        let big = 2.0 / 0.6f64.powi(k as i32);
        assert_eq!(count_nk(0.4, big, k, 0.6).unwrap().count, 1 << k);
    }

    #[test]
    fn expansions_end_points() {
        for k in [1, 5, 20, 200] {
            assert_eq!(count_expansions(0.0, 0.7, k).unwrap(), 1);
            assert_eq!(count_expansions(1.0, 0.7, k).unwrap(), 1);
        }
        assert_eq!(count_expansions(0.5, 0.7, 10).unwrap(), brute_nk(0.5, 0.0, 10, 0.7));
    }

    #[test]
    fn d_examples() {
        let c = SymbolWord::repeat(&[0, 1], 12);
        let rho = 0.65f64.powi(12);
        assert_eq!(count_d(&c, rho, 12, 0.65).unwrap().count, brute_d(&c.to_digits(), rho, 0.65));
        assert_eq!(count_d(&c, 0.65 / 0.35 + 0.01, 12, 0.65).unwrap().count, 1 << 12);
        let members = enumerate_d(&c, rho, 12, 0.65, 1 << 12).unwrap();
        assert_eq!(members.len() as u64, count_d(&c, rho, 12, 0.65).unwrap().count);
        assert!(members.contains(&c.prefix(12)));
        assert!(members.windows(2).all(|p| p[0] < p[1]));
    }

    #[test]
    fn randomized_oracle_agreement() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100 {
            let lambda = rng.gen_range(0.51..0.95);
            let x = rng.gen_range(0.0..1.0);
            let rho = rng.gen_range(0.05..3.0);
            let k = rng.gen_range(0..=14);
            assert_eq!(count_nk(x, rho, k, lambda).unwrap().count, brute_nk(x, rho, k, lambda));
            let c = SymbolWord::random(k, &mut rng);
            let r = rng.gen_range(0.001..0.5);
            assert_eq!(count_d(&c, r, k, lambda).unwrap().count, brute_d(&c.to_digits(), r, lambda));
        }
    }

    #[test]
    fn budget_guard() {
        assert!(matches!(count_nk_with_budget(0.5, 1.0, 40, 0.9, 10_000), Err(Error::Budget(_))));
    }

    #[test]
    fn nk_growth_rate() {
        // log₂ N_k / k stays near 1 + log₂ λ for λ in the transversality range
        for lambda in [0.6, 0.63] {
            let n = count_nk(0.37, 1.0, 40, lambda).unwrap().count as f64;
            let rate = n.log2() / 40.0;
            assert!(rate <= 1.0 + lambda.log2() + 0.15, "λ={lambda}: rate {rate}");
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]
        #[test]
        fn counts_bounded(x in 0.0f64..1.0, rho in 0.01f64..2.0, k in 0usize..18, lambda in 0.51f64..0.9) {
            let n = count_nk(x, rho, k, lambda).unwrap().count;
            prop_assert!(n <= 1u64 << k);
            prop_assert!(count_expansions(x, lambda, k).unwrap() >= 1);
            prop_assert!(count_expansions(x, lambda, k).unwrap() <= n);
        }
    }
}
