//! Acceptance suite: one line per criterion, nonzero exit if any fails.
//!
//! Run with `cargo test --release --test acceptance`.

mod common;

use std::time::Instant;

use putargets::bernoulli::{build_histogram, count_d, count_expansions, count_nk, default_iterations, frostman_exponent};
use putargets::scales::{dim_formula, ell2, t_gamma_identity_check, DimCase, LAMBDA_BAR};
use putargets::septrans::{double_zero_scan, min_poly_value, separation_profile, transversality_measure};
use putargets::targets::{
    best_strategy, dim_f_estimate, energy_trend, sampled_probes, Cursor, EnergyMethod, MeasureCase, MeasureSpec,
    Schedule, Strategy, TargetSpec,
};
use putargets::{Params, Regime, SymbolWord};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<(bool, String), putargets::Error>;

struct Criterion {
    id: u8,
    name: &'static str,
    limit_secs: f64,
    run: fn() -> Outcome,
}

const CRITERIA: [Criterion; 10] = [
    Criterion { id: 1, name: "t(gamma) identity", limit_secs: 1.0, run: formula_identity },
    Criterion { id: 2, name: "regime continuity", limit_secs: 1.0, run: regime_continuity },
    Criterion { id: 3, name: "oracle equivalence", limit_secs: 60.0, run: oracle_equivalence },
    Criterion { id: 4, name: "golden-ratio separation", limit_secs: 1.0, run: golden_separation },
    Criterion { id: 5, name: "box dimension of F", limit_secs: 120.0, run: box_dimension },
    Criterion { id: 6, name: "cover-exponent regime map", limit_secs: 300.0, run: regime_map },
    Criterion { id: 7, name: "case-1 local dimension", limit_secs: 600.0, run: case_one_local_dimension },
    Criterion { id: 8, name: "case-3 energy bracket", limit_secs: 600.0, run: case_three_energy },
    Criterion { id: 9, name: "transversality bound", limit_secs: 300.0, run: transversality },
    Criterion { id: 10, name: "measure conservation", limit_secs: 120.0, run: conservation },
];

fn main() {
    let only: Vec<u8> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut failed = 0;
    for c in CRITERIA.iter().filter(|c| only.is_empty() || only.contains(&c.id)) {
        let t = Instant::now();
        let outcome = (c.run)();
        let secs = t.elapsed().as_secs_f64();
        let (ok, detail) = match outcome {
            Ok((ok, d)) => (ok && secs < c.limit_secs, d),
            Err(e) => (false, format!("error: {e}")),
        };
        if !ok {
            failed += 1;
        }
        let verdict = if ok { "PASS" } else { "FAIL" };
        println!("criterion {:>2} {verdict} {}: {detail} [{secs:.1}s of {}s]", c.id, c.name, c.limit_secs);
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}

fn grid(lo: f64, hi: f64, n: usize, i: usize) -> f64 {
    lo + (hi - lo) * (i as f64 + 0.5) / n as f64
}

fn formula_identity() -> Outcome {
    let mut worst = 0.0f64;
    for i in 0..100 {
        for j in 0..100 {
            let p = Params::new(grid(0.5, 1.0, 100, i), grid(0.0, 1.0, 100, j))?;
            worst = worst.max(t_gamma_identity_check(&p));
        }
    }
    Ok((worst <= 1e-11, format!("max deviation {worst:.2e} (limit 1e-11)")))
}

fn regime_continuity() -> Outcome {
    let mut worst = 0.0f64;
    for j in 0..100 {
        let gamma = grid(0.5, 1.0, 100, j);
        let p = Params::new(1.0 / (2.0 * gamma), gamma)?;
        for c in [DimCase::One, DimCase::Two, DimCase::Three] {
            worst = worst.max((dim_formula(c, &p) - 1.0).abs());
        }
    }
    Ok((worst <= 1e-12, format!("max |dim − 1| {worst:.2e} (limit 1e-12)")))
}

fn oracle_equivalence() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut mismatches = Vec::new();
    for case in 0..100 {
        let lambda = rng.gen_range(0.51..0.99);
        let k = rng.gen_range(1..=16);
        let x: f64 = rng.gen_range(0.0..1.0);
        let rho = rng.gen_range(0.1..3.0);
        if count_nk(x, rho, k, lambda)?.count != common::nk(x, rho, k, lambda) {
            mismatches.push(format!("N_k #{case}"));
        }
        if count_expansions(x, lambda, k)? != common::expansions(x, lambda, k) {
            mismatches.push(format!("expansions #{case}"));
        }
        let m = rng.gen_range(1..=16);
        let center = SymbolWord::random(m, &mut rng);
        let rho_d = rng.gen_range(1e-3..0.5);
        if count_d(&center, rho_d, m, lambda)?.count != common::d_count(&center.to_digits(), rho_d, m, lambda) {
            mismatches.push(format!("D_m #{case}"));
        }
        let n = rng.gen_range(0..=12);
        let lp = rng.gen_range(0.5..1.0);
        if min_poly_value(lp, n)?.value != common::min_poly(lp, n) {
            mismatches.push(format!("min_poly #{case}"));
        }
    }
    let detail = if mismatches.is_empty() {
        "400 instances agree".to_string()
    } else {
        format!("mismatches: {}", mismatches.join(", "))
    };
    Ok((mismatches.is_empty(), detail))
}

fn golden_separation() -> Outcome {
    let golden = (5f64.sqrt() - 1.0) / 2.0;
    let v = min_poly_value(golden, 2)?.value;
    let profile = separation_profile(golden, 2)?;
    let ok = v < 1e-13 && profile[1].exact_zero;
    Ok((ok, format!("min |P| at n=2 is {v:.2e}, exact-zero flag {}", profile[1].exact_zero)))
}

fn box_dimension() -> Outcome {
    let fit = dim_f_estimate(0.6, 8, 14)?;
    let expected = 2.0 + 0.6f64.log2();
    let err = (fit.slope - expected).abs();
    Ok((err <= 0.10, format!("slope {:.4} vs {expected:.4} (tolerance 0.10)", fit.slope)))
}

/// Strategy cells in scope and how many match the predicted winner.
fn strategy_map(z: &SymbolWord, expect: impl Fn(Params) -> Option<Strategy>) -> Result<(usize, usize), putargets::Error> {
    let mut cells = Vec::new();
    for i in 0..20 {
        for j in 0..20 {
            let p = Params::new(grid(0.5, 1.0, 20, i), grid(0.0, 1.0, 20, j))?;
            if (2.0 * p.lambda * p.gamma - 1.0).abs() < 0.05 {
                continue;
            }
            if let Some(s) = expect(p) {
                cells.push((p, s));
            }
        }
    }
    let hits = cells
        .iter()
        .map(|(p, s)| Ok(best_strategy(&TargetSpec::new(z.clone(), *p)?, 400)?.0 == *s))
        .collect::<Result<Vec<bool>, putargets::Error>>()?;
    Ok((hits.iter().filter(|h| **h).count(), hits.len()))
}

fn regime_map() -> Outcome {
    // typical centres: the transversality region only; unique centre: everywhere
    let generic = SymbolWord::random(4000, &mut ChaCha8Rng::seed_from_u64(1));
    let (gh, gn) = strategy_map(&generic, |p| match p.regime() {
        Regime::Case1 => Some(Strategy::A),
        _ if p.lambda < LAMBDA_BAR => Some(Strategy::B),
        _ => None,
    })?;
    let (uh, un) = strategy_map(&SymbolWord::zeros(4000), |p| match p.regime() {
        Regime::Case1 => Some(Strategy::A),
        _ => Some(Strategy::C),
    })?;
    let (gf, uf) = (gh as f64 / gn as f64, uh as f64 / un as f64);
    Ok((
        gf >= 0.95 && uf >= 0.95,
        format!("typical centre {gh}/{gn} ({:.1}%), unique centre {uh}/{un} ({:.1}%), need 95%", 100.0 * gf, 100.0 * uf),
    ))
}

fn case_one_local_dimension() -> Outcome {
    let p = Params::new(0.6, 0.5)?;
    // the fourth return (256) lies beyond every probed depth
    let schedule = Schedule::explicit(vec![4, 16, 64], 4, &p)?;
    let z = SymbolWord::random(schedule.coverage(&p), &mut ChaCha8Rng::seed_from_u64(7));
    let ms = MeasureSpec::new(MeasureCase::One, TargetSpec::new(z, p)?, schedule)?;
    let expected = dim_formula(DimCase::One, &p);
    let reports = sampled_probes(&ms, 10, 20, 60, 0)?;
    let (lo, hi) = reports
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), r| (a.min(r.summary), b.max(r.summary)));
    let ok = reports.iter().all(|r| (r.summary - expected).abs() <= 0.15);
    let bias: Vec<String> = reports[0].bias.iter().map(|b| format!("{b:.3}")).collect();
    Ok((
        ok,
        format!("summaries {lo:.3}..{hi:.3} vs {expected:.4} ± 0.15, schedule bias [{}]", bias.join(", ")),
    ))
}

fn case_three_energy() -> Outcome {
    let p = Params::new(0.63, 0.8)?;
    let schedule = Schedule::explicit(vec![8, 128], 16, &p)?;
    let z = SymbolWord::repeat(&[1, 0, 0, 1, 1, 0, 1], schedule.coverage(&p));
    let ms = MeasureSpec::new(MeasureCase::Three, TargetSpec::new(z, p)?, schedule)?;
    let dim = dim_formula(DimCase::Three, &p);
    let depths = [48, 96, 192];
    let mut lines = Vec::new();
    let mut ok = true;
    for seed in 0..3 {
        let below = energy_trend(&ms, dim - 0.1, 10_000, &depths, seed, EnergyMethod::Stratified)?;
        let above = energy_trend(&ms, dim + 0.1, 10_000, &depths, seed, EnergyMethod::Stratified)?;
        ok &= below.bounded && above.growing;
        lines.push(format!(
            "seed {seed}: t− growth {:.2} ({}), t+ growth {:.3e} ({})",
            below.growth,
            if below.bounded { "bounded" } else { "unbounded" },
            above.growth,
            if above.growing { "growing" } else { "not growing" },
        ));
    }
    Ok((ok, format!("dim {dim:.4}; {}", lines.join("; "))))
}

fn transversality() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut worst = 0.0f64;
    for _ in 0..200 {
        let i = SymbolWord::random(41, &mut rng);
        let mut j = SymbolWord::random(41, &mut rng);
        j.set(0, 1 - i.get(0));
        for rho in [1e-1, 1e-2, 1e-3] {
            worst = worst.max(transversality_measure(&i, &j, rho, 0.52, 0.66, 40)?.constant);
        }
    }
    let scan = double_zero_scan(0.5, 0.66, 40, 1e-4, 10_000, 0)?;
    let ok = worst <= 20.0 && scan.violations.is_empty();
    Ok((
        ok,
        format!("max measure/ρ {worst:.2} (limit 20), {} double-zero violations in 10⁴ series", scan.violations.len()),
    ))
}

/// Largest relative gap between a node's weight and the sum of its
/// children's, over every positive-weight node down to `depth`.
fn child_sum_gap(ms: &MeasureSpec, depth: usize) -> Result<(f64, usize), putargets::Error> {
    let mut stack = vec![ms.root()];
    let (mut worst, mut nodes) = (0.0f64, 0);
    while let Some(c) = stack.pop() {
        nodes += 1;
        if c.depth == depth {
            continue;
        }
        let mut kids: Vec<Cursor> = Vec::with_capacity(2);
        for s in 0..2 {
            kids.extend(ms.child(&c, s)?);
        }
        let sum: f64 = kids.iter().map(|k| k.weight).sum();
        worst = worst.max((sum - c.weight).abs() / c.weight);
        stack.extend(kids);
    }
    Ok((worst, nodes))
}

fn conservation() -> Outcome {
    let z = SymbolWord::repeat(&[1, 0, 0, 1, 1, 0, 1], 400);
    // case 3 is enumerated through its first ambiguous window
    let setups = [
        (MeasureCase::One, 0.6, 0.5, vec![6, 24], 4, 40),
        (MeasureCase::Two, 0.8, 0.9, vec![8, 24], 3, 40),
        (MeasureCase::Three, 0.63, 0.8, vec![12], 4, 12 + ell2(12, &Params::new(0.63, 0.8)?) as usize),
    ];
    let mut worst = 0.0f64;
    let mut nodes = 0;
    for (case, lambda, gamma, returns, growth, depth) in setups {
        let p = Params::new(lambda, gamma)?;
        let ms = MeasureSpec::new(case, TargetSpec::new(z.clone(), p)?, Schedule::explicit(returns, growth, &p)?)?;
        let (w, n) = child_sum_gap(&ms, depth)?;
        worst = worst.max(w);
        nodes += n;
    }
    // one rounding per child weight and one for their sum
    let conserved = worst <= 4.0 * f64::EPSILON;
    let h = build_histogram(0.63, 18, default_iterations(18))?;
    let frostman = frostman_exponent(&h)?.exponent;
    Ok((
        conserved && frostman >= 0.90,
        format!(
            "{nodes} nodes, max relative child-sum gap {worst:.1e}; Frostman exponent at level 18 {frostman:.3} (need ≥ 0.90)"
        ),
    ))
}
