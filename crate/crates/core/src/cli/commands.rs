use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use super::config::RunConfig;
use crate::bernoulli::{build_histogram, count_expansions, count_nk, default_iterations, frostman_exponent};
use crate::error::{Error, Result};
use crate::scales::{dim_attractor, dim_formula, ell_n_dynamical, t_gamma_identity_check, DimCase};
use crate::septrans::{double_zero_scan, min_poly_value, separation_profile_with_resolution, transversality_measure};
use crate::symbolic::{Params, Regime, SymbolWord};
use crate::targets::{
    attractor_rects, best_strategy, box_count, covers_to_csv, dim_f_estimate, energy_trend, preimage_rects, render_pgm,
    sampled_probes, EnergyMethod, MeasureCase, MeasureSpec, Schedule, TargetSpec, DEFAULT_GROWTH,
};

/// Files to write, per-phase timings and the JSON echoed on stdout.
pub struct Out {
    pub files: Vec<(String, Vec<u8>)>,
    pub timings: Value,
    pub stdout: Option<Value>,
}

impl Out {
    fn json(name: &str, v: &impl Serialize) -> anyhow::Result<Self> {
        let v = serde_json::to_value(v)?;
        Ok(Out {
            files: vec![(name.into(), pretty(&v)?)],
            timings: Value::Null,
            stdout: Some(v),
        })
    }
}

fn pretty(v: &Value) -> anyhow::Result<Vec<u8>> {
    Ok((serde_json::to_string_pretty(v)? + "\n").into_bytes())
}

pub fn dispatch(command: &str, cfg: &mut RunConfig) -> anyhow::Result<Out> {
    match command {
        "render" => render(cfg),
        "dim-f" => dim_f(cfg),
        "targets cover" => cover(cfg),
        "targets probe" => probe(cfg),
        "targets energy" => energy(cfg),
        "targets dynamical" => dynamical(cfg),
        "bc hist" => hist(cfg),
        "bc nk" => nk(cfg),
        "bc expansions" => expansions(cfg),
        "sep scan" => sep_scan(cfg),
        "sep profile" => sep_profile(cfg),
        "trans measure" => trans_measure(cfg),
        "trans doublezero" => doublezero(cfg),
        "formulas" => formulas(cfg),
        other => Err(Error::invalid("command", format!("unknown command `{other}`")).into()),
    }
}

fn lambda(cfg: &mut RunConfig) -> f64 {
    *cfg.lambda.get_or_insert(0.6)
}

fn params(cfg: &mut RunConfig) -> Result<Params> {
    let l = lambda(cfg);
    Params::new(l, *cfg.gamma.get_or_insert(0.5))
}

/// A 0/1 digit string repeated to `len` symbols, or a seeded random word.
fn word(digits: Option<&str>, name: &'static str, len: usize, seed: u64) -> Result<SymbolWord> {
    match digits {
        Some(s) => {
            let d = s
                .chars()
                .map(|c| match c {
                    '0' => Ok(0),
                    '1' => Ok(1),
                    _ => Err(Error::invalid(name, "must be a string of 0/1 digits")),
                })
                .collect::<Result<Vec<u8>>>()?;
            if d.is_empty() {
                return Err(Error::invalid(name, "must not be empty"));
            }
            Ok(SymbolWord::repeat(&d, len))
        }
        None => Ok(SymbolWord::random(len, &mut ChaCha8Rng::seed_from_u64(seed))),
    }
}

fn centre(cfg: &mut RunConfig, p: Params, len: usize) -> Result<TargetSpec> {
    let seed = cfg.seed();
    TargetSpec::new(word(cfg.z.as_deref(), "z", len, seed)?, p)
}

/// Resolution exponent of a power-of-two raster side.
fn raster_level(px: usize) -> Result<u32> {
    if !px.is_power_of_two() {
        return Err(Error::invalid("px", "must be a power of two"));
    }
    Ok(px.trailing_zeros())
}

fn render(cfg: &mut RunConfig) -> anyhow::Result<Out> {
    let px = *cfg.px.get_or_insert(1024);
    let r = raster_level(px)?;
    let (rects, what) = match cfg.n {
        None => {
            let l = lambda(cfg);
            (attractor_rects(l, *cfg.depth.get_or_insert(14))?, "attractor")
        }
        Some(n) => {
            let p = params(cfg)?;
            let t = centre(cfg, p, 1024)?;
            (preimage_rects(&t, n)?, "preimages")
        }
    };
    let pgm = render_pgm(&rects, r)?;
    let on = box_count(&rects, r)?;
    let summary = json!({ "kind": what, "px": px, "on_pixels": on, "rects": rects.len() });
    Ok(Out {
        files: vec![("render.pgm".into(), pgm)],
        timings: Value::Null,
        stdout: Some(summary),
    })
}

fn dim_f(cfg: &mut RunConfig) -> anyhow::Result<Out> {
    let l = lambda(cfg);
    let (lo, hi) = (*cfg.r_lo.get_or_insert(6), *cfg.r_hi.get_or_insert(12));
    let fit = dim_f_estimate(l, lo, hi)?;
    Out::json("dim_f.json", &json!({ "lambda": l, "estimate": fit.slope, "expected": dim_attractor(l), "fit": fit }))
}

fn cover(cfg: &mut RunConfig) -> anyhow::Result<Out> {
    let p = params(cfg)?;
    let n = *cfg.n.get_or_insert(400);
    let t = centre(cfg, p, 4096)?;
    let (best, covers) = best_strategy(&t, n)?;
    let v = json!({
        "lambda": p.lambda,
        "gamma": p.gamma,
        "n": n,
        "regime": p.regime(),
        "best": best,
        "covers": covers,
    });
    Ok(Out {
        files: vec![("cover.csv".into(), covers_to_csv(&covers).into_bytes()), ("cover.json".into(), pretty(&v)?)],
        timings: Value::Null,
        stdout: Some(v),
    })
}

/// Case 1 below the critical line, case 2 above it, unless overridden.
fn measure(cfg: &mut RunConfig) -> anyhow::Result<MeasureSpec> {
    let p = params(cfg)?;
    let default = if p.regime() == Regime::Case23 { 2 } else { 1 };
    let case = MeasureCase::from_index(*cfg.case.get_or_insert(default))?;
    let growth = *cfg.growth.get_or_insert(DEFAULT_GROWTH);
    let schedule = match cfg.schedule.clone() {
        Some(s) => Schedule::explicit(s, growth, &p)?,
        None => {
            let n1 = *cfg.n1.get_or_insert(4);
            Schedule::geometric(n1, growth, *cfg.returns.get_or_insert(3), &p)?
        }
    };
    cfg.schedule = Some(schedule.returns.clone());
    let t = centre(cfg, p, schedule.coverage(&p).max(64))?;
    Ok(MeasureSpec::new(case, t, schedule)?)
}

fn probe(cfg: &mut RunConfig) -> anyhow::Result<Out> {
    let ms = measure(cfg)?;
    let points = *cfg.points.get_or_insert(1);
    let (lo, hi) = (*cfg.r_lo.get_or_insert(4), *cfg.r_hi.get_or_insert(24));
    let seed = cfg.seed();
    let reports = sampled_probes(&ms, points, lo, hi, seed)?;
    let expected = dim_formula(dim_case(ms.case), &ms.params());
    Out::json("probe.json", &json!({ "case": ms.case.label(), "expected": expected, "probes": reports }))
}

fn dim_case(c: MeasureCase) -> DimCase {
    match c {
        MeasureCase::One => DimCase::One,
        MeasureCase::Two => DimCase::Two,
        MeasureCase::Three => DimCase::Three,
    }
}

fn energy(cfg: &mut RunConfig) -> anyhow::Result<Out> {
    let ms = measure(cfg)?;
    let dim = dim_formula(dim_case(ms.case), &ms.params());
    let ts = cfg.t.get_or_insert_with(|| vec![dim - 0.1, dim + 0.1]).clone();
    let pairs = *cfg.pairs.get_or_insert(2000);
    let d = *cfg.depth.get_or_insert(48);
    let depths = cfg.depths.get_or_insert_with(|| vec![d, 2 * d, 4 * d]).clone();
    let method = match cfg.method.get_or_insert_with(|| "stratified".into()).as_str() {
        "stratified" => EnergyMethod::Stratified,
        "pairs" => EnergyMethod::Pairs,
        _ => return Err(Error::invalid("method", "must be `stratified` or `pairs`").into()),
    };
    let seed = cfg.seed();
    let trends = ts
        .iter()
        .map(|&t| energy_trend(&ms, t, pairs, &depths, seed, method))
        .collect::<Result<Vec<_>>>()?;
    Out::json("energy.json", &json!({ "case": ms.case.label(), "dim": dim, "trends": trends }))
}

fn dynamical(cfg: &mut RunConfig) -> anyhow::Result<Out> {
    let p = params(cfg)?;
    let n = *cfg.n.get_or_insert(10);
    let ell = ell_n_dynamical(n as u64, &p) as usize;
    let t = centre(cfg, p, ell.max(1))?;
    let seed = cfg.seed();
    let i = word(cfg.i.as_deref(), "i", n + ell, seed.wrapping_add(1))?;
    let member = crate::targets::dynamical_membership(&i, &t, n)?;
    Out::json("dynamical.json", &json!({ "n": n, "ell": ell, "member": member }))
}

fn hist(cfg: &mut RunConfig) -> anyhow::Result<Out> {
    let l = lambda(cfg);
    let level = *cfg.level.get_or_insert(16);
    let iterations = *cfg.iterations.get_or_insert(default_iterations(level));
    let h = build_histogram(l, level, iterations)?;
    let frostman = frostman_exponent(&h)?;
    let v = json!({
        "lambda": l,
        "level": level,
        "iterations": h.iterations,
        "residual": h.residual,
        "frostman": frostman,
    });
    Ok(Out {
        files: vec![("hist.csv".into(), h.to_csv().into_bytes()), ("hist.json".into(), pretty(&v)?)],
        timings: Value::Null,
        stdout: Some(v),
    })
}

fn nk(cfg: &mut RunConfig) -> anyhow::Result<Out> {
    let l = lambda(cfg);
    let (x, rho, k) = (*cfg.x.get_or_insert(0.5), *cfg.rho.get_or_insert(1.0), *cfg.k.get_or_insert(20));
    Out::json("nk.json", &count_nk(x, rho, k, l)?)
}

fn expansions(cfg: &mut RunConfig) -> anyhow::Result<Out> {
    let l = lambda(cfg);
    let (x, k) = (*cfg.x.get_or_insert(0.5), *cfg.k.get_or_insert(20));
    let count = count_expansions(x, l, k)?;
    Out::json("expansions.json", &json!({ "lambda": l, "x": x, "k": k, "count": count }))
}

fn sep_scan(cfg: &mut RunConfig) -> anyhow::Result<Out> {
    let l = lambda(cfg);
    let n = *cfg.n.get_or_insert(10);
    Out::json("sep_scan.json", &min_poly_value(l, n)?)
}

fn sep_profile(cfg: &mut RunConfig) -> anyhow::Result<Out> {
    let l = lambda(cfg);
    let nmax = *cfg.nmax.get_or_insert(10);
    let rows = separation_profile_with_resolution(l, nmax, decimal_resolution(l))?;
    let mut csv = String::from("n,min,log_min_per_n,exact_zero\n");
    for r in &rows {
        csv.push_str(&format!("{},{:e},{:e},{}\n", r.n, r.min, r.log_min_per_n, r.exact_zero));
    }
    // wall-clock times stay out of the data files so reruns are byte-identical
    let timings: Vec<Value> = rows.iter().map(|r| json!({ "n": r.n, "seconds": r.seconds })).collect();
    let stdout: Vec<Value> = rows
        .iter()
        .map(|r| json!({ "n": r.n, "min": r.min, "log_min_per_n": finite(r.log_min_per_n), "exact_zero": r.exact_zero }))
        .collect();
    Ok(Out {
        files: vec![("profile.csv".into(), csv.into_bytes())],
        timings: Value::Array(timings),
        stdout: Some(json!({ "lambda": l, "rows": stdout })),
    })
}

/// Half a unit in the last place of the shortest decimal that reads back as
/// `x`: a λ typed as `0.6180339887` stands for the interval it rounds.
fn decimal_resolution(x: f64) -> f64 {
    let s = format!("{x}");
    let decimals = s.split_once('.').map_or(0, |(_, f)| f.len());
    0.5 * 10f64.powi(-(decimals as i32))
}

/// JSON has no infinities; they become null.
fn finite(v: f64) -> Value {
    if v.is_finite() {
        json!(v)
    } else {
        Value::Null
    }
}

fn trans_measure(cfg: &mut RunConfig) -> anyhow::Result<Out> {
    let degree = *cfg.degree.get_or_insert(40);
    let seed = cfg.seed();
    let i = word(Some(cfg.i.get_or_insert_with(|| "0".into())), "i", degree + 1, seed)?;
    let j = match cfg.j.as_deref() {
        Some(s) => word(Some(s), "j", degree + 1, seed)?,
        None => {
            let mut j = word(None, "j", degree + 1, seed)?;
            j.set(0, 1 - i.get(0));
            j
        }
    };
    let rho = *cfg.rho.get_or_insert(1e-3);
    let (lo, hi) = (*cfg.lambda0.get_or_insert(0.52), *cfg.lambda1.get_or_insert(0.66));
    Out::json("trans_measure.json", &transversality_measure(&i, &j, rho, lo, hi, degree)?)
}

fn doublezero(cfg: &mut RunConfig) -> anyhow::Result<Out> {
    let (lo, hi) = (*cfg.lambda0.get_or_insert(0.52), *cfg.lambda1.get_or_insert(0.66));
    let degree = *cfg.degree.get_or_insert(40);
    let delta = *cfg.delta.get_or_insert(1e-3);
    let samples = *cfg.samples.get_or_insert(1000);
    let seed = cfg.seed();
    Out::json("doublezero.json", &double_zero_scan(lo, hi, degree, delta, samples, seed)?)
}

fn formulas(cfg: &mut RunConfig) -> anyhow::Result<Out> {
    let p = params(cfg)?;
    let [c1, c2, c3] = [DimCase::One, DimCase::Two, DimCase::Three].map(|c| dim_formula(c, &p));
    let dim = if 2.0 * p.lambda * p.gamma < 1.0 { c1 } else { c2 };
    Out::json(
        "formulas.json",
        &json!({
            "lambda": p.lambda,
            "gamma": p.gamma,
            "regime": p.regime(),
            "case1": c1,
            "case2": c2,
            "case3": c3,
            "dim": dim,
            "dim_attractor": dim_attractor(p.lambda),
            "t_gamma_deviation": t_gamma_identity_check(&p),
        }),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decimal_resolutions() {
        assert_eq!(decimal_resolution(0.6180339887), 0.5e-10);
        assert_eq!(decimal_resolution(0.5), 0.05);
        assert!(decimal_resolution((5f64.sqrt() - 1.0) / 2.0) < 1e-15);
    }

    #[test]
    fn words_repeat_or_sample() {
        assert_eq!(word(Some("01"), "z", 5, 0).unwrap().to_digits(), vec![0, 1, 0, 1, 0]);
        assert!(word(Some("012"), "z", 5, 0).is_err());
        assert_eq!(word(None, "z", 64, 3).unwrap(), word(None, "z", 64, 3).unwrap());
    }
}
