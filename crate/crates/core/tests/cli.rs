use std::path::Path;
use std::process::{Command, Output};

use putargets::targets::{attractor_rects, box_count};
use serde_json::Value;

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_putargets"))
        .args(args)
        .env("OUTPUT_DIR", dir)
        .output()
        .unwrap()
}

fn json(bytes: &[u8]) -> Value {
    serde_json::from_slice(bytes).unwrap()
}

#[test]
fn formulas_prints_case_one_value() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &["formulas", "--lambda", "0.6", "--gamma", "0.5"]);
    assert!(out.status.success());
    let v = json(&out.stdout);
    let c1 = v["case1"].as_f64().unwrap();
    assert!((c1 - 0.57568).abs() < 1e-4);
    assert_eq!(v["dim"], v["case1"]);
    assert!(String::from_utf8_lossy(&out.stdout).contains("0.5757"));
    assert!(dir.path().join("formulas.json").exists());
}

#[test]
fn rounded_golden_ratio_profile_flags_degree_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &["sep", "profile", "--lambda", "0.6180339887", "--nmax", "10"]);
    assert!(out.status.success());
    let csv = std::fs::read_to_string(dir.path().join("profile.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "n,min,log_min_per_n,exact_zero");
    assert!(lines[1].ends_with(",false"));
    assert!(lines[2].starts_with("2,") && lines[2].ends_with(",true"));
    assert!(!csv.contains('\r'));
    let manifest = json(&std::fs::read(dir.path().join("sep_profile.manifest.json")).unwrap());
    assert_eq!(manifest["timings"].as_array().unwrap().len(), 10);
}

#[test]
fn render_matches_box_count() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &["render", "--lambda", "0.6", "--depth", "14", "--px", "1024"]);
    assert!(out.status.success());
    let pgm = std::fs::read(dir.path().join("render.pgm")).unwrap();
    let header = b"P5\n1024 1024\n255\n";
    assert_eq!(&pgm[..header.len()], header);
    let on = pgm[header.len()..].iter().filter(|&&b| b == 255).count() as u64;
    let expected = box_count(&attractor_rects(0.6, 14).unwrap(), 10).unwrap();
    assert_eq!(on, expected);
}

#[test]
fn validation_errors_exit_two_with_json() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &["formulas", "--lambda", "1.5"]);
    assert_eq!(out.status.code(), Some(2));
    let e = json(&out.stderr);
    assert_eq!(e["error"]["kind"], "validation");
    assert_eq!(e["error"]["name"], "lambda");
    let out = run(dir.path(), &["render", "--px", "1000"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn budget_errors_exit_three() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &["sep", "scan", "--lambda", "0.6", "--n", "40"]);
    assert_eq!(out.status.code(), Some(3));
    assert_eq!(json(&out.stderr)["error"]["kind"], "budget");
}

#[test]
fn manifest_round_trip_reproduces_outputs() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let args = ["targets", "probe", "--lambda", "0.6", "--gamma", "0.5", "--r-hi", "14", "--points", "2", "--seed", "5"];
    assert!(run(a.path(), &args).status.success());
    let manifest = a.path().join("targets_probe.manifest.json");
    let m = json(&std::fs::read(&manifest).unwrap());
    assert_eq!(m["config"]["seed"], 5);
    assert_eq!(m["config"]["schedule"], serde_json::json!([4, 16, 64]));
    let out = run(b.path(), &["targets", "probe", "--config", manifest.to_str().unwrap()]);
    assert!(out.status.success());
    let m2 = json(&std::fs::read(b.path().join("targets_probe.manifest.json")).unwrap());
    assert_eq!(m["outputs"], m2["outputs"]);
    assert_eq!(m["config"], m2["config"]);
}

#[test]
fn seeded_runs_are_deterministic_across_thread_counts() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let args = ["targets", "energy", "--lambda", "0.63", "--gamma", "0.8", "--case", "3", "--schedule", "12,48"];
    let one = [&args[..], &["--threads", "1", "--pairs", "1000", "--depths", "16,32"]].concat();
    let four = [&args[..], &["--threads", "4", "--pairs", "1000", "--depths", "16,32"]].concat();
    assert!(run(a.path(), &one).status.success());
    assert!(run(b.path(), &four).status.success());
    let x = std::fs::read(a.path().join("energy.json")).unwrap();
    let y = std::fs::read(b.path().join("energy.json")).unwrap();
    assert_eq!(x, y);
}

#[test]
fn every_command_writes_a_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let commands: &[&[&str]] = &[
        &["dim-f", "--r-lo", "4", "--r-hi", "8"],
        &["targets", "cover", "--n", "50"],
        &["targets", "dynamical", "--n", "6"],
        &["bc", "hist", "--level", "8"],
        &["bc", "nk", "--k", "10"],
        &["bc", "expansions", "--k", "10"],
        &["sep", "scan", "--n", "6"],
        &["trans", "measure"],
        &["trans", "doublezero", "--samples", "50"],
        &["render", "--n", "4", "--px", "64"],
    ];
    for c in commands {
        let out = run(dir.path(), c);
        assert!(out.status.success(), "{c:?}: {}", String::from_utf8_lossy(&out.stderr));
        let stem = c.iter().take_while(|a| !a.starts_with("--")).copied().collect::<Vec<_>>().join("_").replace('-', "_");
        let m = json(&std::fs::read(dir.path().join(format!("{stem}.manifest.json"))).unwrap());
        for o in m["outputs"].as_array().unwrap() {
            assert!(dir.path().join(o["file"].as_str().unwrap()).exists());
        }
    }
    let hist = std::fs::read_to_string(dir.path().join("hist.csv")).unwrap();
    assert!(hist.starts_with("bin_index,mass\n"));
    assert_eq!(hist.lines().count(), 257);
}
