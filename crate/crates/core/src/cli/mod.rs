//! Batch front end: flag parsing, JSON configs, manifests and exit codes.
//!
//! Every run resolves a flat [`RunConfig`] (file first, then flags), fills
//! in defaults, dispatches to one command and writes its artifacts plus a
//! `<stem>.manifest.json` into the output directory. Passing a manifest back
//! through `--config` reproduces the run.

mod args;
mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::Parser;
use serde_json::json;

pub use args::Cli;
pub use config::RunConfig;
pub use output::{Artifact, Manifest};

use crate::error::Error;

/// Exit status for invalid input.
pub const EXIT_VALIDATION: u8 = 2;
/// Exit status for an exhausted work budget.
pub const EXIT_BUDGET: u8 = 3;

/// Parses `std::env::args` and runs the requested command.
pub fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let (code, body) = describe(&e);
            eprintln!("{}", serde_json::to_string(&json!({ "error": body })).unwrap());
            ExitCode::from(code)
        }
    }
}

fn describe(e: &anyhow::Error) -> (u8, serde_json::Value) {
    match e.downcast_ref::<Error>() {
        Some(err) => {
            let code = match err {
                Error::Budget(_) | Error::NotConverged { .. } => EXIT_BUDGET,
                _ => EXIT_VALIDATION,
            };
            let mut body = json!({ "kind": err.kind(), "message": err.to_string() });
            if let Error::Validation { name, .. } = err {
                body["name"] = json!(name);
            }
            (code, body)
        }
        None => (1, json!({ "kind": "io", "message": format!("{e:#}") })),
    }
}

/// Resolves the configuration and runs one command.
pub fn run(cli: Cli) -> anyhow::Result<()> {
    let (command, mut cfg) = config::resolve(&cli)?;
    if let Some(n) = cfg.threads {
        // a second initialisation in the same process keeps the first pool
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global();
    }
    let dir = output_dir(&cfg);
    let started = Instant::now();
    let out = commands::dispatch(&command, &mut cfg)?;
    let total = started.elapsed().as_secs_f64();
    std::fs::create_dir_all(&dir)?;
    let mut artifacts = Vec::new();
    for (name, bytes) in &out.files {
        std::fs::write(dir.join(name), bytes)?;
        artifacts.push(Artifact::new(name, bytes));
    }
    let manifest = Manifest::new(&command, cfg, artifacts, total, out.timings);
    let stem = command.replace(' ', "_").replace('-', "_");
    let path = dir.join(format!("{stem}.manifest.json"));
    std::fs::write(&path, serde_json::to_string_pretty(&manifest)? + "\n")?;
    match out.stdout {
        Some(v) => println!("{}", serde_json::to_string_pretty(&v)?),
        None => println!("{}", serde_json::to_string_pretty(&manifest)?),
    }
    Ok(())
}

/// `OUTPUT_DIR` wins over `output`, which defaults to `out`.
fn output_dir(cfg: &RunConfig) -> PathBuf {
    std::env::var_os("OUTPUT_DIR")
        .map(PathBuf::from)
        .or_else(|| cfg.output.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out"))
}
