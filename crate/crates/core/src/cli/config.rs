use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use super::args::Cli;
use crate::error::Error;

/// Flat run configuration. Every key is optional in files and flags;
/// commands fill in their defaults so the manifest records what ran.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub command: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda1: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub z: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub i: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub j: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub depth: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub depths: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub px: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nmax: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub level: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub iterations: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r_lo: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r_hi: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub degree: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub points: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pairs: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub method: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub case: Option<u8>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n1: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub growth: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub returns: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schedule: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threads: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<String>,
}

impl RunConfig {
    pub fn from_json(text: &str) -> crate::Result<Self> {
        let v: Value = serde_json::from_str(text).map_err(|e| Error::invalid("config", e.to_string()))?;
        Self::from_value(unwrap_manifest(v))
    }

    fn from_value(v: Value) -> crate::Result<Self> {
        serde_json::from_value(v).map_err(|e| Error::invalid("config", e.to_string()))
    }

    /// Seed, defaulting to 0 and recorded.
    pub fn seed(&mut self) -> u64 {
        *self.seed.get_or_insert(0)
    }
}

/// A manifest carries the resolved config under `config`.
fn unwrap_manifest(v: Value) -> Value {
    match v {
        Value::Object(mut m) if m.contains_key("config") && m.contains_key("outputs") => m.remove("config").unwrap(),
        other => other,
    }
}

/// Overlays non-null keys of `top` onto `base`.
fn overlay(base: &mut Map<String, Value>, top: Value) {
    if let Value::Object(t) = top {
        for (k, v) in t {
            if !v.is_null() {
                base.insert(k, v);
            }
        }
    }
}

/// Config file (or manifest), then flags; the command comes from the flags.
pub fn resolve(cli: &Cli) -> anyhow::Result<(String, RunConfig)> {
    let mut merged = Map::new();
    if let Some(path) = &cli.config {
        let text = std::fs::read_to_string(path).map_err(|e| Error::invalid("config", format!("{}: {e}", path.display())))?;
        let v: Value = serde_json::from_str(&text).map_err(|e| Error::invalid("config", e.to_string()))?;
        match unwrap_manifest(v) {
            Value::Object(m) => merged = m,
            _ => return Err(Error::invalid("config", "top level must be an object").into()),
        }
    }
    let (command, flags) = cli.command.flags();
    overlay(&mut merged, flags);
    overlay(&mut merged, serde_json::to_value(&cli.global)?);
    if let Some(Value::String(c)) = merged.get("command") {
        if c != command {
            return Err(Error::invalid("command", format!("config is for `{c}`, not `{command}`")).into());
        }
    }
    merged.insert("command".into(), Value::String(command.into()));
    Ok((command.to_string(), RunConfig::from_value(Value::Object(merged))?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::Parser;

    fn parse(args: &[&str]) -> Cli {
        Cli::try_parse_from(std::iter::once("putargets").chain(args.iter().copied())).unwrap()
    }

    #[test]
    fn flags_override_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.json");
        std::fs::write(&path, r#"{"lambda": 0.7, "gamma": 0.4, "seed": 5}"#).unwrap();
        let cli = parse(&["formulas", "--config", path.to_str().unwrap(), "--lambda", "0.6"]);
        let (cmd, cfg) = resolve(&cli).unwrap();
        assert_eq!(cmd, "formulas");
        assert_eq!((cfg.lambda, cfg.gamma, cfg.seed), (Some(0.6), Some(0.4), Some(5)));
    }

    #[test]
    fn manifests_are_accepted_as_configs() {
        let text = r#"{"tool": "putargets", "outputs": [], "config": {"command": "formulas", "lambda": 0.6}}"#;
        assert_eq!(RunConfig::from_json(text).unwrap().lambda, Some(0.6));
        assert!(RunConfig::from_json(r#"{"lamda": 0.6}"#).is_err());
    }

    #[test]
    fn mismatched_command_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.json");
        std::fs::write(&path, r#"{"command": "bc nk"}"#).unwrap();
        assert!(resolve(&parse(&["formulas", "--config", path.to_str().unwrap()])).is_err());
    }

    #[test]
    fn lists_parse_from_commas() {
        let (_, cfg) = resolve(&parse(&["targets", "energy", "--depths", "48,96,192", "--t", "0.9,1.1"])).unwrap();
        assert_eq!(cfg.depths, Some(vec![48, 96, 192]));
        assert_eq!(cfg.t, Some(vec![0.9, 1.1]));
    }
}
