use serde::Serialize;
use sha2::{Digest, Sha256};

use super::config::RunConfig;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Artifact {
    pub file: String,
    pub sha256: String,
    pub bytes: usize,
}

impl Artifact {
    pub fn new(file: &str, bytes: &[u8]) -> Self {
        let digest = Sha256::digest(bytes);
        Artifact {
            file: file.to_string(),
            sha256: digest.iter().map(|b| format!("{b:02x}")).collect(),
            bytes: bytes.len(),
        }
    }
}

/// Written beside every run's outputs; its `config` reproduces the run.
#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub config: RunConfig,
    pub outputs: Vec<Artifact>,
    pub threads: usize,
    pub seconds: f64,
    pub timings: serde_json::Value,
}

impl Manifest {
    pub fn new(command: &str, config: RunConfig, outputs: Vec<Artifact>, seconds: f64, timings: serde_json::Value) -> Self {
        Manifest {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            command: command.to_string(),
            config,
            outputs,
            threads: rayon::current_num_threads(),
            seconds,
            timings,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn digest_of_empty_input() {
        let a = Artifact::new("x", b"");
        assert_eq!(a.sha256, "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
        assert_eq!(a.bytes, 0);
    }
}
