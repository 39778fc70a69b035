//! JSON experiment configuration.
//!
//! Keys mirror the long command-line flags with `-` replaced by `_`. Values
//! given on the command line win over the file; the file wins over built-in
//! defaults. Unknown keys are rejected before anything runs.

use std::path::{Path, PathBuf};

use serde::Deserialize;

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    // instance
    pub problem: Option<String>,
    pub family: Option<String>,
    pub n: Option<usize>,
    pub graph: Option<PathBuf>,
    pub k: Option<usize>,
    pub search: Option<[u64; 2]>,
    pub spectrum: Option<PathBuf>,
    pub enum_budget: Option<u64>,
    // output
    pub out: Option<PathBuf>,
    pub format: Option<String>,
    pub seed: Option<u64>,
    // dla
    pub tol: Option<f64>,
    pub traceless: Option<bool>,
    pub dense: Option<bool>,
    pub basis_out: Option<PathBuf>,
    // simulate
    pub depth: Option<usize>,
    pub grover_angles: Option<bool>,
    pub gammas: Option<Vec<f64>>,
    pub times: Option<Vec<f64>>,
    pub trace: Option<bool>,
    // variance
    pub samples: Option<usize>,
    pub gamma_range: Option<[f64; 2]>,
    pub time_scale: Option<f64>,
    pub sizes: Option<Vec<usize>>,
    pub marked: Option<u64>,
    pub marked_fraction: Option<f64>,
    // depth
    pub threshold: Option<f64>,
    pub p_max: Option<usize>,
    pub restarts: Option<usize>,
    pub target_cost: Option<f64>,
    pub max_evals: Option<usize>,
    // baseline
    pub budget: Option<u64>,
    pub trials: Option<u64>,
    // verify-claims
    pub max_n: Option<usize>,
}

impl Config {
    pub fn parse(text: &str) -> Result<Self, String> {
        serde_json::from_str(text).map_err(|e| format!("invalid config: {e}"))
    }

    pub fn load(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
        Self::parse(&text)
    }
}
