//! Machine-readable run reports: JSON (complete) and CSV (flattened rows).

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::RunConfig;

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct CheckEntry {
    pub name: String,
    /// Residual or fitted slope, depending on the check.
    pub value: f64,
    pub tolerance: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct SolutionEntry {
    /// Parameters grouped by level, complex numbers as `[re, im]`.
    pub t: Vec<Vec<[f64; 2]>>,
    pub residual: f64,
    pub iterations: usize,
    pub offdiagonal: bool,
    pub converged: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Report {
    pub command: String,
    pub config_hash: String,
    pub checks: Vec<CheckEntry>,
    pub solutions: Vec<SolutionEntry>,
    pub pass: bool,
    /// Wall time in milliseconds; the only field allowed to differ between
    /// identical runs.
    pub wall_time_ms: f64,
}

impl Report {
    pub fn new(command: &str, config: &RunConfig) -> Self {
        Report {
            command: command.to_string(),
            config_hash: config_hash(config),
            checks: Vec::new(),
            solutions: Vec::new(),
            pass: true,
            wall_time_ms: 0.0,
        }
    }

    pub fn push(&mut self, name: impl Into<String>, value: f64, tolerance: f64) {
        let pass = value <= tolerance && value.is_finite();
        self.pass &= pass;
        self.checks.push(CheckEntry { name: name.into(), value, tolerance, pass });
    }

    /// Slope entries pass when within `tolerance` of 2.
    pub fn push_slope(&mut self, name: impl Into<String>, slope: f64, tolerance: f64) {
        let pass = (slope - 2.0).abs() <= tolerance && slope.is_finite();
        self.pass &= pass;
        self.checks.push(CheckEntry { name: name.into(), value: slope, tolerance, pass });
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization cannot fail")
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("name,value,tolerance,pass\n");
        for check in &self.checks {
            out.push_str(&format!(
                "{},{:.12e},{:.3e},{}\n",
                check.name, check.value, check.tolerance, check.pass
            ));
        }
        out
    }
}

/// Stable hash of the validated configuration (canonical JSON serialization).
pub fn config_hash(config: &RunConfig) -> String {
    let canonical = serde_json::to_vec(config).expect("config serialization cannot fail");
    let digest = Sha256::digest(&canonical);
    let mut hex = String::with_capacity(16);
    for byte in digest.iter().take(8) {
        hex.push_str(&format!("{byte:02x}"));
    }
    hex
}
