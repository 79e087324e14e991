//! Machine-readable result documents and the trajectory file writer.
//!
//! Re-running a scenario with the same seed reproduces the document
//! byte-for-byte except the timestamp field. Trajectory values are printed
//! with 17 significant digits so parsed floats round-trip bit-faithfully.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};

use idqc_core::engine::Trajectory;

use crate::scenario::ComplexPair;

pub const RESULT_FILE: &str = "result.json";
pub const TRAJECTORY_FILE: &str = "trajectory.csv";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultDocument {
    pub version: String,
    pub command: String,
    pub timestamp_unix_ms: u64,
    /// True iff every check of the invoked workflow passed its threshold.
    pub passed: bool,
    pub thresholds: Thresholds,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nondemolition: Option<NondemolitionVerdict>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub controllability: Option<ControllabilityReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub validation: Option<ValidationVerdict>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub final_state: Option<Vec<ComplexPair>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub accumulated_phase: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fidelity: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schedule: Option<Vec<(usize, f64, f64)>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub evaluations: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trajectory_file: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    pub herm_tol: f64,
    pub nd_tol: f64,
    pub unit_tol: f64,
    /// Worst-case infidelity / Schmidt residual allowed by `validate`.
    pub validation_tol: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NondemolitionVerdict {
    pub residual: f64,
    pub threshold: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ControllabilityReport {
    pub controllable: bool,
    pub generated_dim: usize,
    pub required_dim: usize,
    pub borderline_admissions: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationVerdict {
    pub worst_infidelity: f64,
    pub worst_schmidt_residual: f64,
    pub passed: bool,
}

impl ResultDocument {
    pub fn new(command: &str, thresholds: Thresholds) -> Self {
        let timestamp_unix_ms = std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_millis() as u64)
            .unwrap_or(0);
        Self {
            version: env!("CARGO_PKG_VERSION").to_string(),
            command: command.to_string(),
            timestamp_unix_ms,
            passed: false,
            thresholds,
            nondemolition: None,
            controllability: None,
            validation: None,
            final_state: None,
            accumulated_phase: None,
            fidelity: None,
            schedule: None,
            evaluations: None,
            seed: None,
            trajectory_file: None,
            warnings: Vec::new(),
        }
    }

    pub fn write(&self, out_dir: &Path) -> Result<PathBuf> {
        fs::create_dir_all(out_dir)
            .with_context(|| format!("cannot create output directory {}", out_dir.display()))?;
        let path = out_dir.join(RESULT_FILE);
        let mut json = serde_json::to_string_pretty(self).context("result serialization")?;
        json.push('\n');
        fs::write(&path, json)
            .with_context(|| format!("cannot write result document {}", path.display()))?;
        Ok(path)
    }
}

/// 17 significant digits: enough for bit-faithful f64 round-trips.
fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

/// Delimiter-separated trajectory with header
/// `t,re_a0,im_a0,...[,x,y,z]`; Bloch columns present iff the system is a
/// qubit. LF line endings.
pub fn write_trajectory(out_dir: &Path, trajectory: &Trajectory, dim_s: usize) -> Result<PathBuf> {
    fs::create_dir_all(out_dir)
        .with_context(|| format!("cannot create output directory {}", out_dir.display()))?;
    let path = out_dir.join(TRAJECTORY_FILE);
    let mut header = String::from("t");
    for k in 0..dim_s {
        header.push_str(&format!(",re_a{k},im_a{k}"));
    }
    if dim_s == 2 {
        header.push_str(",x,y,z");
    }
    let mut lines = vec![header];
    for sample in &trajectory.samples {
        let mut row = fmt17(sample.time);
        for amp in sample.state.amplitudes() {
            row.push(',');
            row.push_str(&fmt17(amp.re));
            row.push(',');
            row.push_str(&fmt17(amp.im));
        }
        if let Some([x, y, z]) = sample.bloch {
            row.push_str(&format!(",{},{},{}", fmt17(x), fmt17(y), fmt17(z)));
        }
        lines.push(row);
    }
    let mut body = lines.join("\n");
    body.push('\n');
    fs::write(&path, body)
        .with_context(|| format!("cannot write trajectory file {}", path.display()))?;
    Ok(path)
}
