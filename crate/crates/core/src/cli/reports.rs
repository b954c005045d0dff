//! JSON documents written by the command line.
//!
//! Every type rejects unknown fields on deserialisation, so the structs
//! themselves are the schema.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

pub use crate::evalkit::{BrightnessStats, CerReport, DatasetStats, SweepReport};

/// `provenance.json` written by `darken`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunProvenance {
    pub tool: String,
    pub version: String,
    /// Resolved configuration, config-file key → value.
    pub config: BTreeMap<String, String>,
    pub master_seed: u64,
    pub files: Vec<FileProvenance>,
    pub failures: Vec<FileFailure>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileProvenance {
    /// Stable position of the file in the run; keys its seed.
    pub index: u64,
    pub input: String,
    pub output: String,
    pub seed: u64,
    pub blurred: bool,
    pub input_sha256: String,
    pub output_sha256: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileFailure {
    pub index: u64,
    pub input: String,
    pub error: String,
}

/// `loss --json`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LossReport {
    pub edge_content_loss: f64,
    pub phi: f64,
    pub weighted: f64,
}

/// `xent --json`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct XentReport {
    pub cross_entropy: f64,
    pub tokens: usize,
    pub vocab: usize,
}

/// `stats --json`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StatsReport {
    pub dataset: Option<DatasetStats>,
    pub images: Vec<ImageStats>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ImageStats {
    pub path: String,
    pub width: usize,
    pub height: usize,
    pub channels: usize,
    pub brightness: BrightnessStats,
}

/// `prt-demo --json`. Per-channel vectors follow the environment channels.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PrtReport {
    pub order: usize,
    pub samples: usize,
    pub seed: u64,
    pub normal: [f64; 3],
    pub albedo: Vec<f64>,
    pub occluders: usize,
    pub quad_steps: usize,
    /// Raw coefficient dot product `Σ t·e`.
    pub prt_radiance: Vec<f64>,
    /// `(ρ/π)·prt_radiance`, comparable with the oracle.
    pub prt_shaded: Vec<f64>,
    pub oracle_radiance: Vec<f64>,
    /// Worst per-channel `|prt_shaded − oracle| / oracle`.
    pub relative_error: f64,
}
