//! Recognition-facing evaluation.
//!
//! Manifests and prediction files share one line format, `path<TAB>text`.
//! On top of them sit character error rate scoring, luminance statistics,
//! dataset split tables and the darkness sweep, which darkens a corpus at
//! several strengths and reports brightness, edge loss and (when
//! predictions are supplied) CER per level.

mod cer;
mod stats;
mod sweep;

pub use cer::{cer_report, corpus_cer, edit_distance, CerMode, CerOptions, CerReport};
pub use stats::{
    brightness_stats, dataset_stats, split_table, BrightnessStats, DatasetStats, SplitRow,
    SplitTable, ESTR_SPLIT, LSTR_SPLITS,
};
pub use sweep::{darkness_sweep, SweepImage, SweepLevel, SweepReport};

use std::collections::{BTreeMap, HashSet};
use std::path::Path;

use crate::error::{Error, Result};

/// One manifest line.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ManifestRecord {
    pub path: String,
    pub label: String,
}

/// Ordered `(image path, label)` records with unique paths and non-blank labels.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Manifest {
    records: Vec<ManifestRecord>,
}

impl Manifest {
    pub fn new(records: Vec<ManifestRecord>) -> Result<Self> {
        let mut seen = HashSet::new();
        for r in &records {
            if r.label.trim().is_empty() {
                return Err(Error::Manifest(format!("empty label for {}", r.path)));
            }
            if !seen.insert(r.path.as_str()) {
                return Err(Error::Manifest(format!("duplicate path {}", r.path)));
            }
        }
        Ok(Self { records })
    }

    /// Parses `path<TAB>label` lines; blank lines are skipped.
    pub fn parse(text: &str, origin: &str) -> Result<Self> {
        let mut records = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim_end_matches('\r');
            if line.trim().is_empty() {
                continue;
            }
            let (path, label) = line
                .split_once('\t')
                .ok_or_else(|| Error::parse(origin, i + 1, "expected path<TAB>label"))?;
            if path.is_empty() {
                return Err(Error::parse(origin, i + 1, "empty path"));
            }
            records.push(ManifestRecord {
                path: path.to_string(),
                label: label.to_string(),
            });
        }
        Self::new(records)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, &path.display().to_string())
    }

    pub fn records(&self) -> &[ManifestRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Records of all `parts` in order; paths must stay unique.
    pub fn concat<'a>(parts: impl IntoIterator<Item = &'a Manifest>) -> Result<Self> {
        Self::new(parts.into_iter().flat_map(|m| m.records.iter().cloned()).collect())
    }

    pub fn to_text(&self) -> String {
        self.records
            .iter()
            .map(|r| format!("{}\t{}\n", r.path, r.label))
            .collect()
    }

    /// Every label as its own prediction.
    pub fn as_predictions(&self) -> PredictionSet {
        PredictionSet {
            records: self
                .records
                .iter()
                .map(|r| (r.path.clone(), r.label.clone()))
                .collect(),
        }
    }
}

/// OCR output keyed by image path. Empty predictions are allowed.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PredictionSet {
    records: BTreeMap<String, String>,
}

impl PredictionSet {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds a prediction; a path may appear once.
    pub fn insert(&mut self, path: impl Into<String>, text: impl Into<String>) -> Result<()> {
        let path = path.into();
        if self.records.contains_key(&path) {
            return Err(Error::Manifest(format!("duplicate prediction for {path}")));
        }
        self.records.insert(path, text.into());
        Ok(())
    }

    /// Parses `path<TAB>text` lines. A bare `path` is an empty prediction.
    pub fn parse(text: &str, origin: &str) -> Result<Self> {
        let mut set = Self::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim_end_matches('\r');
            if line.trim().is_empty() {
                continue;
            }
            let (path, pred) = line.split_once('\t').unwrap_or((line, ""));
            set.insert(path, pred)
                .map_err(|e| Error::parse(origin, i + 1, e.to_string()))?;
        }
        Ok(set)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, &path.display().to_string())
    }

    pub fn get(&self, path: &str) -> Option<&str> {
        self.records.get(path).map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }
}
