use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::Manifest;
use crate::imgcore::ImageBuf;

/// Luma distribution summary.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BrightnessStats {
    pub mean: f64,
    pub median: f64,
    pub p5: f64,
    pub p95: f64,
}

/// Mean, median and 5th/95th percentiles of the luma plane.
///
/// Percentiles interpolate linearly between order statistics.
pub fn brightness_stats(img: &ImageBuf) -> BrightnessStats {
    let luma = img.luma();
    let mut v = luma.into_data();
    v.sort_by(f64::total_cmp);
    let pct = |q: f64| {
        let pos = q * (v.len() - 1) as f64;
        let (lo, hi) = (pos.floor() as usize, pos.ceil() as usize);
        v[lo] + (v[hi] - v[lo]) * (pos - lo as f64)
    };
    BrightnessStats {
        mean: v.iter().sum::<f64>() / v.len() as f64,
        median: pct(0.5),
        p5: pct(0.05),
        p95: pct(0.95),
    }
}

/// Label statistics of a manifest.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetStats {
    pub n_images: usize,
    /// Label length in characters → number of records.
    pub length_histogram: BTreeMap<usize, usize>,
    /// Distinct label characters in code point order.
    pub charset: String,
    pub total_chars: usize,
}

pub fn dataset_stats(manifest: &Manifest) -> DatasetStats {
    let mut length_histogram = BTreeMap::new();
    let mut chars = BTreeSet::new();
    let mut total_chars = 0;
    for r in manifest.records() {
        let n = r.label.chars().count();
        *length_histogram.entry(n).or_insert(0) += 1;
        chars.extend(r.label.chars());
        total_chars += n;
    }
    DatasetStats {
        n_images: manifest.len(),
        length_histogram,
        charset: chars.into_iter().collect(),
        total_chars,
    }
}

/// Train and test sizes of the three LSTR source datasets.
pub const LSTR_SPLITS: [(&str, usize, usize); 3] = [
    ("ICDAR2015", 4468, 2077),
    ("IIIT5K", 2000, 3000),
    ("WordArt", 4805, 1511),
];

/// The Spanish evaluation set has a test split only.
pub const ESTR_SPLIT: (&str, usize, usize) = ("ESTR", 0, 60);

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SplitRow {
    pub name: String,
    pub train: usize,
    pub test: usize,
}

/// Per-dataset split sizes with column totals.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SplitTable {
    pub rows: Vec<SplitRow>,
    pub train: usize,
    pub test: usize,
    pub total: usize,
}

/// Counts the records of each `(name, train, test)` manifest pair.
pub fn split_table<'a>(parts: impl IntoIterator<Item = (&'a str, &'a Manifest, &'a Manifest)>) -> SplitTable {
    let rows: Vec<SplitRow> = parts
        .into_iter()
        .map(|(name, train, test)| SplitRow {
            name: name.to_string(),
            train: dataset_stats(train).n_images,
            test: dataset_stats(test).n_images,
        })
        .collect();
    let train = rows.iter().map(|r| r.train).sum();
    let test = rows.iter().map(|r| r.test).sum();
    SplitTable {
        rows,
        train,
        test,
        total: train + test,
    }
}

impl std::fmt::Display for SplitTable {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "{:<12} {:>8} {:>8}", "dataset", "train", "test")?;
        for r in &self.rows {
            writeln!(f, "{:<12} {:>8} {:>8}", r.name, r.train, r.test)?;
        }
        write!(f, "{:<12} {:>8} {:>8}  (total {})", "all", self.train, self.test, self.total)
    }
}
