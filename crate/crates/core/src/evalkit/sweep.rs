use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{brightness_stats, corpus_cer, CerMode, Manifest, PredictionSet};
use crate::degrade::{darken_pipeline, DarkenConfig};
use crate::error::{Error, Result};
use crate::imgcore::{ImageBuf, RngSeed};
use crate::losses::edge_content_loss;

/// Measurements of one darkened image.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepImage {
    pub path: String,
    pub seed: RngSeed,
    pub mean_luma: f64,
    pub median_luma: f64,
    /// Edge-content loss of the darkened image against the original.
    pub edge_loss: f64,
}

/// One darkness level. Aggregates are means over the images.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepLevel {
    pub k: f64,
    /// Resolved configuration (before per-image seed derivation).
    pub config: BTreeMap<String, String>,
    pub mean_luma: f64,
    pub median_luma: f64,
    pub edge_loss: f64,
    /// Corpus CER in percent, when predictions for this level were given.
    pub cer: Option<f64>,
    pub images: Vec<SweepImage>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepReport {
    pub n_images: usize,
    /// Levels in strictly decreasing `k`.
    pub levels: Vec<SweepLevel>,
}

/// Darkens every manifest image at each `k` and measures the result.
///
/// `images[i]` is the lit image for `manifest.records()[i]`. Levels are
/// reported in decreasing `k`. Image `i` uses the seed `base.seed.derive(i)`
/// at every level. `preds`, when given, holds one prediction set per entry
/// of `k_levels` in the caller's order and is scored leniently.
pub fn darkness_sweep(
    manifest: &Manifest,
    images: &[ImageBuf],
    base: &DarkenConfig,
    k_levels: &[f64],
    preds: Option<&[PredictionSet]>,
) -> Result<SweepReport> {
    if k_levels.is_empty() {
        return Err(Error::param("k_levels must not be empty"));
    }
    if images.len() != manifest.len() {
        return Err(Error::ShapeMismatch {
            expected: format!("{} images", manifest.len()),
            actual: format!("{}", images.len()),
        });
    }
    if let Some(p) = preds {
        if p.len() != k_levels.len() {
            return Err(Error::ShapeMismatch {
                expected: format!("{} prediction sets", k_levels.len()),
                actual: format!("{}", p.len()),
            });
        }
    }
    let mut order: Vec<usize> = (0..k_levels.len()).collect();
    order.sort_by(|&a, &b| k_levels[b].total_cmp(&k_levels[a]));
    for w in order.windows(2) {
        if k_levels[w[0]] == k_levels[w[1]] {
            return Err(Error::param(format!("duplicate k level {}", k_levels[w[0]])));
        }
    }

    let mut levels = Vec::with_capacity(order.len());
    for li in order {
        let cfg = DarkenConfig {
            k: k_levels[li],
            ..base.clone()
        };
        cfg.validate()?;
        let rows: Vec<SweepImage> = manifest
            .records()
            .par_iter()
            .zip(images)
            .enumerate()
            .map(|(i, (rec, img))| {
                let item = cfg.for_item(i as u64);
                let dark = darken_pipeline(img, &item)?;
                let b = brightness_stats(&dark);
                Ok(SweepImage {
                    path: rec.path.clone(),
                    seed: item.seed,
                    mean_luma: b.mean,
                    median_luma: b.median,
                    edge_loss: edge_content_loss(&dark, img)?,
                })
            })
            .collect::<Result<_>>()?;
        let n = rows.len().max(1) as f64;
        let cer = match preds {
            Some(p) if !manifest.is_empty() => Some(corpus_cer(manifest, &p[li], CerMode::Lenient)?),
            _ => None,
        };
        levels.push(SweepLevel {
            k: cfg.k,
            config: cfg.to_map(),
            mean_luma: rows.iter().map(|r| r.mean_luma).sum::<f64>() / n,
            median_luma: rows.iter().map(|r| r.median_luma).sum::<f64>() / n,
            edge_loss: rows.iter().map(|r| r.edge_loss).sum::<f64>() / n,
            cer,
            images: rows,
        });
    }
    Ok(SweepReport {
        n_images: manifest.len(),
        levels,
    })
}
