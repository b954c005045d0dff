use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{Manifest, PredictionSet};
use crate::error::{Error, Result};

/// Levenshtein distance over Unicode scalar values.
pub fn edit_distance(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut cur = vec![0; b.len() + 1];
    for (i, ca) in a.iter().enumerate() {
        cur[0] = i + 1;
        for (j, cb) in b.iter().enumerate() {
            let sub = prev[j] + usize::from(ca != cb);
            cur[j + 1] = sub.min(prev[j + 1] + 1).min(cur[j] + 1);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

/// How missing predictions are treated.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CerMode {
    /// A missing prediction is an error.
    #[default]
    Strict,
    /// A missing prediction counts as the empty string.
    Lenient,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct CerOptions {
    pub mode: CerMode,
    /// Lowercase both sides before comparing.
    pub casefold: bool,
    /// Average per-record rates instead of pooling edits over the corpus.
    pub per_sample_mean: bool,
}

/// Scoring summary.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CerReport {
    /// Percent.
    pub cer: f64,
    pub edits: usize,
    pub reference_chars: usize,
    pub records: usize,
    /// Manifest paths without a prediction (lenient mode only).
    pub missing: Vec<String>,
    pub mode: CerMode,
    pub casefold: bool,
    pub per_sample_mean: bool,
}

/// Corpus CER in percent: total edits over total reference characters.
pub fn corpus_cer(manifest: &Manifest, preds: &PredictionSet, mode: CerMode) -> Result<f64> {
    let opts = CerOptions {
        mode,
        ..CerOptions::default()
    };
    cer_report(manifest, preds, &opts).map(|r| r.cer)
}

pub fn cer_report(manifest: &Manifest, preds: &PredictionSet, opts: &CerOptions) -> Result<CerReport> {
    if manifest.is_empty() {
        return Err(Error::Manifest("cannot score an empty manifest".into()));
    }
    let mut missing = Vec::new();
    for r in manifest.records() {
        if preds.get(&r.path).is_none() {
            if opts.mode == CerMode::Strict {
                return Err(Error::MissingPrediction(r.path.clone()));
            }
            missing.push(r.path.clone());
        }
    }
    let fold = |s: &str| {
        if opts.casefold {
            s.to_lowercase()
        } else {
            s.to_string()
        }
    };
    let per_record: Vec<(usize, usize)> = manifest
        .records()
        .par_iter()
        .map(|r| {
            let label = fold(&r.label);
            let pred = fold(preds.get(&r.path).unwrap_or(""));
            (edit_distance(&pred, &label), label.chars().count())
        })
        .collect();
    let edits: usize = per_record.iter().map(|p| p.0).sum();
    let reference_chars: usize = per_record.iter().map(|p| p.1).sum();
    let cer = if opts.per_sample_mean {
        100.0 * per_record
            .iter()
            .map(|&(e, n)| e as f64 / n as f64)
            .sum::<f64>()
            / per_record.len() as f64
    } else {
        100.0 * edits as f64 / reference_chars as f64
    };
    Ok(CerReport {
        cer,
        edits,
        reference_chars,
        records: per_record.len(),
        missing,
        mode: opts.mode,
        casefold: opts.casefold,
        per_sample_mean: opts.per_sample_mean,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn corpus() -> Manifest {
        Manifest::parse("a\ttea\nb\tdark\n", "m").unwrap()
    }

    #[test]
    fn edit_distance_examples() {
        assert_eq!(edit_distance("tea", "tea"), 0);
        assert_eq!(edit_distance("", "abc"), 3);
        assert_eq!(edit_distance("tea", "ten"), 1);
        assert_eq!(edit_distance("kitten", "sitting"), 3);
        assert_eq!(edit_distance("año", "ano"), 1);
    }

    #[test]
    fn cer_examples() {
        let m = corpus();
        assert_eq!(corpus_cer(&m, &m.as_predictions(), CerMode::Strict).unwrap(), 0.0);
        let empty = PredictionSet::new();
        assert_eq!(corpus_cer(&m, &empty, CerMode::Lenient).unwrap(), 100.0);
        assert!(matches!(
            corpus_cer(&m, &empty, CerMode::Strict),
            Err(Error::MissingPrediction(p)) if p == "a"
        ));
        let p = PredictionSet::parse("a\tten\nb\tdark\n", "p").unwrap();
        assert!((corpus_cer(&m, &p, CerMode::Strict).unwrap() - 100.0 / 7.0).abs() < 1e-12);
        assert!(corpus_cer(&Manifest::default(), &p, CerMode::Lenient).is_err());
    }

    #[test]
    fn options() {
        let m = corpus();
        let p = PredictionSet::parse("a\tTEA\nb\tdarx\n", "p").unwrap();
        let mut opts = CerOptions::default();
        assert!((cer_report(&m, &p, &opts).unwrap().cer - 400.0 / 7.0).abs() < 1e-12);
        opts.casefold = true;
        assert!((cer_report(&m, &p, &opts).unwrap().cer - 100.0 / 7.0).abs() < 1e-12);
        opts.per_sample_mean = true;
        assert!((cer_report(&m, &p, &opts).unwrap().cer - 12.5).abs() < 1e-12);

        let partial = PredictionSet::parse("a\ttea\n", "p").unwrap();
        opts = CerOptions {
            mode: CerMode::Lenient,
            ..CerOptions::default()
        };
        let r = cer_report(&m, &partial, &opts).unwrap();
        assert_eq!(r.missing, vec!["b".to_string()]);
        assert_eq!((r.edits, r.reference_chars), (4, 7));
    }
}
