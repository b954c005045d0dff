//! Scores OCR predictions against a manifest.

use darkbench::evalkit::{cer_report, edit_distance, CerMode, CerOptions, Manifest, PredictionSet};

const MANIFEST: &str = "\
img/0001.png\tTEA
img/0002.png\tdark
img/0003.png\tsalida
img/0004.png\tNIGHT
";

const PREDICTIONS: &str = "\
img/0001.png\ttea
img/0002.png\tdork
img/0003.png\tsaIida
";

fn main() -> darkbench::Result<()> {
    let manifest = Manifest::parse(MANIFEST, "manifest")?;
    let preds = PredictionSet::parse(PREDICTIONS, "predictions")?;

    for r in manifest.records() {
        let p = preds.get(&r.path).unwrap_or("");
        println!("{:<14} {:<8} {:<8} edits {}", r.path, r.label, p, edit_distance(p, &r.label));
    }

    match cer_report(&manifest, &preds, &CerOptions::default()) {
        Ok(r) => println!("strict: CER {:.2}", r.cer),
        Err(e) => println!("strict: {e}"),
    }
    for (casefold, per_sample_mean) in [(false, false), (true, false), (true, true)] {
        let opts = CerOptions {
            mode: CerMode::Lenient,
            casefold,
            per_sample_mean,
        };
        let r = cer_report(&manifest, &preds, &opts)?;
        println!(
            "lenient casefold={casefold:<5} per_sample_mean={per_sample_mean:<5} CER {:>6.2}  ({} edits / {} chars, {} missing)",
            r.cer,
            r.edits,
            r.reference_chars,
            r.missing.len()
        );
    }
    Ok(())
}
