//! How dark can a crop get before its strokes wash out? Sweeps the linear
//! darkening factor over a synthetic corpus and writes the JSON report.
//!
//! ```bash
//! cargo run --release -p darkbench --example darkness_sweep [REPORT.json]
//! ```

use darkbench::degrade::DarkenConfig;
use darkbench::evalkit::{darkness_sweep, Manifest, ManifestRecord};
use darkbench::synth::synth_corpus;
use darkbench::RngSeed;

fn main() -> darkbench::Result<()> {
    let samples = synth_corpus(40, 96, 32, RngSeed(11))?;
    let manifest = Manifest::new(
        samples
            .iter()
            .enumerate()
            .map(|(i, s)| ManifestRecord {
                path: format!("synth/{i:03}.png"),
                label: s.label.clone(),
            })
            .collect(),
    )?;
    let images: Vec<_> = samples.into_iter().map(|s| s.image).collect();

    let base = DarkenConfig {
        ssr_sigma: 10.0,
        seed: RngSeed(11),
        ..DarkenConfig::default()
    };
    let levels = [1.0, 0.8, 0.6, 0.4, 0.3, 0.2, 0.1];
    let report = darkness_sweep(&manifest, &images, &base, &levels, None)?;

    println!("{:>5} {:>10} {:>10} {:>10}", "k", "mean", "median", "edge_loss");
    for l in &report.levels {
        println!("{:>5} {:>10.5} {:>10.5} {:>10.5}", l.k, l.mean_luma, l.median_luma, l.edge_loss);
    }

    let path = std::env::args()
        .nth(1)
        .unwrap_or_else(|| std::env::temp_dir().join("darkbench-sweep.json").display().to_string());
    std::fs::write(&path, serde_json::to_string_pretty(&report)?).expect("write report");
    println!("report written to {path}");
    Ok(())
}
