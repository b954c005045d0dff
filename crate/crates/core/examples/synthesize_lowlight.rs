//! Turns a synthetic word crop into a low-light image and saves every stage.
//!
//! ```bash
//! cargo run --release -p darkbench --example synthesize_lowlight [OUT_DIR]
//! ```

use std::path::PathBuf;

use darkbench::degrade::{darken_stages, DarkenConfig};
use darkbench::evalkit::brightness_stats;
use darkbench::imgcore::save_image;
use darkbench::synth::{render_word, random_word};
use darkbench::RngSeed;

fn main() -> darkbench::Result<()> {
    let out = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("darkbench-lowlight"));
    std::fs::create_dir_all(&out).expect("create output dir");

    let seed = RngSeed(7);
    let word = random_word(seed, 0);
    let lit = render_word(&word, 192, 64, seed)?;

    let cfg = DarkenConfig {
        ssr_sigma: 12.0,
        blur_probability: 1.0,
        seed,
        ..DarkenConfig::default()
    };
    println!("word {word:?}, config:\n{}", cfg.to_kv());

    let stages = darken_stages(&lit, &cfg)?;
    let mut named = vec![
        ("0_lit", &lit),
        ("1_normalized", &stages.normalized),
        ("2_linear", &stages.lin_dark),
        ("3_gamma", &stages.dark),
        ("4_noise", &stages.noisy),
        ("5_vignette", &stages.vignetted),
    ];
    if let Some(b) = &stages.blurred {
        named.push(("6_blur", b));
    }
    named.push(("7_output", &stages.output));

    println!("{:<14} {:>8} {:>8} {:>8}", "stage", "mean", "p5", "p95");
    for (name, img) in named {
        let s = brightness_stats(img);
        println!("{name:<14} {:>8.4} {:>8.4} {:>8.4}", s.mean, s.p5, s.p95);
        save_image(img, out.join(format!("{name}.png")))?;
    }
    println!("stages written to {}", out.display());
    Ok(())
}
