//! Tabulates the adaptive adjustment curve and uses it to brighten a dark crop.

use darkbench::degrade::{darken_pipeline, DarkenConfig};
use darkbench::enhance::{aac_apply, aac_monotonicity_check, aac_scalar, AacParams, Validation};
use darkbench::evalkit::brightness_stats;
use darkbench::synth::render_word;
use darkbench::RngSeed;

fn main() -> darkbench::Result<()> {
    let settings = [(0.5, 1.0), (1.0, 0.6), (-0.5, 0.6), (0.25, 0.05)];
    print!("{:>6}", "s");
    for (a, b) in settings {
        print!("  a={a:<5} b={b:<4}");
    }
    println!();
    for i in 0..=10 {
        let s = i as f64 / 10.0;
        print!("{s:>6.2}");
        for (a, b) in settings {
            print!("  {:>14.6}", aac_scalar(s, a, b)?);
        }
        println!();
    }
    for (a, b) in settings {
        println!("monotone(alpha={a}, beta={b}) = {}", aac_monotonicity_check(a, b, 4096));
    }

    // strict validation refuses the non-monotone setting
    let rejected = AacParams::uniform(8, 3, 0.25, 0.05, Validation::Strict);
    println!("strict params (0.25, 0.05): {}", if rejected.is_ok() { "accepted" } else { "rejected" });

    let lit = render_word("curve", 160, 48, RngSeed(3))?;
    let cfg = DarkenConfig {
        ssr_sigma: 10.0,
        noise_level: 0.0,
        ..DarkenConfig::default()
    };
    let dark = darken_pipeline(&lit, &cfg)?;
    println!("\n{:>10} {:>10}", "iterations", "mean luma");
    println!("{:>10} {:>10.4}", 0, brightness_stats(&dark).mean);
    for n in [2, 4, 8, 16] {
        let params = AacParams::uniform(n, 3, 1.0, 1.0, Validation::Strict)?;
        let out = aac_apply(&dark, &params)?;
        println!("{n:>10} {:>10.4}", brightness_stats(&out).mean);
    }
    Ok(())
}
