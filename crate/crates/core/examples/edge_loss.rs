//! Edge-content loss between a dark crop and enhanced versions of it, with a
//! finite-difference check of its analytic gradient.

use darkbench::degrade::{darken_pipeline, DarkenConfig};
use darkbench::enhance::{aac_apply, AacParams};
use darkbench::losses::{
    edge_content_loss, edge_content_loss_grad, llie_loss, numeric_gradient_check, sobel_edges,
    total_loss, LossWeights,
};
use darkbench::synth::render_word;
use darkbench::RngSeed;

fn main() -> darkbench::Result<()> {
    let lit = render_word("edges", 120, 40, RngSeed(5))?;
    let low = darken_pipeline(
        &lit,
        &DarkenConfig {
            ssr_sigma: 8.0,
            seed: RngSeed(5),
            ..DarkenConfig::default()
        },
    )?;
    let edges = sobel_edges(&low);
    println!("low-light Sobel magnitude: max {:.4}, mean {:.5}", edges.min_max().1, edges.mean());

    let w = LossWeights::default();
    println!("{:>12} {:>12} {:>14}", "alpha", "L_EC", "L_LLIE");
    for alpha in [0.0, 0.2, 0.5, 1.0] {
        let out = aac_apply(&low, &AacParams::uniform_default(3, alpha, 1.0)?)?;
        let ec = edge_content_loss(&out, &low)?;
        let llie = llie_loss(&out, &low, &[], w.phi)?;
        println!("{alpha:>12} {ec:>12.3e} {llie:>14.4}");
    }
    println!("L_total with L_LLIE=1, L_OCR=0.02: {}", total_loss(1.0, 0.02, w.omega));

    let out = aac_apply(&low, &AacParams::uniform_default(3, 0.5, 1.0)?)?;
    let grad = edge_content_loss_grad(&out, &low)?;
    let err = numeric_gradient_check(
        |im| edge_content_loss(im, &low).unwrap(),
        &grad,
        &out,
        16,
        1e-5,
        RngSeed(9),
    )?;
    println!("gradient check, 16 probes: worst relative error {err:.2e}");
    Ok(())
}
