//! Low-light scene-text tooling.
//!
//! `darkbench` turns well-lit text crops into synthetic low-light images,
//! exposes the curve- and rendering-based enhancement math used to undo
//! that degradation, and scores recognition output with the character
//! error rate.
//!
//! The crate is organised by stage:
//!
//! - [`imgcore`]: the floating-point raster, Gaussian kernels, replicate-border
//!   convolution, seeded Gaussian noise and image file IO.
//! - [`degrade`]: the six-step darkening pipeline (retinex normalisation,
//!   linear and gamma darkening, noise, vignetting, optional blur).
//! - [`enhance`]: the sigmoid-gated adaptive adjustment curve.
//! - [`render`]: real spherical harmonics, diffuse image-based lighting,
//!   transport weights and precomputed radiance transfer, each paired with
//!   a brute-force quadrature oracle.
//! - [`losses`]: Sobel edge-content loss, token cross-entropy, the weighted
//!   training objectives and finite-difference gradient checking.
//! - [`evalkit`]: edit distance, corpus CER, brightness statistics, dataset
//!   statistics and the darkness sweep.
//! - [`cli`]: the `darkbench` command line.
//!
//! Every pixel sample lives in `[0, 1]`; 8-bit files are scaled on load and
//! save. All randomness is keyed by an explicit [`RngSeed`], so every
//! operation is a pure function of its inputs.
//!
//! Runnable walkthroughs live in `crates/core/examples/`:
//!
//! ```bash
//! cargo run --release -p darkbench --example synthesize_lowlight
//! cargo run --release -p darkbench --example aac_curve
//! cargo run --release -p darkbench --example prt_lighting
//! cargo run --release -p darkbench --example edge_loss
//! cargo run --release -p darkbench --example cer_eval
//! cargo run --release -p darkbench --example darkness_sweep
//! cargo run --release -p darkbench --example dataset_table
//! ```

// `!(x > 0.0)` comparisons reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod degrade;
pub mod enhance;
mod error;
pub mod evalkit;
pub mod imgcore;
pub mod losses;
pub mod render;
pub mod synth;

pub use error::{Error, Result};
pub use imgcore::{ImageBuf, Kernel2D, RngSeed};
