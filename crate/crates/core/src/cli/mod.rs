//! The `darkbench` command line.
//!
//! Exit codes: 0 on success, 1 when a run fails or partially fails, 2 on
//! usage errors (unknown flags, malformed values, invalid parameters).
//! `DARKBENCH_SEED` supplies the master seed when neither `--seed` nor the
//! config file sets one.

mod commands;
mod darken;
pub mod reports;

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::degrade::DarkenConfig;
use crate::error::{Error, Result};
use crate::imgcore::RngSeed;

pub const SEED_ENV: &str = "DARKBENCH_SEED";

#[derive(Parser, Debug)]
#[command(name = "darkbench", version, about = "Low-light scene-text synthesis, enhancement math and CER evaluation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Darken a directory of images or the images listed in a manifest.
    Darken(DarkenArgs),
    /// Apply the adaptive adjustment curve to an image.
    Enhance(EnhanceArgs),
    /// Edge-content loss between an enhanced image and its low-light input.
    Loss(LossArgs),
    /// Token cross-entropy of a logits matrix against target indices.
    Xent(XentArgs),
    /// Character error rate of predictions against a manifest.
    Cer(CerArgs),
    /// Label statistics of a manifest and/or luma statistics of images.
    Stats(StatsArgs),
    /// Darken a manifest at several strengths and report brightness, edge loss and CER.
    Sweep(SweepArgs),
    /// Compare PRT shading with brute-force quadrature for one surface point.
    PrtDemo(PrtArgs),
}

/// Darkening configuration shared by `darken` and `sweep`.
#[derive(Args, Debug)]
struct ConfigArgs {
    /// Flat key=value config file (keys: k, gamma, noise_level, ssr_sigma,
    /// vignette_sigma_frac, blur_sigma, blur_size, blur_probability, seed).
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Override one config key; repeatable. Applied after the config file.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Master seed. Overrides the config file and DARKBENCH_SEED.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args, Debug)]
struct DarkenArgs {
    /// Input directory (png/jpg/dbf files, non-recursive) or manifest file.
    #[arg(long = "in", value_name = "PATH")]
    input: PathBuf,
    /// Output directory; receives mirrored filenames and provenance.json.
    #[arg(long = "out", value_name = "DIR")]
    output: PathBuf,
    #[command(flatten)]
    config: ConfigArgs,
}

#[derive(Args, Debug)]
struct EnhanceArgs {
    /// Enhancement method. Only `aac` is available.
    #[arg(long, default_value = "aac")]
    method: String,
    /// Curve parameters as CSV rows `iter,channel,alpha,beta` (0-based).
    #[arg(long, value_name = "FILE", conflicts_with_all = ["alpha", "beta"])]
    params: Option<PathBuf>,
    /// Uniform alpha for every iteration and channel (instead of --params).
    #[arg(long, allow_hyphen_values = true)]
    alpha: Option<f64>,
    /// Uniform beta for every iteration and channel (instead of --params).
    #[arg(long)]
    beta: Option<f64>,
    /// Iterations for --alpha/--beta.
    #[arg(long, default_value_t = 8)]
    iterations: usize,
    /// Accept any finite alpha and nonzero beta.
    #[arg(long)]
    relaxed: bool,
    #[arg(long = "in", value_name = "FILE")]
    input: PathBuf,
    #[arg(long = "out", value_name = "FILE")]
    output: PathBuf,
}

#[derive(Args, Debug)]
struct LossArgs {
    /// Low-light input image.
    #[arg(long, value_name = "FILE")]
    low: PathBuf,
    /// Enhanced image.
    #[arg(long = "out", value_name = "FILE")]
    output: PathBuf,
    /// Edge-content weight.
    #[arg(long, default_value_t = 1e5)]
    phi: f64,
    /// Print a JSON report instead of text.
    #[arg(long)]
    json: bool,
}

#[derive(Args, Debug)]
struct XentArgs {
    /// CSV logits, one row per token.
    #[arg(long, value_name = "FILE")]
    logits: PathBuf,
    /// Target token indices separated by commas or whitespace.
    #[arg(long, value_name = "FILE")]
    targets: PathBuf,
    #[arg(long)]
    json: bool,
}

#[derive(Args, Debug)]
struct CerArgs {
    /// Reference manifest, `path<TAB>label` per line.
    #[arg(long, value_name = "FILE")]
    manifest: PathBuf,
    /// Predictions, `path<TAB>text` per line.
    #[arg(long, value_name = "FILE")]
    preds: PathBuf,
    /// Count missing predictions as empty instead of failing.
    #[arg(long)]
    lenient: bool,
    /// Lowercase labels and predictions.
    #[arg(long)]
    casefold: bool,
    /// Average per-record rates instead of pooling over the corpus.
    #[arg(long)]
    per_sample_mean: bool,
    #[arg(long)]
    json: bool,
}

#[derive(Args, Debug)]
#[command(group(clap::ArgGroup::new("what").required(true).multiple(true).args(["manifest", "image"])))]
struct StatsArgs {
    /// Manifest to summarise.
    #[arg(long, value_name = "FILE")]
    manifest: Option<PathBuf>,
    /// Image(s) whose luma statistics to print; repeatable.
    #[arg(long, value_name = "FILE")]
    image: Vec<PathBuf>,
    #[arg(long)]
    json: bool,
}

#[derive(Args, Debug)]
struct SweepArgs {
    /// Manifest of lit images; paths are relative to the manifest.
    #[arg(long, value_name = "FILE")]
    manifest: PathBuf,
    /// Comma-separated darkening factors in (0, 1].
    #[arg(long, value_delimiter = ',', required = true)]
    k: Vec<f64>,
    /// Prediction file per k level, in the order given to --k; repeatable.
    #[arg(long, value_name = "FILE")]
    preds: Vec<PathBuf>,
    /// Write the JSON report here instead of stdout.
    #[arg(long = "out", value_name = "FILE")]
    output: Option<PathBuf>,
    #[command(flatten)]
    config: ConfigArgs,
}

#[derive(Args, Debug)]
struct PrtArgs {
    /// Environment map (equirectangular DBF1, PNG or JPEG). Defaults to a constant map.
    #[arg(long, value_name = "FILE")]
    env: Option<PathBuf>,
    /// Radiance of the default constant environment.
    #[arg(long, default_value_t = 1.0)]
    env_constant: f64,
    /// SH order.
    #[arg(long, default_value_t = 4)]
    order: usize,
    /// Monte-Carlo samples for the transport projection.
    #[arg(long, default_value_t = 1_000_000)]
    samples: usize,
    #[arg(long)]
    seed: Option<u64>,
    /// Surface normal `x,y,z`.
    #[arg(long, default_value = "0,0,1", allow_hyphen_values = true)]
    normal: String,
    /// Albedo: one value or one per environment channel, comma-separated.
    #[arg(long, default_value = "1")]
    albedo: String,
    /// Cone occluder `x,y,z,degrees`; repeatable.
    #[arg(long, allow_hyphen_values = true)]
    occluder: Vec<String>,
    /// Polar steps of the quadrature oracle (azimuth uses twice as many).
    #[arg(long, default_value_t = 256)]
    quad_steps: usize,
    #[arg(long)]
    json: bool,
}

/// Parses `args` (including the program name), runs the command and
/// returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let result = match cli.command {
        Command::Darken(a) => darken::run(a),
        Command::Enhance(a) => commands::enhance(a),
        Command::Loss(a) => commands::loss(a),
        Command::Xent(a) => commands::xent(a),
        Command::Cer(a) => commands::cer(a),
        Command::Stats(a) => commands::stats(a),
        Command::Sweep(a) => commands::sweep(a),
        Command::PrtDemo(a) => commands::prt_demo(a),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::InvalidParameter(_) | Error::Parse { .. } => 2,
                _ => 1,
            }
        }
    }
}

/// Seed precedence: `--seed`, then the config file, then `DARKBENCH_SEED`.
fn env_seed() -> Result<Option<u64>> {
    match std::env::var(SEED_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| Error::param(format!("{SEED_ENV} must be an unsigned integer, got {v:?}"))),
        Err(_) => Ok(None),
    }
}

fn resolve_config(args: &ConfigArgs) -> Result<DarkenConfig> {
    let mut cfg = DarkenConfig::default();
    let mut seeded = false;
    if let Some(path) = &args.config {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        cfg.merge_kv(&text, &path.display().to_string())?;
        seeded = text.lines().any(|l| {
            l.split('#')
                .next()
                .and_then(|l| l.split_once('='))
                .is_some_and(|(k, _)| k.trim() == "seed")
        });
    }
    if !seeded && args.seed.is_none() {
        if let Some(s) = env_seed()? {
            cfg.seed = RngSeed(s);
        }
    }
    for kv in &args.set {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| Error::param(format!("--set expects KEY=VALUE, got {kv:?}")))?;
        cfg.set(k, v)?;
    }
    if let Some(s) = args.seed {
        cfg.seed = RngSeed(s);
    }
    cfg.validate()?;
    Ok(cfg)
}

fn manifest_dir(path: &Path) -> PathBuf {
    path.parent().map(Path::to_path_buf).unwrap_or_default()
}

fn write_json<T: serde::Serialize>(value: &T, path: &Path) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn print_json<T: serde::Serialize>(value: &T) -> Result<()> {
    println!("{}", serde_json::to_string_pretty(value)?);
    Ok(())
}
