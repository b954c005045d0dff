//! Adaptive adjustment curve.
//!
//! For a channel intensity `s ∈ [0, 1]`, strength `α` and threshold `β`:
//!
//! ```text
//! AAC(s) = s + α · (1/β) · σ(−s + β − 0.1) · s · (β − s)
//! ```
//!
//! where `σ` is the logistic sigmoid. Intensities below `β` are lifted for
//! `α > 0` and those above are pulled down. The curve is applied
//! iteratively, each iteration carrying its own per-channel `(α, β)`, and
//! each step is clamped back into `[0, 1]`.

use std::path::Path;

use crate::error::{Error, Result};
use crate::imgcore::ImageBuf;

/// Iteration count used by [`AacParams::uniform_default`].
pub const DEFAULT_ITERATIONS: usize = 8;

/// Grid used when validating user parameters for monotonicity.
pub const VALIDATION_GRID: usize = 4096;

#[inline]
fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// Curve value before clamping. `beta` must be non-zero.
#[inline]
pub fn aac_raw(s: f64, alpha: f64, beta: f64) -> f64 {
    s + alpha / beta * sigmoid(-s + beta - 0.1) * s * (beta - s)
}

/// Analytic `d AAC / ds` of the unclamped curve.
pub fn aac_derivative(s: f64, alpha: f64, beta: f64) -> f64 {
    let g = sigmoid(-s + beta - 0.1);
    // d/ds σ(β − 0.1 − s) = −σ(1 − σ)
    1.0 + alpha / beta * (g * (beta - 2.0 * s) - g * (1.0 - g) * s * (beta - s))
}

/// One curve step, clamped to `[0, 1]`.
pub fn aac_scalar(s: f64, alpha: f64, beta: f64) -> Result<f64> {
    if beta == 0.0 || !beta.is_finite() {
        return Err(Error::param(format!("beta must be finite and non-zero, got {beta}")));
    }
    Ok(aac_raw(s, alpha, beta).clamp(0.0, 1.0))
}

/// True iff the unclamped curve is non-decreasing on a uniform `grid`-point
/// sampling of `[0, 1]`.
///
/// Monotonicity of the unclamped curve implies monotonicity of the clamped one.
pub fn aac_monotonicity_check(alpha: f64, beta: f64, grid: usize) -> bool {
    if beta == 0.0 || !beta.is_finite() {
        return false;
    }
    let n = grid.max(2);
    let mut prev = f64::NEG_INFINITY;
    for i in 0..n {
        let s = i as f64 / (n - 1) as f64;
        let v = aac_raw(s, alpha, beta);
        if v < prev {
            return false;
        }
        prev = v;
    }
    true
}

/// Per-iteration, per-channel curve parameters.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CurveStep {
    pub alpha: f64,
    pub beta: f64,
}

/// How strictly [`AacParams`] checks user values.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Validation {
    /// `α ∈ [−1, 1]`, `β ∈ (0, 1]`, and every step passes the monotonicity check.
    #[default]
    Strict,
    /// Only `β ≠ 0` and finiteness.
    Relaxed,
}

#[derive(Clone, Debug, PartialEq)]
pub struct AacParams {
    channels: usize,
    /// `steps[i][c]` is the step for iteration `i`, channel `c`.
    steps: Vec<Vec<CurveStep>>,
}

impl AacParams {
    pub fn new(steps: Vec<Vec<CurveStep>>, validation: Validation) -> Result<Self> {
        let channels = steps.first().map_or(0, Vec::len);
        if steps.is_empty() {
            return Err(Error::param("at least one curve iteration is required"));
        }
        if channels == 0 || steps.iter().any(|row| row.len() != channels) {
            return Err(Error::param(
                "every iteration needs the same, non-zero number of channels",
            ));
        }
        for (i, row) in steps.iter().enumerate() {
            for (c, st) in row.iter().enumerate() {
                check_step(*st, validation)
                    .map_err(|e| Error::param(format!("iteration {i}, channel {c}: {e}")))?;
            }
        }
        Ok(Self { channels, steps })
    }

    /// Same `(α, β)` for every iteration and channel.
    pub fn uniform(
        iterations: usize,
        channels: usize,
        alpha: f64,
        beta: f64,
        validation: Validation,
    ) -> Result<Self> {
        Self::new(
            vec![vec![CurveStep { alpha, beta }; channels]; iterations],
            validation,
        )
    }

    pub fn uniform_default(channels: usize, alpha: f64, beta: f64) -> Result<Self> {
        Self::uniform(DEFAULT_ITERATIONS, channels, alpha, beta, Validation::Strict)
    }

    pub fn iterations(&self) -> usize {
        self.steps.len()
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn step(&self, iteration: usize, channel: usize) -> CurveStep {
        self.steps[iteration][channel]
    }

    pub fn steps(&self) -> &[Vec<CurveStep>] {
        &self.steps
    }

    /// Parses `iter,channel,alpha,beta` rows (0-based indices).
    ///
    /// A non-numeric first row is taken as a header; `#` starts a comment.
    /// Every `(iter, channel)` pair up to the maxima must appear exactly once.
    pub fn from_csv(text: &str, validation: Validation) -> Result<Self> {
        let mut rows = Vec::new();
        for (ln, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            if fields.len() != 4 {
                return Err(Error::parse("<params>", ln + 1, "expected iter,channel,alpha,beta"));
            }
            if rows.is_empty() && fields[0].parse::<usize>().is_err() {
                continue;
            }
            let bad = |what: &str| Error::parse("<params>", ln + 1, format!("invalid {what}"));
            let it: usize = fields[0].parse().map_err(|_| bad("iteration"))?;
            let ch: usize = fields[1].parse().map_err(|_| bad("channel"))?;
            let alpha: f64 = fields[2].parse().map_err(|_| bad("alpha"))?;
            let beta: f64 = fields[3].parse().map_err(|_| bad("beta"))?;
            rows.push((it, ch, CurveStep { alpha, beta }));
        }
        let iterations = rows.iter().map(|r| r.0 + 1).max().unwrap_or(0);
        let channels = rows.iter().map(|r| r.1 + 1).max().unwrap_or(0);
        let mut grid: Vec<Vec<Option<CurveStep>>> = vec![vec![None; channels]; iterations];
        for (it, ch, st) in rows {
            if grid[it][ch].replace(st).is_some() {
                return Err(Error::param(format!("duplicate row for iteration {it}, channel {ch}")));
            }
        }
        let steps = grid
            .into_iter()
            .enumerate()
            .map(|(i, row)| {
                row.into_iter()
                    .enumerate()
                    .map(|(c, st)| {
                        st.ok_or_else(|| {
                            Error::param(format!("missing row for iteration {i}, channel {c}"))
                        })
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(steps, validation)
    }

    pub fn load(path: impl AsRef<Path>, validation: Validation) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_csv(&text, validation)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("iter,channel,alpha,beta\n");
        for (i, row) in self.steps.iter().enumerate() {
            for (c, st) in row.iter().enumerate() {
                out.push_str(&format!("{i},{c},{},{}\n", st.alpha, st.beta));
            }
        }
        out
    }
}

fn check_step(st: CurveStep, validation: Validation) -> Result<()> {
    if !st.alpha.is_finite() || !st.beta.is_finite() || st.beta == 0.0 {
        return Err(Error::param(format!(
            "alpha and beta must be finite with beta != 0, got ({}, {})",
            st.alpha, st.beta
        )));
    }
    if validation == Validation::Relaxed {
        return Ok(());
    }
    if !(-1.0..=1.0).contains(&st.alpha) || !(st.beta > 0.0 && st.beta <= 1.0) {
        return Err(Error::param(format!(
            "(alpha, beta) = ({}, {}) is outside alpha in [-1, 1], beta in (0, 1]",
            st.alpha, st.beta
        )));
    }
    if !aac_monotonicity_check(st.alpha, st.beta, VALIDATION_GRID) {
        return Err(Error::param(format!(
            "curve with (alpha, beta) = ({}, {}) is not monotonic on [0, 1]",
            st.alpha, st.beta
        )));
    }
    Ok(())
}

/// Applies every iteration in order to every channel of `img`.
pub fn aac_apply(img: &ImageBuf, params: &AacParams) -> Result<ImageBuf> {
    if img.channels() != params.channels {
        return Err(Error::ShapeMismatch {
            expected: format!("{} channels", params.channels),
            actual: format!("{} channels", img.channels()),
        });
    }
    let ch = params.channels;
    let mut out = img.clone();
    for row in &params.steps {
        for px in out.data_mut().chunks_exact_mut(ch) {
            for (s, st) in px.iter_mut().zip(row) {
                *s = aac_raw(*s, st.alpha, st.beta).clamp(0.0, 1.0);
            }
        }
    }
    Ok(out)
}

/// Gradient of `mean(aac_apply(img, params))` with respect to every sample.
///
/// Steps where the clamp is active contribute a zero derivative.
pub fn aac_mean_gradient(img: &ImageBuf, params: &AacParams) -> Result<ImageBuf> {
    if img.channels() != params.channels {
        return Err(Error::ShapeMismatch {
            expected: format!("{} channels", params.channels),
            actual: format!("{} channels", img.channels()),
        });
    }
    let ch = params.channels;
    let n = img.data().len() as f64;
    let mut grad = img.clone();
    for (i, g) in grad.data_mut().iter_mut().enumerate() {
        let c = i % ch;
        let mut s = img.data()[i];
        let mut d = 1.0 / n;
        for row in &params.steps {
            let st = row[c];
            let raw = aac_raw(s, st.alpha, st.beta);
            d *= if (0.0..=1.0).contains(&raw) {
                aac_derivative(s, st.alpha, st.beta)
            } else {
                0.0
            };
            s = raw.clamp(0.0, 1.0);
        }
        *g = d;
    }
    Ok(grad)
}
