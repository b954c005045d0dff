//! Well-lit to low-light synthesis.
//!
//! The pipeline runs six fixed stages in order:
//!
//! 1. single-scale retinex normalisation, rescaled per channel to `[0, 1]`
//! 2. linear darkening `k · I`
//! 3. gamma darkening `I^γ`
//! 4. additive white Gaussian noise with std `noise_level`, then clip
//! 5. multiplication by a peak-normalised Gaussian vignette mask
//! 6. optional Gaussian blur
//!
//! Each stage is also exposed on its own. Stage order is not configurable.

use std::collections::BTreeMap;
use std::path::Path;

use crate::error::{Error, Result};
use crate::imgcore::noise::STREAM_COIN;
use crate::imgcore::{
    clip, gaussian_blur, gaussian_kernel, convolve, sample_awgn_field, ImageBuf, RngSeed,
};

/// Offset inside both logarithms of the retinex ratio (one 8-bit step).
pub const SSR_EPSILON: f64 = 1.0 / 255.0;

// Channels whose log-ratio spans less than this are treated as constant.
const FLAT_RANGE: f64 = 1e-9;

/// Parameters of [`darken_pipeline`].
///
/// `gamma` defaults to 5. The other defaults are toolkit choices, not values
/// taken from any published dataset recipe.
#[derive(Clone, Debug, PartialEq)]
pub struct DarkenConfig {
    /// Linear darkening factor in `(0, 1]`.
    pub k: f64,
    /// Gamma exponent, `>= 1`.
    pub gamma: f64,
    /// Noise std as a fraction of full scale, in `[0, 1)`.
    pub noise_level: f64,
    /// Retinex surround Gaussian std in pixels.
    pub ssr_sigma: f64,
    /// Vignette std as a fraction of the half-diagonal. `inf` disables the mask.
    pub vignette_sigma_frac: f64,
    /// Blur std in pixels; `0` disables blurring.
    pub blur_sigma: f64,
    /// Odd blur kernel side length.
    pub blur_size: usize,
    /// Chance that an image with `blur_sigma > 0` is actually blurred.
    pub blur_probability: f64,
    pub seed: RngSeed,
}

impl Default for DarkenConfig {
    fn default() -> Self {
        Self {
            k: 0.4,
            gamma: 5.0,
            noise_level: 0.03,
            ssr_sigma: 30.0,
            vignette_sigma_frac: 0.6,
            blur_sigma: 0.8,
            blur_size: 5,
            blur_probability: 0.0,
            seed: RngSeed(0),
        }
    }
}

pub const CONFIG_KEYS: [&str; 9] = [
    "k",
    "gamma",
    "noise_level",
    "ssr_sigma",
    "vignette_sigma_frac",
    "blur_sigma",
    "blur_size",
    "blur_probability",
    "seed",
];

impl DarkenConfig {
    /// A configuration under which every stage after normalisation is an identity.
    pub fn identity() -> Self {
        Self {
            k: 1.0,
            gamma: 1.0,
            noise_level: 0.0,
            vignette_sigma_frac: f64::INFINITY,
            blur_sigma: 0.0,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let check = |ok: bool, msg: String| if ok { Ok(()) } else { Err(Error::param(msg)) };
        check(self.k > 0.0 && self.k <= 1.0, format!("k must be in (0, 1], got {}", self.k))?;
        check(self.gamma >= 1.0 && self.gamma.is_finite(), format!("gamma must be >= 1, got {}", self.gamma))?;
        check(
            (0.0..1.0).contains(&self.noise_level),
            format!("noise_level must be in [0, 1), got {}", self.noise_level),
        )?;
        check(
            self.ssr_sigma > 0.0 && self.ssr_sigma.is_finite(),
            format!("ssr_sigma must be positive, got {}", self.ssr_sigma),
        )?;
        check(
            self.vignette_sigma_frac > 0.0,
            format!("vignette_sigma_frac must be positive, got {}", self.vignette_sigma_frac),
        )?;
        check(
            self.blur_sigma >= 0.0 && self.blur_sigma.is_finite(),
            format!("blur_sigma must be >= 0, got {}", self.blur_sigma),
        )?;
        check(
            self.blur_size % 2 == 1,
            format!("blur_size must be odd, got {}", self.blur_size),
        )?;
        check(
            (0.0..=1.0).contains(&self.blur_probability),
            format!("blur_probability must be in [0, 1], got {}", self.blur_probability),
        )
    }

    /// Whether stage 6 runs for this configuration's seed.
    pub fn blur_applies(&self) -> bool {
        if self.blur_sigma <= 0.0 || self.blur_probability <= 0.0 {
            return false;
        }
        self.blur_probability >= 1.0 || self.seed.uniform(STREAM_COIN, 0) < self.blur_probability
    }

    /// Same configuration with the seed derived for item `index` of a run.
    pub fn for_item(&self, index: u64) -> Self {
        Self {
            seed: self.seed.derive(index),
            ..self.clone()
        }
    }

    /// Sets one field from its textual form.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let value = value.trim();
        let real = || -> Result<f64> {
            value
                .parse::<f64>()
                .map_err(|_| Error::param(format!("{key}: expected a number, got {value:?}")))
        };
        match key.trim() {
            "k" => self.k = real()?,
            "gamma" => self.gamma = real()?,
            "noise_level" => self.noise_level = real()?,
            "ssr_sigma" => self.ssr_sigma = real()?,
            "vignette_sigma_frac" => self.vignette_sigma_frac = real()?,
            "blur_sigma" => self.blur_sigma = real()?,
            "blur_probability" => self.blur_probability = real()?,
            "blur_size" => {
                self.blur_size = value.parse().map_err(|_| {
                    Error::param(format!("blur_size: expected an odd integer, got {value:?}"))
                })?
            }
            "seed" => {
                self.seed = RngSeed(value.parse().map_err(|_| {
                    Error::param(format!("seed: expected an unsigned integer, got {value:?}"))
                })?)
            }
            other => return Err(Error::param(format!("unknown config key {other:?}"))),
        }
        Ok(())
    }

    /// Applies `key=value` lines on top of `self`. Blank lines and `#` comments are skipped.
    pub fn merge_kv(&mut self, text: &str, origin: &str) -> Result<()> {
        for (i, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::parse(origin, i + 1, "expected key=value"))?;
            self.set(key, value)
                .map_err(|e| Error::parse(origin, i + 1, e.to_string()))?;
        }
        Ok(())
    }

    /// Parses a flat `key=value` file over the defaults and validates the result.
    pub fn from_kv(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        cfg.merge_kv(text, "<config>")?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg = Self::default();
        cfg.merge_kv(&text, &path.display().to_string())?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// All fields as strings, keyed by their config-file names.
    pub fn to_map(&self) -> BTreeMap<String, String> {
        let values = [
            self.k.to_string(),
            self.gamma.to_string(),
            self.noise_level.to_string(),
            self.ssr_sigma.to_string(),
            self.vignette_sigma_frac.to_string(),
            self.blur_sigma.to_string(),
            self.blur_size.to_string(),
            self.blur_probability.to_string(),
            self.seed.to_string(),
        ];
        CONFIG_KEYS
            .iter()
            .zip(values)
            .map(|(k, v)| (k.to_string(), v))
            .collect()
    }

    pub fn to_kv(&self) -> String {
        self.to_map()
            .into_iter()
            .map(|(k, v)| format!("{k}={v}\n"))
            .collect()
    }
}

/// Single-scale retinex, rescaled per channel to `[0, 1]`.
///
/// `r = ln(I + ε) − ln(G_σ ∗ I + ε)` with `ε = 1/255` and a replicate-border
/// Gaussian of radius `ceil(3σ)`. Channels with a flat log-ratio become 0.5.
pub fn ssr_normalize(img: &ImageBuf, ssr_sigma: f64) -> Result<ImageBuf> {
    if !(ssr_sigma > 0.0) {
        return Err(Error::param(format!("ssr_sigma must be positive, got {ssr_sigma}")));
    }
    let surround = gaussian_blur(img, ssr_sigma)?;
    let mut out = img.clone();
    for (o, s) in out.data_mut().iter_mut().zip(surround.data()) {
        *o = (*o + SSR_EPSILON).ln() - (s + SSR_EPSILON).ln();
    }
    let ch = out.channels();
    for c in 0..ch {
        let (lo, hi) = out
            .data()
            .iter()
            .skip(c)
            .step_by(ch)
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
        let range = hi - lo;
        for v in out.data_mut().iter_mut().skip(c).step_by(ch) {
            *v = if range < FLAT_RANGE { 0.5 } else { (*v - lo) / range };
        }
    }
    Ok(out)
}

pub fn linear_darken(img: &ImageBuf, k: f64) -> Result<ImageBuf> {
    if !(k > 0.0 && k <= 1.0) {
        return Err(Error::param(format!("k must be in (0, 1], got {k}")));
    }
    Ok(img.map(|s| s * k))
}

/// `s ↦ s^γ`. Negative samples are rejected; they mean a clip is missing upstream.
pub fn gamma_darken(img: &ImageBuf, gamma: f64) -> Result<ImageBuf> {
    if !(gamma >= 1.0) || !gamma.is_finite() {
        return Err(Error::param(format!("gamma must be >= 1, got {gamma}")));
    }
    if let Some(s) = img.data().iter().find(|&&s| s < 0.0) {
        return Err(Error::Domain(format!(
            "gamma darkening needs non-negative samples, found {s}"
        )));
    }
    if gamma == 1.0 {
        return Ok(img.clone());
    }
    Ok(img.map(|s| s.powf(gamma)))
}

/// `clip(I + n, 0, 1)` with `n ~ N(0, noise_level²)`.
pub fn add_noise(img: &ImageBuf, noise_level: f64, seed: RngSeed) -> Result<ImageBuf> {
    if !(0.0..1.0).contains(&noise_level) {
        return Err(Error::param(format!(
            "noise_level must be in [0, 1), got {noise_level}"
        )));
    }
    if noise_level == 0.0 {
        return clip(img, 0.0, 1.0);
    }
    let mut out = sample_awgn_field(img.width(), img.height(), img.channels(), noise_level, seed)?;
    for (o, s) in out.data_mut().iter_mut().zip(img.data()) {
        *o = (*o + s).clamp(0.0, 1.0);
    }
    Ok(out)
}

/// Peak-normalised Gaussian falloff from the image centre.
///
/// `σ = sigma_frac · h` where `h` is the distance from the centre to a corner
/// pixel centre. An infinite `sigma_frac` gives an all-ones mask.
pub fn vignette_mask(width: usize, height: usize, sigma_frac: f64) -> Result<ImageBuf> {
    if !(sigma_frac > 0.0) {
        return Err(Error::param(format!("sigma_frac must be positive, got {sigma_frac}")));
    }
    let cx = (width as f64 - 1.0) / 2.0;
    let cy = (height as f64 - 1.0) / 2.0;
    let half_diag = (cx * cx + cy * cy).sqrt();
    let sigma = sigma_frac * half_diag;
    let mut mask = ImageBuf::from_fn(width, height, 1, |x, y, _| {
        if sigma == 0.0 || sigma.is_infinite() {
            return 1.0;
        }
        let (dx, dy) = (x as f64 - cx, y as f64 - cy);
        (-(dx * dx + dy * dy) / (2.0 * sigma * sigma)).exp()
    })?;
    let peak = mask.min_max().1;
    if peak != 1.0 {
        mask.data_mut().iter_mut().for_each(|v| *v /= peak);
    }
    Ok(mask)
}

pub fn apply_vignette(img: &ImageBuf, mask: &ImageBuf) -> Result<ImageBuf> {
    if mask.channels() != 1 || mask.width() != img.width() || mask.height() != img.height() {
        return Err(Error::ShapeMismatch {
            expected: format!("{}x{}x1 mask", img.width(), img.height()),
            actual: mask.shape_string(),
        });
    }
    let ch = img.channels();
    let mut out = img.clone();
    for (px, &m) in out.data_mut().chunks_exact_mut(ch).zip(mask.data()) {
        px.iter_mut().for_each(|s| *s *= m);
    }
    Ok(out)
}

/// Every intermediate of one pipeline run.
#[derive(Clone, Debug)]
pub struct DarkenStages {
    pub normalized: ImageBuf,
    pub lin_dark: ImageBuf,
    pub dark: ImageBuf,
    pub noisy: ImageBuf,
    pub vignetted: ImageBuf,
    /// Blurred image, or `None` when stage 6 was skipped.
    pub blurred: Option<ImageBuf>,
    pub output: ImageBuf,
}

pub fn darken_stages(img: &ImageBuf, cfg: &DarkenConfig) -> Result<DarkenStages> {
    cfg.validate()?;
    let normalized = ssr_normalize(img, cfg.ssr_sigma)?;
    let lin_dark = linear_darken(&normalized, cfg.k)?;
    let dark = gamma_darken(&lin_dark, cfg.gamma)?;
    let noisy = add_noise(&dark, cfg.noise_level, cfg.seed)?;
    let mask = vignette_mask(img.width(), img.height(), cfg.vignette_sigma_frac)?;
    let vignetted = apply_vignette(&noisy, &mask)?;
    let blurred = if cfg.blur_applies() {
        let k = gaussian_kernel(cfg.blur_sigma, cfg.blur_size)?;
        Some(convolve(&vignetted, &k))
    } else {
        None
    };
    let output = clip(blurred.as_ref().unwrap_or(&vignetted), 0.0, 1.0)?;
    Ok(DarkenStages {
        normalized,
        lin_dark,
        dark,
        noisy,
        vignetted,
        blurred,
        output,
    })
}

/// Runs all six stages and returns the clipped low-light image.
pub fn darken_pipeline(img: &ImageBuf, cfg: &DarkenConfig) -> Result<ImageBuf> {
    darken_stages(img, cfg).map(|s| s.output)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn half_split(w: usize, h: usize) -> ImageBuf {
        ImageBuf::from_fn(w, h, 1, |x, _, _| if x < w / 2 { 0.0 } else { 1.0 }).unwrap()
    }

    // Straight-line retinex: direct 2D Gaussian weights from the exp formula, clamped reads.
    fn ssr_reference(img: &ImageBuf, sigma: f64) -> Vec<f64> {
        let r = (3.0 * sigma).ceil() as isize;
        let (w, h) = (img.width() as isize, img.height() as isize);
        let mut raw = Vec::new();
        for y in 0..h {
            for x in 0..w {
                let (mut num, mut den) = (0.0, 0.0);
                for dy in -r..=r {
                    for dx in -r..=r {
                        let wt = (-((dx * dx + dy * dy) as f64) / (2.0 * sigma * sigma)).exp();
                        let sx = (x + dx).clamp(0, w - 1) as usize;
                        let sy = (y + dy).clamp(0, h - 1) as usize;
                        num += wt * img.get(sx, sy, 0);
                        den += wt;
                    }
                }
                let i = img.get(x as usize, y as usize, 0);
                raw.push((i + 1.0 / 255.0).ln() - (num / den + 1.0 / 255.0).ln());
            }
        }
        let lo = raw.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = raw.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        raw.iter().map(|v| (v - lo) / (hi - lo)).collect()
    }

    #[test]
    fn ssr_matches_direct_reference() {
        let img = half_split(8, 8);
        let out = ssr_normalize(&img, 2.0).unwrap();
        let reference = ssr_reference(&img, 2.0);
        let diff = out
            .data()
            .iter()
            .zip(&reference)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        assert!(diff < 1e-6, "max diff {diff}");
    }

    #[test]
    fn ssr_constant_and_range() {
        let flat = ImageBuf::filled(10, 7, 3, 0.42).unwrap();
        let out = ssr_normalize(&flat, 3.0).unwrap();
        assert!(out.data().iter().all(|&s| s == 0.5));

        let img = ImageBuf::from_fn(12, 9, 3, |x, y, c| ((x * 7 + y * 3 + c * 5) % 13) as f64 / 12.0)
            .unwrap();
        let out = ssr_normalize(&img, 2.5).unwrap();
        for c in 0..3 {
            let (lo, hi) = out.channel(c).min_max();
            assert_eq!(lo, 0.0);
            assert!((hi - 1.0).abs() < 1e-15);
        }
        assert!(ssr_normalize(&img, 0.0).is_err());
    }

    #[test]
    fn linear_examples() {
        let img = ImageBuf::new(3, 1, 1, vec![0.8, 0.1, 0.5]).unwrap();
        assert_eq!(linear_darken(&img, 1.0).unwrap(), img);
        assert!((linear_darken(&img, 0.3).unwrap().data()[0] - 0.24).abs() < 1e-15);
        let out = linear_darken(&img, 0.3).unwrap();
        assert!((out.mean() - 0.3 * img.mean()).abs() < 1e-15);
        assert!(linear_darken(&img, 0.0).is_err());
        assert!(linear_darken(&img, 1.2).is_err());
    }

    #[test]
    fn gamma_examples() {
        let img = ImageBuf::new(3, 1, 1, vec![0.5, 0.0, 1.0]).unwrap();
        assert_eq!(gamma_darken(&img, 1.0).unwrap(), img);
        let out = gamma_darken(&img, 5.0).unwrap();
        assert_eq!(out.data(), &[0.03125, 0.0, 1.0]);
        let neg = ImageBuf::new(1, 1, 1, vec![-0.1]).unwrap();
        assert!(matches!(gamma_darken(&neg, 2.0), Err(Error::Domain(_))));
        assert!(gamma_darken(&img, 0.5).is_err());
    }

    #[test]
    fn noise_examples() {
        let img = ImageBuf::filled(512, 512, 1, 0.5).unwrap();
        assert_eq!(add_noise(&img, 0.0, RngSeed(1)).unwrap(), img);

        let out = add_noise(&img, 0.05, RngSeed(11)).unwrap();
        let n = out.data().len() as f64;
        let mean = out.data().iter().map(|s| s - 0.5).sum::<f64>() / n;
        let std = (out.data().iter().map(|s| (s - 0.5 - mean).powi(2)).sum::<f64>() / n).sqrt();
        assert!((0.049..=0.051).contains(&std), "std {std}");

        let black = ImageBuf::filled(64, 64, 1, 0.0).unwrap();
        let out = add_noise(&black, 0.05, RngSeed(2)).unwrap();
        assert!(out.data().iter().all(|&s| s >= 0.0));
        assert!(out.mean() > 0.0);
        assert!(add_noise(&img, 1.0, RngSeed(0)).is_err());
    }

    #[test]
    fn vignette_examples() {
        let m = vignette_mask(101, 101, 0.5).unwrap();
        assert_eq!(m.get(50, 50, 0), 1.0);
        for y in 0..101 {
            for x in 0..101 {
                assert_eq!(m.get(x, y, 0), m.get(100 - x, y, 0));
                assert_eq!(m.get(x, y, 0), m.get(x, 100 - y, 0));
            }
        }
        // independent closed form at the corner: d = 50√2, σ = 0.5 · 50√2
        let d2: f64 = 50.0 * 50.0 * 2.0;
        let sigma = 0.5 * d2.sqrt();
        let expected = (-d2 / (2.0 * sigma * sigma)).exp();
        assert!((m.get(0, 0, 0) - expected).abs() < 1e-9);

        let even = vignette_mask(10, 6, 0.4).unwrap();
        assert!((even.min_max().1 - 1.0).abs() < 1e-15);
        let off = vignette_mask(9, 4, f64::INFINITY).unwrap();
        assert!(off.data().iter().all(|&v| v == 1.0));
        assert!(vignette_mask(4, 4, 0.0).is_err());
    }

    #[test]
    fn vignette_application() {
        let img = ImageBuf::from_fn(6, 5, 3, |x, y, c| ((x + y + c) % 4) as f64 / 3.0).unwrap();
        let ones = ImageBuf::filled(6, 5, 1, 1.0).unwrap();
        assert_eq!(apply_vignette(&img, &ones).unwrap(), img);

        let mask = vignette_mask(6, 5, 0.5).unwrap();
        let white = ImageBuf::filled(6, 5, 3, 1.0).unwrap();
        let out = apply_vignette(&white, &mask).unwrap();
        for y in 0..5 {
            for x in 0..6 {
                for c in 0..3 {
                    assert_eq!(out.get(x, y, c), mask.get(x, y, 0));
                }
            }
        }
        let out = apply_vignette(&img, &mask).unwrap();
        assert!(out.data().iter().zip(img.data()).all(|(o, i)| o <= i));
        let wrong = ImageBuf::filled(5, 5, 1, 1.0).unwrap();
        assert!(apply_vignette(&img, &wrong).is_err());
    }

    #[test]
    fn identity_config_only_normalises() {
        let img = half_split(16, 12);
        let out = darken_pipeline(&img, &DarkenConfig::identity()).unwrap();
        assert_eq!(out, ssr_normalize(&img, DarkenConfig::default().ssr_sigma).unwrap());
    }

    #[test]
    fn pipeline_is_deterministic() {
        let img = ImageBuf::from_fn(20, 14, 3, |x, y, c| ((x * 5 + y * 3 + c) % 9) as f64 / 8.0)
            .unwrap();
        let cfg = DarkenConfig {
            blur_probability: 1.0,
            seed: RngSeed(99),
            ..DarkenConfig::default()
        };
        let a = darken_pipeline(&img, &cfg).unwrap();
        let b = darken_pipeline(&img, &cfg).unwrap();
        assert_eq!(a, b);
        assert!(a.data().iter().all(|s| (0.0..=1.0).contains(s)));
    }

    #[test]
    fn blur_gate() {
        let mut cfg = DarkenConfig::default();
        assert!(!cfg.blur_applies());
        cfg.blur_probability = 1.0;
        assert!(cfg.blur_applies());
        cfg.blur_sigma = 0.0;
        assert!(!cfg.blur_applies());

        cfg.blur_sigma = 1.0;
        cfg.blur_probability = 0.5;
        let hits = (0..2000).filter(|&i| cfg.for_item(i).blur_applies()).count();
        assert!((850..1150).contains(&hits), "hits {hits}");
    }

    #[test]
    fn config_parsing() {
        let cfg = DarkenConfig::from_kv("# comment\nk = 0.3\ngamma=2\n\nvignette_sigma_frac=inf\nseed=17\n").unwrap();
        assert_eq!(cfg.k, 0.3);
        assert_eq!(cfg.gamma, 2.0);
        assert!(cfg.vignette_sigma_frac.is_infinite());
        assert_eq!(cfg.seed, RngSeed(17));
        assert_eq!(cfg.noise_level, DarkenConfig::default().noise_level);

        let back = DarkenConfig::from_kv(&cfg.to_kv()).unwrap();
        assert_eq!(back, cfg);

        assert!(DarkenConfig::from_kv("kk=0.3").is_err());
        assert!(DarkenConfig::from_kv("k").is_err());
        assert!(DarkenConfig::from_kv("k=1.5").is_err());
        assert!(DarkenConfig::from_kv("blur_size=4").is_err());
        assert!(DarkenConfig::from_kv("gamma=0.5").is_err());
        assert_eq!(DarkenConfig::default().gamma, 5.0);
    }
}
