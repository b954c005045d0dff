//! Training objectives as plain functions.
//!
//! - edge content: `L_EC = (1/N_p) Σ (S(out)_i − S(low)_i)²` with `S` the
//!   Sobel gradient magnitude of the luma plane
//! - enhancement: `L_LLIE = Σ sub_terms + φ · L_EC`
//! - recognition: mean token cross-entropy over decoder logits
//! - total: `L_total = L_LLIE + ω · L_OCR`
//!
//! The four sub-terms of the enhancement loss are supplied by the caller as
//! named scalars.

use std::path::Path;

use crate::error::{Error, Result};
use crate::imgcore::noise::STREAM_PROBE;
use crate::imgcore::{ImageBuf, RngSeed, LUMA_WEIGHTS};

/// Horizontal Sobel taps, row-major, applied as a correlation.
const SOBEL_X: [[f64; 3]; 3] = [[-1.0, 0.0, 1.0], [-2.0, 0.0, 2.0], [-1.0, 0.0, 1.0]];
const SOBEL_Y: [[f64; 3]; 3] = [[-1.0, -2.0, -1.0], [0.0, 0.0, 0.0], [1.0, 2.0, 1.0]];

/// Loss weights.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LossWeights {
    /// Edge-content weight.
    pub phi: f64,
    /// Recognition weight.
    pub omega: f64,
}

impl LossWeights {
    /// φ = 1e5, ω = 100.
    pub const PAPER: LossWeights = LossWeights {
        phi: 1e5,
        omega: 100.0,
    };

    pub fn new(phi: f64, omega: f64) -> Result<Self> {
        if !(phi >= 0.0) || !(omega >= 0.0) {
            return Err(Error::param(format!(
                "loss weights must be non-negative, got phi={phi}, omega={omega}"
            )));
        }
        Ok(Self { phi, omega })
    }
}

impl Default for LossWeights {
    fn default() -> Self {
        Self::PAPER
    }
}

fn gradients(luma: &ImageBuf) -> (Vec<f64>, Vec<f64>) {
    let (w, h) = (luma.width(), luma.height());
    let mut gx = vec![0.0; w * h];
    let mut gy = vec![0.0; w * h];
    for y in 0..h {
        for x in 0..w {
            let (mut sx, mut sy) = (0.0, 0.0);
            for (i, (rx, ry)) in SOBEL_X.iter().zip(&SOBEL_Y).enumerate() {
                for j in 0..3 {
                    let v = luma.get_clamped(x as isize + j as isize - 1, y as isize + i as isize - 1, 0);
                    sx += rx[j] * v;
                    sy += ry[j] * v;
                }
            }
            gx[y * w + x] = sx;
            gy[y * w + x] = sy;
        }
    }
    (gx, gy)
}

/// Sobel magnitude `√(Gx² + Gy²)` of the luma plane, replicate borders.
pub fn sobel_edges(img: &ImageBuf) -> ImageBuf {
    let luma = img.luma();
    let (gx, gy) = gradients(&luma);
    let data = gx.iter().zip(&gy).map(|(a, b)| a.hypot(*b)).collect();
    ImageBuf::new(img.width(), img.height(), 1, data).expect("shape preserved")
}

/// Mean squared difference between the Sobel maps of `out` and `low`.
pub fn edge_content_loss(out: &ImageBuf, low: &ImageBuf) -> Result<f64> {
    out.ensure_same_shape(low)?;
    let a = sobel_edges(out);
    let b = sobel_edges(low);
    let n = a.data().len() as f64;
    Ok(a.data()
        .iter()
        .zip(b.data())
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        / n)
}

/// Analytic gradient of [`edge_content_loss`] with respect to `out`.
///
/// Pixels with zero edge magnitude take the zero subgradient.
pub fn edge_content_loss_grad(out: &ImageBuf, low: &ImageBuf) -> Result<ImageBuf> {
    out.ensure_same_shape(low)?;
    let (w, h) = (out.width(), out.height());
    let luma = out.luma();
    let (gx, gy) = gradients(&luma);
    let target = sobel_edges(low);
    let n = (w * h) as f64;
    let mut dl = vec![0.0; w * h];
    for y in 0..h {
        for x in 0..w {
            let i = y * w + x;
            let s = gx[i].hypot(gy[i]);
            if s == 0.0 {
                continue;
            }
            let r = 2.0 / n * (s - target.data()[i]) / s;
            // scatter back through the clamped taps
            for ki in 0..3 {
                let sy = (y as isize + ki as isize - 1).clamp(0, h as isize - 1) as usize;
                for kj in 0..3 {
                    let sx = (x as isize + kj as isize - 1).clamp(0, w as isize - 1) as usize;
                    dl[sy * w + sx] += r * (gx[i] * SOBEL_X[ki][kj] + gy[i] * SOBEL_Y[ki][kj]);
                }
            }
        }
    }
    let ch = out.channels();
    let mut grad = out.clone();
    for (px, d) in grad.data_mut().chunks_exact_mut(ch).zip(&dl) {
        if ch == 1 {
            px[0] = *d;
        } else {
            for (g, wgt) in px.iter_mut().zip(LUMA_WEIGHTS) {
                *g = d * wgt;
            }
        }
    }
    Ok(grad)
}

/// `N_t × V` decoder logits.
#[derive(Clone, Debug, PartialEq)]
pub struct LogitsMatrix {
    vocab: usize,
    values: Vec<f64>,
}

impl LogitsMatrix {
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let vocab = rows.first().map_or(0, Vec::len);
        if rows.is_empty() {
            return Err(Error::param("logits need at least one token row"));
        }
        if vocab < 2 {
            return Err(Error::param(format!("vocabulary must have >= 2 entries, got {vocab}")));
        }
        if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != vocab) {
            return Err(Error::ShapeMismatch {
                expected: format!("{vocab} logits per row"),
                actual: format!("{} in row {i}", r.len()),
            });
        }
        let values: Vec<f64> = rows.into_iter().flatten().collect();
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain("logits must be finite".into()));
        }
        Ok(Self { vocab, values })
    }

    pub fn n_tokens(&self) -> usize {
        self.values.len() / self.vocab
    }

    pub fn vocab(&self) -> usize {
        self.vocab
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.vocab..(i + 1) * self.vocab]
    }

    /// One comma-separated row of logits per line.
    pub fn from_csv(text: &str) -> Result<Self> {
        let mut rows = Vec::new();
        for (ln, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let row = line
                .split(',')
                .map(|f| f.trim().parse::<f64>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|e| Error::parse("<logits>", ln + 1, e.to_string()))?;
            rows.push(row);
        }
        Self::from_rows(rows)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_csv(&text)
    }
}

/// Token indices separated by commas and/or whitespace.
pub fn parse_targets(text: &str) -> Result<Vec<usize>> {
    text.split(|c: char| c == ',' || c.is_whitespace())
        .filter(|t| !t.is_empty())
        .map(|t| {
            t.parse()
                .map_err(|_| Error::param(format!("invalid token index {t:?}")))
        })
        .collect()
}

/// `−(1/N_t) Σ log softmax(z_i)[y_i]`, natural log, max-subtracted.
pub fn ocr_cross_entropy(z: &LogitsMatrix, targets: &[usize]) -> Result<f64> {
    if targets.len() != z.n_tokens() {
        return Err(Error::ShapeMismatch {
            expected: format!("{} targets", z.n_tokens()),
            actual: format!("{}", targets.len()),
        });
    }
    let mut total = 0.0;
    for (i, &y) in targets.iter().enumerate() {
        if y >= z.vocab {
            return Err(Error::TokenIndex {
                row: i,
                index: y,
                vocab: z.vocab,
            });
        }
        let row = z.row(i);
        let max = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let lse = max + row.iter().map(|v| (v - max).exp()).sum::<f64>().ln();
        total += lse - row[y];
    }
    Ok(total / targets.len() as f64)
}

/// `Σ sub_terms + φ · L_EC(out, low)`.
pub fn llie_loss(
    out: &ImageBuf,
    low: &ImageBuf,
    sub_terms: &[(&str, f64)],
    phi: f64,
) -> Result<f64> {
    if !(phi >= 0.0) {
        return Err(Error::param(format!("phi must be >= 0, got {phi}")));
    }
    let base: f64 = sub_terms.iter().map(|(_, v)| v).sum();
    if phi == 0.0 {
        out.ensure_same_shape(low)?;
        return Ok(base);
    }
    Ok(base + phi * edge_content_loss(out, low)?)
}

/// `llie + ω · ocr`.
pub fn total_loss(llie: f64, ocr: f64, omega: f64) -> f64 {
    llie + omega * ocr
}

/// Worst relative disagreement between `analytic` and central differences
/// of `f` at `n_probes` distinct random samples of `img`.
///
/// The relative error at a probe is `|a − n| / max(|a|, |n|, floor)` where
/// `floor = 1e-6 · max|analytic|` keeps near-zero entries from dominating.
pub fn numeric_gradient_check<F>(
    f: F,
    analytic: &ImageBuf,
    img: &ImageBuf,
    n_probes: usize,
    step: f64,
    seed: RngSeed,
) -> Result<f64>
where
    F: Fn(&ImageBuf) -> f64,
{
    img.ensure_same_shape(analytic)?;
    if n_probes == 0 {
        return Err(Error::param("n_probes must be >= 1"));
    }
    if !(step > 0.0) {
        return Err(Error::param(format!("step must be positive, got {step}")));
    }
    let n = img.data().len();
    let probes = probe_indices(n, n_probes, seed);
    let scale = analytic.data().iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let floor = (1e-6 * scale).max(f64::MIN_POSITIVE);
    let mut worst = 0.0f64;
    let mut work = img.clone();
    for i in probes {
        let orig = work.data()[i];
        work.data_mut()[i] = orig + step;
        let up = f(&work);
        work.data_mut()[i] = orig - step;
        let down = f(&work);
        work.data_mut()[i] = orig;
        let numeric = (up - down) / (2.0 * step);
        let a = analytic.data()[i];
        let rel = (a - numeric).abs() / a.abs().max(numeric.abs()).max(floor);
        worst = worst.max(rel);
    }
    Ok(worst)
}

fn probe_indices(n: usize, k: usize, seed: RngSeed) -> Vec<usize> {
    if k >= n {
        return (0..n).collect();
    }
    let mut picked = Vec::with_capacity(k);
    let mut draw = 0u64;
    while picked.len() < k {
        let i = (seed.uniform(STREAM_PROBE, draw) * n as f64) as usize;
        draw += 1;
        if !picked.contains(&i) {
            picked.push(i);
        }
    }
    picked
}

#[cfg(test)]
mod tests {
    use super::*;

    fn step_image() -> ImageBuf {
        ImageBuf::from_fn(6, 6, 1, |x, _, _| if x < 3 { 0.0 } else { 1.0 }).unwrap()
    }

    fn smooth(w: usize, h: usize, ch: usize) -> ImageBuf {
        ImageBuf::from_fn(w, h, ch, |x, y, c| {
            0.5 + 0.3 * ((x as f64 * 0.9 + c as f64).sin() * (y as f64 * 0.7 + 0.3).cos())
        })
        .unwrap()
    }

    #[test]
    fn sobel_constant_is_zero() {
        let e = sobel_edges(&ImageBuf::filled(5, 4, 3, 0.7).unwrap());
        assert!(e.data().iter().all(|&v| v.abs() < 1e-12));
    }

    #[test]
    fn sobel_vertical_step_by_hand() {
        let e = sobel_edges(&step_image());
        for y in 1..5 {
            for x in 1..5 {
                let want = if x == 2 || x == 3 { 4.0 } else { 0.0 };
                assert_eq!(e.get(x, y, 0), want, "({x},{y})");
            }
        }
    }

    #[test]
    fn sobel_rotation_covariance() {
        let img = smooth(7, 7, 1);
        // rotate 90° counter-clockwise: (x, y) -> (y, n-1-x)
        let n = 7;
        let rot = ImageBuf::from_fn(n, n, 1, |x, y, _| img.get(n - 1 - y, x, 0)).unwrap();
        let a = sobel_edges(&img);
        let b = sobel_edges(&rot);
        for y in 0..n {
            for x in 0..n {
                assert!((b.get(x, y, 0) - a.get(n - 1 - y, x, 0)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn edge_loss_examples() {
        let img = smooth(8, 6, 3);
        assert_eq!(edge_content_loss(&img, &img).unwrap(), 0.0);
        let other = smooth(8, 6, 3).map(|s| s * s);
        let ab = edge_content_loss(&img, &other).unwrap();
        let ba = edge_content_loss(&other, &img).unwrap();
        assert_eq!(ab, ba);
        assert!(ab > 0.0);

        // constant vs step: 4 rows of two columns at 4.0 in the interior plus the
        // border rows, which replicate the interior profile: 6 rows × 2 × 16 / 36
        let flat = ImageBuf::filled(6, 6, 1, 0.3).unwrap();
        let loss = edge_content_loss(&flat, &step_image()).unwrap();
        let edges = sobel_edges(&step_image());
        let direct: f64 = edges.data().iter().map(|v| v * v).sum::<f64>() / 36.0;
        assert_eq!(loss, direct);
        assert!((direct - 6.0 * 2.0 * 16.0 / 36.0).abs() < 1e-12);

        assert!(edge_content_loss(&img, &flat).is_err());
    }

    #[test]
    fn cross_entropy_examples() {
        let z = LogitsMatrix::from_rows(vec![vec![0.3; 4]]).unwrap();
        assert!((ocr_cross_entropy(&z, &[2]).unwrap() - 4f64.ln()).abs() < 1e-12);

        let mut row = vec![0.0; 5];
        row[1] = 1000.0;
        let z = LogitsMatrix::from_rows(vec![row]).unwrap();
        assert!(ocr_cross_entropy(&z, &[1]).unwrap() <= 1e-6);

        let z = LogitsMatrix::from_rows(vec![vec![1.0, 0.0, 0.0], vec![0.0, 2.0, 0.0]]).unwrap();
        let e = std::f64::consts::E;
        let want = (((e + 2.0).ln() - 1.0) + ((e * e + 2.0).ln() - 2.0)) / 2.0;
        assert!((ocr_cross_entropy(&z, &[0, 1]).unwrap() - want).abs() < 1e-12);

        assert!(matches!(
            ocr_cross_entropy(&z, &[0, 3]),
            Err(Error::TokenIndex { row: 1, index: 3, vocab: 3 })
        ));
        assert!(ocr_cross_entropy(&z, &[0]).is_err());
    }

    #[test]
    fn logits_parsing() {
        let z = LogitsMatrix::from_csv("1, 0, 0\n# c\n0,2,0\n").unwrap();
        assert_eq!((z.n_tokens(), z.vocab()), (2, 3));
        assert!(LogitsMatrix::from_csv("1,0\n1\n").is_err());
        assert!(LogitsMatrix::from_csv("1\n").is_err());
        assert!(LogitsMatrix::from_csv("").is_err());
        assert!(LogitsMatrix::from_csv("1,x\n").is_err());
        assert_eq!(parse_targets("0, 1\n2 3").unwrap(), vec![0, 1, 2, 3]);
        assert!(parse_targets("0,-1").is_err());
    }

    #[test]
    fn weighted_objectives() {
        let img = smooth(6, 5, 1);
        assert_eq!(llie_loss(&img, &img, &[], 1e5).unwrap(), 0.0);
        let other = img.map(|s| 1.0 - s * s);
        assert_eq!(llie_loss(&img, &other, &[("LCC", 0.5)], 0.0).unwrap(), 0.5);
        assert!(llie_loss(&img, &img, &[], -1.0).is_err());

        assert_eq!(total_loss(0.0, 0.0, 100.0), 0.0);
        assert!((total_loss(1.0, 0.02, 100.0) - 3.0).abs() < 1e-12);
        assert_eq!(LossWeights::PAPER.omega, 100.0);
        assert_eq!(LossWeights::PAPER.phi, 1e5);
        assert!(LossWeights::new(-1.0, 1.0).is_err());
    }

    #[test]
    fn gradient_check_of_mean() {
        let img = smooth(8, 8, 1);
        let n = img.data().len() as f64;
        let grad = img.map(|_| 1.0 / n);
        let err = numeric_gradient_check(|im| im.mean(), &grad, &img, 16, 1e-5, RngSeed(1)).unwrap();
        assert!(err < 1e-8, "{err}");
    }

    #[test]
    fn gradient_check_of_edge_loss() {
        for ch in [1, 3] {
            let out = smooth(9, 7, ch);
            let low = out.map(|s| 0.2 * s * s);
            let grad = edge_content_loss_grad(&out, &low).unwrap();
            let err = numeric_gradient_check(
                |im| edge_content_loss(im, &low).unwrap(),
                &grad,
                &out,
                16,
                1e-5,
                RngSeed(4),
            )
            .unwrap();
            assert!(err < 1e-4, "channels {ch}: {err}");
        }
    }

    #[test]
    fn gradient_check_of_curve_composition() {
        use crate::enhance::{aac_apply, aac_mean_gradient, AacParams};
        // values in [0.3, 0.7] keep every iterate clear of the clamp
        let img = smooth(8, 8, 3).map(|s| 0.3 + 0.5 * (s - 0.2));
        let params = AacParams::uniform_default(3, 0.2, 0.8).unwrap();
        let grad = aac_mean_gradient(&img, &params).unwrap();
        let err = numeric_gradient_check(
            |im| aac_apply(im, &params).unwrap().mean(),
            &grad,
            &img,
            16,
            1e-5,
            RngSeed(5),
        )
        .unwrap();
        assert!(err < 1e-4, "{err}");
    }

    #[test]
    fn gradient_check_detects_wrong_gradients() {
        let img = smooth(6, 6, 1);
        let wrong = img.map(|_| 1.0);
        let err = numeric_gradient_check(|im| im.mean(), &wrong, &img, 4, 1e-5, RngSeed(2)).unwrap();
        assert!(err > 0.5);
    }

    #[test]
    fn probes_are_distinct() {
        let p = probe_indices(50, 20, RngSeed(3));
        let mut s = p.clone();
        s.sort();
        s.dedup();
        assert_eq!(s.len(), 20);
        assert_eq!(probe_indices(5, 9, RngSeed(3)), vec![0, 1, 2, 3, 4]);
    }
}
