use rayon::prelude::*;

use super::ImageBuf;
use crate::error::{Error, Result};

/// Square convolution kernel with an odd side length.
///
/// Gaussian kernels also keep their 1D factor so [`convolve`] can run two
/// separable passes instead of a full 2D sweep; both paths give the same
/// result up to rounding.
#[derive(Clone, Debug, PartialEq)]
pub struct Kernel2D {
    size: usize,
    weights: Vec<f64>,
    factor: Option<Vec<f64>>,
}

impl Kernel2D {
    /// Row-major `size × size` weights.
    pub fn new(size: usize, weights: Vec<f64>) -> Result<Self> {
        if size == 0 || size.is_multiple_of(2) {
            return Err(Error::param(format!("kernel size must be odd, got {size}")));
        }
        if weights.len() != size * size {
            return Err(Error::ShapeMismatch {
                expected: format!("{} weights", size * size),
                actual: format!("{} weights", weights.len()),
            });
        }
        Ok(Self {
            size,
            weights,
            factor: None,
        })
    }

    /// Outer product `v vᵀ` of a 1D kernel.
    pub fn separable(factor: Vec<f64>) -> Result<Self> {
        let size = factor.len();
        let mut weights = Vec::with_capacity(size * size);
        for a in &factor {
            for b in &factor {
                weights.push(a * b);
            }
        }
        let mut k = Self::new(size, weights)?;
        k.factor = Some(factor);
        Ok(k)
    }

    pub fn identity() -> Self {
        Self::new(1, vec![1.0]).expect("1x1 kernel")
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn center(&self) -> usize {
        self.size / 2
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Weight at row `i`, column `j`.
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.weights[i * self.size + j]
    }

    pub fn sum(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn factor(&self) -> Option<&[f64]> {
        self.factor.as_deref()
    }
}

/// Radius used when a Gaussian is built from `sigma` alone: `ceil(3σ)`.
pub fn gaussian_radius(sigma: f64) -> usize {
    (3.0 * sigma).ceil().max(0.0) as usize
}

/// Normalised `size × size` Gaussian, built as the product of two 1D Gaussians.
pub fn gaussian_kernel(sigma: f64, size: usize) -> Result<Kernel2D> {
    if !(sigma > 0.0) || !sigma.is_finite() {
        return Err(Error::param(format!("gaussian sigma must be positive, got {sigma}")));
    }
    if size == 0 || size.is_multiple_of(2) {
        return Err(Error::param(format!("kernel size must be odd, got {size}")));
    }
    let c = (size / 2) as f64;
    let mut g: Vec<f64> = (0..size)
        .map(|i| {
            let d = i as f64 - c;
            (-d * d / (2.0 * sigma * sigma)).exp()
        })
        .collect();
    let s: f64 = g.iter().sum();
    g.iter_mut().for_each(|w| *w /= s);
    Kernel2D::separable(g)
}

/// Gaussian blur with radius [`gaussian_radius`]`(sigma)`.
pub fn gaussian_blur(img: &ImageBuf, sigma: f64) -> Result<ImageBuf> {
    let k = gaussian_kernel(sigma, 2 * gaussian_radius(sigma) + 1)?;
    Ok(convolve(img, &k))
}

/// Per-channel 2D convolution with replicate (clamp-to-edge) borders.
pub fn convolve(img: &ImageBuf, k: &Kernel2D) -> ImageBuf {
    if k.size == 1 {
        let w = k.weights[0];
        return img.map(|s| s * w);
    }
    match &k.factor {
        Some(f) => {
            let tmp = pass_1d(img, f, true);
            pass_1d(&tmp, f, false)
        }
        None => convolve_2d(img, k),
    }
}

fn convolve_2d(img: &ImageBuf, k: &Kernel2D) -> ImageBuf {
    let (w, h, ch) = (img.width(), img.height(), img.channels());
    let r = k.center() as isize;
    let mut out = vec![0.0; img.data().len()];
    out.par_chunks_mut(w * ch).enumerate().for_each(|(y, row)| {
        for x in 0..w {
            for c in 0..ch {
                let mut acc = 0.0;
                for i in 0..k.size {
                    // flipped taps: true convolution, not correlation
                    let sy = y as isize + r - i as isize;
                    for j in 0..k.size {
                        let sx = x as isize + r - j as isize;
                        acc += k.at(i, j) * img.get_clamped(sx, sy, c);
                    }
                }
                row[x * ch + c] = acc;
            }
        }
    });
    ImageBuf::new(w, h, ch, out).expect("shape preserved")
}

fn pass_1d(img: &ImageBuf, taps: &[f64], horizontal: bool) -> ImageBuf {
    let (w, h, ch) = (img.width(), img.height(), img.channels());
    let r = (taps.len() / 2) as isize;
    let mut out = vec![0.0; img.data().len()];
    out.par_chunks_mut(w * ch).enumerate().for_each(|(y, row)| {
        for x in 0..w {
            for c in 0..ch {
                let mut acc = 0.0;
                for (t, &wt) in taps.iter().enumerate() {
                    let off = r - t as isize;
                    let v = if horizontal {
                        img.get_clamped(x as isize + off, y as isize, c)
                    } else {
                        img.get_clamped(x as isize, y as isize + off, c)
                    };
                    acc += wt * v;
                }
                row[x * ch + c] = acc;
            }
        }
    });
    ImageBuf::new(w, h, ch, out).expect("shape preserved")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_tap_kernel() {
        let k = gaussian_kernel(1.0, 1).unwrap();
        assert_eq!(k.weights(), &[1.0]);
    }

    #[test]
    #[allow(clippy::needless_range_loop)]
    fn center_weight_sigma_half() {
        // direct evaluation of exp(-(di²+dj²)/(2σ²)) over the 3x3 grid, then normalise
        let sigma: f64 = 0.5;
        let mut raw = [[0.0f64; 3]; 3];
        let mut total = 0.0;
        for (i, row) in raw.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                let (di, dj) = (i as f64 - 1.0, j as f64 - 1.0);
                *v = (-(di * di + dj * dj) / (2.0 * sigma * sigma)).exp();
                total += *v;
            }
        }
        let k = gaussian_kernel(sigma, 3).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                assert!((k.at(i, j) - raw[i][j] / total).abs() < 1e-15);
            }
        }
        assert!((k.at(1, 1) - 0.6193).abs() < 5e-5);
    }

    #[test]
    fn kernel_rotation_symmetry_and_sum() {
        for sigma in [0.3, 0.5, 1.0, 4.0] {
            for size in [3, 5, 9] {
                let k = gaussian_kernel(sigma, size).unwrap();
                assert!((k.sum() - 1.0).abs() < 1e-9);
                for i in 0..size {
                    for j in 0..size {
                        assert!(k.at(i, j) > 0.0);
                        // 90° rotation maps (i, j) to (j, size-1-i)
                        assert!((k.at(i, j) - k.at(j, size - 1 - i)).abs() < 1e-15);
                    }
                }
            }
        }
    }

    #[test]
    fn parameter_errors() {
        assert!(gaussian_kernel(1.0, 4).is_err());
        assert!(gaussian_kernel(0.0, 3).is_err());
        assert!(gaussian_kernel(-1.0, 3).is_err());
        assert!(Kernel2D::new(2, vec![0.0; 4]).is_err());
    }

    #[test]
    fn identity_and_constant() {
        let img = ImageBuf::from_fn(7, 5, 3, |x, y, c| ((x * 3 + y * 7 + c) % 11) as f64 / 10.0)
            .unwrap();
        assert_eq!(convolve(&img, &Kernel2D::identity()), img);
        let flat = ImageBuf::filled(9, 6, 1, 0.37).unwrap();
        let k = gaussian_kernel(1.3, 7).unwrap();
        let out = convolve(&flat, &k);
        assert!(out.data().iter().all(|&s| (s - 0.37).abs() < 1e-15));
    }

    #[test]
    fn impulse_response_is_kernel() {
        let mut img = ImageBuf::filled(3, 3, 1, 0.0).unwrap();
        img.set(1, 1, 0, 1.0);
        let k = gaussian_kernel(0.5, 3).unwrap();
        let out = convolve(&img, &k);
        for y in 0..3 {
            for x in 0..3 {
                assert!((out.get(x, y, 0) - k.at(y, x)).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn separable_matches_full_2d() {
        let img = ImageBuf::from_fn(11, 8, 3, |x, y, c| ((x * x + 3 * y + c) % 7) as f64 / 7.0)
            .unwrap();
        let k = gaussian_kernel(1.7, 7).unwrap();
        let dense = Kernel2D::new(7, k.weights().to_vec()).unwrap();
        let a = convolve(&img, &k);
        let b = convolve(&img, &dense);
        assert!(a.max_abs_diff(&b).unwrap() < 1e-14);
    }

    #[test]
    fn convolution_flips_asymmetric_kernels() {
        // impulse response of a true convolution reproduces the kernel, not its mirror
        let mut img = ImageBuf::filled(3, 3, 1, 0.0).unwrap();
        img.set(1, 1, 0, 1.0);
        let w: Vec<f64> = (1..=9).map(f64::from).collect();
        let k = Kernel2D::new(3, w).unwrap();
        let out = convolve(&img, &k);
        for y in 0..3 {
            for x in 0..3 {
                assert_eq!(out.get(x, y, 0), k.at(y, x));
            }
        }
    }
}
