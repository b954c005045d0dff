use std::f64::consts::{PI, TAU};
use std::path::Path;

use super::sh::{project_to_sh, sh_basis, ShVector};
use super::Direction;
use crate::error::{Error, Result};
use crate::imgcore::{load_image, ImageBuf, RngSeed};

/// Equirectangular radiance map.
///
/// Row `r` covers polar angles `[r, r+1)·π/H` measured from +z and column
/// `c` covers azimuths `[c, c+1)·2π/W`. Lookups use the nearest texel.
#[derive(Clone, Debug, PartialEq)]
pub struct EnvMap {
    raster: ImageBuf,
}

impl EnvMap {
    pub fn new(raster: ImageBuf) -> Result<Self> {
        if let Some(v) = raster.data().iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
            return Err(Error::Domain(format!(
                "environment radiance must be finite and non-negative, found {v}"
            )));
        }
        Ok(Self { raster })
    }

    /// Reads a DBF1 (or 8-bit) raster as an environment map.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::new(load_image(path)?)
    }

    pub fn constant(width: usize, height: usize, channels: usize, radiance: f64) -> Result<Self> {
        Self::new(ImageBuf::filled(width, height, channels, radiance)?)
    }

    /// Evaluates `f(direction, channel)` at every texel centre.
    pub fn from_fn(
        width: usize,
        height: usize,
        channels: usize,
        f: impl Fn(&Direction, usize) -> f64,
    ) -> Result<Self> {
        let raster = ImageBuf::from_fn(width, height, channels, |x, y, c| {
            let theta = (y as f64 + 0.5) * PI / height as f64;
            let phi = (x as f64 + 0.5) * TAU / width as f64;
            f(&Direction::from_spherical(theta, phi), c)
        })?;
        Self::new(raster)
    }

    pub fn width(&self) -> usize {
        self.raster.width()
    }

    pub fn height(&self) -> usize {
        self.raster.height()
    }

    pub fn channels(&self) -> usize {
        self.raster.channels()
    }

    pub fn raster(&self) -> &ImageBuf {
        &self.raster
    }

    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::new(self.raster.map(|v| v * factor))
    }

    fn texel(&self, dir: &Direction) -> (usize, usize) {
        let (w, h) = (self.width(), self.height());
        let row = ((dir.theta() / PI * h as f64) as usize).min(h - 1);
        let col = ((dir.phi() / TAU * w as f64) as usize) % w;
        (col, row)
    }

    /// Nearest-texel radiance of channel `c` in direction `dir`.
    pub fn lookup(&self, dir: &Direction, c: usize) -> f64 {
        let (x, y) = self.texel(dir);
        self.raster.get(x, y, c)
    }

    /// Per-channel SH coefficients by texel quadrature.
    ///
    /// Each texel contributes its radiance times `Y_l^m` at its centre times
    /// its exact solid angle `Δφ·(cos θ₀ − cos θ₁)`.
    pub fn project_sh(&self, order: usize) -> Vec<ShVector> {
        let (w, h, ch) = (self.width(), self.height(), self.channels());
        let n = (order + 1) * (order + 1);
        let mut acc = vec![vec![0.0; n]; ch];
        let mut basis = vec![0.0; n];
        let dphi = TAU / w as f64;
        for y in 0..h {
            let t0 = y as f64 * PI / h as f64;
            let t1 = (y + 1) as f64 * PI / h as f64;
            let solid = dphi * (t0.cos() - t1.cos());
            let tc = 0.5 * (t0 + t1);
            for x in 0..w {
                let dir = Direction::from_spherical(tc, (x as f64 + 0.5) * dphi);
                sh_basis(order, &dir, &mut basis);
                for (c, a) in acc.iter_mut().enumerate() {
                    let l = self.raster.get(x, y, c) * solid;
                    if l != 0.0 {
                        a.iter_mut().zip(&basis).for_each(|(s, b)| *s += l * b);
                    }
                }
            }
        }
        acc.into_iter()
            .map(|c| ShVector::new(order, c).expect("length matches order"))
            .collect()
    }

    /// Per-channel Monte-Carlo projection of the nearest-texel radiance.
    pub fn project_sh_mc(&self, order: usize, samples: usize, seed: RngSeed) -> Result<Vec<ShVector>> {
        (0..self.channels())
            .map(|c| project_to_sh(|d: &Direction| self.lookup(d, c), order, samples, seed))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_negative_radiance() {
        let img = ImageBuf::new(2, 1, 1, vec![1.0, -0.1]).unwrap();
        assert!(EnvMap::new(img).is_err());
        let img = ImageBuf::new(2, 1, 1, vec![1.0, f64::NAN]).unwrap();
        assert!(EnvMap::new(img).is_err());
    }

    #[test]
    fn lookup_addresses_texels() {
        let env = EnvMap::from_fn(8, 4, 1, |d, _| if d.z() > 0.0 { 1.0 } else { 0.0 }).unwrap();
        assert_eq!(env.lookup(&Direction::UP, 0), 1.0);
        assert_eq!(env.lookup(&Direction::UP.neg(), 0), 0.0);
        let raster = ImageBuf::from_fn(4, 2, 1, |x, y, _| (10 * y + x) as f64).unwrap();
        let env = EnvMap::new(raster).unwrap();
        // θ = 3π/4, φ = 5π/4 lands in row 1, column 2
        let d = Direction::from_spherical(0.75 * PI, 1.25 * PI);
        assert_eq!(env.lookup(&d, 0), 12.0);
    }

    #[test]
    fn constant_projection_is_dc_only() {
        let env = EnvMap::constant(128, 64, 3, 2.0).unwrap();
        for sh in env.project_sh(4) {
            assert!((sh.get(0, 0) - 2.0 * 2.0 * PI.sqrt()).abs() < 1e-3);
            for &c in &sh.coeffs()[1..] {
                assert!(c.abs() < 1e-2);
            }
        }
    }

    #[test]
    fn scaling_is_linear() {
        let env = EnvMap::from_fn(16, 8, 1, |d, _| 1.0 + d.x().abs()).unwrap();
        let s = env.scaled(3.0).unwrap();
        assert_eq!(s.lookup(&Direction::UP, 0), 3.0 * env.lookup(&Direction::UP, 0));
    }
}
