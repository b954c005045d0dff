//! Real orthonormal spherical harmonics.
//!
//! ```text
//! Y_l^m  = √2 K_l^m cos(mφ)  P_l^m(cos θ)    m > 0
//! Y_l^0  =    K_l^0          P_l^0(cos θ)
//! Y_l^m  = √2 K_l^|m| sin(|m|φ) P_l^|m|(cos θ)  m < 0
//! K_l^m  = √((2l+1)/(4π) · (l−m)!/(l+m)!)
//! ```
//!
//! The associated Legendre functions carry no Condon–Shortley `(−1)^m`
//! factor, so `Y_1^1 = √(3/4π)·x`. Coefficients are stored flat at index
//! `l(l+1) + m`.

use std::f64::consts::{PI, SQRT_2, TAU};

use rayon::prelude::*;

use super::Direction;
use crate::error::{Error, Result};
use crate::imgcore::noise::STREAM_SPHERE;
use crate::imgcore::RngSeed;

#[inline]
pub fn sh_index(l: usize, m: i64) -> usize {
    ((l * (l + 1)) as i64 + m) as usize
}

pub fn sh_eval(l: i64, m: i64, dir: &Direction) -> Result<f64> {
    if l < 0 || m.abs() > l {
        return Err(Error::ShIndex { l, m });
    }
    let order = l as usize;
    let mut basis = vec![0.0; (order + 1) * (order + 1)];
    sh_basis(order, dir, &mut basis);
    Ok(basis[sh_index(order, m)])
}

/// Fills `out[l(l+1)+m]` with every `Y_l^m(dir)` up to `order`.
pub fn sh_basis(order: usize, dir: &Direction, out: &mut [f64]) {
    let n = (order + 1) * (order + 1);
    assert!(out.len() >= n, "basis buffer too small");
    let x = dir.z().clamp(-1.0, 1.0);
    let sin_theta = (1.0 - x * x).max(0.0).sqrt();
    let phi = dir.y().atan2(dir.x());

    // P_m^m, then upward in l for each m
    let mut pmm = 1.0;
    for m in 0..=order {
        if m > 0 {
            pmm *= (2 * m - 1) as f64 * sin_theta;
        }
        let (cos_m, sin_m) = if m == 0 {
            (1.0, 0.0)
        } else {
            let a = m as f64 * phi;
            (a.cos(), a.sin())
        };
        let mut p_prev = 0.0;
        let mut p_cur = pmm;
        for l in m..=order {
            if l == m + 1 {
                p_prev = p_cur;
                p_cur = x * (2 * m + 1) as f64 * pmm;
            } else if l > m + 1 {
                let next = ((2 * l - 1) as f64 * x * p_cur - (l + m - 1) as f64 * p_prev)
                    / (l - m) as f64;
                p_prev = p_cur;
                p_cur = next;
            }
            let k = norm(l, m);
            if m == 0 {
                out[sh_index(l, 0)] = k * p_cur;
            } else {
                out[sh_index(l, m as i64)] = SQRT_2 * k * p_cur * cos_m;
                out[sh_index(l, -(m as i64))] = SQRT_2 * k * p_cur * sin_m;
            }
        }
    }
}

fn norm(l: usize, m: usize) -> f64 {
    // (l-m)!/(l+m)! = 1 / ((l-m+1)···(l+m))
    let ratio: f64 = ((l - m + 1)..=(l + m)).map(|k| 1.0 / k as f64).product();
    ((2 * l + 1) as f64 / (4.0 * PI) * ratio).sqrt()
}

/// Real SH coefficient vector of a given order.
#[derive(Clone, Debug, PartialEq)]
pub struct ShVector {
    order: usize,
    coeffs: Vec<f64>,
}

impl ShVector {
    pub fn new(order: usize, coeffs: Vec<f64>) -> Result<Self> {
        let n = (order + 1) * (order + 1);
        if coeffs.len() != n {
            return Err(Error::ShapeMismatch {
                expected: format!("{n} coefficients for order {order}"),
                actual: format!("{}", coeffs.len()),
            });
        }
        Ok(Self { order, coeffs })
    }

    pub fn zeros(order: usize) -> Self {
        Self {
            order,
            coeffs: vec![0.0; (order + 1) * (order + 1)],
        }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn get(&self, l: usize, m: i64) -> f64 {
        self.coeffs[sh_index(l, m)]
    }

    pub fn set(&mut self, l: usize, m: i64, v: f64) {
        self.coeffs[sh_index(l, m)] = v;
    }

    /// Leading `(order+1)²` coefficients.
    pub fn truncate(&self, order: usize) -> ShVector {
        let order = order.min(self.order);
        Self {
            order,
            coeffs: self.coeffs[..(order + 1) * (order + 1)].to_vec(),
        }
    }

    /// Value of the band-limited function at `dir`.
    pub fn eval(&self, dir: &Direction) -> f64 {
        let mut basis = vec![0.0; self.coeffs.len()];
        sh_basis(self.order, dir, &mut basis);
        basis.iter().zip(&self.coeffs).map(|(b, c)| b * c).sum()
    }
}

/// Projection with per-coefficient Monte-Carlo standard errors.
#[derive(Clone, Debug)]
pub struct ShProjection {
    pub coeffs: ShVector,
    pub std_error: Vec<f64>,
}

/// Maps two uniforms in `[0, 1)` to a uniformly distributed direction.
pub fn sample_sphere(u: f64, v: f64) -> Direction {
    let z = 1.0 - 2.0 * u;
    let phi = TAU * v;
    Direction::from_spherical(z.clamp(-1.0, 1.0).acos(), phi)
}

const CHUNK: usize = 1 << 16;

/// `c_lm = (4π/N) Σ f(ω_j) Y_l^m(ω_j)` over `N` uniform directions.
pub fn project_to_sh<F>(f: F, order: usize, samples: usize, seed: RngSeed) -> Result<ShVector>
where
    F: Fn(&Direction) -> f64 + Sync,
{
    project_to_sh_detailed(f, order, samples, seed).map(|p| p.coeffs)
}

/// [`project_to_sh`] plus the standard error of every coefficient.
///
/// Directions are drawn in fixed-size chunks and partial sums combined in
/// chunk order, so the result does not depend on the thread count.
pub fn project_to_sh_detailed<F>(
    f: F,
    order: usize,
    samples: usize,
    seed: RngSeed,
) -> Result<ShProjection>
where
    F: Fn(&Direction) -> f64 + Sync,
{
    if samples == 0 {
        return Err(Error::param("projection needs at least one sample"));
    }
    let n = (order + 1) * (order + 1);
    let chunks = samples.div_ceil(CHUNK);
    let partials: Vec<(Vec<f64>, Vec<f64>)> = (0..chunks)
        .into_par_iter()
        .map(|ci| {
            let start = ci * CHUNK;
            let len = CHUNK.min(samples - start);
            let mut sum = vec![0.0; n];
            let mut sq = vec![0.0; n];
            let mut basis = vec![0.0; n];
            for (u, v) in seed.pairs(STREAM_SPHERE, start as u64).take(len) {
                let dir = sample_sphere(u, v);
                let fv = f(&dir);
                if fv == 0.0 {
                    continue;
                }
                sh_basis(order, &dir, &mut basis);
                for i in 0..n {
                    let g = fv * basis[i];
                    sum[i] += g;
                    sq[i] += g * g;
                }
            }
            (sum, sq)
        })
        .collect();
    let mut sum = vec![0.0; n];
    let mut sq = vec![0.0; n];
    for (s, q) in partials {
        for i in 0..n {
            sum[i] += s[i];
            sq[i] += q[i];
        }
    }
    let nf = samples as f64;
    let scale = 4.0 * PI;
    let coeffs = sum.iter().map(|s| scale * s / nf).collect();
    let std_error = sum
        .iter()
        .zip(&sq)
        .map(|(s, q)| {
            let mean = s / nf;
            let var = (q / nf - mean * mean).max(0.0);
            scale * (var / nf).sqrt()
        })
        .collect();
    Ok(ShProjection {
        coeffs: ShVector::new(order, coeffs)?,
        std_error,
    })
}
