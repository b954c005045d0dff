use std::f64::consts::{PI, TAU};

use rayon::prelude::*;

use super::sh::{project_to_sh, ShVector};
use super::{Direction, EnvMap, SurfacePoint};
use crate::error::{Error, Result};
use crate::imgcore::RngSeed;

/// `T(ω) = V(ω) · max(0, n·ω)`.
pub fn transport_weight(p: &SurfacePoint, dir: &Direction) -> f64 {
    let cos = p.normal.dot(dir);
    if cos <= 0.0 {
        return 0.0;
    }
    p.visibility(dir) * cos
}

/// Monte-Carlo SH projection of [`transport_weight`] at `p`.
pub fn transport_to_sh(
    p: &SurfacePoint,
    order: usize,
    samples: usize,
    seed: RngSeed,
) -> Result<ShVector> {
    project_to_sh(|d: &Direction| transport_weight(p, d), order, samples, seed)
}

/// `Σ t_lm e_lm`: the transport integral against the environment, reduced
/// to a dot product by orthonormality.
pub fn prt_radiance(t: &ShVector, e: &ShVector) -> Result<f64> {
    if t.order() != e.order() {
        return Err(Error::ShapeMismatch {
            expected: format!("order {}", t.order()),
            actual: format!("order {}", e.order()),
        });
    }
    Ok(t.coeffs().iter().zip(e.coeffs()).map(|(a, b)| a * b).sum())
}

/// Lambertian shading from PRT: `(ρ_c/π) · Σ t_lm e^c_lm` per channel.
///
/// Directly comparable with [`render_oracle`].
pub fn prt_shaded(t: &ShVector, env: &[ShVector], albedo: &[f64]) -> Result<Vec<f64>> {
    let p = SurfacePoint {
        normal: Direction::UP,
        albedo: albedo.to_vec(),
        occluders: Vec::new(),
    };
    let rho = p.albedo_for(env.len())?;
    env.iter()
        .zip(rho)
        .map(|(e, r)| prt_radiance(t, e).map(|v| r / PI * v))
        .collect()
}

/// `(ρ/π) ∫ L_env(ω) max(0, ω·n) dω` per channel, ignoring occluders.
///
/// Midpoint rule on `quad_steps` polar × `2·quad_steps` azimuthal cells.
pub fn diffuse_ibl(env: &EnvMap, p: &SurfacePoint, quad_steps: usize) -> Result<Vec<f64>> {
    quadrature(env, p, quad_steps, false)
}

/// Brute-force Lambertian rendering with visibility:
/// `(ρ/π) ∫ L_env(ω) V(ω) max(0, ω·n) dω` per channel.
///
/// Uses the same grid as [`diffuse_ibl`], so the two agree exactly when no
/// occluders are present.
pub fn render_oracle(env: &EnvMap, p: &SurfacePoint, quad_steps: usize) -> Result<Vec<f64>> {
    quadrature(env, p, quad_steps, true)
}

fn quadrature(
    env: &EnvMap,
    p: &SurfacePoint,
    quad_steps: usize,
    visibility: bool,
) -> Result<Vec<f64>> {
    if quad_steps < 8 {
        return Err(Error::param(format!("quad_steps must be >= 8, got {quad_steps}")));
    }
    let ch = env.channels();
    let rho = p.albedo_for(ch)?;
    let (nt, np) = (quad_steps, 2 * quad_steps);
    let dt = PI / nt as f64;
    let dp = TAU / np as f64;
    let rows: Vec<Vec<f64>> = (0..nt)
        .into_par_iter()
        .map(|i| {
            let theta = (i as f64 + 0.5) * dt;
            let w = theta.sin() * dt * dp;
            let mut acc = vec![0.0; ch];
            for j in 0..np {
                let dir = Direction::from_spherical(theta, (j as f64 + 0.5) * dp);
                let cos = dir.dot(&p.normal);
                if cos <= 0.0 || (visibility && p.visibility(&dir) == 0.0) {
                    continue;
                }
                for (c, a) in acc.iter_mut().enumerate() {
                    *a += env.lookup(&dir, c) * cos * w;
                }
            }
            acc
        })
        .collect();
    let mut total = vec![0.0; ch];
    for row in rows {
        total.iter_mut().zip(row).for_each(|(t, r)| *t += r);
    }
    Ok(total
        .into_iter()
        .zip(rho)
        .map(|(t, r)| r / PI * t)
        .collect())
}
