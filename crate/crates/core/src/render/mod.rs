//! Rendering-equation math for diffuse surfaces under environment light.
//!
//! Outgoing diffuse radiance at a surface point with normal `n`, albedo `ρ`
//! and binary visibility `V` is
//!
//! ```text
//! L_o = (ρ/π) ∫_{S²} L_env(ω) · V(ω) · max(0, ω·n) dω
//! ```
//!
//! [`render_oracle`] evaluates this by brute-force θ×φ quadrature and
//! [`diffuse_ibl`] evaluates the unshadowed case. Precomputed radiance
//! transfer factors the integrand into the transport `T(ω) = V(ω)·max(0, ω·n)`
//! and the environment, projects both onto real spherical harmonics, and
//! reduces the integral to a coefficient dot product ([`prt_radiance`]).
//!
//! Visibility is modelled by cone occluders so every configuration has a
//! closed-form check.

mod envmap;
mod ibl;
mod sh;

pub use envmap::EnvMap;
pub use ibl::{
    diffuse_ibl, prt_radiance, prt_shaded, render_oracle, transport_to_sh, transport_weight,
};
pub use sh::{
    project_to_sh, project_to_sh_detailed, sample_sphere, sh_basis, sh_eval, sh_index, ShProjection,
    ShVector,
};

use crate::error::{Error, Result};

/// Unit 3-vector.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Direction {
    x: f64,
    y: f64,
    z: f64,
}

impl Direction {
    pub const UP: Direction = Direction {
        x: 0.0,
        y: 0.0,
        z: 1.0,
    };

    /// Normalises `(x, y, z)`; zero or non-finite vectors are rejected.
    pub fn new(x: f64, y: f64, z: f64) -> Result<Self> {
        let n = (x * x + y * y + z * z).sqrt();
        if !(n > 0.0) || !n.is_finite() {
            return Err(Error::param(format!(
                "direction ({x}, {y}, {z}) cannot be normalised"
            )));
        }
        Ok(Self {
            x: x / n,
            y: y / n,
            z: z / n,
        })
    }

    /// Polar angle `theta` from +z, azimuth `phi` from +x towards +y.
    pub fn from_spherical(theta: f64, phi: f64) -> Self {
        let st = theta.sin();
        Self {
            x: st * phi.cos(),
            y: st * phi.sin(),
            z: theta.cos(),
        }
    }

    pub fn x(&self) -> f64 {
        self.x
    }

    pub fn y(&self) -> f64 {
        self.y
    }

    pub fn z(&self) -> f64 {
        self.z
    }

    pub fn dot(&self, o: &Direction) -> f64 {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    pub fn neg(&self) -> Direction {
        Direction {
            x: -self.x,
            y: -self.y,
            z: -self.z,
        }
    }

    pub fn theta(&self) -> f64 {
        self.z.clamp(-1.0, 1.0).acos()
    }

    /// Azimuth in `[0, 2π)`.
    pub fn phi(&self) -> f64 {
        let p = self.y.atan2(self.x);
        if p < 0.0 {
            p + std::f64::consts::TAU
        } else {
            p
        }
    }

    pub fn to_array(&self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }
}

/// Cone of blocked directions: everything within `radius` radians of `axis`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Occluder {
    pub axis: Direction,
    pub radius: f64,
}

impl Occluder {
    pub fn new(axis: Direction, radius: f64) -> Self {
        Self { axis, radius }
    }

    pub fn from_degrees(axis: Direction, degrees: f64) -> Self {
        Self::new(axis, degrees.to_radians())
    }

    pub fn blocks(&self, dir: &Direction) -> bool {
        dir.dot(&self.axis) >= self.radius.cos()
    }
}

/// A shading point: normal, per-channel albedo and cone occluders.
#[derive(Clone, Debug, PartialEq)]
pub struct SurfacePoint {
    pub normal: Direction,
    /// One value (broadcast) or one per environment channel.
    pub albedo: Vec<f64>,
    pub occluders: Vec<Occluder>,
}

impl SurfacePoint {
    pub fn new(normal: Direction, albedo: f64) -> Self {
        Self {
            normal,
            albedo: vec![albedo],
            occluders: Vec::new(),
        }
    }

    pub fn with_occluder(mut self, occ: Occluder) -> Self {
        self.occluders.push(occ);
        self
    }

    /// `V(ω)`: 0 inside any occluder cone, 1 otherwise.
    pub fn visibility(&self, dir: &Direction) -> f64 {
        if self.occluders.iter().any(|o| o.blocks(dir)) {
            0.0
        } else {
            1.0
        }
    }

    pub(crate) fn albedo_for(&self, channels: usize) -> Result<Vec<f64>> {
        match self.albedo.len() {
            1 => Ok(vec![self.albedo[0]; channels]),
            n if n == channels => Ok(self.albedo.clone()),
            n => Err(Error::ShapeMismatch {
                expected: format!("1 or {channels} albedo values"),
                actual: format!("{n}"),
            }),
        }
    }
}
