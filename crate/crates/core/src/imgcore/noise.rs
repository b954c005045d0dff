use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::ImageBuf;
use crate::error::{Error, Result};

/// Master seed for every random draw in the toolkit.
///
/// Draws come from a ChaCha8 keystream that is seeked directly to the word
/// belonging to a given sample index, so the value for sample `i` never
/// depends on how many other samples were generated or in what order.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RngSeed(pub u64);

// Independent keystreams per purpose.
pub(crate) const STREAM_NOISE: u64 = 0;
pub(crate) const STREAM_SPHERE: u64 = 1;
pub(crate) const STREAM_DERIVE: u64 = 2;
pub(crate) const STREAM_COIN: u64 = 3;
pub(crate) const STREAM_PROBE: u64 = 4;
pub(crate) const STREAM_SYNTH: u64 = 5;

// Each indexed draw owns two u64s (four 32-bit words).
const WORDS_PER_DRAW: u128 = 4;

impl RngSeed {
    /// Generator positioned at draw `index` of `stream`.
    pub(crate) fn rng_at(self, stream: u64, index: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.0);
        rng.set_stream(stream);
        rng.set_word_pos(index as u128 * WORDS_PER_DRAW);
        rng
    }

    /// Sequential uniform pairs starting at draw `start` of `stream`.
    pub(crate) fn pairs(self, stream: u64, start: u64) -> impl Iterator<Item = (f64, f64)> {
        let mut rng = self.rng_at(stream, start);
        std::iter::repeat_with(move || (unit(rng.next_u64()), unit(rng.next_u64())))
    }

    /// Uniform in `[0, 1)` for draw `index` of `stream`.
    pub(crate) fn uniform(self, stream: u64, index: u64) -> f64 {
        unit(self.rng_at(stream, index).next_u64())
    }

    /// Child seed for item `index` (e.g. the n-th file of a run).
    pub fn derive(self, index: u64) -> RngSeed {
        RngSeed(self.rng_at(STREAM_DERIVE, index).next_u64())
    }
}

impl From<u64> for RngSeed {
    fn from(v: u64) -> Self {
        RngSeed(v)
    }
}

impl std::fmt::Display for RngSeed {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[inline]
fn unit(x: u64) -> f64 {
    (x >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Box–Muller standard normal from two uniforms in `[0, 1)`.
#[inline]
pub(crate) fn box_muller(u1: f64, u2: f64) -> f64 {
    let r = (-2.0 * (1.0 - u1).ln()).sqrt();
    r * (std::f64::consts::TAU * u2).cos()
}

const CHUNK: usize = 4096;

/// I.i.d. `N(0, sigma²)` field of the given shape.
pub fn sample_awgn_field(
    width: usize,
    height: usize,
    channels: usize,
    sigma: f64,
    seed: RngSeed,
) -> Result<ImageBuf> {
    if !(sigma >= 0.0) || !sigma.is_finite() {
        return Err(Error::param(format!("noise sigma must be >= 0, got {sigma}")));
    }
    let n = width * height * channels;
    let mut data = vec![0.0; n];
    if sigma > 0.0 {
        data.par_chunks_mut(CHUNK).enumerate().for_each(|(ci, chunk)| {
            let start = (ci * CHUNK) as u64;
            for (s, (u1, u2)) in chunk.iter_mut().zip(seed.pairs(STREAM_NOISE, start)) {
                *s = sigma * box_muller(u1, u2);
            }
        });
    }
    ImageBuf::new(width, height, channels, data)
}
