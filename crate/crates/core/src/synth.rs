//! Procedural word crops for tests, examples and smoke runs.
//!
//! Each sample is a lit RGB image of a short lowercase word drawn with a
//! blocky 3×5 glyph font over a smooth background, plus the word as label.
//! Everything is a pure function of the seed and sample index.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::imgcore::noise::STREAM_SYNTH;
use crate::imgcore::{ImageBuf, RngSeed};

/// A generated word crop and its transcription.
#[derive(Clone, Debug)]
pub struct SynthSample {
    pub label: String,
    pub image: ImageBuf,
}

const ALPHABET: &[u8] = b"abcdefghijklmnopqrstuvwxyz";

// 3×5 bitmaps, one row per 3 low bits, top row first.
fn glyph(c: char) -> [u8; 5] {
    match c {
        'a' => [0b010, 0b101, 0b111, 0b101, 0b101],
        'b' => [0b110, 0b101, 0b110, 0b101, 0b110],
        'c' => [0b011, 0b100, 0b100, 0b100, 0b011],
        'd' => [0b110, 0b101, 0b101, 0b101, 0b110],
        'e' => [0b111, 0b100, 0b110, 0b100, 0b111],
        'f' => [0b111, 0b100, 0b110, 0b100, 0b100],
        'g' => [0b011, 0b100, 0b101, 0b101, 0b011],
        'h' => [0b101, 0b101, 0b111, 0b101, 0b101],
        'i' => [0b111, 0b010, 0b010, 0b010, 0b111],
        'j' => [0b001, 0b001, 0b001, 0b101, 0b010],
        'k' => [0b101, 0b110, 0b100, 0b110, 0b101],
        'l' => [0b100, 0b100, 0b100, 0b100, 0b111],
        'm' => [0b101, 0b111, 0b111, 0b101, 0b101],
        'n' => [0b110, 0b101, 0b101, 0b101, 0b101],
        'o' => [0b010, 0b101, 0b101, 0b101, 0b010],
        'p' => [0b110, 0b101, 0b110, 0b100, 0b100],
        'q' => [0b010, 0b101, 0b101, 0b110, 0b011],
        'r' => [0b110, 0b101, 0b110, 0b101, 0b101],
        's' => [0b011, 0b100, 0b010, 0b001, 0b110],
        't' => [0b111, 0b010, 0b010, 0b010, 0b010],
        'u' => [0b101, 0b101, 0b101, 0b101, 0b111],
        'v' => [0b101, 0b101, 0b101, 0b101, 0b010],
        'w' => [0b101, 0b101, 0b111, 0b111, 0b101],
        'x' => [0b101, 0b101, 0b010, 0b101, 0b101],
        'y' => [0b101, 0b101, 0b010, 0b010, 0b010],
        'z' => [0b111, 0b001, 0b010, 0b100, 0b111],
        _ => [0b111, 0b101, 0b101, 0b101, 0b111],
    }
}

/// Renders `text` into a `width × height` RGB crop.
///
/// Colours and background shading come from `seed`. Characters outside
/// `a-z` render as a box.
pub fn render_word(text: &str, width: usize, height: usize, seed: RngSeed) -> Result<ImageBuf> {
    let n = text.chars().count();
    if n == 0 {
        return Err(Error::param("cannot render an empty word"));
    }
    // each glyph cell is 4 units wide (3 + gap), 7 tall (5 + margins)
    let cell = (width as f64 / (4 * n + 1) as f64).min(height as f64 / 7.0);
    if cell < 1.0 {
        return Err(Error::param(format!(
            "{width}x{height} is too small for {n} characters"
        )));
    }
    let u = |i: u64| seed.uniform(STREAM_SYNTH, i);
    let bg: Vec<f64> = (0..3).map(|c| 0.6 + 0.35 * u(c)).collect();
    let ink: Vec<f64> = (0..3).map(|c| 0.05 + 0.25 * u(3 + c)).collect();
    let tilt = (u(6) - 0.5) * 0.3;
    let ox = (width as f64 - cell * (4 * n - 1) as f64) / 2.0;
    let oy = (height as f64 - cell * 5.0) / 2.0;
    let glyphs: Vec<[u8; 5]> = text.chars().map(glyph).collect();
    ImageBuf::from_fn(width, height, 3, |x, y, c| {
        let fx = (x as f64 + 0.5 - ox) / cell;
        let fy = (y as f64 + 0.5 - oy) / cell;
        let shade = 1.0 + tilt * (x as f64 / width as f64 - 0.5);
        let back = (bg[c] * shade).clamp(0.0, 1.0);
        if fx < 0.0 || !(0.0..5.0).contains(&fy) {
            return back;
        }
        let (gi, col) = ((fx / 4.0) as usize, (fx as usize) % 4);
        if gi >= glyphs.len() || col == 3 {
            return back;
        }
        let bits = glyphs[gi][fy as usize];
        if bits >> (2 - col) & 1 == 1 {
            ink[c]
        } else {
            back
        }
    })
}

/// Word of 3 to 7 lowercase letters for sample `index`.
pub fn random_word(seed: RngSeed, index: u64) -> String {
    let s = seed.derive(index);
    let len = 3 + (s.uniform(STREAM_SYNTH, 100) * 5.0) as u64;
    (0..len)
        .map(|i| {
            let j = (s.uniform(STREAM_SYNTH, 101 + i) * ALPHABET.len() as f64) as usize;
            ALPHABET[j.min(ALPHABET.len() - 1)] as char
        })
        .collect()
}

/// `n` word crops of `width × height`, generated in parallel.
pub fn synth_corpus(n: usize, width: usize, height: usize, seed: RngSeed) -> Result<Vec<SynthSample>> {
    (0..n as u64)
        .into_par_iter()
        .map(|i| {
            let label = random_word(seed, i);
            let image = render_word(&label, width, height, seed.derive(i))?;
            Ok(SynthSample { label, image })
        })
        .collect()
}
