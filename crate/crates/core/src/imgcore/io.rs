//! Image file IO.
//!
//! 8-bit PNG/JPEG map to `[0, 1]` by `s / 255` on load and `round(s · 255)`
//! after clipping on save. `.dbf` files hold lossless float rasters:
//!
//! ```text
//! DBF1\n
//! <width> <height> <channels>\n
//! <width·height·channels little-endian f32, row-major, channels interleaved>
//! ```

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use image::{DynamicImage, GrayImage, RgbImage};

use super::ImageBuf;
use crate::error::{Error, Result};

const DBF_MAGIC: &[u8] = b"DBF1\n";

fn is_dbf(path: &Path) -> bool {
    path.extension()
        .and_then(|e| e.to_str())
        .is_some_and(|e| e.eq_ignore_ascii_case("dbf"))
}

/// Loads PNG, JPEG or DBF1 depending on the file extension.
pub fn load_image(path: impl AsRef<Path>) -> Result<ImageBuf> {
    let path = path.as_ref();
    if is_dbf(path) {
        return load_dbf(path);
    }
    let dynimg = image::open(path).map_err(|source| Error::Codec {
        path: path.to_path_buf(),
        source,
    })?;
    let (w, h) = (dynimg.width() as usize, dynimg.height() as usize);
    if dynimg.color().has_color() {
        let rgb = dynimg.to_rgb8();
        ImageBuf::new(w, h, 3, rgb.as_raw().iter().map(|&v| v as f64 / 255.0).collect())
    } else {
        let g = dynimg.to_luma8();
        ImageBuf::new(w, h, 1, g.as_raw().iter().map(|&v| v as f64 / 255.0).collect())
    }
}

/// Quantises `[0, 1]` samples to 8 bits.
pub fn to_u8(img: &ImageBuf) -> Vec<u8> {
    img.data()
        .iter()
        .map(|&s| (s.clamp(0.0, 1.0) * 255.0).round() as u8)
        .collect()
}

/// Saves PNG, JPEG or DBF1 depending on the file extension.
pub fn save_image(img: &ImageBuf, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    if is_dbf(path) {
        return save_dbf(img, path);
    }
    let (w, h) = (img.width() as u32, img.height() as u32);
    let bytes = to_u8(img);
    let dynimg = match img.channels() {
        1 => DynamicImage::ImageLuma8(GrayImage::from_raw(w, h, bytes).expect("buffer size")),
        _ => DynamicImage::ImageRgb8(RgbImage::from_raw(w, h, bytes).expect("buffer size")),
    };
    dynimg.save(path).map_err(|source| Error::Codec {
        path: path.to_path_buf(),
        source,
    })
}

pub fn write_dbf(img: &ImageBuf, mut w: impl Write) -> std::io::Result<()> {
    w.write_all(DBF_MAGIC)?;
    writeln!(w, "{} {} {}", img.width(), img.height(), img.channels())?;
    for &s in img.data() {
        w.write_all(&(s as f32).to_le_bytes())?;
    }
    w.flush()
}

pub fn read_dbf(r: impl Read) -> Result<ImageBuf> {
    let mut r = BufReader::new(r);
    let bad = |msg: &str| Error::param(format!("malformed DBF1 raster: {msg}"));
    let mut magic = [0u8; 5];
    r.read_exact(&mut magic).map_err(|_| bad("truncated magic"))?;
    if magic != DBF_MAGIC {
        return Err(bad("bad magic"));
    }
    let mut header = String::new();
    r.read_line(&mut header).map_err(|_| bad("unreadable header"))?;
    let dims: Vec<usize> = header
        .split_ascii_whitespace()
        .map(str::parse)
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| bad("non-numeric header"))?;
    let [w, h, c] = dims[..] else {
        return Err(bad("header must be `width height channels`"));
    };
    let n = w
        .checked_mul(h)
        .and_then(|v| v.checked_mul(c))
        .ok_or_else(|| bad("dimensions overflow"))?;
    let mut bytes = vec![0u8; n * 4];
    r.read_exact(&mut bytes).map_err(|_| bad("truncated sample data"))?;
    let data = bytes
        .chunks_exact(4)
        .map(|b| f32::from_le_bytes([b[0], b[1], b[2], b[3]]) as f64)
        .collect();
    ImageBuf::new(w, h, c, data)
}

pub fn load_dbf(path: impl AsRef<Path>) -> Result<ImageBuf> {
    let path = path.as_ref();
    let f = File::open(path).map_err(|e| Error::io(path, e))?;
    read_dbf(f)
}

pub fn save_dbf(img: &ImageBuf, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let f = File::create(path).map_err(|e| Error::io(path, e))?;
    write_dbf(img, BufWriter::new(f)).map_err(|e| Error::io(path, e))
}
