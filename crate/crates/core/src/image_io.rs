// SPDX-License-Identifier: Apache-2.0

//! Grayscale images and the binary raster containers shared with the trainer.
//!
//! Images are binary `P5` PGM files with maxval 255. Real-valued rasters use a
//! small little-endian container:
//!
//! ```text
//! offset  size  field
//! 0       4     magic ("PMAP", "CMAP" or "MMAP")
//! 4       4     format version, u32 = 1
//! 8       4     width, u32
//! 12      4     height, u32
//! 16      4*w*h IEEE-754 binary32 values, row-major
//! ```
//!
//! There is no padding and no checksum.

use crate::error::{Error, Result};

pub const PMAP_MAGIC: [u8; 4] = *b"PMAP";
pub const CMAP_MAGIC: [u8; 4] = *b"CMAP";
pub const MMAP_MAGIC: [u8; 4] = *b"MMAP";
pub const CONTAINER_VERSION: u32 = 1;
pub const CONTAINER_HEADER_LEN: usize = 16;

/// Largest embedding-change probability a map may hold.
pub const MAX_PROBABILITY: f64 = 0.5;

/// Slack accepted when validating probabilities read back from binary32.
pub const PROBABILITY_TOLERANCE: f64 = 1e-6;

/// An 8-bit grayscale raster, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Image {
    width: usize,
    height: usize,
    pixels: Vec<u8>,
}

impl Image {
    pub fn new(width: usize, height: usize, pixels: Vec<u8>) -> Result<Self> {
        check_dims(width, height)?;
        if pixels.len() != width * height {
            return Err(Error::LengthMismatch {
                expected: width * height,
                actual: pixels.len(),
            });
        }
        Ok(Self {
            width,
            height,
            pixels,
        })
    }

    pub fn filled(width: usize, height: usize, value: u8) -> Result<Self> {
        check_dims(width, height)?;
        Ok(Self {
            width,
            height,
            pixels: vec![value; width * height],
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn len(&self) -> usize {
        self.pixels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pixels.is_empty()
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    pub fn pixels_mut(&mut self) -> &mut [u8] {
        &mut self.pixels
    }

    pub fn into_pixels(self) -> Vec<u8> {
        self.pixels
    }

    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.pixels[y * self.width + x]
    }

    /// Pixel intensities as `f64`, for the filtering code.
    pub fn to_f64(&self) -> Vec<f64> {
        self.pixels.iter().map(|&v| f64::from(v)).collect()
    }
}

/// Per-pixel embedding-change probabilities in `[0, 0.5]`, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbabilityMap {
    width: usize,
    height: usize,
    values: Vec<f64>,
}

impl ProbabilityMap {
    /// Builds a map, rejecting any value outside `[0, 0.5]`.
    pub fn new(width: usize, height: usize, values: Vec<f64>) -> Result<Self> {
        check_dims(width, height)?;
        if values.len() != width * height {
            return Err(Error::LengthMismatch {
                expected: width * height,
                actual: values.len(),
            });
        }
        if let Some((i, v)) = values
            .iter()
            .enumerate()
            .find(|(_, v)| !(0.0..=MAX_PROBABILITY).contains(*v))
        {
            return Err(Error::invalid(format!(
                "probability {v} at index {i} outside [0, 0.5]"
            )));
        }
        Ok(Self {
            width,
            height,
            values,
        })
    }

    pub fn uniform(width: usize, height: usize, p: f64) -> Result<Self> {
        check_dims(width, height)?;
        Self::new(width, height, vec![p; width * height])
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.values[y * self.width + x]
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }
}

pub(crate) fn check_dims(width: usize, height: usize) -> Result<()> {
    if width == 0 || height == 0 {
        return Err(Error::invalid(format!(
            "raster dimensions must be positive, got {width}x{height}"
        )));
    }
    width
        .checked_mul(height)
        .map(|_| ())
        .ok_or_else(|| Error::invalid(format!("raster {width}x{height} overflows")))
}

pub(crate) fn ensure_same_dims(expected: (usize, usize), actual: (usize, usize)) -> Result<()> {
    if expected != actual {
        return Err(Error::DimensionMismatch { expected, actual });
    }
    Ok(())
}

// --- PGM -------------------------------------------------------------------

struct HeaderCursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> HeaderCursor<'a> {
    fn skip_whitespace_and_comments(&mut self) {
        while let Some(&b) = self.bytes.get(self.pos) {
            if b.is_ascii_whitespace() {
                self.pos += 1;
            } else if b == b'#' {
                while let Some(&c) = self.bytes.get(self.pos) {
                    self.pos += 1;
                    if c == b'\n' || c == b'\r' {
                        break;
                    }
                }
            } else {
                break;
            }
        }
    }

    fn next_number(&mut self, what: &str) -> Result<usize> {
        self.skip_whitespace_and_comments();
        let start = self.pos;
        while self.bytes.get(self.pos).is_some_and(u8::is_ascii_digit) {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(Error::format(format!("PGM header: missing {what}")));
        }
        std::str::from_utf8(&self.bytes[start..self.pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::format(format!("PGM header: {what} out of range")))
    }
}

/// Decodes a binary `P5` PGM with maxval 255.
pub fn read_pgm(bytes: &[u8]) -> Result<Image> {
    if bytes.len() < 2 || &bytes[..2] != b"P5" {
        return Err(Error::format("not a binary P5 PGM"));
    }
    let mut cursor = HeaderCursor { bytes, pos: 2 };
    if !cursor
        .bytes
        .get(cursor.pos)
        .is_some_and(|b| b.is_ascii_whitespace() || *b == b'#')
    {
        return Err(Error::format("PGM header: expected whitespace after magic"));
    }
    let width = cursor.next_number("width")?;
    let height = cursor.next_number("height")?;
    let maxval = cursor.next_number("maxval")?;
    if maxval != 255 {
        return Err(Error::format(format!(
            "PGM maxval must be 255, got {maxval}"
        )));
    }
    // Exactly one whitespace byte separates the header from the raster.
    match bytes.get(cursor.pos) {
        Some(b) if b.is_ascii_whitespace() => cursor.pos += 1,
        _ => return Err(Error::format("PGM header: missing separator before raster")),
    }
    if width == 0 || height == 0 {
        return Err(Error::format(format!("PGM dimensions {width}x{height}")));
    }
    let len = width
        .checked_mul(height)
        .ok_or_else(|| Error::format("PGM dimensions overflow"))?;
    let raster = &bytes[cursor.pos..];
    if raster.len() < len {
        return Err(Error::format(format!(
            "PGM raster truncated: need {len} bytes, have {}",
            raster.len()
        )));
    }
    Image::new(width, height, raster[..len].to_vec())
}

/// Canonical `P5` encoding: `"P5\n{w} {h}\n255\n"` followed by the raster.
pub fn write_pgm(img: &Image) -> Vec<u8> {
    let header = format!("P5\n{} {}\n255\n", img.width, img.height);
    let mut out = Vec::with_capacity(header.len() + img.pixels.len());
    out.extend_from_slice(header.as_bytes());
    out.extend_from_slice(&img.pixels);
    out
}

// --- raster containers -----------------------------------------------------

/// Serializes `values` (row-major, `width * height` of them) as binary32.
pub fn write_container(magic: [u8; 4], width: usize, height: usize, values: &[f64]) -> Vec<u8> {
    debug_assert_eq!(values.len(), width * height);
    let mut out = Vec::with_capacity(CONTAINER_HEADER_LEN + 4 * values.len());
    out.extend_from_slice(&magic);
    out.extend_from_slice(&CONTAINER_VERSION.to_le_bytes());
    out.extend_from_slice(&(width as u32).to_le_bytes());
    out.extend_from_slice(&(height as u32).to_le_bytes());
    for &v in values {
        out.extend_from_slice(&(v as f32).to_le_bytes());
    }
    out
}

/// Parses a container with the given magic, returning `(width, height, values)`.
pub fn read_container(magic: [u8; 4], bytes: &[u8]) -> Result<(usize, usize, Vec<f64>)> {
    if bytes.len() < CONTAINER_HEADER_LEN {
        return Err(Error::format("raster container shorter than its header"));
    }
    if bytes[..4] != magic {
        return Err(Error::format(format!(
            "bad magic {:?}, expected {:?}",
            String::from_utf8_lossy(&bytes[..4]),
            String::from_utf8_lossy(&magic)
        )));
    }
    let word = |at: usize| u32::from_le_bytes(bytes[at..at + 4].try_into().unwrap());
    let version = word(4);
    if version != CONTAINER_VERSION {
        return Err(Error::format(format!(
            "unsupported container version {version}"
        )));
    }
    let width = word(8) as usize;
    let height = word(12) as usize;
    if width == 0 || height == 0 {
        return Err(Error::format(format!(
            "container dimensions {width}x{height}"
        )));
    }
    let expected = width
        .checked_mul(height)
        .and_then(|n| n.checked_mul(4))
        .and_then(|n| n.checked_add(CONTAINER_HEADER_LEN))
        .ok_or_else(|| Error::format("container dimensions overflow"))?;
    if bytes.len() != expected {
        return Err(Error::format(format!(
            "container of {width}x{height} needs {expected} bytes, have {}",
            bytes.len()
        )));
    }
    let values = bytes[CONTAINER_HEADER_LEN..]
        .chunks_exact(4)
        .map(|c| f64::from(f32::from_le_bytes(c.try_into().unwrap())))
        .collect();
    Ok((width, height, values))
}

pub fn write_pmap(pmap: &ProbabilityMap) -> Vec<u8> {
    write_container(PMAP_MAGIC, pmap.width, pmap.height, &pmap.values)
}

/// Decodes a PMAP container. Values within `1e-6` of the valid range are
/// clamped into `[0, 0.5]`; anything further out is rejected.
pub fn read_pmap(bytes: &[u8]) -> Result<ProbabilityMap> {
    let (width, height, mut values) = read_container(PMAP_MAGIC, bytes)?;
    for (i, v) in values.iter_mut().enumerate() {
        if !v.is_finite()
            || *v < -PROBABILITY_TOLERANCE
            || *v > MAX_PROBABILITY + PROBABILITY_TOLERANCE
        {
            return Err(Error::invalid(format!(
                "probability {v} at index {i} outside [0, 0.5]"
            )));
        }
        *v = v.clamp(0.0, MAX_PROBABILITY);
    }
    ProbabilityMap::new(width, height, values)
}
