// SPDX-License-Identifier: Apache-2.0

//! Syndrome-trellis codes.
//!
//! The parity-check matrix `H` (m × n) is built from a small sub-matrix `Ĥ`
//! (h × w): message bit `i` owns a block of consecutive cover positions, and
//! each position's column of `H` is a column of `Ĥ` placed with its top row on
//! row `i`. Rows past `m` are cut off. Block `i` spans
//! `[⌊i·n/m⌋, ⌊(i+1)·n/m⌋)`, so widths differ by at most one and every cover
//! position is used; position `k` of a block takes column `k mod w` of `Ĥ`.
//!
//! Embedding runs Viterbi over the `2^h` partial syndromes of the rows the
//! current block can still touch. After each block the lowest row is fixed
//! to its message bit and shifted out. Extraction is the plain product
//! `H·y` over GF(2).

use rand::seq::SliceRandom;
use rand::Rng;

use crate::cost::{is_wet, prob_to_cost};
use crate::error::{Error, Result};
use crate::image_io::{ensure_same_dims, Image, ProbabilityMap};
use crate::rng::{self, Stream};
use crate::simulator::modify_pixel;

pub const MIN_CONSTRAINT_HEIGHT: usize = 2;
pub const MAX_CONSTRAINT_HEIGHT: usize = 12;
pub const DEFAULT_CONSTRAINT_HEIGHT: usize = 7;

/// An ordered sequence of bits.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct BitVector(Vec<bool>);

impl BitVector {
    pub fn zeros(len: usize) -> Self {
        Self(vec![false; len])
    }

    pub fn from_bits(bits: Vec<bool>) -> Self {
        Self(bits)
    }

    /// Builds from `0`/`1` bytes; anything nonzero counts as 1.
    pub fn from_u8s(bits: &[u8]) -> Self {
        Self(bits.iter().map(|&b| b != 0).collect())
    }

    pub fn random<R: Rng>(len: usize, rng: &mut R) -> Self {
        Self((0..len).map(|_| rng.gen()).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, i: usize) -> bool {
        self.0[i]
    }

    pub fn set(&mut self, i: usize, bit: bool) {
        self.0[i] = bit;
    }

    pub fn as_slice(&self) -> &[bool] {
        &self.0
    }

    pub fn count_ones(&self) -> usize {
        self.0.iter().filter(|&&b| b).count()
    }

    /// Copy padded with zeros (or truncated) to `len` bits.
    pub fn resized(&self, len: usize) -> Self {
        let mut bits = self.0.clone();
        bits.resize(len, false);
        Self(bits)
    }

    /// Raw bit file: bit count as u64 little-endian, then the bits packed
    /// most-significant first, the last byte zero-padded.
    pub fn to_bit_file(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(8 + self.0.len().div_ceil(8));
        out.extend_from_slice(&(self.0.len() as u64).to_le_bytes());
        for chunk in self.0.chunks(8) {
            let byte = chunk
                .iter()
                .enumerate()
                .fold(0u8, |acc, (i, &b)| acc | (u8::from(b) << (7 - i)));
            out.push(byte);
        }
        out
    }

    pub fn from_bit_file(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < 8 {
            return Err(Error::format("bit file shorter than its length prefix"));
        }
        let len = u64::from_le_bytes(bytes[..8].try_into().unwrap());
        let len = usize::try_from(len).map_err(|_| Error::format("bit count overflows"))?;
        let body = &bytes[8..];
        if body.len() != len.div_ceil(8) {
            return Err(Error::format(format!(
                "bit file declares {len} bits but carries {} bytes",
                body.len()
            )));
        }
        Ok(Self(
            (0..len)
                .map(|i| body[i / 8] & (0x80 >> (i % 8)) != 0)
                .collect(),
        ))
    }

    /// Binary message image: intensities of 128 and above are 1.
    pub fn from_image(img: &Image) -> Self {
        Self(img.pixels().iter().map(|&v| v >= 128).collect())
    }

    /// Renders bits as a black (0) and white (255) image.
    pub fn to_image(&self, width: usize, height: usize) -> Result<Image> {
        Image::new(
            width,
            height,
            self.0.iter().map(|&b| if b { 255 } else { 0 }).collect(),
        )
    }
}

impl From<Vec<bool>> for BitVector {
    fn from(bits: Vec<bool>) -> Self {
        Self(bits)
    }
}

/// Sub-matrices with the lowest uniform-cost flip counts found by
/// `examples/search_submatrices.rs`, as `(height, columns)`.
pub const TUNED_SUBMATRICES: &[(usize, &[u32])] = &[
    (7, &[0x05b, 0x071]),
    (7, &[0x041, 0x05b, 0x07d]),
    (7, &[0x047, 0x065, 0x07b, 0x051]),
    (7, &[0x051, 0x07d, 0x069, 0x077, 0x04b]),
    (7, &[0x067, 0x04b, 0x051, 0x069, 0x07d, 0x053]),
    (10, &[0x34b, 0x2cf]),
    (10, &[0x345, 0x3b7, 0x233]),
    (10, &[0x255, 0x2f1, 0x3cb, 0x23f]),
    (10, &[0x381, 0x2ad, 0x2df, 0x273, 0x367]),
    (10, &[0x233, 0x3af, 0x2c3, 0x361, 0x317, 0x259]),
    (12, &[0xa1b, 0xe93]),
    (12, &[0xd2d, 0xa6f, 0xbe7]),
    (12, &[0xaaf, 0x87f, 0xe55, 0xfd9]),
    (12, &[0x945, 0xeef, 0xcc1, 0xf2f, 0xc5b]),
    (12, &[0x983, 0xce7, 0xfd9, 0xaf3, 0xb79, 0xca1]),
];

/// The sub-matrix `Ĥ` and the message length it is used with.
///
/// Columns are stored as bit masks, bit `r` holding row `r`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StcParams {
    height: usize,
    columns: Vec<u32>,
    message_length: usize,
}

impl StcParams {
    pub fn new(height: usize, columns: Vec<u32>, message_length: usize) -> Result<Self> {
        if !(MIN_CONSTRAINT_HEIGHT..=MAX_CONSTRAINT_HEIGHT).contains(&height) {
            return Err(Error::invalid(format!(
                "constraint height {height} outside [{MIN_CONSTRAINT_HEIGHT}, {MAX_CONSTRAINT_HEIGHT}]"
            )));
        }
        if columns.is_empty() {
            return Err(Error::invalid("sub-matrix needs at least one column"));
        }
        let full = (1u32 << height) - 1;
        if let Some(c) = columns.iter().find(|&&c| c & !full != 0) {
            return Err(Error::invalid(format!(
                "column {c:#x} exceeds {height} rows"
            )));
        }
        let union = columns.iter().fold(0, |acc, &c| acc | c);
        if union & 1 == 0 || union & (1 << (height - 1)) == 0 {
            return Err(Error::invalid(
                "first and last rows of the sub-matrix must be nonzero",
            ));
        }
        Ok(Self {
            height,
            columns,
            message_length,
        })
    }

    /// From an explicit 0/1 matrix given row by row.
    pub fn from_rows(rows: &[Vec<u8>], message_length: usize) -> Result<Self> {
        let width = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != width) {
            return Err(Error::invalid("sub-matrix rows differ in length"));
        }
        let columns = (0..width)
            .map(|c| {
                rows.iter()
                    .enumerate()
                    .fold(0u32, |acc, (r, row)| acc | (u32::from(row[c] != 0) << r))
            })
            .collect();
        Self::new(rows.len(), columns, message_length)
    }

    /// A deterministic `height × width` sub-matrix whose columns all have
    /// their first and last bits set, distinct where the height allows.
    /// Shapes in [`TUNED_SUBMATRICES`] come from that table.
    pub fn generated(height: usize, width: usize, message_length: usize) -> Result<Self> {
        if !(MIN_CONSTRAINT_HEIGHT..=MAX_CONSTRAINT_HEIGHT).contains(&height) || width == 0 {
            return Err(Error::invalid(format!("sub-matrix shape {height}x{width}")));
        }
        if let Some((_, cols)) = TUNED_SUBMATRICES
            .iter()
            .find(|(h, cols)| *h == height && cols.len() == width)
        {
            return Self::new(height, cols.to_vec(), message_length);
        }
        let seed = 0x5354_4300_0000_0000 ^ ((height as u64) << 32) ^ width as u64;
        let mut rng = rng::stream(seed, Stream::SubMatrix);
        let edges = 1u32 | (1 << (height - 1));
        let free = ((1u32 << height) - 1) & !edges;
        let distinct = 1usize << (height - 2);
        let mut columns: Vec<u32> = Vec::with_capacity(width);
        while columns.len() < width {
            let c = (rng.gen::<u32>() & free) | edges;
            if columns.len() >= distinct || !columns.contains(&c) {
                columns.push(c);
            }
        }
        Self::new(height, columns, message_length)
    }

    /// Generated sub-matrix sized for `message_length` bits in `cover_length`
    /// positions: width `⌈n/m⌉`.
    pub fn for_payload(height: usize, cover_length: usize, message_length: usize) -> Result<Self> {
        if message_length == 0 || message_length > cover_length {
            return Err(Error::MessageTooLong {
                message: message_length,
                cover: cover_length,
            });
        }
        Self::generated(
            height,
            cover_length.div_ceil(message_length),
            message_length,
        )
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.columns.len()
    }

    pub fn columns(&self) -> &[u32] {
        &self.columns
    }

    pub fn message_length(&self) -> usize {
        self.message_length
    }

    /// `Ĥ` as a row-major 0/1 matrix.
    pub fn rows(&self) -> Vec<Vec<u8>> {
        (0..self.height)
            .map(|r| self.columns.iter().map(|c| ((c >> r) & 1) as u8).collect())
            .collect()
    }

    /// Column of `H` for offset `k` inside block `block`, with rows past
    /// the message cut off. Bit 0 is row `block`.
    #[inline]
    fn column(&self, block: usize, k: usize) -> u32 {
        let live = (self.message_length - block).min(self.height);
        self.columns[k % self.columns.len()] & ((1u32 << live) - 1)
    }

    fn check_lengths(&self, cover_length: usize) -> Result<()> {
        if self.message_length > cover_length {
            return Err(Error::MessageTooLong {
                message: self.message_length,
                cover: cover_length,
            });
        }
        Ok(())
    }
}

/// Cover positions owned by message bit `block`.
#[inline]
pub fn block_bounds(block: usize, cover_length: usize, message_length: usize) -> (usize, usize) {
    let start = block * cover_length / message_length;
    let end = (block + 1) * cover_length / message_length;
    (start, end)
}

#[derive(Debug, Clone, PartialEq)]
pub struct StcEmbedding {
    pub stego: BitVector,
    /// Sum of costs over changed positions, in position order.
    pub distortion: f64,
    pub changes: usize,
}

/// Minimum-cost `y` with `H·y = message`. Positions with [`is_wet`] costs
/// are never changed; cost ties resolve toward keeping the cover bit.
pub fn stc_embed(
    cover: &BitVector,
    costs: &[f64],
    message: &BitVector,
    params: &StcParams,
) -> Result<StcEmbedding> {
    let n = cover.len();
    let m = message.len();
    if costs.len() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            actual: costs.len(),
        });
    }
    if m != params.message_length {
        return Err(Error::LengthMismatch {
            expected: params.message_length,
            actual: m,
        });
    }
    params.check_lengths(n)?;
    if let Some(c) = costs.iter().find(|c| c.is_nan() || **c < 0.0) {
        return Err(Error::invalid(format!("cost {c} is negative or NaN")));
    }
    if m == 0 {
        return Ok(StcEmbedding {
            stego: cover.clone(),
            distortion: 0.0,
            changes: 0,
        });
    }

    let states = 1usize << params.height;
    let words = states.div_ceil(64);
    let mut decisions = vec![0u64; n * words];
    let mut cost = vec![f64::INFINITY; states];
    let mut next = vec![f64::INFINITY; states];
    cost[0] = 0.0;

    for block in 0..m {
        let (start, end) = block_bounds(block, n, m);
        for j in start..end {
            let col = params.column(block, j - start) as usize;
            let rho = if is_wet(costs[j]) {
                f64::INFINITY
            } else {
                costs[j]
            };
            let keep = cover.get(j);
            let (cost0, cost1) = if keep { (rho, 0.0) } else { (0.0, rho) };
            let row = &mut decisions[j * words..(j + 1) * words];
            for (w, word) in row.iter_mut().enumerate() {
                let base = w * 64;
                let mut bits = 0u64;
                for t in 0..(states - base).min(64) {
                    let s = base + t;
                    let a = cost[s] + cost0;
                    let b = cost[s ^ col] + cost1;
                    let y = (b < a) | ((a == b) & keep);
                    next[s] = if y { b } else { a };
                    bits |= u64::from(y) << t;
                }
                *word = bits;
            }
            std::mem::swap(&mut cost, &mut next);
        }
        let bit = usize::from(message.get(block));
        for s in 0..states / 2 {
            next[s] = cost[(s << 1) | bit];
        }
        next[states / 2..].fill(f64::INFINITY);
        std::mem::swap(&mut cost, &mut next);
    }

    if !cost[0].is_finite() {
        return Err(Error::Infeasible(
            "no syndrome-satisfying path avoids the wet positions".into(),
        ));
    }

    let mut stego = vec![false; n];
    let mut s = 0usize;
    for block in (0..m).rev() {
        s = (s << 1) | usize::from(message.get(block));
        let (start, end) = block_bounds(block, n, m);
        for j in (start..end).rev() {
            let y = decisions[j * words + (s >> 6)] >> (s & 63) & 1 == 1;
            stego[j] = y;
            if y {
                s ^= params.column(block, j - start) as usize;
            }
        }
    }
    debug_assert_eq!(s, 0);

    let mut distortion = 0.0;
    let mut changes = 0;
    for (j, &y) in stego.iter().enumerate() {
        if y != cover.get(j) {
            distortion += costs[j];
            changes += 1;
        }
    }
    Ok(StcEmbedding {
        stego: BitVector(stego),
        distortion,
        changes,
    })
}

/// The syndrome `H·y`.
pub fn stc_extract(stego: &BitVector, params: &StcParams) -> Result<BitVector> {
    let n = stego.len();
    let m = params.message_length;
    params.check_lengths(n)?;
    let mut message = vec![false; m];
    let mut window = 0u32;
    for (block, bit) in message.iter_mut().enumerate() {
        let (start, end) = block_bounds(block, n, m);
        for j in start..end {
            if stego.get(j) {
                window ^= params.column(block, j - start);
            }
        }
        *bit = window & 1 == 1;
        window >>= 1;
    }
    Ok(BitVector(message))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScanOrder {
    RowMajor,
    /// Seeded pseudo-random permutation, spreading each block over the image.
    Interleaved,
}

/// Order in which pixels feed the trellis.
pub fn scan_order(width: usize, height: usize, order: ScanOrder, seed: u64) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..width * height).collect();
    if order == ScanOrder::Interleaved {
        idx.shuffle(&mut rng::stream(seed, Stream::Scan));
    }
    idx
}

/// `round(Q · pixels)`.
pub fn message_length_for_payload(payload: f64, width: usize, height: usize) -> usize {
    (payload * (width * height) as f64).round() as usize
}

#[derive(Debug, Clone, PartialEq)]
pub struct StegoImage {
    pub image: Image,
    pub changes: usize,
    pub distortion: f64,
}

/// Embeds `message` into the LSB plane of `cover`, pricing each pixel with
/// the cost of its change probability. Each changed pixel moves by ±1 with
/// a seeded fair sign, except that 0 only rises and 255 only falls.
pub fn embed_image(
    cover: &Image,
    pmap: &ProbabilityMap,
    message: &BitVector,
    params: &StcParams,
    order: ScanOrder,
    seed: u64,
) -> Result<StegoImage> {
    ensure_same_dims(cover.dims(), pmap.dims())?;
    let (w, h) = cover.dims();
    let perm = scan_order(w, h, order, seed);
    let pixels = cover.pixels();
    let bits = BitVector(perm.iter().map(|&i| pixels[i] & 1 == 1).collect());
    let costs = perm
        .iter()
        .map(|&i| prob_to_cost(pmap.values()[i]))
        .collect::<Result<Vec<f64>>>()?;
    let embedding = stc_embed(&bits, &costs, message, params)?;

    let mut signs = rng::stream(seed, Stream::Sign);
    let mut out = pixels.to_vec();
    for (k, &i) in perm.iter().enumerate() {
        if embedding.stego.get(k) != bits.get(k) {
            let change = if signs.gen::<bool>() { 1 } else { -1 };
            out[i] = modify_pixel(pixels[i], change);
        }
    }
    Ok(StegoImage {
        image: Image::new(w, h, out)?,
        changes: embedding.changes,
        distortion: embedding.distortion,
    })
}

pub fn extract_image(
    stego: &Image,
    params: &StcParams,
    order: ScanOrder,
    seed: u64,
) -> Result<BitVector> {
    let (w, h) = stego.dims();
    let pixels = stego.pixels();
    let bits = BitVector(
        scan_order(w, h, order, seed)
            .iter()
            .map(|&i| pixels[i] & 1 == 1)
            .collect(),
    );
    stc_extract(&bits, params)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cost::WET;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn small_params() -> StcParams {
        StcParams::from_rows(&[vec![1, 0], vec![1, 1]], 4).unwrap()
    }

    #[test]
    fn matching_syndrome_needs_no_changes() {
        let params = small_params();
        let cover = BitVector::from_u8s(&[1, 0, 1, 1, 0, 0, 1, 0]);
        let message = stc_extract(&cover, &params).unwrap();
        let costs = vec![1.0; 8];
        let e = stc_embed(&cover, &costs, &message, &params).unwrap();
        assert_eq!(e.stego, cover);
        assert_eq!(e.distortion, 0.0);
        assert_eq!(e.changes, 0);
    }

    #[test]
    fn embed_then_extract_recovers_message() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..50 {
            let n = rng.gen_range(20..200);
            let m = rng.gen_range(1..=n / 2);
            let h = rng.gen_range(2..=8);
            let params = StcParams::for_payload(h, n, m).unwrap();
            let cover = BitVector::random(n, &mut rng);
            let message = BitVector::random(m, &mut rng);
            let costs: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..5.0)).collect();
            let e = stc_embed(&cover, &costs, &message, &params).unwrap();
            assert_eq!(stc_extract(&e.stego, &params).unwrap(), message);
        }
    }

    #[test]
    fn zero_stego_has_zero_syndrome() {
        let params = StcParams::for_payload(7, 1000, 250).unwrap();
        let msg = stc_extract(&BitVector::zeros(1000), &params).unwrap();
        assert_eq!(msg.count_ones(), 0);
    }

    #[test]
    fn single_flip_changes_syndrome() {
        let params = StcParams::for_payload(5, 64, 16).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let y = BitVector::random(64, &mut rng);
        let base = stc_extract(&y, &params).unwrap();
        for j in 0..64 {
            let mut z = y.clone();
            z.set(j, !z.get(j));
            assert_ne!(stc_extract(&z, &params).unwrap(), base, "position {j}");
        }
    }

    #[test]
    fn wet_positions_are_untouched() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let n = 400;
        let params = StcParams::for_payload(7, n, 100).unwrap();
        let cover = BitVector::random(n, &mut rng);
        let message = BitVector::random(100, &mut rng);
        let costs: Vec<f64> = (0..n)
            .map(|j| {
                if j % 3 == 0 {
                    WET
                } else {
                    rng.gen_range(0.0..1.0)
                }
            })
            .collect();
        let e = stc_embed(&cover, &costs, &message, &params).unwrap();
        for j in (0..n).step_by(3) {
            assert_eq!(e.stego.get(j), cover.get(j));
        }
        assert_eq!(stc_extract(&e.stego, &params).unwrap(), message);
    }

    #[test]
    fn all_wet_is_infeasible() {
        let params = small_params();
        let cover = BitVector::zeros(8);
        let message = BitVector::from_u8s(&[1, 0, 0, 0]);
        let e = stc_embed(&cover, &[WET; 8], &message, &params);
        assert!(matches!(e, Err(Error::Infeasible(_))));
    }

    #[test]
    fn length_errors() {
        let params = small_params();
        let cover = BitVector::zeros(3);
        let message = BitVector::zeros(4);
        assert!(matches!(
            stc_embed(&cover, &[0.0; 3], &message, &params),
            Err(Error::MessageTooLong { .. })
        ));
        assert!(matches!(
            stc_embed(&BitVector::zeros(8), &[0.0; 7], &message, &params),
            Err(Error::LengthMismatch { .. })
        ));
        assert!(matches!(
            stc_embed(
                &BitVector::zeros(8),
                &[0.0; 8],
                &BitVector::zeros(3),
                &params
            ),
            Err(Error::LengthMismatch { .. })
        ));
        assert!(stc_extract(&cover, &params).is_err());
        assert!(stc_embed(&BitVector::zeros(8), &[f64::NAN; 8], &message, &params).is_err());
    }

    #[test]
    fn params_validation() {
        assert!(StcParams::new(1, vec![1], 1).is_err());
        assert!(StcParams::new(13, vec![1 | 1 << 12], 1).is_err());
        assert!(StcParams::new(3, vec![], 1).is_err());
        assert!(StcParams::new(3, vec![0b011], 1).is_err());
        assert!(StcParams::new(3, vec![0b110], 1).is_err());
        assert!(StcParams::new(3, vec![0b1001], 1).is_err());
        assert!(StcParams::new(3, vec![0b001, 0b100], 1).is_ok());
        let p = StcParams::from_rows(&[vec![1, 0], vec![1, 1]], 4).unwrap();
        assert_eq!(p.columns(), &[0b11, 0b10]);
        assert_eq!(p.rows(), vec![vec![1, 0], vec![1, 1]]);
    }

    #[test]
    fn generated_matrices_are_deterministic() {
        let a = StcParams::generated(7, 4, 100).unwrap();
        assert_eq!(a, StcParams::generated(7, 4, 100).unwrap());
        assert!(a.columns().iter().all(|c| c & 1 == 1 && c & (1 << 6) != 0));
        let mut cols = a.columns().to_vec();
        cols.dedup();
        assert_eq!(cols.len(), 4);
        // Wide matrices at small heights must repeat columns and still terminate.
        assert_eq!(StcParams::generated(2, 10, 1).unwrap().width(), 10);
    }

    #[test]
    fn blocks_partition_the_cover() {
        for (n, m) in [(10, 3), (65536, 16384), (7, 7), (100, 1)] {
            let mut next = 0;
            for i in 0..m {
                let (s, e) = block_bounds(i, n, m);
                assert_eq!(s, next);
                assert!(e > s);
                next = e;
            }
            assert_eq!(next, n);
        }
    }

    #[test]
    fn scan_orders() {
        assert_eq!(scan_order(2, 2, ScanOrder::RowMajor, 5), vec![0, 1, 2, 3]);
        let a = scan_order(16, 16, ScanOrder::Interleaved, 5);
        assert_eq!(a, scan_order(16, 16, ScanOrder::Interleaved, 5));
        assert_ne!(a, scan_order(16, 16, ScanOrder::Interleaved, 6));
        let mut sorted = a.clone();
        sorted.sort_unstable();
        assert_eq!(sorted, (0..256).collect::<Vec<_>>());
    }

    #[test]
    fn bit_file_layout() {
        let bits = BitVector::from_u8s(&[1, 0, 1, 1, 0, 0, 0, 0, 1]);
        let bytes = bits.to_bit_file();
        assert_eq!(&bytes[..8], &9u64.to_le_bytes());
        assert_eq!(&bytes[8..], &[0b1011_0000, 0b1000_0000]);
        assert_eq!(BitVector::from_bit_file(&bytes).unwrap(), bits);
        assert!(BitVector::from_bit_file(&bytes[..9]).is_err());
        assert!(BitVector::from_bit_file(&[1, 2]).is_err());
    }

    #[test]
    fn message_image_thresholds_at_128() {
        let img = Image::new(4, 1, vec![0, 127, 128, 255]).unwrap();
        let bits = BitVector::from_image(&img);
        assert_eq!(bits, BitVector::from_u8s(&[0, 0, 1, 1]));
        assert_eq!(bits.to_image(4, 1).unwrap().pixels(), &[0, 0, 255, 255]);
    }

    #[test]
    fn embed_image_changes_by_at_most_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let (w, h) = (32, 32);
        let mut pixels: Vec<u8> = (0..w * h).map(|_| rng.gen()).collect();
        pixels[0] = 0;
        pixels[1] = 255;
        let cover = Image::new(w, h, pixels).unwrap();
        let pmap =
            ProbabilityMap::new(w, h, (0..w * h).map(|_| rng.gen_range(0.01..0.5)).collect())
                .unwrap();
        let message = BitVector::random(256, &mut rng);
        let params = StcParams::for_payload(7, w * h, 256).unwrap();
        let stego =
            embed_image(&cover, &pmap, &message, &params, ScanOrder::Interleaved, 77).unwrap();
        for (a, b) in cover.pixels().iter().zip(stego.image.pixels()) {
            assert!((i16::from(*a) - i16::from(*b)).abs() <= 1);
        }
        assert_eq!(
            extract_image(&stego.image, &params, ScanOrder::Interleaved, 77).unwrap(),
            message
        );
        assert_ne!(
            extract_image(&stego.image, &params, ScanOrder::Interleaved, 78).unwrap(),
            message
        );
    }
}
