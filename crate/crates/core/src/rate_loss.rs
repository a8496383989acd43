// SPDX-License-Identifier: Apache-2.0

//! Ternary capacity and the adversarial training losses.
//!
//! A pixel with change probability `p` is modified by +1 or -1 with
//! probability `p/2` each and left alone with probability `1 - p`. Its
//! ternary entropy, summed over the image, is the capacity `C` in bits. The
//! generator is trained on
//!
//! ```text
//! l_G = -α · l_D + β · (C - H·W·Q)²
//! ```
//!
//! where `l_D` is the discriminator's softmax cross-entropy.

use crate::error::{Error, Result};
use crate::image_io::{ProbabilityMap, MAX_PROBABILITY};

/// `log2(3)`, the largest ternary entropy.
pub const MAX_TERNARY_ENTROPY: f64 = 1.584_962_500_721_156;

/// Largest payload allowed in an [`EmbeddingConfig`], bits per pixel.
pub const MAX_PAYLOAD: f64 = 1.5;

/// Probabilities are clamped to this floor before a cross-entropy log.
pub const LOG_CLAMP: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TernarySplit {
    pub plus: f64,
    pub minus: f64,
    pub zero: f64,
}

pub fn split_probability(p: f64) -> Result<TernarySplit> {
    if !(0.0..=MAX_PROBABILITY).contains(&p) {
        return Err(Error::invalid(format!("probability {p} outside [0, 0.5]")));
    }
    let half = p / 2.0;
    Ok(TernarySplit {
        plus: half,
        minus: half,
        zero: 1.0 - p,
    })
}

#[inline]
fn xlog2x(x: f64) -> f64 {
    if x > 0.0 {
        x * x.log2()
    } else {
        0.0
    }
}

/// Entropy in bits of the split `(p/2, p/2, 1 - p)`, with `0·log 0 = 0`.
#[inline]
pub fn ternary_entropy(p: f64) -> f64 {
    -2.0 * xlog2x(p / 2.0) - xlog2x(1.0 - p)
}

/// Kahan-compensated running sum.
#[derive(Debug, Default, Clone, Copy)]
pub(crate) struct KahanSum {
    sum: f64,
    carry: f64,
}

impl KahanSum {
    #[inline]
    pub(crate) fn add(&mut self, value: f64) {
        let y = value - self.carry;
        let t = self.sum + y;
        self.carry = (t - self.sum) - y;
        self.sum = t;
    }

    pub(crate) fn total(&self) -> f64 {
        self.sum
    }
}

impl FromIterator<f64> for KahanSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = KahanSum::default();
        for v in iter {
            acc.add(v);
        }
        acc
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CapacityReport {
    pub total_bits: f64,
    pub per_pixel: Vec<f64>,
}

impl CapacityReport {
    /// Capacity divided by pixel count.
    pub fn bits_per_pixel(&self) -> f64 {
        self.total_bits / self.per_pixel.len() as f64
    }
}

pub fn capacity(pmap: &ProbabilityMap) -> CapacityReport {
    let per_pixel: Vec<f64> = pmap.values().iter().map(|&p| ternary_entropy(p)).collect();
    let total_bits = per_pixel.iter().copied().collect::<KahanSum>().total();
    CapacityReport {
        total_bits,
        per_pixel,
    }
}

/// Total capacity in bits without keeping the per-pixel raster.
pub fn capacity_bits(values: &[f64]) -> f64 {
    values
        .iter()
        .map(|&p| ternary_entropy(p))
        .collect::<KahanSum>()
        .total()
}

/// Image size and target payload.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmbeddingConfig {
    height: usize,
    width: usize,
    payload: f64,
}

impl EmbeddingConfig {
    pub fn new(height: usize, width: usize, payload: f64) -> Result<Self> {
        if height == 0 || width == 0 {
            return Err(Error::invalid(format!("image size {width}x{height}")));
        }
        if !(payload > 0.0 && payload <= MAX_PAYLOAD) {
            return Err(Error::invalid(format!(
                "payload {payload} bpp outside (0, {MAX_PAYLOAD}]"
            )));
        }
        Ok(Self {
            height,
            width,
            payload,
        })
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn payload(&self) -> f64 {
        self.payload
    }

    /// `H · W · Q`.
    pub fn target_bits(&self) -> f64 {
        (self.height * self.width) as f64 * self.payload
    }
}

/// Weights of the adversarial and payload terms in the generator loss.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossConfig {
    pub alpha: f64,
    pub beta: f64,
}

impl LossConfig {
    /// Either weight may be zero to isolate one term, but not both.
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        let ok = |w: f64| w.is_finite() && w >= 0.0;
        if !ok(alpha) || !ok(beta) || (alpha == 0.0 && beta == 0.0) {
            return Err(Error::invalid(format!(
                "loss weights alpha={alpha} beta={beta}"
            )));
        }
        Ok(Self { alpha, beta })
    }
}

impl Default for LossConfig {
    fn default() -> Self {
        Self {
            alpha: 1.0,
            beta: 1e-7,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Label {
    Cover,
    Stego,
}

impl Label {
    /// Index of this class in the discriminator's softmax pair.
    pub fn index(self) -> usize {
        match self {
            Label::Cover => 0,
            Label::Stego => 1,
        }
    }
}

/// Cross-entropy of a `(cover, stego)` softmax pair against a one-hot label,
/// in nats.
pub fn discriminator_loss(outputs: [f64; 2], label: Label) -> Result<f64> {
    if outputs.iter().any(|y| !y.is_finite() || *y < 0.0)
        || ((outputs[0] + outputs[1]) - 1.0).abs() > 1e-6
    {
        return Err(Error::invalid(format!(
            "softmax outputs {outputs:?} are not a distribution"
        )));
    }
    let y = outputs[label.index()].clamp(LOG_CLAMP, 1.0);
    Ok(-y.ln())
}

/// Per-sample generator loss `-α·l_D + β·(C - H·W·Q)²`.
pub fn generator_loss(
    l_d: f64,
    cap: &CapacityReport,
    cfg: &EmbeddingConfig,
    weights: &LossConfig,
) -> f64 {
    generator_loss_from_bits(l_d, cap.total_bits, cfg, weights)
}

pub fn generator_loss_from_bits(
    l_d: f64,
    capacity_bits: f64,
    cfg: &EmbeddingConfig,
    weights: &LossConfig,
) -> f64 {
    let gap = capacity_bits - cfg.target_bits();
    -weights.alpha * l_d + weights.beta * gap * gap
}
