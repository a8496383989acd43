// SPDX-License-Identifier: Apache-2.0

//! Embedding simulators.
//!
//! The optimal embedding simulator turns a change probability `p` and a
//! uniform draw `n` into a ternary change:
//!
//! ```text
//! m = -1  if n < p/2
//! m = +1  if n > 1 - p/2
//! m =  0  otherwise
//! ```
//!
//! It is a staircase in `p` with zero derivative almost everywhere, so the
//! trainer uses a smooth fit built from two scaled `tanh` steps:
//!
//! ```text
//! m' = -0.5 tanh(λ(p - 2n)) + 0.5 tanh(λ(p - 2(1 - n)))
//! ```
//!
//! Larger `λ` sharpens the fit. The default is 1000.

use rand::Rng;

use crate::error::{Error, Result};
use crate::image_io::{check_dims, ensure_same_dims, Image, ProbabilityMap};
use crate::rng::{self, Stream};

/// Upper bound on `p` accepted by the simulators. Maps never exceed 0.5; the
/// extra room exists so the `p = 0.6` curves can be reproduced.
pub const SIMULATOR_MAX_PROBABILITY: f64 = 0.6;

pub const DEFAULT_LAMBDA: f64 = 1000.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimulatorParams {
    lambda: f64,
}

impl SimulatorParams {
    pub fn new(lambda: f64) -> Result<Self> {
        if !(lambda.is_finite() && lambda > 0.0) {
            return Err(Error::invalid(format!(
                "lambda must be positive, got {lambda}"
            )));
        }
        Ok(Self { lambda })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }
}

impl Default for SimulatorParams {
    fn default() -> Self {
        Self {
            lambda: DEFAULT_LAMBDA,
        }
    }
}

/// Uniform noise in `[0, 1)`, one value per pixel.
#[derive(Debug, Clone, PartialEq)]
pub struct RandomField {
    width: usize,
    height: usize,
    values: Vec<f64>,
}

impl RandomField {
    pub fn new(width: usize, height: usize, values: Vec<f64>) -> Result<Self> {
        check_dims(width, height)?;
        if values.len() != width * height {
            return Err(Error::LengthMismatch {
                expected: width * height,
                actual: values.len(),
            });
        }
        if let Some(v) = values.iter().find(|v| !(0.0..1.0).contains(*v)) {
            return Err(Error::invalid(format!("noise value {v} outside [0, 1)")));
        }
        Ok(Self {
            width,
            height,
            values,
        })
    }

    /// Draws the field from the seed's noise stream, row-major.
    pub fn uniform(width: usize, height: usize, seed: u64) -> Result<Self> {
        check_dims(width, height)?;
        let mut rng = rng::stream(seed, Stream::Noise);
        let values = (0..width * height).map(|_| rng.gen::<f64>()).collect();
        Ok(Self {
            width,
            height,
            values,
        })
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// Ternary per-pixel changes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModificationMap {
    width: usize,
    height: usize,
    values: Vec<i8>,
}

impl ModificationMap {
    pub fn new(width: usize, height: usize, values: Vec<i8>) -> Result<Self> {
        check_dims(width, height)?;
        if values.len() != width * height {
            return Err(Error::LengthMismatch {
                expected: width * height,
                actual: values.len(),
            });
        }
        if let Some(v) = values.iter().find(|v| !(-1..=1).contains(*v)) {
            return Err(Error::invalid(format!(
                "modification {v} not in {{-1, 0, 1}}"
            )));
        }
        Ok(Self {
            width,
            height,
            values,
        })
    }

    pub fn zeros(width: usize, height: usize) -> Result<Self> {
        check_dims(width, height)?;
        Ok(Self {
            width,
            height,
            values: vec![0; width * height],
        })
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn values(&self) -> &[i8] {
        &self.values
    }

    /// Number of nonzero entries.
    pub fn change_count(&self) -> usize {
        self.values.iter().filter(|&&m| m != 0).count()
    }
}

/// Real-valued output of the tanh simulator, each entry in `[-1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SoftModificationMap {
    width: usize,
    height: usize,
    values: Vec<f64>,
}

impl SoftModificationMap {
    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Nearest ternary change per pixel.
    pub fn round(&self) -> ModificationMap {
        ModificationMap {
            width: self.width,
            height: self.height,
            values: self
                .values
                .iter()
                .map(|v| v.round().clamp(-1.0, 1.0) as i8)
                .collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SimMode {
    Staircase,
    Tanh,
}

#[derive(Debug, Clone, PartialEq)]
pub enum SimOutput {
    Staircase(ModificationMap),
    Tanh(SoftModificationMap),
}

fn check_args(p: f64, n: f64) -> Result<()> {
    if !(0.0..=SIMULATOR_MAX_PROBABILITY).contains(&p) {
        return Err(Error::invalid(format!("probability {p} outside [0, 0.6]")));
    }
    if !(0.0..1.0).contains(&n) {
        return Err(Error::invalid(format!("noise {n} outside [0, 1)")));
    }
    Ok(())
}

#[inline]
fn staircase_unchecked(p: f64, n: f64) -> i8 {
    let half = p / 2.0;
    if n < half {
        -1
    } else if n > 1.0 - half {
        1
    } else {
        0
    }
}

#[inline]
fn tanh_unchecked(p: f64, n: f64, lambda: f64) -> f64 {
    -0.5 * (lambda * (p - 2.0 * n)).tanh() + 0.5 * (lambda * (p - 2.0 * (1.0 - n))).tanh()
}

/// `sech²(x)` evaluated through `e^{-2|x|}` so it decays to 0 without overflow.
#[inline]
fn sech_squared(x: f64) -> f64 {
    let e = (-2.0 * x.abs()).exp();
    4.0 * e / ((1.0 + e) * (1.0 + e))
}

/// Ties at a stair edge map to 0.
pub fn staircase_simulate(p: f64, n: f64) -> Result<i8> {
    check_args(p, n)?;
    Ok(staircase_unchecked(p, n))
}

pub fn tanh_simulate(p: f64, n: f64, params: SimulatorParams) -> Result<f64> {
    check_args(p, n)?;
    Ok(tanh_unchecked(p, n, params.lambda))
}

/// Derivative of [`tanh_simulate`] with respect to `p`.
pub fn tanh_simulate_grad(p: f64, n: f64, params: SimulatorParams) -> Result<f64> {
    check_args(p, n)?;
    let l = params.lambda;
    Ok(-0.5 * l * sech_squared(l * (p - 2.0 * n))
        + 0.5 * l * sech_squared(l * (p - 2.0 * (1.0 - n))))
}

fn check_pmap_for_sim(pmap: &ProbabilityMap, noise: &RandomField) -> Result<()> {
    ensure_same_dims(pmap.dims(), noise.dims())
}

pub fn staircase_map(pmap: &ProbabilityMap, noise: &RandomField) -> Result<ModificationMap> {
    check_pmap_for_sim(pmap, noise)?;
    let values = pmap
        .values()
        .iter()
        .zip(&noise.values)
        .map(|(&p, &n)| staircase_unchecked(p, n))
        .collect();
    Ok(ModificationMap {
        width: pmap.width(),
        height: pmap.height(),
        values,
    })
}

pub fn tanh_map(
    pmap: &ProbabilityMap,
    noise: &RandomField,
    params: SimulatorParams,
) -> Result<SoftModificationMap> {
    check_pmap_for_sim(pmap, noise)?;
    let values = pmap
        .values()
        .iter()
        .zip(&noise.values)
        .map(|(&p, &n)| tanh_unchecked(p, n, params.lambda))
        .collect();
    Ok(SoftModificationMap {
        width: pmap.width(),
        height: pmap.height(),
        values,
    })
}

pub fn simulate_map(
    pmap: &ProbabilityMap,
    noise: &RandomField,
    mode: SimMode,
    params: SimulatorParams,
) -> Result<SimOutput> {
    Ok(match mode {
        SimMode::Staircase => SimOutput::Staircase(staircase_map(pmap, noise)?),
        SimMode::Tanh => SimOutput::Tanh(tanh_map(pmap, noise, params)?),
    })
}

/// Adds a ternary change to a pixel. A change that would leave `[0, 255]`
/// is reversed, which still flips the LSB.
#[inline]
pub fn modify_pixel(pixel: u8, change: i8) -> u8 {
    match (pixel, change) {
        (255, 1) => 254,
        (0, -1) => 1,
        (p, c) => (i16::from(p) + i16::from(c)) as u8,
    }
}

pub fn apply_modification(cover: &Image, mods: &ModificationMap) -> Result<Image> {
    ensure_same_dims(cover.dims(), mods.dims())?;
    let pixels = cover
        .pixels()
        .iter()
        .zip(&mods.values)
        .map(|(&x, &m)| modify_pixel(x, m))
        .collect();
    Image::new(cover.width(), cover.height(), pixels)
}
