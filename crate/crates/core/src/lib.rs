// SPDX-License-Identifier: Apache-2.0

//! Minimal-distortion steganographic coding for grayscale images.
//!
//! The crate covers the full path from a learned embedding-change
//! probability map to a practical stego image:
//!
//! - [`simulator`]: the staircase embedding simulator and its smooth
//!   tanh surrogate with analytic gradient.
//! - [`rate_loss`]: ternary entropy, capacity and the adversarial losses.
//! - [`cost`]: probability/cost conversion and payload calibration.
//! - [`stc`]: syndrome-trellis embedding and extraction on the LSB plane.
//! - [`srm`]: the 30-kernel high-pass filter bank and residuals.
//! - [`image_io`]: PGM and the PMAP/CMAP/MMAP raster containers.

pub mod cost;
pub mod error;
pub mod image_io;
pub mod rate_loss;
pub mod rng;
pub mod simulator;
pub mod srm;
pub mod stc;

pub use cost::CostMap;
pub use error::{Error, Result};
pub use image_io::{Image, ProbabilityMap};
pub use stc::{BitVector, StcParams};
