// SPDX-License-Identifier: Apache-2.0

//! Embedding costs.
//!
//! A learned change probability maps to an additive cost through
//! `ρ = ln(1/p - 2)`, whose inverse is `p = 1 / (e^ρ + 2)`. Going the other
//! way, [`calibrate_payload`] finds the Gibbs scale `μ` for which the
//! probabilities `e^{-μρ} / (1 + 2e^{-μρ})` carry exactly the requested
//! payload.

use crate::error::{Error, Result};
use crate::image_io::{self, check_dims, Image, ProbabilityMap, CMAP_MAGIC, MAX_PROBABILITY};
use crate::rate_loss::{ternary_entropy, EmbeddingConfig, KahanSum, MAX_TERNARY_ENTROPY};
use crate::srm;

/// Cost of a pixel that must never change.
pub const WET: f64 = 1e13;

/// Probabilities at or below this are treated as wet.
pub const WET_PROBABILITY: f64 = 1e-10;

pub const MAX_BISECTION_STEPS: usize = 200;

/// Relative capacity error accepted from the payload search.
pub const CALIBRATION_TOLERANCE: f64 = 1e-4;

const INITIAL_MU_BRACKET: (f64, f64) = (1e-6, 1e3);
const MAX_BRACKET_EXPANSIONS: usize = 60;

#[inline]
pub fn is_wet(cost: f64) -> bool {
    cost >= WET
}

/// Per-pixel embedding costs, row-major. Values are finite and nonnegative;
/// [`WET`] marks forbidden pixels.
#[derive(Debug, Clone, PartialEq)]
pub struct CostMap {
    width: usize,
    height: usize,
    values: Vec<f64>,
}

impl CostMap {
    pub fn new(width: usize, height: usize, values: Vec<f64>) -> Result<Self> {
        check_dims(width, height)?;
        if values.len() != width * height {
            return Err(Error::LengthMismatch {
                expected: width * height,
                actual: values.len(),
            });
        }
        if let Some(v) = values.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
            return Err(Error::invalid(format!(
                "cost {v} is not a finite nonnegative value"
            )));
        }
        let values = values.into_iter().map(|v| v.min(WET)).collect();
        Ok(Self {
            width,
            height,
            values,
        })
    }

    pub fn uniform(width: usize, height: usize, cost: f64) -> Result<Self> {
        check_dims(width, height)?;
        Self::new(width, height, vec![cost; width * height])
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

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn wet_count(&self) -> usize {
        self.values.iter().filter(|&&c| is_wet(c)).count()
    }
}

pub fn write_cmap(costs: &CostMap) -> Vec<u8> {
    image_io::write_container(CMAP_MAGIC, costs.width, costs.height, &costs.values)
}

/// Decodes a CMAP container. `WET` is not representable in binary32, so any
/// value at or above its binary32 rounding reads back as `WET`.
pub fn read_cmap(bytes: &[u8]) -> Result<CostMap> {
    let (width, height, values) = image_io::read_container(CMAP_MAGIC, bytes)?;
    let wet32 = f64::from(WET as f32);
    let values = values
        .into_iter()
        .map(|v| if v >= wet32 { WET } else { v })
        .collect();
    CostMap::new(width, height, values)
}

fn check_probability(p: f64) -> Result<()> {
    if !(0.0..=MAX_PROBABILITY).contains(&p) {
        return Err(Error::invalid(format!("probability {p} outside [0, 0.5]")));
    }
    Ok(())
}

/// `ln(1/p - 2)` without the clamp at zero: negative for `p > 1/3`,
/// `-inf` at `p = 0.5`. Wet below [`WET_PROBABILITY`].
pub fn prob_to_cost_unclamped(p: f64) -> Result<f64> {
    check_probability(p)?;
    if p <= WET_PROBABILITY {
        return Ok(WET);
    }
    Ok((1.0 / p - 2.0).ln())
}

/// `ln(1/p - 2)` clamped into `[0, WET]`.
pub fn prob_to_cost(p: f64) -> Result<f64> {
    Ok(prob_to_cost_unclamped(p)?.max(0.0))
}

/// `1 / (e^ρ + 2)`; wet costs give 0.
pub fn cost_to_prob(rho: f64) -> f64 {
    if is_wet(rho) {
        0.0
    } else {
        1.0 / (rho.exp() + 2.0)
    }
}

pub fn costs_from_probabilities(pmap: &ProbabilityMap) -> CostMap {
    let values = pmap
        .values()
        .iter()
        .map(|&p| prob_to_cost(p).expect("map values are validated"))
        .collect();
    CostMap {
        width: pmap.width(),
        height: pmap.height(),
        values,
    }
}

/// Raw `ln(1/p - 2)` per pixel, negative values kept, for analysis.
pub fn unclamped_costs(pmap: &ProbabilityMap) -> Vec<f64> {
    pmap.values()
        .iter()
        .map(|&p| prob_to_cost_unclamped(p).expect("map values are validated"))
        .collect()
}

/// Number of pixels whose cost was raised to 0 by the clamp (`p > 1/3`).
pub fn clamped_count(pmap: &ProbabilityMap) -> usize {
    unclamped_costs(pmap)
        .into_iter()
        .filter(|&rho| rho < 0.0)
        .count()
}

#[inline]
fn gibbs_probability(rho: f64, mu: f64) -> f64 {
    if is_wet(rho) {
        return 0.0;
    }
    let x = (-mu * rho).exp();
    x / (1.0 + 2.0 * x)
}

fn capacity_at(costs: &[f64], mu: f64) -> f64 {
    costs
        .iter()
        .map(|&rho| ternary_entropy(gibbs_probability(rho, mu)))
        .collect::<KahanSum>()
        .total()
}

/// Calibrated probabilities together with the scale that produced them.
#[derive(Debug, Clone, PartialEq)]
pub struct Calibration {
    pub pmap: ProbabilityMap,
    pub mu: f64,
    pub capacity_bits: f64,
    pub steps: usize,
}

/// Probability map with total ternary entropy `Q·H·W` for the given costs.
pub fn calibrate_payload(costs: &CostMap, cfg: &EmbeddingConfig) -> Result<ProbabilityMap> {
    calibrate_payload_detailed(costs, cfg).map(|c| c.pmap)
}

pub fn calibrate_payload_detailed(costs: &CostMap, cfg: &EmbeddingConfig) -> Result<Calibration> {
    image_io::ensure_same_dims((cfg.width(), cfg.height()), costs.dims())?;
    let values = costs.values();
    let target = cfg.target_bits();
    let dry = values.len() - costs.wet_count();
    if dry == 0 {
        return Err(Error::Infeasible("every pixel is wet".into()));
    }
    let ceiling = dry as f64 * MAX_TERNARY_ENTROPY;
    if target >= ceiling {
        return Err(Error::Infeasible(format!(
            "{target} bits requested, at most {ceiling} available from {dry} usable pixels"
        )));
    }

    let f = |mu: f64| capacity_at(values, mu) - target;
    let (mut lo, mut hi) = INITIAL_MU_BRACKET;
    let mut f_lo = f(lo);
    let mut expansions = 0;
    while f_lo < 0.0 {
        expansions += 1;
        if expansions > MAX_BRACKET_EXPANSIONS {
            return Err(Error::Infeasible(format!(
                "{target} bits requested, costs cannot supply them"
            )));
        }
        hi = lo;
        lo /= 10.0;
        f_lo = f(lo);
    }
    let mut f_hi = f(hi);
    expansions = 0;
    while f_hi > 0.0 {
        expansions += 1;
        if expansions > MAX_BRACKET_EXPANSIONS {
            return Err(Error::Infeasible(format!(
                "{target} bits requested, zero-cost pixels alone carry more"
            )));
        }
        lo = hi;
        f_lo = f_hi;
        hi *= 10.0;
        f_hi = f(hi);
    }

    // Capacity falls as μ grows; bisect in log μ.
    let (mut best_mu, mut best_f) = if f_lo.abs() <= f_hi.abs() {
        (lo, f_lo)
    } else {
        (hi, f_hi)
    };
    let mut steps = 0;
    while steps < MAX_BISECTION_STEPS {
        if best_f.abs() <= 1e-12 * target || hi / lo - 1.0 <= 4.0 * f64::EPSILON {
            break;
        }
        steps += 1;
        let mid = (lo * hi).sqrt();
        let f_mid = f(mid);
        if f_mid.abs() < best_f.abs() {
            best_mu = mid;
            best_f = f_mid;
        }
        if f_mid > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    if best_f.abs() > CALIBRATION_TOLERANCE * target {
        return Err(Error::NonConvergence {
            iterations: steps,
            residual: best_f,
        });
    }

    let probs = values
        .iter()
        .map(|&rho| gibbs_probability(rho, best_mu))
        .collect();
    Ok(Calibration {
        pmap: ProbabilityMap::new(costs.width, costs.height, probs)?,
        mu: best_mu,
        capacity_bits: best_f + target,
        steps,
    })
}

/// Texture-adaptive costs from SRM residual magnitudes: the mean absolute
/// residual over the 30 kernels, box-smoothed over 3×3, mapped through
/// `1 / (energy + 0.01)`. Smooth regions get high costs.
pub fn residual_energy_costs(img: &Image) -> Result<CostMap> {
    let stack = srm::residuals(img)?;
    let (w, h) = img.dims();
    let mut energy = vec![0.0; w * h];
    for plane in stack.planes() {
        for (e, r) in energy.iter_mut().zip(plane) {
            *e += r.abs();
        }
    }
    let count = stack.planes().len() as f64;
    let mut values = vec![0.0; w * h];
    for y in 0..h {
        for x in 0..w {
            let mut acc = 0.0;
            for dy in -1..=1isize {
                for dx in -1..=1isize {
                    let yy = srm::reflect(y as isize + dy, h);
                    let xx = srm::reflect(x as isize + dx, w);
                    acc += energy[yy * w + xx];
                }
            }
            values[y * w + x] = 1.0 / (acc / (9.0 * count) + 0.01);
        }
    }
    CostMap::new(w, h, values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::LN_2;

    #[test]
    fn conversion_examples() {
        assert!((prob_to_cost(0.25).unwrap() - LN_2).abs() < 1e-12);
        assert_eq!(prob_to_cost(1.0 / 3.0).unwrap(), 0.0);
        assert_eq!(prob_to_cost(0.0).unwrap(), WET);
        assert_eq!(prob_to_cost(1e-11).unwrap(), WET);
        assert_eq!(prob_to_cost(0.45).unwrap(), 0.0);
        assert!(prob_to_cost_unclamped(0.45).unwrap() < 0.0);
        assert!(prob_to_cost(0.6).is_err());

        assert!((cost_to_prob(LN_2) - 0.25).abs() < 1e-15);
        assert!((cost_to_prob(0.0) - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(cost_to_prob(WET), 0.0);
    }

    #[test]
    fn conversion_round_trip() {
        for k in 0..=2000 {
            let t = k as f64 / 2000.0;
            // log-spaced over [1e-9, 1/3]
            let p = (1e-9f64.ln() + t * ((1.0f64 / 3.0).ln() - 1e-9f64.ln())).exp();
            let back = cost_to_prob(prob_to_cost(p).unwrap());
            assert!((back - p).abs() < 1e-12, "p={p} back={back}");
        }
    }

    #[test]
    fn uniform_costs_calibrate_to_uniform_probability() {
        let costs = CostMap::uniform(64, 64, 3.0).unwrap();
        let q = ternary_entropy(0.2);
        let cfg = EmbeddingConfig::new(64, 64, q).unwrap();
        let pmap = calibrate_payload(&costs, &cfg).unwrap();
        for &p in pmap.values() {
            assert!((p - 0.2).abs() < 1e-6, "{p}");
        }
    }

    #[test]
    fn infeasible_payloads_are_reported() {
        let mut values = vec![1.0; 64];
        for v in values.iter_mut().take(32) {
            *v = WET;
        }
        let costs = CostMap::new(8, 8, values).unwrap();
        let cfg = EmbeddingConfig::new(8, 8, 0.9).unwrap();
        assert!(matches!(
            calibrate_payload(&costs, &cfg),
            Err(Error::Infeasible(_))
        ));

        let all_wet = CostMap::uniform(4, 4, WET).unwrap();
        let cfg = EmbeddingConfig::new(4, 4, 0.1).unwrap();
        assert!(matches!(
            calibrate_payload(&all_wet, &cfg),
            Err(Error::Infeasible(_))
        ));
    }

    #[test]
    fn wet_pixels_get_zero_probability() {
        let mut values = vec![2.0; 100];
        values[5] = WET;
        values[50] = WET;
        let costs = CostMap::new(10, 10, values).unwrap();
        let cfg = EmbeddingConfig::new(10, 10, 0.3).unwrap();
        let pmap = calibrate_payload(&costs, &cfg).unwrap();
        assert_eq!(pmap.values()[5], 0.0);
        assert_eq!(pmap.values()[50], 0.0);
        assert!(pmap.values()[6] > 0.0);
    }

    #[test]
    fn zero_cost_floor_is_infeasible_below_it() {
        // Half the pixels are free, so capacity never drops below 50·log2(3).
        let values = (0..100).map(|i| if i < 50 { 0.0 } else { 1.0 }).collect();
        let costs = CostMap::new(10, 10, values).unwrap();
        let cfg = EmbeddingConfig::new(10, 10, 0.1).unwrap();
        assert!(matches!(
            calibrate_payload(&costs, &cfg),
            Err(Error::Infeasible(_))
        ));
    }

    #[test]
    fn cmap_round_trip_keeps_wet() {
        let costs = CostMap::new(3, 1, vec![0.0, 1.5, WET]).unwrap();
        let back = read_cmap(&write_cmap(&costs)).unwrap();
        assert_eq!(back, costs);
        assert!(CostMap::new(1, 1, vec![-1.0]).is_err());
        assert!(CostMap::new(1, 1, vec![f64::INFINITY]).is_err());
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let costs = CostMap::uniform(4, 8, 1.0).unwrap();
        let cfg = EmbeddingConfig::new(4, 8, 0.1).unwrap();
        assert!(matches!(
            calibrate_payload(&costs, &cfg),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn clamped_count_counts_high_probabilities() {
        let pmap = ProbabilityMap::new(4, 1, vec![0.1, 0.34, 0.5, 1.0 / 3.0]).unwrap();
        assert_eq!(clamped_count(&pmap), 2);
    }
}
