// SPDX-License-Identifier: Apache-2.0

//! Independent reference implementations used by the integration tests.
//! Nothing here calls into the code paths it is used to check.

#![allow(dead_code)]

use rand::Rng;
use stego_core::srm::{FilterBank, KERNEL_SIZE};
use stego_core::{BitVector, Image, StcParams};

/// Explicit parity-check matrix, row-major, rows as `Vec<bool>`.
pub fn dense_parity_check(params: &StcParams, n: usize) -> Vec<Vec<bool>> {
    let m = params.message_length();
    let w = params.width();
    let mut rows = vec![vec![false; n]; m];
    for block in 0..m {
        let start = block * n / m;
        let end = (block + 1) * n / m;
        for j in start..end {
            let col = params.columns()[(j - start) % w];
            for (r, row) in rows
                .iter_mut()
                .skip(block)
                .take(params.height())
                .enumerate()
            {
                if col >> r & 1 == 1 {
                    row[j] = true;
                }
            }
        }
    }
    rows
}

pub fn dense_syndrome(rows: &[Vec<bool>], y: &[bool]) -> Vec<bool> {
    rows.iter()
        .map(|row| row.iter().zip(y).filter(|(h, b)| **h && **b).count() % 2 == 1)
        .collect()
}

/// Minimum distortion over every `y` in `{0,1}^n` with `H·y = message`,
/// summing costs in position order. `None` when no such `y` avoids `wet`.
pub fn brute_force_min_distortion(
    params: &StcParams,
    cover: &BitVector,
    costs: &[f64],
    message: &BitVector,
    wet: f64,
) -> Option<f64> {
    let n = cover.len();
    assert!(n <= 20, "brute force limited to small n");
    let pack = |bits: &[bool]| {
        bits.iter()
            .rev()
            .fold(0u32, |acc, &b| acc << 1 | u32::from(b))
    };
    let rows: Vec<u32> = dense_parity_check(params, n)
        .iter()
        .map(|r| pack(r))
        .collect();
    let target = pack(message.as_slice());
    let x = pack(cover.as_slice());
    let mut best: Option<f64> = None;
    'outer: for y in 0u32..(1 << n) {
        let syndrome = rows
            .iter()
            .enumerate()
            .fold(0u32, |acc, (i, r)| acc | ((r & y).count_ones() & 1) << i);
        if syndrome != target {
            continue;
        }
        let mut d = 0.0;
        let mut diff = x ^ y;
        while diff != 0 {
            let j = diff.trailing_zeros() as usize;
            if costs[j] >= wet {
                continue 'outer;
            }
            d += costs[j];
            diff &= diff - 1;
        }
        if best.is_none_or(|b| d < b) {
            best = Some(d);
        }
    }
    best
}

fn mirror(i: isize, n: usize) -> usize {
    let n = n as isize;
    let mut i = i;
    if i < 0 {
        i = -i;
    }
    if i > n - 1 {
        i = 2 * (n - 1) - i;
    }
    i as usize
}

/// Quadruple-loop cross-correlation over all 25 taps, column-major over the
/// kernel, with optional absolute-valued numerators.
pub fn direct_correlation(
    values: &[f64],
    width: usize,
    height: usize,
    bank: &FilterBank,
    absolute: bool,
) -> Vec<Vec<f64>> {
    let half = (KERNEL_SIZE / 2) as isize;
    bank.kernels()
        .iter()
        .map(|k| {
            let mut plane = vec![0.0; width * height];
            for y in 0..height {
                for x in 0..width {
                    let mut acc = 0.0f64;
                    for c in 0..KERNEL_SIZE {
                        for r in 0..KERNEL_SIZE {
                            let mut num = k.numerators[r][c];
                            if absolute {
                                num = num.abs();
                            }
                            let yy = mirror(y as isize + r as isize - half, height);
                            let xx = mirror(x as isize + c as isize - half, width);
                            acc += num as f64 * values[yy * width + xx];
                        }
                    }
                    plane[y * width + x] = acc / k.divisor as f64;
                }
            }
            plane
        })
        .collect()
}

/// `tanh(x) - tanh(y)` as `sinh(x - y) / (cosh x · cosh y)`, which keeps
/// full relative precision when both sides saturate.
fn tanh_difference(x: f64, y: f64) -> f64 {
    (x - y).sinh() / (x.cosh() * y.cosh())
}

/// Central finite difference in `p` of the tanh simulator.
pub fn tanh_simulator_fd(p: f64, n: f64, lambda: f64, h: f64) -> f64 {
    let (hi, lo) = (p + h, p - h);
    let first = tanh_difference(lambda * (hi - 2.0 * n), lambda * (lo - 2.0 * n));
    let second = tanh_difference(
        lambda * (hi - 2.0 * (1.0 - n)),
        lambda * (lo - 2.0 * (1.0 - n)),
    );
    (-0.5 * first + 0.5 * second) / (hi - lo)
}

/// Root of `H3(p) = bits` on `[0, 0.5]` by bisection.
pub fn inverse_ternary_entropy(bits: f64) -> f64 {
    let h3 = |p: f64| {
        let t = |x: f64| if x > 0.0 { -x * x.log2() } else { 0.0 };
        2.0 * t(p / 2.0) + t(1.0 - p)
    };
    let (mut lo, mut hi) = (0.0, 0.5);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if h3(mid) < bits {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Root of the binary entropy `H2(p) = rate` on `[0, 0.5]`.
pub fn inverse_binary_entropy(rate: f64) -> f64 {
    let h2 = |p: f64| -p * p.log2() - (1.0 - p) * (1.0 - p).log2();
    let (mut lo, mut hi) = (1e-300, 0.5);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if h2(mid) < rate {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Synthetic cover: a smooth left half and a noisy right half, with a few
/// saturated pixels.
pub fn half_flat_half_noise<R: Rng>(width: usize, height: usize, rng: &mut R) -> Image {
    let mut pixels = vec![0u8; width * height];
    for y in 0..height {
        for x in 0..width {
            pixels[y * width + x] = if x < width / 2 {
                (96 + (x + y) / 8 % 4) as u8
            } else {
                rng.gen()
            };
        }
    }
    pixels[0] = 0;
    pixels[width - 1] = 255;
    Image::new(width, height, pixels).unwrap()
}

/// Random textured cover with smooth gradients, noise and saturated runs.
pub fn textured_cover<R: Rng>(width: usize, height: usize, rng: &mut R) -> Image {
    let fx = rng.gen_range(0.01..0.2);
    let fy = rng.gen_range(0.01..0.2);
    let amp = rng.gen_range(2.0..40.0);
    let mut pixels = Vec::with_capacity(width * height);
    for y in 0..height {
        for x in 0..width {
            let base = 128.0 + 100.0 * ((x as f64 * fx).sin() * (y as f64 * fy).cos());
            let noise = if (x / 32 + y / 32) % 2 == 0 {
                rng.gen_range(-amp..amp)
            } else {
                0.0
            };
            pixels.push((base + noise).round().clamp(0.0, 255.0) as u8);
        }
    }
    for v in pixels.iter_mut().take(width) {
        *v = 255;
    }
    for v in pixels.iter_mut().rev().take(width) {
        *v = 0;
    }
    Image::new(width, height, pixels).unwrap()
}

/// Smooth gradient with noise whose amplitude varies per 16×16 tile, so
/// every region has some texture. A few pixels are saturated.
pub fn noisy_cover<R: Rng>(width: usize, height: usize, rng: &mut R) -> Image {
    let tiles_x = width.div_ceil(16);
    let amps: Vec<f64> = (0..tiles_x * height.div_ceil(16))
        .map(|_| rng.gen_range(1.0..30.0))
        .collect();
    let (gx, gy) = (rng.gen_range(-0.5..0.5), rng.gen_range(-0.5..0.5));
    let mut pixels = Vec::with_capacity(width * height);
    for y in 0..height {
        for x in 0..width {
            let amp = amps[(y / 16) * tiles_x + x / 16];
            let v = 128.0 + gx * x as f64 + gy * y as f64 + rng.gen_range(-amp..amp);
            pixels.push(v.round().clamp(0.0, 255.0) as u8);
        }
    }
    pixels[0] = 0;
    pixels[width * height - 1] = 255;
    Image::new(width, height, pixels).unwrap()
}
