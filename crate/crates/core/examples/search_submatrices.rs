// SPDX-License-Identifier: Apache-2.0

//! Random search for sub-matrices with low flip counts under uniform costs.
//! Prints the table used by `StcParams::generated`.
//!
//! cargo run --release -p stego-core --example search_submatrices

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use stego_core::stc::stc_embed;
use stego_core::{BitVector, StcParams};

const MESSAGE_BITS: usize = 1000;

fn mean_flips(params: &StcParams, width: usize, trials: usize, seed: u64) -> f64 {
    let n = width * MESSAGE_BITS;
    let costs = vec![1.0; n];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut total = 0;
    for _ in 0..trials {
        let cover = BitVector::random(n, &mut rng);
        let message = BitVector::random(MESSAGE_BITS, &mut rng);
        total += stc_embed(&cover, &costs, &message, params).unwrap().changes;
    }
    total as f64 / trials as f64
}

fn candidate(height: usize, width: usize, rng: &mut ChaCha8Rng) -> Vec<u32> {
    let edges = 1u32 | (1 << (height - 1));
    let mut cols: Vec<u32> = Vec::with_capacity(width);
    while cols.len() < width {
        let c = (rng.gen::<u32>() & ((1 << height) - 1)) | edges;
        if !cols.contains(&c) {
            cols.push(c);
        }
    }
    cols
}

fn main() {
    for (height, candidates) in [(7usize, 300usize), (10, 80), (12, 30)] {
        for width in 2..=6usize {
            let mut rng = ChaCha8Rng::seed_from_u64((height * 100 + width) as u64);
            let mut scored: Vec<(f64, Vec<u32>)> = (0..candidates)
                .map(|_| {
                    let cols = candidate(height, width, &mut rng);
                    let p = StcParams::new(height, cols.clone(), MESSAGE_BITS).unwrap();
                    (mean_flips(&p, width, 4, 1), cols)
                })
                .collect();
            scored.sort_by(|a, b| a.0.total_cmp(&b.0));
            let best = scored
                .iter()
                .take(5)
                .map(|(_, cols)| {
                    let p = StcParams::new(height, cols.clone(), MESSAGE_BITS).unwrap();
                    (mean_flips(&p, width, 30, 2), cols)
                })
                .min_by(|a, b| a.0.total_cmp(&b.0))
                .unwrap();
            let hex: Vec<String> = best.1.iter().map(|c| format!("{c:#05x}")).collect();
            println!(
                "    ({height}, &[{}]), // {:.2} flips",
                hex.join(", "),
                best.0
            );
        }
    }
}
