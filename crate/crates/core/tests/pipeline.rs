// SPDX-License-Identifier: Apache-2.0

mod common;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use stego_core::cost::{calibrate_payload, residual_energy_costs, CostMap};
use stego_core::rate_loss::{capacity, EmbeddingConfig};
use stego_core::simulator::{staircase_map, RandomField};
use stego_core::stc::{
    embed_image, extract_image, message_length_for_payload, stc_embed, ScanOrder,
    DEFAULT_CONSTRAINT_HEIGHT,
};
use stego_core::{BitVector, Image, ProbabilityMap, StcParams};

fn calibrated(cover: &Image, q: f64) -> ProbabilityMap {
    let costs = residual_energy_costs(cover).unwrap();
    let cfg = EmbeddingConfig::new(cover.height(), cover.width(), q).unwrap();
    calibrate_payload(&costs, &cfg).unwrap()
}

fn assert_bounded_changes(cover: &Image, stego: &Image) -> usize {
    let mut changed = 0;
    for (&a, &b) in cover.pixels().iter().zip(stego.pixels()) {
        let d = (i16::from(a) - i16::from(b)).abs();
        assert!(d <= 1, "pixel moved by {d}");
        changed += usize::from(d == 1);
    }
    changed
}

#[test]
fn round_trip_at_table_payloads() {
    let mut rng = ChaCha8Rng::seed_from_u64(200);
    for (k, q) in [0.1, 0.2, 0.4].into_iter().enumerate() {
        let cover = common::textured_cover(512, 512, &mut rng);
        let pmap = calibrated(&cover, q);
        let m = message_length_for_payload(q, 512, 512);
        let params = StcParams::for_payload(DEFAULT_CONSTRAINT_HEIGHT, 512 * 512, m).unwrap();
        let message = BitVector::random(m, &mut rng);
        let order = if k % 2 == 0 {
            ScanOrder::Interleaved
        } else {
            ScanOrder::RowMajor
        };
        let stego = embed_image(&cover, &pmap, &message, &params, order, 7 + k as u64).unwrap();
        assert_eq!(assert_bounded_changes(&cover, &stego.image), stego.changes);
        let back = extract_image(&stego.image, &params, order, 7 + k as u64).unwrap();
        assert_eq!(back, message, "payload {q}");
    }
}

#[test]
fn binary_image_message_round_trip() {
    let mut rng = ChaCha8Rng::seed_from_u64(201);
    let cover = common::half_flat_half_noise(256, 256, &mut rng);
    let logo: Vec<u8> = (0..128 * 128)
        .map(|k| {
            if ((k % 128) / 16 + (k / 128) / 16) % 2 == 0 {
                255
            } else {
                0
            }
        })
        .collect();
    let logo = Image::new(128, 128, logo).unwrap();
    let message = BitVector::from_image(&logo);
    let pmap = calibrated(&cover, 0.25);
    let params =
        StcParams::for_payload(DEFAULT_CONSTRAINT_HEIGHT, 256 * 256, message.len()).unwrap();
    let stego = embed_image(&cover, &pmap, &message, &params, ScanOrder::Interleaved, 3).unwrap();
    assert_bounded_changes(&cover, &stego.image);
    let back = extract_image(&stego.image, &params, ScanOrder::Interleaved, 3).unwrap();
    assert_eq!(back.to_image(128, 128).unwrap(), logo);
}

#[test]
fn changes_concentrate_on_high_probability_pixels() {
    let mut rng = ChaCha8Rng::seed_from_u64(202);
    let cover = common::half_flat_half_noise(256, 256, &mut rng);
    let pmap = calibrated(&cover, 0.1);
    let m = message_length_for_payload(0.1, 256, 256);
    let params = StcParams::for_payload(DEFAULT_CONSTRAINT_HEIGHT, 256 * 256, m).unwrap();
    let message = BitVector::random(m, &mut rng);
    let stego = embed_image(&cover, &pmap, &message, &params, ScanOrder::Interleaved, 11).unwrap();
    let flipped: Vec<f64> = cover
        .pixels()
        .iter()
        .zip(stego.image.pixels())
        .zip(pmap.values())
        .filter(|((a, b), _)| a != b)
        .map(|(_, &p)| p)
        .collect();
    let flipped_mean = flipped.iter().sum::<f64>() / flipped.len() as f64;
    assert!(
        flipped_mean > pmap.mean(),
        "{flipped_mean} vs {}",
        pmap.mean()
    );

    let noisy_half = cover
        .pixels()
        .iter()
        .zip(stego.image.pixels())
        .enumerate()
        .filter(|(i, (a, b))| a != b && i % 256 >= 128)
        .count();
    assert!(
        noisy_half * 10 > flipped.len() * 8,
        "{noisy_half} of {}",
        flipped.len()
    );
}

#[test]
fn textured_regions_get_higher_probabilities() {
    let mut rng = ChaCha8Rng::seed_from_u64(203);
    let cover = common::half_flat_half_noise(128, 128, &mut rng);
    let pmap = calibrated(&cover, 0.4);
    let half_mean = |right: bool| {
        let sum: f64 = (0..128 * 128)
            .filter(|i| (i % 128 >= 64) == right)
            .map(|i| pmap.values()[i])
            .sum();
        sum / (64.0 * 128.0)
    };
    assert!(half_mean(true) > 5.0 * half_mean(false));
}

#[test]
fn uniform_cost_flips_track_binary_entropy_bound() {
    // With equal costs the trellis minimises the flip count, which for long
    // codes approaches n·H2⁻¹(m/n).
    let mut rng = ChaCha8Rng::seed_from_u64(204);
    let (n, m, trials) = (4000, 1000, 1000);
    let params = StcParams::for_payload(12, n, m).unwrap();
    let costs = vec![1.0; n];
    let mut total = 0usize;
    for _ in 0..trials {
        let cover = BitVector::random(n, &mut rng);
        let message = BitVector::random(m, &mut rng);
        total += stc_embed(&cover, &costs, &message, &params)
            .unwrap()
            .changes;
    }
    let mean = total as f64 / trials as f64;
    let bound = n as f64 * common::inverse_binary_entropy(m as f64 / n as f64);
    assert!(mean >= bound, "{mean} below the bound {bound}");
    assert!(mean <= 1.1 * bound, "{mean} vs bound {bound}");
}

#[test]
fn staircase_change_rate_matches_probabilities() {
    let mut rng = ChaCha8Rng::seed_from_u64(205);
    let values: Vec<f64> = (0..256 * 256).map(|_| rng.gen_range(0.0..=0.5)).collect();
    let pmap = ProbabilityMap::new(256, 256, values).unwrap();
    let expected: f64 = pmap.values().iter().sum();
    let variance: f64 = pmap.values().iter().map(|p| p * (1.0 - p)).sum();
    let (mut plus, mut minus) = (0usize, 0usize);
    for seed in 0..20 {
        let noise = RandomField::uniform(256, 256, seed).unwrap();
        let mods = staircase_map(&pmap, &noise).unwrap();
        assert!(((mods.change_count() as f64 - expected) / variance.sqrt()).abs() < 4.0);
        plus += mods.values().iter().filter(|&&v| v == 1).count();
        minus += mods.values().iter().filter(|&&v| v == -1).count();
    }
    let ratio = plus as f64 / (plus + minus) as f64;
    assert!((ratio - 0.5).abs() < 0.005, "sign balance {ratio}");
}

#[test]
fn calibrated_capacity_is_near_target_on_image_costs() {
    let mut rng = ChaCha8Rng::seed_from_u64(206);
    let cover = common::textured_cover(256, 256, &mut rng);
    let costs: CostMap = residual_energy_costs(&cover).unwrap();
    for q in [0.1, 0.2, 0.4] {
        let cfg = EmbeddingConfig::new(256, 256, q).unwrap();
        let c = capacity(&calibrate_payload(&costs, &cfg).unwrap()).total_bits;
        assert!(((c - cfg.target_bits()) / cfg.target_bits()).abs() < 1e-4);
    }
}
