#![allow(dead_code)]

use poledyn::MapDef;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random map with `1 ≤ m ≤ 4`, `αᵢ ∈ [0.1, 5]`, poles in `[-5, 5]` at least `min_gap` apart.
pub fn random_map(rng: &mut ChaCha8Rng, min_gap: f64) -> MapDef {
    let m = rng.random_range(1..=4usize);
    loop {
        let mut betas: Vec<f64> = (0..m)
            .map(|_| (rng.random_range(-5.0..=5.0f64) * 1000.0).round() / 1000.0)
            .collect();
        betas.sort_by(f64::total_cmp);
        if betas.windows(2).any(|w| w[1] - w[0] < min_gap) {
            continue;
        }
        let alphas: Vec<String> = (0..m)
            .map(|_| format!("{:.3}", rng.random_range(0.1..=5.0f64)))
            .collect();
        let betas: Vec<String> = betas.iter().map(|b| format!("{b:.3}")).collect();
        return MapDef::parse(&alphas, &betas).expect("generated map is valid");
    }
}

/// Up to four disjoint intervals with endpoints in `[-20, 20]`, as f64 pairs.
pub fn random_pairs(rng: &mut ChaCha8Rng) -> Vec<(f64, f64)> {
    let n = rng.random_range(1..=4usize);
    let mut ends: Vec<f64> = (0..2 * n).map(|_| rng.random_range(-20.0..=20.0f64)).collect();
    ends.sort_by(f64::total_cmp);
    ends.chunks(2).map(|c| (c[0], c[1])).collect()
}
