#![allow(dead_code)]

pub mod scalar;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `n` columns of length `m` drawn from a random rank-`r` subspace with
/// decaying coefficients, plus uniform noise of amplitude `noise`.
pub fn low_rank_stream(m: usize, n: usize, r: usize, noise: f64, seed: u64) -> Vec<Vec<f64>> {
    let mut g = rng(seed);
    let basis: Vec<Vec<f64>> = (0..r).map(|_| (0..m).map(|_| g.gen_range(-1.0..1.0)).collect()).collect();
    (0..n)
        .map(|_| {
            let mut u = vec![0.0; m];
            for (k, b) in basis.iter().enumerate() {
                let c = g.gen_range(-1.0..1.0) / (k + 1) as f64;
                for (x, y) in u.iter_mut().zip(b) {
                    *x += c * y;
                }
            }
            if noise > 0.0 {
                u.iter_mut().for_each(|x| *x += noise * g.gen_range(-1.0..1.0));
            }
            u
        })
        .collect()
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}
