mod common;

use nonfickian_isvd::grid::TimeGrid;
use nonfickian_isvd::kernels::{CqWeights, VarpiMode};
use rand::Rng;
use statrs::function::gamma::{gamma, gamma_lr, ln_gamma};

/// Coefficients of `((3 − 4ζ + ζ²)/2)^{−α} = (3/2)^{−α}(1−ζ)^{−α}(1−ζ/3)^{−α}`
/// from log-gamma binomials.
fn chi_oracle(alpha: f64, n: usize) -> f64 {
    let binom = |s: usize| (ln_gamma(alpha + s as f64) - ln_gamma(alpha) - ln_gamma(s as f64 + 1.0)).exp();
    let acc: f64 = (0..=n).map(|s| binom(s) * binom(n - s) * 3f64.powi(-(s as i32))).sum();
    1.5f64.powf(-alpha) * acc
}

/// `∫₀ᵗ e^{−λτ} τ^{α−1}/Γ(α) dτ = λ^{−α} P(α, λt)`.
fn abel_oracle(alpha: f64, lambda: f64, t: f64) -> f64 {
    if lambda == 0.0 {
        t.powf(alpha) / gamma(alpha + 1.0)
    } else {
        lambda.powf(-alpha) * gamma_lr(alpha, lambda * t)
    }
}

#[test]
fn first_weight_is_exact() {
    for alpha in [0.1, 0.5, 0.8, 0.99] {
        let g = TimeGrid::uniform(1.0, 3).unwrap();
        let w = CqWeights::new(alpha, 0.7, &g).unwrap();
        assert_eq!(w.chi()[0], 1.5f64.powf(-alpha));
    }
}

#[test]
fn chi_matches_series_oracle() {
    let (alpha, lambda) = (0.8, 0.2);
    let g = TimeGrid::uniform(1.0, 60).unwrap();
    let w = CqWeights::new(alpha, lambda, &g).unwrap();
    for n in 0..=60 {
        let want = (-lambda * g.t(n)).exp() * chi_oracle(alpha, n);
        assert!((w.chi()[n] / want - 1.0).abs() < 1e-12, "n={n}");
    }
}

#[test]
fn constant_exactness() {
    for (alpha, lambda) in [(0.8, 0.2), (0.3, 0.0), (0.5, 2.0)] {
        let g = TimeGrid::uniform(1.0, 40).unwrap();
        let w = CqWeights::new(alpha, lambda, &g).unwrap();
        let ones = vec![1.0; 41];
        for n in 1..=40 {
            let err = (w.apply(&ones, n) - abel_oracle(alpha, lambda, g.t(n))).abs();
            assert!(err <= 1e-12, "alpha={alpha} n={n} err={err:e}");
        }
    }
}

#[test]
fn convolution_form_is_positive() {
    let mut g = common::rng(5);
    for (alpha, lambda) in [(0.8, 0.2), (0.3, 0.0), (0.95, 1.0)] {
        let n = 64;
        let grid = TimeGrid::uniform(1.0, n).unwrap();
        let w = CqWeights::new(alpha, lambda, &grid).unwrap();
        let omega: Vec<f64> = w.chi().iter().map(|c| w.dt_alpha() * c).collect();
        for _ in 0..200 {
            let v: Vec<f64> = (0..=n).map(|_| g.gen_range(-1.0..1.0)).collect();
            let mut q = 0.0;
            for i in 0..=n {
                for j in 0..=i {
                    q += v[i] * omega[i - j] * v[j];
                }
            }
            assert!(q >= -1e-12, "alpha={alpha} q={q:e}");
        }
    }
}

#[test]
fn second_order_on_smooth_integrands() {
    let (alpha, lambda) = (0.8, 0.2);
    let cases: [fn(f64) -> f64; 3] = [f64::cos, f64::exp, |s| 1.0 + s * s];
    for phi in cases {
        let mut prev: Option<f64> = None;
        for steps in [32, 64, 128] {
            let g = TimeGrid::uniform(1.0, steps).unwrap();
            let w = CqWeights::new(alpha, lambda, &g).unwrap();
            let samples: Vec<f64> = g.nodes().iter().map(|&t| phi(t)).collect();
            let err = (w.apply(&samples, steps) - w.reference(phi, 1.0).unwrap()).abs();
            if let Some(p) = prev {
                let ratio = p / err;
                assert!((3.5..=4.5).contains(&ratio), "ratio {ratio}");
            }
            prev = Some(err);
        }
    }
}

#[test]
fn chi_decays_like_the_kernel() {
    let alpha = 0.6;
    let n = 10_000;
    let g = TimeGrid::uniform(1.0, n).unwrap();
    let w = CqWeights::new(alpha, 0.0, &g).unwrap();
    assert!(w.chi()[1..].windows(2).all(|p| p[1] <= p[0]));
    let scaled = w.chi()[n] * (n as f64).powf(1.0 - alpha) * gamma(alpha);
    assert!((scaled - 1.0).abs() < 1e-3, "{scaled}");
}

#[test]
fn printed_and_exact_starting_weights_differ() {
    let g = TimeGrid::uniform(1.0, 8).unwrap();
    let a = CqWeights::with_mode(0.8, 0.2, &g, VarpiMode::ExactConstant).unwrap();
    let b = CqWeights::with_mode(0.8, 0.2, &g, VarpiMode::PaperPrinted).unwrap();
    assert_eq!(a.chi(), b.chi());
    assert!((a.varpi()[8] - b.varpi()[8]).abs() > 0.1);
}
