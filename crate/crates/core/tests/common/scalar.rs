//! Hand-written recurrences for the single-unknown problem on the `n_div = 2`
//! mesh: `m u' + a u + b ∫₀ᵗ K(t−s) u(s) ds = ℓ(t)` with `m = 1/8`,
//! `a = b = 4` and `ℓ(t) = (1+t)/4` (load of `f = 1+t` against the hat
//! function of the centre node).

use statrs::function::gamma::{gamma, gamma_lr, ln_gamma};

pub const M: f64 = 0.125;
pub const A: f64 = 4.0;
pub const B: f64 = 4.0;

pub fn load(t: f64) -> f64 {
    (1.0 + t) / 4.0
}

/// Crank–Nicolson with the midpoint memory rule.
pub fn cn(kernel: impl Fn(f64) -> f64, u0: f64, steps: usize) -> Vec<f64> {
    let dt = 1.0 / steps as f64;
    let t = |n: usize| n as f64 * dt;
    let mid = |n: usize| (n as f64 - 0.5) * dt;
    let k0 = kernel(0.0);
    let mut u = vec![u0];
    for n in 1..=steps {
        let half_tail = 0.5 * dt * (mid(n) - t(n - 1)) * k0;
        let lhs = M + 0.5 * dt * A + half_tail * B;
        let mut rhs = (M - 0.5 * dt * A - half_tail * B) * u[n - 1];
        let mut mem = 0.0;
        for j in 1..n {
            mem += kernel(mid(n) - mid(j)) * dt * 0.5 * (u[j] + u[j - 1]);
        }
        rhs += dt * (0.5 * (load(t(n - 1)) + load(t(n))) - B * mem);
        u.push(rhs / lhs);
    }
    u
}

/// `𝒳ₙ` without the exponential factor, from log-gamma binomials.
fn chi0(alpha: f64, n: usize) -> f64 {
    let binom = |s: usize| (ln_gamma(alpha + s as f64) - ln_gamma(alpha) - ln_gamma(s as f64 + 1.0)).exp();
    1.5f64.powf(-alpha) * (0..=n).map(|s| binom(s) * binom(n - s) / 3f64.powi(s as i32)).sum::<f64>()
}

/// BDF2 (backward Euler first step) with convolution quadrature for
/// `K(t) = e^{−λt}t^{α−1}/Γ(α)`; starting weights make `φ ≡ 1` exact.
pub fn bdf2_cq(alpha: f64, lambda: f64, u0: f64, steps: usize) -> Vec<f64> {
    let dt = 1.0 / steps as f64;
    let da = dt.powf(alpha);
    let chi: Vec<f64> = (0..=steps).map(|n| (-lambda * n as f64 * dt).exp() * chi0(alpha, n)).collect();
    let abel = |t: f64| {
        if lambda == 0.0 {
            t.powf(alpha) / gamma(1.0 + alpha)
        } else {
            lambda.powf(-alpha) * gamma_lr(alpha, lambda * t)
        }
    };
    let mut u = vec![u0];
    for n in 1..=steps {
        let tn = n as f64 * dt;
        let varpi = abel(tn) - da * chi[..=n].iter().sum::<f64>();
        let hist: f64 = (1..=n).map(|p| chi[p] * u[n - p]).sum();
        let (lead, prev) = if n == 1 {
            (M / dt, M * u[0] / dt)
        } else {
            (1.5 * M / dt, M * (4.0 * u[n - 1] - u[n - 2]) / (2.0 * dt))
        };
        let lhs = lead + A + da * chi[0] * B;
        let rhs = prev + load(tn) - B * (da * hist + varpi * u0);
        u.push(rhs / lhs);
    }
    u
}

/// Backward Euler with right-endpoint L1 weights for `α(t) = ½ + ¼ sin 5t`.
pub fn vo_l1(u0: f64, steps: usize) -> Vec<f64> {
    let dt = 1.0 / steps as f64;
    let mut u = vec![u0];
    for n in 1..=steps {
        let tn = n as f64 * dt;
        let al = 0.5 + 0.25 * (5.0 * tn).sin();
        let e = 1.0 - al;
        let beta = |j: usize| dt.powf(e) / gamma(2.0 - al) * (((n - j + 1) as f64).powf(e) - ((n - j) as f64).powf(e));
        let hist: f64 = (1..n).map(|j| beta(j) * u[j]).sum();
        let lhs = M / dt + A + beta(n) * B;
        let rhs = M * u[n - 1] / dt - B * hist + load(tn);
        u.push(rhs / lhs);
    }
    u
}
