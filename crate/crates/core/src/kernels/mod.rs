//! Memory kernels and the quadrature weights that discretise the memory term.
//!
//! Three kernel families are supported:
//! - smooth kernels (e.g. `ln(1+t)`), discretised by the midpoint rule;
//! - the exponentially weighted Abel kernel `e^{−λt} t^{α−1}/Γ(α)`,
//!   discretised by BDF2 convolution quadrature ([`cq`]);
//! - variable-order Caputo kernels `(t−s)^{−α(t)}/Γ(1−α(t))`, discretised by
//!   L1 weights.

pub mod cq;
pub mod quad;

use std::fmt;
use std::sync::Arc;

use statrs::function::gamma::gamma;

use crate::error::{Error, Result};
use crate::grid::TimeGrid;

pub use cq::{sigma_coeff, CqWeights, VarpiMode};

type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A kernel that is smooth on `[0, T]`.
#[derive(Clone)]
pub struct SmoothKernel {
    label: String,
    f: ScalarFn,
    antiderivative: Option<ScalarFn>,
}

impl SmoothKernel {
    pub fn new(label: impl Into<String>, f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Self {
            label: label.into(),
            f: Arc::new(f),
            antiderivative: None,
        }
    }

    /// Attaches `F` with `F(T) = ∫₀ᵀ K`, used by [`kernel_k0`].
    pub fn with_integral(mut self, integral: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        self.antiderivative = Some(Arc::new(integral));
        self
    }

    /// `K(t) = ln(1 + t)`.
    pub fn log1p() -> Self {
        Self::new("ln(1+t)", f64::ln_1p).with_integral(|t| (1.0 + t) * t.ln_1p() - t)
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    #[inline]
    pub fn eval(&self, t: f64) -> f64 {
        (self.f)(t)
    }
}

impl fmt::Debug for SmoothKernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SmoothKernel").field("label", &self.label).finish()
    }
}

/// Variable fractional order `α(t) ∈ (0, 1)`.
#[derive(Clone)]
pub struct VariableOrder {
    label: String,
    alpha_fn: ScalarFn,
}

impl VariableOrder {
    pub fn new(label: impl Into<String>, alpha_fn: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Self {
            label: label.into(),
            alpha_fn: Arc::new(alpha_fn),
        }
    }

    /// `α(t) = 1/2 + sin(5t)/4`.
    pub fn sine() -> Self {
        Self::new("1/2+sin(5t)/4", |t| 0.5 + 0.25 * (5.0 * t).sin())
    }

    pub fn constant(alpha: f64) -> Self {
        Self::new(format!("{alpha}"), move |_| alpha)
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    #[inline]
    pub fn alpha(&self, t: f64) -> f64 {
        (self.alpha_fn)(t)
    }
}

impl fmt::Debug for VariableOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("VariableOrder").field("label", &self.label).finish()
    }
}

/// Memory kernel `K(t)`.
#[derive(Clone, Debug)]
pub enum KernelSpec {
    Smooth(SmoothKernel),
    /// `K(t) = e^{−λt} t^{α−1} / Γ(α)`.
    WeakSingular { alpha: f64, lambda: f64 },
    VariableOrder(VariableOrder),
}

impl KernelSpec {
    pub fn weak_singular(alpha: f64, lambda: f64) -> Result<Self> {
        let k = Self::WeakSingular { alpha, lambda };
        k.validate(1.0)?;
        Ok(k)
    }

    /// Checks parameter ranges on `[0, t_final]`.
    pub fn validate(&self, t_final: f64) -> Result<()> {
        match self {
            Self::Smooth(_) => Ok(()),
            Self::WeakSingular { alpha, lambda } => {
                if !(*alpha > 0.0 && *alpha < 1.0) {
                    return Err(Error::InvalidParameter(format!("alpha must lie in (0,1), got {alpha}")));
                }
                if !(*lambda >= 0.0 && lambda.is_finite()) {
                    return Err(Error::InvalidParameter(format!("lambda must be >= 0, got {lambda}")));
                }
                Ok(())
            }
            Self::VariableOrder(vo) => {
                const SAMPLES: usize = 1000;
                for i in 0..=SAMPLES {
                    let t = t_final * i as f64 / SAMPLES as f64;
                    let a = vo.alpha(t);
                    if !(a > 0.0 && a < 1.0) {
                        return Err(Error::InvalidParameter(format!(
                            "alpha({t}) = {a} is outside (0,1)"
                        )));
                    }
                }
                Ok(())
            }
        }
    }
}

/// `∫₀ᵗ e^{−λτ} τ^{α−1}/Γ(α) dτ`.
///
/// With `w = τ^α` the integrand becomes `e^{−λ w^{1/α}}/Γ(1+α)`, which is
/// bounded, so the adaptive rule sees no endpoint singularity.
pub fn weighted_abel_integral(alpha: f64, lambda: f64, t: f64) -> Result<f64> {
    let g = gamma(1.0 + alpha);
    if t == 0.0 {
        return Ok(0.0);
    }
    if lambda == 0.0 {
        return Ok(t.powf(alpha) / g);
    }
    let inv = 1.0 / alpha;
    let upper = t.powf(alpha);
    let v = quad::integrate(|w| (-lambda * w.powf(inv)).exp(), 0.0, upper, 1e-14 * upper.max(1.0))?;
    Ok(v / g)
}

/// `K₀ = ∫₀ᵀ K(t) dt`.
///
/// For variable-order kernels the order is frozen at `α(T)`, giving
/// `T^{1−α(T)}/Γ(2−α(T))`.
pub fn kernel_k0(kernel: &KernelSpec, t_final: f64) -> Result<f64> {
    match kernel {
        KernelSpec::Smooth(k) => match &k.antiderivative {
            Some(f) => Ok(f(t_final) - f(0.0)),
            None => quad::integrate(|t| k.eval(t), 0.0, t_final, 1e-12),
        },
        KernelSpec::WeakSingular { alpha, lambda } => weighted_abel_integral(*alpha, *lambda, t_final),
        KernelSpec::VariableOrder(vo) => {
            let a = vo.alpha(t_final);
            Ok(t_final.powf(1.0 - a) / gamma(2.0 - a))
        }
    }
}

/// Midpoint-rule coefficients multiplying `ū¹ … ūⁿ` in the discrete memory
/// term at step `n`: `K(t̄ₙ − t̄ⱼ)Δtⱼ` for `j < n` and `(Δtₙ/2)K(0)` for `j = n`.
pub fn midpoint_memory_coeffs(kernel: &SmoothKernel, grid: &TimeGrid, n: usize) -> Vec<f64> {
    assert!(n >= 1 && n <= grid.steps(), "step index {n} out of range");
    let tbar_n = grid.midpoint(n);
    let mut c: Vec<f64> = (1..n)
        .map(|j| kernel.eval(tbar_n - grid.midpoint(j)) * grid.dt(j))
        .collect();
    c.push(0.5 * grid.dt(n) * kernel.eval(0.0));
    c
}

/// L1 weights `β_{n,1} … β_{n,n}` for the variable-order kernel:
/// `β_{n,j} = [(tₙ − t_{j−1})^{1−αₙ} − (tₙ − tⱼ)^{1−αₙ}] / Γ(2 − αₙ)`.
pub fn l1_weights(order: &VariableOrder, grid: &TimeGrid, n: usize) -> Vec<f64> {
    assert!(n >= 1 && n <= grid.steps(), "step index {n} out of range");
    let tn = grid.t(n);
    let a = order.alpha(tn);
    let g = gamma(2.0 - a);
    let e = 1.0 - a;
    (1..=n)
        .map(|j| ((tn - grid.t(j - 1)).powf(e) - (tn - grid.t(j)).powf(e)) / g)
        .collect()
}

/// L1 weights on a uniform grid, reusing `ln k` across steps.
///
/// With `tₙ − tⱼ = (n − j)Δt`, `β_{n,j} = Δt^{e}[(n−j+1)^{e} − (n−j)^{e}]/Γ(2−αₙ)`
/// where `e = 1 − αₙ`.
#[derive(Clone, Debug)]
pub struct UniformL1 {
    dt: f64,
    nodes: Vec<f64>,
    ln_k: Vec<f64>,
}

impl UniformL1 {
    pub fn new(grid: &TimeGrid) -> Result<Self> {
        let dt = grid.uniform_step()?;
        let ln_k = (0..=grid.steps()).map(|k| if k == 0 { 0.0 } else { (k as f64).ln() }).collect();
        Ok(Self {
            dt,
            nodes: grid.nodes().to_vec(),
            ln_k,
        })
    }

    /// Same values as [`l1_weights`] at step `n`.
    pub fn weights(&self, order: &VariableOrder, n: usize) -> Vec<f64> {
        let a = order.alpha(self.nodes[n]);
        let e = 1.0 - a;
        let scale = self.dt.powf(e) / gamma(2.0 - a);
        let pw = |k: usize| if k == 0 { 0.0 } else { (e * self.ln_k[k]).exp() };
        let mut prev = pw(0);
        let mut out = vec![0.0; n];
        // j = n, n−1, …, 1 ↔ k = n − j = 0, 1, …
        for k in 0..n {
            let next = pw(k + 1);
            out[n - 1 - k] = scale * (next - prev);
            prev = next;
        }
        out
    }
}
