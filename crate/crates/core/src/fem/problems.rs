use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use statrs::function::gamma::gamma;

use super::assembly::OperatorCoeffs;
use crate::kernels::{KernelSpec, SmoothKernel, VariableOrder};

pub type SpaceTimeFn = Arc<dyn Fn(f64, f64, f64) -> f64 + Send + Sync>;
pub type SpaceFn = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;
pub type TimeFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Right-hand side `f(x, y, t)`.
#[derive(Clone)]
pub enum Source {
    General(SpaceTimeFn),
    /// `Σₖ gₖ(t) sₖ(x, y)`; load vectors of the `sₖ` are assembled once.
    Separable(Vec<(TimeFn, SpaceFn)>),
}

impl Source {
    pub fn eval(&self, x: f64, y: f64, t: f64) -> f64 {
        match self {
            Self::General(f) => f(x, y, t),
            Self::Separable(terms) => terms.iter().map(|(g, s)| g(t) * s(x, y)).sum(),
        }
    }
}

/// A model problem `u_t + 𝒜u + ∫₀ᵗ K(t−s)ℬu(s) ds = f` on the unit square
/// with homogeneous Dirichlet data.
#[derive(Clone)]
pub struct ManufacturedProblem {
    pub label: String,
    pub kernel: KernelSpec,
    pub coeffs: OperatorCoeffs,
    pub source: Source,
    pub u0: SpaceFn,
    /// Exact solution, when known.
    pub exact: Option<SpaceTimeFn>,
    pub t_final: f64,
}

impl fmt::Debug for ManufacturedProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ManufacturedProblem")
            .field("label", &self.label)
            .field("kernel", &self.kernel)
            .field("has_exact", &self.exact.is_some())
            .field("t_final", &self.t_final)
            .finish()
    }
}

fn bubble(x: f64, y: f64) -> f64 {
    x * (1.0 - x) * y * (1.0 - y)
}

/// `−Δ` of [`bubble`].
fn neg_lap_bubble(x: f64, y: f64) -> f64 {
    2.0 * (x + y - x * x - y * y)
}

/// `∫₀ᵗ ln(1 + t − s) s ds`.
pub fn log_kernel_memory(t: f64) -> f64 {
    0.5 * (1.0 + t).powi(2) * t.ln_1p() - 0.75 * t * t - 0.5 * t
}

impl ManufacturedProblem {
    /// `u = x(1−x)y(1−y)t`, `K(t) = ln(1+t)`.
    pub fn example1() -> Self {
        Self {
            label: "example1".into(),
            kernel: KernelSpec::Smooth(SmoothKernel::log1p()),
            coeffs: OperatorCoeffs::laplacian(),
            source: Source::Separable(vec![
                (Arc::new(|_| 1.0), Arc::new(bubble)),
                (Arc::new(|t| t + log_kernel_memory(t)), Arc::new(neg_lap_bubble)),
            ]),
            u0: Arc::new(|_, _| 0.0),
            exact: Some(Arc::new(|x, y, t| bubble(x, y) * t)),
            t_final: 1.0,
        }
    }

    /// `u = −t^{2+α}e^{−λt}/Γ(3+α)·sin(πx)sin(πy)`, `K(t) = e^{−λt}t^{α−1}/Γ(α)`.
    pub fn example2(alpha: f64, lambda: f64) -> Self {
        let g3a = gamma(3.0 + alpha);
        let g32a = gamma(3.0 + 2.0 * alpha);
        let pi2 = 2.0 * PI * PI;
        let time = move |t: f64| -> f64 {
            let e = (-lambda * t).exp();
            let g = -t.powf(2.0 + alpha) * e / g3a;
            let dg = -e * ((2.0 + alpha) * t.powf(1.0 + alpha) - lambda * t.powf(2.0 + alpha)) / g3a;
            let mem = -e * t.powf(2.0 + 2.0 * alpha) / g32a;
            dg + pi2 * g + pi2 * mem
        };
        Self {
            label: "example2".into(),
            kernel: KernelSpec::WeakSingular { alpha, lambda },
            coeffs: OperatorCoeffs::laplacian(),
            source: Source::Separable(vec![(Arc::new(time), Arc::new(|x, y| (PI * x).sin() * (PI * y).sin()))]),
            u0: Arc::new(|_, _| 0.0),
            exact: Some(Arc::new(move |x, y, t| {
                -t.powf(2.0 + alpha) * (-lambda * t).exp() / g3a * (PI * x).sin() * (PI * y).sin()
            })),
            t_final: 1.0,
        }
    }

    /// `u = x(1−x)y(1−y)t`, variable-order kernel with `α(t) = 1/2 + sin(5t)/4`.
    pub fn example3() -> Self {
        let order = VariableOrder::sine();
        let a = order.clone();
        Self {
            label: "example3".into(),
            kernel: KernelSpec::VariableOrder(order),
            coeffs: OperatorCoeffs::laplacian(),
            source: Source::Separable(vec![
                (Arc::new(|_| 1.0), Arc::new(bubble)),
                (
                    Arc::new(move |t| {
                        let al = a.alpha(t);
                        t + t.powf(2.0 - al) / gamma(3.0 - al)
                    }),
                    Arc::new(neg_lap_bubble),
                ),
            ]),
            u0: Arc::new(|_, _| 0.0),
            exact: Some(Arc::new(|x, y, t| bubble(x, y) * t)),
            t_final: 1.0,
        }
    }

    /// `f = 0`, `u₀ = 0`, `u = 0` with the given kernel.
    pub fn zero(kernel: KernelSpec) -> Self {
        Self {
            label: "zero".into(),
            kernel,
            coeffs: OperatorCoeffs::laplacian(),
            source: Source::Separable(Vec::new()),
            u0: Arc::new(|_, _| 0.0),
            exact: Some(Arc::new(|_, _, _| 0.0)),
            t_final: 1.0,
        }
    }

    /// Problem with no exact solution: `f = 1 + t`, `u₀ = 16·x(1−x)y(1−y)`.
    pub fn toy(kernel: KernelSpec) -> Self {
        Self {
            label: "toy".into(),
            kernel,
            coeffs: OperatorCoeffs::laplacian(),
            source: Source::Separable(vec![(Arc::new(|t| 1.0 + t), Arc::new(|_, _| 1.0))]),
            u0: Arc::new(|x, y| 16.0 * bubble(x, y)),
            exact: None,
            t_final: 1.0,
        }
    }

    pub fn with_t_final(mut self, t_final: f64) -> Self {
        self.t_final = t_final;
        self
    }

    pub fn f(&self, x: f64, y: f64, t: f64) -> f64 {
        self.source.eval(x, y, t)
    }
}
