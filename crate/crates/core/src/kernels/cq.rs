//! BDF2 convolution quadrature for `K(t) = e^{−λt} t^{α−1}/Γ(α)`.
//!
//! The rule is
//! `Qₙ(φ) = Δt^α Σ_{p=0}^{n} 𝒳ₚ φ(tₙ − tₚ) + ϖₙ φ(0)`
//! with `𝒳ₙ = e^{−λtₙ}(3/2)^{−α} Σ_{s=0}^{n} 3^{−s} σₛ σₙ₋ₛ` and
//! `σₛ = Γ(α+s)/(Γ(α) s!)`.

use crate::error::{Error, Result};
use crate::grid::TimeGrid;

use super::{quad, weighted_abel_integral};

/// How the starting weights `ϖₙ` are defined.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum VarpiMode {
    /// `ϖₙ` makes the rule exact on `φ ≡ 1`.
    #[default]
    ExactConstant,
    /// `ϖₙ = e^{−λtₙ} tₙ^α / 𝒳ₙ^{(α,0)} − Δt^α Σₚ e^{−λ(tₙ−tₚ)} 𝒳ₚ^{(α,λ)}`,
    /// evaluated literally.
    PaperPrinted,
}

impl std::str::FromStr for VarpiMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact-const" => Ok(Self::ExactConstant),
            "paper-printed" => Ok(Self::PaperPrinted),
            other => Err(Error::Config(format!(
                "unknown varpi mode {other:?} (expected exact-const or paper-printed)"
            ))),
        }
    }
}

impl VarpiMode {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::ExactConstant => "exact-const",
            Self::PaperPrinted => "paper-printed",
        }
    }
}

/// `σₛ = Γ(α+s)/(Γ(α)Γ(s+1))` by the running product `∏ᵢ (α+i−1)/i`.
pub fn sigma_coeff(alpha: f64, s: usize) -> f64 {
    let mut v = 1.0;
    for i in 1..=s {
        v *= (alpha + (i - 1) as f64) / i as f64;
    }
    v
}

/// `σ₀ … σ_n`.
pub fn sigma_sequence(alpha: f64, n: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(n + 1);
    let mut v = 1.0;
    out.push(v);
    for i in 1..=n {
        v *= (alpha + (i - 1) as f64) / i as f64;
        out.push(v);
    }
    out
}

/// `𝒳ₙ^{(α,0)}` for `n = 0..=N`.
fn chi_unweighted(alpha: f64, n_max: usize) -> Vec<f64> {
    let sigma = sigma_sequence(alpha, n_max);
    let mut third = Vec::with_capacity(n_max + 1);
    let mut p = 1.0;
    for _ in 0..=n_max {
        third.push(p);
        p /= 3.0;
    }
    let lead = 1.5f64.powf(-alpha);
    (0..=n_max)
        .map(|n| {
            let acc: f64 = (0..=n).map(|s| third[s] * sigma[s] * sigma[n - s]).sum();
            lead * acc
        })
        .collect()
}

/// Weight table for one `(α, λ, Δt, N)`.
#[derive(Clone, Debug, PartialEq)]
pub struct CqWeights {
    alpha: f64,
    lambda: f64,
    dt: f64,
    dt_alpha: f64,
    chi: Vec<f64>,
    varpi: Vec<f64>,
    mode: VarpiMode,
}

impl CqWeights {
    pub fn new(alpha: f64, lambda: f64, grid: &TimeGrid) -> Result<Self> {
        Self::with_mode(alpha, lambda, grid, VarpiMode::ExactConstant)
    }

    pub fn with_mode(alpha: f64, lambda: f64, grid: &TimeGrid, mode: VarpiMode) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::InvalidParameter(format!("alpha must lie in (0,1), got {alpha}")));
        }
        if !(lambda >= 0.0 && lambda.is_finite()) {
            return Err(Error::InvalidParameter(format!("lambda must be >= 0, got {lambda}")));
        }
        let dt = grid.uniform_step()?;
        let n_max = grid.steps();
        let dt_alpha = dt.powf(alpha);
        let chi0 = chi_unweighted(alpha, n_max);
        let chi: Vec<f64> = chi0
            .iter()
            .enumerate()
            .map(|(n, c)| (-lambda * grid.t(n)).exp() * c)
            .collect();
        if chi.iter().any(|c| !c.is_finite()) {
            return Err(Error::NonFinite("CqWeights chi"));
        }

        let mut varpi = vec![0.0; n_max + 1];
        match mode {
            VarpiMode::ExactConstant => {
                let mut partial = 0.0;
                for n in 0..=n_max {
                    partial += chi[n];
                    if n >= 1 {
                        let exact = weighted_abel_integral(alpha, lambda, grid.t(n))?;
                        varpi[n] = exact - dt_alpha * partial;
                    }
                }
            }
            VarpiMode::PaperPrinted => {
                for n in 1..=n_max {
                    let tn = grid.t(n);
                    let s: f64 = (0..=n)
                        .map(|p| (-lambda * (tn - grid.t(p))).exp() * chi[p])
                        .sum();
                    varpi[n] = (-lambda * tn).exp() * tn.powf(alpha) / chi0[n] - dt_alpha * s;
                }
            }
        }
        if varpi.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("CqWeights varpi"));
        }

        Ok(Self {
            alpha,
            lambda,
            dt,
            dt_alpha,
            chi,
            varpi,
            mode,
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// `Δt^α`.
    pub fn dt_alpha(&self) -> f64 {
        self.dt_alpha
    }

    pub fn mode(&self) -> VarpiMode {
        self.mode
    }

    pub fn steps(&self) -> usize {
        self.chi.len() - 1
    }

    /// `𝒳₀ … 𝒳_N`.
    pub fn chi(&self) -> &[f64] {
        &self.chi
    }

    /// `ϖ₀ … ϖ_N`; `ϖ₀ = 0` is a placeholder.
    pub fn varpi(&self) -> &[f64] {
        &self.varpi
    }

    /// `Qₙ(φ)` from samples `phi[j] = φ(tⱼ)`, `j = 0..=n`.
    pub fn apply(&self, phi: &[f64], n: usize) -> f64 {
        assert!(n >= 1 && n < phi.len() && n <= self.steps());
        let conv: f64 = (0..=n).map(|p| self.chi[p] * phi[n - p]).sum();
        self.dt_alpha * conv + self.varpi[n] * phi[0]
    }

    /// `∫₀^{tₙ} K(tₙ − s) φ(s) ds` by adaptive quadrature, for reference.
    pub fn reference(&self, phi: impl Fn(f64) -> f64, tn: f64) -> Result<f64> {
        // s = tₙ − w^{1/α} removes the endpoint singularity.
        let (a, l) = (self.alpha, self.lambda);
        let inv = 1.0 / a;
        let g = statrs::function::gamma::gamma(1.0 + a);
        let upper = tn.powf(a);
        let v = quad::integrate(
            |w| {
                let tau = w.powf(inv);
                (-l * tau).exp() * phi(tn - tau)
            },
            0.0,
            upper,
            1e-14,
        )?;
        Ok(v / g)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use statrs::function::gamma::ln_gamma;

    #[test]
    fn sigma_small_cases() {
        let a = 0.37;
        assert_eq!(sigma_coeff(a, 0), 1.0);
        assert_eq!(sigma_coeff(a, 1), a);
        assert!((sigma_coeff(a, 2) - a * (a + 1.0) / 2.0).abs() < 1e-16);
    }

    #[test]
    fn sigma_large_matches_log_gamma() {
        let a = 0.8;
        let expect = (ln_gamma(500.8) - ln_gamma(0.8) - ln_gamma(501.0)).exp();
        assert!((sigma_coeff(a, 500) / expect - 1.0).abs() < 1e-12);
        assert!(sigma_coeff(0.01, 1_000_000).is_finite());
    }

    #[test]
    fn chi0_and_constant_exactness() {
        let g = TimeGrid::uniform(1.0, 4).unwrap();
        let w = CqWeights::new(0.8, 0.0, &g).unwrap();
        assert_eq!(w.chi()[0], 1.5f64.powf(-0.8));
        let ones = vec![1.0; 5];
        for n in 1..=4 {
            let exact = g.t(n).powf(0.8) / statrs::function::gamma::gamma(1.8);
            assert!((w.apply(&ones, n) - exact).abs() < 1e-13);
        }
    }

    #[test]
    fn rejects_nonuniform_grid() {
        let g = TimeGrid::from_nodes(vec![0.0, 0.3, 1.0]).unwrap();
        assert!(matches!(CqWeights::new(0.5, 0.0, &g), Err(Error::NonUniformGrid { .. })));
    }

    #[test]
    fn varpi_mode_parsing() {
        assert_eq!("exact-const".parse::<VarpiMode>().unwrap(), VarpiMode::ExactConstant);
        assert_eq!("paper-printed".parse::<VarpiMode>().unwrap(), VarpiMode::PaperPrinted);
        assert!("other".parse::<VarpiMode>().is_err());
    }
}
