use crate::error::{Error, Result};

/// Relative tolerance used to decide that all steps are equal.
const UNIFORM_RTOL: f64 = 1e-10;

/// Partition `0 = t₀ < t₁ < … < t_N = T` of the time interval.
#[derive(Clone, Debug, PartialEq)]
pub struct TimeGrid {
    nodes: Vec<f64>,
}

impl TimeGrid {
    pub fn uniform(t_final: f64, steps: usize) -> Result<Self> {
        if steps == 0 || !(t_final > 0.0) || !t_final.is_finite() {
            return Err(Error::InvalidGrid(format!(
                "need steps >= 1 and T > 0, got steps={steps}, T={t_final}"
            )));
        }
        let dt = t_final / steps as f64;
        let mut nodes: Vec<f64> = (0..=steps).map(|n| n as f64 * dt).collect();
        nodes[steps] = t_final;
        Ok(Self { nodes })
    }

    pub fn from_nodes(nodes: Vec<f64>) -> Result<Self> {
        if nodes.len() < 2 {
            return Err(Error::InvalidGrid("need at least two nodes".into()));
        }
        if nodes[0] != 0.0 {
            return Err(Error::InvalidGrid(format!("first node must be 0, got {}", nodes[0])));
        }
        if nodes.iter().any(|t| !t.is_finite()) || nodes.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidGrid("nodes must be finite and strictly increasing".into()));
        }
        Ok(Self { nodes })
    }

    /// Number of steps `N`.
    pub fn steps(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn t_final(&self) -> f64 {
        self.nodes[self.steps()]
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// `tₙ`.
    pub fn t(&self, n: usize) -> f64 {
        self.nodes[n]
    }

    /// `Δtₙ = tₙ − tₙ₋₁` for `n ≥ 1`.
    pub fn dt(&self, n: usize) -> f64 {
        self.nodes[n] - self.nodes[n - 1]
    }

    /// Midpoint `t̄ₙ = (tₙ + tₙ₋₁)/2` for `n ≥ 1`.
    pub fn midpoint(&self, n: usize) -> f64 {
        0.5 * (self.nodes[n] + self.nodes[n - 1])
    }

    pub fn max_dt(&self) -> f64 {
        (1..=self.steps()).map(|n| self.dt(n)).fold(0.0, f64::max)
    }

    pub fn min_dt(&self) -> f64 {
        (1..=self.steps()).map(|n| self.dt(n)).fold(f64::INFINITY, f64::min)
    }

    /// Quasi-uniformity constant `max Δt / min Δt`.
    pub fn quasi_uniform_ratio(&self) -> f64 {
        self.max_dt() / self.min_dt()
    }

    pub fn is_uniform(&self) -> bool {
        self.quasi_uniform_ratio() - 1.0 <= UNIFORM_RTOL
    }

    /// The constant step, or an error for nonuniform grids.
    pub fn uniform_step(&self) -> Result<f64> {
        if self.is_uniform() {
            Ok(self.t_final() / self.steps() as f64)
        } else {
            Err(Error::NonUniformGrid {
                ratio: self.quasi_uniform_ratio(),
            })
        }
    }
}
