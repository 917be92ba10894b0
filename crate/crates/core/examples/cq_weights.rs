//! BDF2 convolution quadrature weights for `K(t) = e^{−λt}t^{α−1}/Γ(α)`:
//! the two starting-weight definitions, and the second-order error decay
//! on a smooth integrand.

use nonfickian_isvd::grid::TimeGrid;
use nonfickian_isvd::kernels::{CqWeights, VarpiMode};

fn main() -> nonfickian_isvd::Result<()> {
    let (alpha, lambda) = (0.8, 0.2);
    let grid = TimeGrid::uniform(1.0, 8)?;
    let exact = CqWeights::with_mode(alpha, lambda, &grid, VarpiMode::ExactConstant)?;
    let printed = CqWeights::with_mode(alpha, lambda, &grid, VarpiMode::PaperPrinted)?;
    println!("n  chi_n                    varpi (exact-const)      varpi (paper-printed)");
    for n in 0..=grid.steps() {
        println!(
            "{n}  {:<24.16e} {:<24.16e} {:.16e}",
            exact.chi()[n],
            exact.varpi()[n],
            printed.varpi()[n]
        );
    }

    // φ(s) = cos s: error of Q_N(φ) at t = 1 as Δt halves
    println!("\nN     error                ratio");
    let mut prev: Option<f64> = None;
    for steps in [16, 32, 64, 128, 256] {
        let g = TimeGrid::uniform(1.0, steps)?;
        let w = CqWeights::new(alpha, lambda, &g)?;
        let phi: Vec<f64> = g.nodes().iter().map(|t| t.cos()).collect();
        let err = (w.apply(&phi, steps) - w.reference(f64::cos, 1.0)?).abs();
        let ratio = prev.map(|p| format!("{:.3}", p / err)).unwrap_or_default();
        println!("{steps:<5} {err:<20.6e} {ratio}");
        prev = Some(err);
    }
    Ok(())
}
