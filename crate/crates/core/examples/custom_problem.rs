//! A problem assembled through the library rather than the CLI: variable
//! diffusion, a reaction term, the exponential kernel `K(t) = e^{−t}` and
//! no exact solution. Dense and compressed runs are compared directly.

use std::sync::Arc;

use nonfickian_isvd::fem::{assemble, ManufacturedProblem, Mesh2D, OperatorCoeffs, FormCoeffs, Source, mass_norm};
use nonfickian_isvd::grid::TimeGrid;
use nonfickian_isvd::kernels::{KernelSpec, SmoothKernel};
use nonfickian_isvd::solver::{solve, SolveOptions};

fn main() -> nonfickian_isvd::Result<()> {
    let kernel = SmoothKernel::new("exp", |t: f64| (-t).exp()).with_integral(|t: f64| 1.0 - (-t).exp());
    let a = FormCoeffs::laplacian()
        .with_diffusion(|x, y| [[1.0 + x * y, 0.0], [0.0, 1.0 + x * y]])
        .with_reaction(|_, _| 0.5);
    let problem = ManufacturedProblem {
        label: "custom".into(),
        kernel: KernelSpec::Smooth(kernel),
        coeffs: OperatorCoeffs { a, b: FormCoeffs::laplacian() },
        source: Source::General(Arc::new(|x, y, t| (1.0 + t) * (std::f64::consts::PI * x).sin() * y)),
        u0: Arc::new(|x, y| x * (1.0 - x) * y * (1.0 - y)),
        exact: None,
        t_final: 1.0,
    };

    let mesh = Mesh2D::new(24)?;
    let sys = assemble(&mesh, &problem.coeffs)?;
    let grid = TimeGrid::uniform(1.0, 400)?;
    let dense = solve(&mesh, &sys, &problem, &grid, SolveOptions::dense())?;
    let isvd = solve(&mesh, &sys, &problem, &grid, SolveOptions::isvd(1e-10))?;
    let diff: Vec<f64> = dense.final_coeffs.iter().zip(&isvd.final_coeffs).map(|(a, b)| a - b).collect();
    println!("dofs {}, steps {}", dense.dofs, dense.steps);
    println!("‖u_N‖ = {:.6e}", mass_norm(&sys.m, &dense.final_coeffs)?);
    println!("‖u_N − û_N‖ = {:.3e}", mass_norm(&sys.m, &diff)?);
    println!("final rank {}, T_sv {}", isvd.final_rank(), isvd.t_sv);
    println!(
        "history bytes: dense {}, compressed {}",
        dense.peak_history_bytes, isvd.peak_history_bytes
    );
    Ok(())
}
