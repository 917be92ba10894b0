use std::time::Instant;

use super::{check_compatible, combine, factor, secs, HistoryMode, Run, RunResult, Scheme, SolveOptions};
use crate::error::Result;
use crate::fem::{project_initial, AssembledSystem, LoadAssembler, ManufacturedProblem, Mesh2D};
use crate::grid::TimeGrid;
use crate::kernels::{CqWeights, KernelSpec};

/// BDF2 with second-order convolution quadrature for
/// `K(t) = e^{−λt}t^{α−1}/Γ(α)`; the first step is backward Euler.
///
/// Step `n`: the memory term is `Δt^α Σ_{p=0}^{n} 𝒳ₚ B uⁿ⁻ᵖ + ϖₙ B u⁰`.
/// The `p = 0` term is implicit; the `p ≥ 1` terms read the history store.
/// The `ϖₙ` term always uses the exact `u⁰`, and the difference quotients
/// use the exact previous two solutions.
pub fn bdf2_cq_solve(
    mesh: &Mesh2D,
    sys: &AssembledSystem,
    problem: &ManufacturedProblem,
    grid: &TimeGrid,
    opts: SolveOptions,
) -> Result<RunResult> {
    check_compatible(problem, Scheme::Bdf2Cq, grid)?;
    let &KernelSpec::WeakSingular { alpha, lambda } = &problem.kernel else {
        unreachable!("checked by check_compatible")
    };
    let m = sys.dofs();
    let mut run = Run::new(Scheme::Bdf2Cq, m, grid, &opts);

    let t = Instant::now();
    let cq = CqWeights::with_mode(alpha, lambda, grid, opts.varpi_mode)?;
    let dt = cq.dt();
    let da = cq.dt_alpha();
    let chi = cq.chi();
    let varpi = cq.varpi();
    let loads = LoadAssembler::new(mesh, &problem.source);
    let u0 = project_initial(mesh, &sys.m, |x, y| (problem.u0)(x, y))?;
    let bu0 = sys.b.matvec(&u0)?;
    let s1 = factor(&combine(&[(1.0 / dt, &sys.m), (1.0, &sys.a), (da * chi[0], &sys.b)])?)?;
    let s2 = if grid.steps() >= 2 {
        Some(factor(&combine(&[(1.5 / dt, &sys.m), (1.0, &sys.a), (da * chi[0], &sys.b)])?)?)
    } else {
        None
    };
    run.timings.assembly += secs(t.elapsed());
    if matches!(opts.history, HistoryMode::Isvd { .. }) {
        // exact u⁰ and the two latest solutions
        run.side_bytes = 8 * 3 * m;
    }

    run.record(&u0)?;
    let mut u_nm2: Vec<f64> = Vec::new();
    let mut u_nm1 = u0;

    for n in 1..=grid.steps() {
        let t = Instant::now();
        let b_n = loads.at(grid.t(n));
        let mut rhs = if n == 1 {
            sys.m.matvec(&u_nm1)?.into_iter().map(|v| v / dt).collect::<Vec<_>>()
        } else {
            let comb: Vec<f64> = u_nm1.iter().zip(&u_nm2).map(|(a, b)| 4.0 * a - b).collect();
            sys.m.matvec(&comb)?.into_iter().map(|v| v / (2.0 * dt)).collect()
        };
        run.timings.assembly += secs(t.elapsed());

        let w: Vec<f64> = (0..n).map(|c| da * chi[n - c]).collect();
        let mem = run.history_b(&sys.b, &w)?;
        for (((r, mv), bu), bv) in rhs.iter_mut().zip(&mem).zip(&bu0).zip(&b_n) {
            *r += bv - mv - varpi[n] * bu;
        }

        let t = Instant::now();
        let solver = if n == 1 { &s1 } else { s2.as_ref().expect("built when N >= 2") };
        let u = solver.solve(&rhs)?;
        run.timings.solves += secs(t.elapsed());
        run.record(&u)?;
        u_nm2 = std::mem::replace(&mut u_nm1, u);
    }
    run.finish(mesh, problem, grid, u_nm1)
}
