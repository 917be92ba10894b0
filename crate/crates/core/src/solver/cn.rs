use std::collections::HashMap;
use std::time::Instant;

use super::{check_compatible, combine, factor, secs, Run, RunResult, Scheme, SolveOptions};
use crate::error::Result;
use crate::fem::{project_initial, AssembledSystem, LoadAssembler, ManufacturedProblem, Mesh2D};
use crate::grid::TimeGrid;
use crate::kernels::{midpoint_memory_coeffs, KernelSpec};
use crate::la::{LinearSolver, SparseCsr};

/// Crank–Nicolson with the midpoint memory rule:
///
/// `A₁uₙ = A₂uₙ₋₁ − Δtₙ B Σ_{j<n} K(t̄ₙ−t̄ⱼ)Δtⱼ (uⱼ + uⱼ₋₁)/2 + Δtₙ b̄ₙ`,
/// `A₁,₂ = M ± (Δtₙ/2)A ± (Δtₙ/2)(t̄ₙ − tₙ₋₁)K(0)B`.
///
/// Nonuniform grids are allowed; one factorisation is kept per distinct step.
pub fn cn_solve(
    mesh: &Mesh2D,
    sys: &AssembledSystem,
    problem: &ManufacturedProblem,
    grid: &TimeGrid,
    opts: SolveOptions,
) -> Result<RunResult> {
    check_compatible(problem, Scheme::Cn, grid)?;
    let KernelSpec::Smooth(kernel) = &problem.kernel else {
        unreachable!("checked by check_compatible")
    };
    let m = sys.dofs();
    let mut run = Run::new(Scheme::Cn, m, grid, &opts);

    let t = Instant::now();
    let loads = LoadAssembler::new(mesh, &problem.source);
    let u0 = project_initial(mesh, &sys.m, |x, y| (problem.u0)(x, y))?;
    run.timings.assembly += secs(t.elapsed());

    run.record(&u0)?;
    let k0 = kernel.eval(0.0);
    let mut systems: HashMap<u64, (LinearSolver, SparseCsr)> = HashMap::new();
    let mut u_prev = u0;

    for n in 1..=grid.steps() {
        let t = Instant::now();
        let dt = grid.dt(n);
        let tbar = grid.midpoint(n);
        if !systems.contains_key(&dt.to_bits()) {
            let c = 0.5 * dt;
            let d = 0.5 * dt * (tbar - grid.t(n - 1)) * k0;
            let a1 = combine(&[(1.0, &sys.m), (c, &sys.a), (d, &sys.b)])?;
            let a2 = combine(&[(1.0, &sys.m), (-c, &sys.a), (-d, &sys.b)])?;
            systems.insert(dt.to_bits(), (factor(&a1)?, a2));
        }
        let (solver, a2) = &systems[&dt.to_bits()];
        let b_bar = loads.bar(grid.t(n - 1), grid.t(n));
        let mut rhs = a2.matvec(&u_prev)?;
        run.timings.assembly += secs(t.elapsed());

        // Column c of the history is u_c; the pair (u_j, u_{j−1}) carries K(t̄ₙ−t̄ⱼ)Δtⱼ/2.
        let kappa = midpoint_memory_coeffs(kernel, grid, n);
        let mut w = vec![0.0; n];
        for j in 1..n {
            let h = 0.5 * kappa[j - 1];
            w[j - 1] += h;
            w[j] += h;
        }
        let mem = run.history_b(&sys.b, &w)?;
        for ((r, mv), bv) in rhs.iter_mut().zip(&mem).zip(&b_bar) {
            *r += dt * (bv - mv);
        }

        let t = Instant::now();
        let u = solver.solve(&rhs)?;
        run.timings.solves += secs(t.elapsed());
        run.record(&u)?;
        u_prev = u;
    }
    run.finish(mesh, problem, grid, u_prev)
}
