use std::time::Instant;

use super::{check_compatible, combine, factor, secs, Run, RunResult, Scheme, SolveOptions};
use crate::error::Result;
use crate::fem::{project_initial, AssembledSystem, LoadAssembler, ManufacturedProblem, Mesh2D};
use crate::grid::TimeGrid;
use crate::kernels::{KernelSpec, UniformL1};
use crate::la::LinearSolver;

/// Backward Euler with L1 weights for the variable-order kernel:
///
/// `(M/Δt + A + β_{n,n}B)uₙ = (M/Δt)uₙ₋₁ − B Σ_{j<n} β_{n,j}uⱼ + b(tₙ)`.
///
/// `β_{n,n}` changes with `α(tₙ)`, so the system is refactored every step.
pub fn vo_l1_solve(
    mesh: &Mesh2D,
    sys: &AssembledSystem,
    problem: &ManufacturedProblem,
    grid: &TimeGrid,
    opts: SolveOptions,
) -> Result<RunResult> {
    check_compatible(problem, Scheme::VoL1, grid)?;
    let KernelSpec::VariableOrder(order) = &problem.kernel else {
        unreachable!("checked by check_compatible")
    };
    let dt = grid.uniform_step()?;
    let m = sys.dofs();
    let mut run = Run::new(Scheme::VoL1, m, grid, &opts);

    let t = Instant::now();
    let loads = LoadAssembler::new(mesh, &problem.source);
    let l1 = UniformL1::new(grid)?;
    let u0 = project_initial(mesh, &sys.m, |x, y| (problem.u0)(x, y))?;
    run.timings.assembly += secs(t.elapsed());

    run.record(&u0)?;
    let mut u_prev = u0;
    let mut solver: Option<LinearSolver> = None;
    for n in 1..=grid.steps() {
        let t = Instant::now();
        let beta = l1.weights(order, n);
        let lhs = combine(&[(1.0 / dt, &sys.m), (1.0, &sys.a), (beta[n - 1], &sys.b)])?;
        // symmetry is fixed by M, A, B, so it is tested only once
        let s = match &solver {
            None => factor(&lhs)?,
            Some(prev) => prev.refactor(lhs)?,
        };
        let b_n = loads.at(grid.t(n));
        let mut rhs: Vec<f64> = sys.m.matvec(&u_prev)?.into_iter().map(|v| v / dt).collect();
        run.timings.assembly += secs(t.elapsed());

        // column 0 (u⁰) carries no weight
        let mut w = vec![0.0; n];
        w[1..n].copy_from_slice(&beta[..n - 1]);
        let mem = run.history_b(&sys.b, &w)?;
        for ((r, mv), bv) in rhs.iter_mut().zip(&mem).zip(&b_n) {
            *r += bv - mv;
        }

        let t = Instant::now();
        let u = s.solve(&rhs)?;
        solver = Some(s);
        run.timings.solves += secs(t.elapsed());
        run.record(&u)?;
        u_prev = u;
    }
    run.finish(mesh, problem, grid, u_prev)
}
