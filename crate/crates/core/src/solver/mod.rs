//! Time-stepping engines with dense or compressed history.
//!
//! | scheme | kernel | time discretisation |
//! |---|---|---|
//! | [`cn_solve`] | smooth | Crank–Nicolson, midpoint memory rule |
//! | [`bdf2_cq_solve`] | weakly singular | BDF2 (backward Euler first step), BDF2 convolution quadrature |
//! | [`vo_l1_solve`] | variable order | backward Euler, L1 memory rule |
//!
//! Every scheme runs against a [`HistoryStore`]. The compressed variant feeds
//! each new solution vector through the incremental SVD after the solve and
//! evaluates the memory sum as `(B·Q)·(X·w)`.

mod bdf2;
mod cn;
mod history;
mod l1;

use std::time::{Duration, Instant};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::fem::{l2_error, AssembledSystem, ManufacturedProblem, Mesh2D};
use crate::grid::TimeGrid;
use crate::kernels::{KernelSpec, VarpiMode};
use crate::la::{LinearSolver, SparseCsr};

pub use bdf2::bdf2_cq_solve;
pub use cn::cn_solve;
pub use history::{CompressedHistory, DenseHistory, HistoryStore};
pub use l1::vo_l1_solve;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    Cn,
    Bdf2Cq,
    VoL1,
}

impl Scheme {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Cn => "cn",
            Self::Bdf2Cq => "bdf2cq",
            Self::VoL1 => "vo-l1",
        }
    }

    /// The scheme matching a kernel family.
    pub fn for_kernel(kernel: &KernelSpec) -> Self {
        match kernel {
            KernelSpec::Smooth(_) => Self::Cn,
            KernelSpec::WeakSingular { .. } => Self::Bdf2Cq,
            KernelSpec::VariableOrder(_) => Self::VoL1,
        }
    }
}

impl std::str::FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cn" => Ok(Self::Cn),
            "bdf2cq" => Ok(Self::Bdf2Cq),
            "vo-l1" => Ok(Self::VoL1),
            other => Err(Error::Config(format!("unknown scheme {other:?} (expected cn, bdf2cq or vo-l1)"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum HistoryMode {
    Dense,
    Isvd { tol: f64 },
}

impl HistoryMode {
    pub fn label(self) -> &'static str {
        match self {
            Self::Dense => "dense",
            Self::Isvd { .. } => "isvd",
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct SolveOptions {
    pub history: HistoryMode,
    pub varpi_mode: VarpiMode,
    /// Keep every `uⁿ` in the result.
    pub keep_trajectory: bool,
}

impl SolveOptions {
    pub fn new(history: HistoryMode) -> Self {
        Self {
            history,
            varpi_mode: VarpiMode::default(),
            keep_trajectory: false,
        }
    }

    pub fn dense() -> Self {
        Self::new(HistoryMode::Dense)
    }

    pub fn isvd(tol: f64) -> Self {
        Self::new(HistoryMode::Isvd { tol })
    }

    pub fn with_trajectory(mut self) -> Self {
        self.keep_trajectory = true;
        self
    }

    pub fn with_varpi_mode(mut self, mode: VarpiMode) -> Self {
        self.varpi_mode = mode;
        self
    }
}

/// Wall-clock split of a run, in seconds.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct Timings {
    /// Loads, system matrices and factorisations.
    pub assembly: f64,
    pub solves: f64,
    pub history_sum: f64,
    pub isvd_update: f64,
    pub total: f64,
}

/// State of the compressed history after step `step`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct RankSample {
    pub step: usize,
    pub rank: usize,
    pub q: usize,
    pub t_sv: usize,
}

#[derive(Clone, Debug)]
pub struct RunResult {
    pub scheme: Scheme,
    pub history: HistoryMode,
    pub steps: usize,
    pub dofs: usize,
    pub final_coeffs: Vec<f64>,
    /// One sample per stored column (`n = 0..=N`); empty for dense runs.
    pub rank_trace: Vec<RankSample>,
    pub t_sv: usize,
    pub n_reorth: usize,
    pub timings: Timings,
    pub peak_history_bytes: usize,
    pub final_l2_error: Option<f64>,
    /// `u⁰ … u^N` when requested.
    pub trajectory: Option<Vec<Vec<f64>>>,
    /// The final history, for inspection.
    pub store: HistoryStore,
}

impl RunResult {
    pub fn final_rank(&self) -> usize {
        self.store.rank()
    }
}

/// Dispatches on the problem's kernel.
pub fn solve(
    mesh: &Mesh2D,
    sys: &AssembledSystem,
    problem: &ManufacturedProblem,
    grid: &TimeGrid,
    opts: SolveOptions,
) -> Result<RunResult> {
    match Scheme::for_kernel(&problem.kernel) {
        Scheme::Cn => cn_solve(mesh, sys, problem, grid, opts),
        Scheme::Bdf2Cq => bdf2_cq_solve(mesh, sys, problem, grid, opts),
        Scheme::VoL1 => vo_l1_solve(mesh, sys, problem, grid, opts),
    }
}

pub fn cn_dense_solve(mesh: &Mesh2D, sys: &AssembledSystem, problem: &ManufacturedProblem, grid: &TimeGrid) -> Result<RunResult> {
    cn_solve(mesh, sys, problem, grid, SolveOptions::dense())
}

pub fn cn_isvd_solve(
    mesh: &Mesh2D,
    sys: &AssembledSystem,
    problem: &ManufacturedProblem,
    grid: &TimeGrid,
    tol: f64,
) -> Result<RunResult> {
    cn_solve(mesh, sys, problem, grid, SolveOptions::isvd(tol))
}

pub fn bdf2_singular_dense_solve(
    mesh: &Mesh2D,
    sys: &AssembledSystem,
    problem: &ManufacturedProblem,
    grid: &TimeGrid,
) -> Result<RunResult> {
    bdf2_cq_solve(mesh, sys, problem, grid, SolveOptions::dense())
}

pub fn bdf2_singular_isvd_solve(
    mesh: &Mesh2D,
    sys: &AssembledSystem,
    problem: &ManufacturedProblem,
    grid: &TimeGrid,
    tol: f64,
) -> Result<RunResult> {
    bdf2_cq_solve(mesh, sys, problem, grid, SolveOptions::isvd(tol))
}

pub fn vo_caputo_dense_solve(
    mesh: &Mesh2D,
    sys: &AssembledSystem,
    problem: &ManufacturedProblem,
    grid: &TimeGrid,
) -> Result<RunResult> {
    vo_l1_solve(mesh, sys, problem, grid, SolveOptions::dense())
}

pub fn vo_caputo_isvd_solve(
    mesh: &Mesh2D,
    sys: &AssembledSystem,
    problem: &ManufacturedProblem,
    grid: &TimeGrid,
    tol: f64,
) -> Result<RunResult> {
    vo_l1_solve(mesh, sys, problem, grid, SolveOptions::isvd(tol))
}

/// Bookkeeping shared by the schemes.
struct Run {
    scheme: Scheme,
    history: HistoryMode,
    store: HistoryStore,
    timings: Timings,
    rank_trace: Vec<RankSample>,
    peak: usize,
    trajectory: Option<Vec<Vec<f64>>>,
    started: Instant,
    /// Bytes of uncompressed vectors the compressed scheme keeps beside the factors.
    side_bytes: usize,
}

impl Run {
    fn new(scheme: Scheme, m: usize, grid: &TimeGrid, opts: &SolveOptions) -> Self {
        let store = match opts.history {
            HistoryMode::Dense => HistoryStore::dense(m, grid.steps() + 1),
            HistoryMode::Isvd { tol } => HistoryStore::compressed(m, tol),
        };
        Self {
            scheme,
            history: opts.history,
            store,
            timings: Timings::default(),
            rank_trace: Vec::new(),
            peak: 0,
            trajectory: opts.keep_trajectory.then(Vec::new),
            started: Instant::now(),
            side_bytes: 0,
        }
    }

    fn record(&mut self, u: &[f64]) -> Result<()> {
        let t = Instant::now();
        self.store.push(u)?;
        let el = t.elapsed();
        if let HistoryMode::Isvd { .. } = self.history {
            self.timings.isvd_update += secs(el);
            self.rank_trace.push(RankSample {
                step: self.store.len() - 1,
                rank: self.store.rank(),
                q: self.store.pending(),
                t_sv: self.store.t_sv(),
            });
        }
        self.peak = self.peak.max(self.store.bytes() + self.side_bytes);
        if let Some(tr) = &mut self.trajectory {
            tr.push(u.to_vec());
        }
        Ok(())
    }

    fn history_b(&mut self, b: &SparseCsr, weights: &[f64]) -> Result<Vec<f64>> {
        let t = Instant::now();
        let out = self.store.apply_b(b, weights);
        self.timings.history_sum += secs(t.elapsed());
        out
    }

    fn finish(
        mut self,
        mesh: &Mesh2D,
        problem: &ManufacturedProblem,
        grid: &TimeGrid,
        final_coeffs: Vec<f64>,
    ) -> Result<RunResult> {
        self.timings.total = secs(self.started.elapsed());
        if final_coeffs.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("final solution"));
        }
        let t_final = grid.t_final();
        let final_l2_error = match &problem.exact {
            Some(u) => Some(l2_error(mesh, &final_coeffs, |x, y| u(x, y, t_final))?),
            None => None,
        };
        let (t_sv, n_reorth) = self
            .store
            .isvd()
            .map_or((0, 0), |s| (s.stats().t_sv, s.stats().n_reorth));
        Ok(RunResult {
            scheme: self.scheme,
            history: self.history,
            steps: grid.steps(),
            dofs: final_coeffs.len(),
            final_coeffs,
            rank_trace: self.rank_trace,
            t_sv,
            n_reorth,
            timings: self.timings,
            peak_history_bytes: self.peak,
            final_l2_error,
            trajectory: self.trajectory,
            store: self.store,
        })
    }
}

fn secs(d: Duration) -> f64 {
    d.as_secs_f64()
}

/// `Σ cᵢ Xᵢ`, reusing the shared pattern when all terms have one.
fn combine(terms: &[(f64, &SparseCsr)]) -> Result<SparseCsr> {
    let first = terms[0].1;
    if terms.iter().all(|(_, a)| a.same_pattern(first)) {
        let mut v = vec![0.0; first.nnz()];
        for (c, a) in terms {
            for (o, x) in v.iter_mut().zip(a.values()) {
                *o += c * x;
            }
        }
        first.with_values(v)
    } else {
        SparseCsr::linear_combination(terms)
    }
}

fn factor(a: &SparseCsr) -> Result<LinearSolver> {
    LinearSolver::auto(a)
}

fn check_compatible(problem: &ManufacturedProblem, scheme: Scheme, grid: &TimeGrid) -> Result<()> {
    let found = Scheme::for_kernel(&problem.kernel);
    if found != scheme {
        return Err(Error::InvalidParameter(format!(
            "scheme {} cannot integrate a kernel for scheme {}",
            scheme.as_str(),
            found.as_str()
        )));
    }
    if (grid.t_final() - problem.t_final).abs() > 1e-12 * problem.t_final.max(1.0) {
        return Err(Error::InvalidGrid(format!(
            "grid ends at {} but the problem ends at {}",
            grid.t_final(),
            problem.t_final
        )));
    }
    problem.kernel.validate(grid.t_final())
}
