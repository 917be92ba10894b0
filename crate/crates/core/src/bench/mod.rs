//! Drivers behind the `nfisvd` command: single solves, convergence tables,
//! rank traces, dense-versus-compressed sweeps and weight tables.
//!
//! Every float written to CSV uses 17 significant digits, so values
//! round-trip exactly. Undefined entries (a rate after a zero error, a
//! column for a history that was not run) are left blank.

mod config;

use std::fmt::Write as _;
use std::io::Write;

use serde::Serialize;

pub use config::{HistorySelection, ProblemKind, RunConfig};

use crate::error::{Error, Result};
use crate::fem::{assemble, mass_norm, AssembledSystem, ManufacturedProblem, Mesh2D};
use crate::grid::TimeGrid;
use crate::kernels::{midpoint_memory_coeffs, CqWeights, KernelSpec, UniformL1, VarpiMode};
use crate::solver::{solve, HistoryMode, RankSample, RunResult, SolveOptions, Timings};

/// Reference errors for the first rows of the convergence tables, keyed by
/// `n_div`.
pub const REFERENCE_EXAMPLE1: [(usize, f64); 4] = [(8, 1.38e-3), (16, 3.50e-4), (32, 8.79e-5), (64, 2.20e-5)];
pub const REFERENCE_EXAMPLE2: [(usize, f64); 4] = [(8, 4.00e-3), (16, 1.00e-3), (32, 2.61e-4), (64, 6.55e-5)];
pub const REFERENCE_EXAMPLE3: [(usize, f64); 2] = [(4, 5.37e-3), (8, 1.42e-3)];

pub const ERROR_RTOL: f64 = 0.05;
pub const RATE_TARGET: f64 = 2.0;
pub const RATE_TOL: f64 = 0.15;
pub const DIFF_TOL: f64 = 1e-11;

/// `{:.16e}`: 17 significant digits.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt_f64).unwrap_or_default()
}

fn fmt_opt_usize(v: Option<usize>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Mesh, matrices and problem for one spatial level.
pub struct Level {
    pub mesh: Mesh2D,
    pub system: AssembledSystem,
    pub problem: ManufacturedProblem,
    pub grid: TimeGrid,
}

impl Level {
    pub fn new(cfg: &RunConfig, n_div: usize) -> Result<Self> {
        let problem = cfg.problem()?;
        let mesh = Mesh2D::new(n_div)?;
        let system = assemble(&mesh, &problem.coeffs)?;
        let grid = TimeGrid::uniform(cfg.t_final, cfg.steps_for(n_div))?;
        Ok(Self {
            mesh,
            system,
            problem,
            grid,
        })
    }

    pub fn run(&self, history: HistoryMode, varpi_mode: VarpiMode) -> Result<RunResult> {
        let opts = SolveOptions::new(history).with_varpi_mode(varpi_mode);
        solve(&self.mesh, &self.system, &self.problem, &self.grid, opts)
    }

    /// `‖u − v‖_{L²(Ω)}` for coefficient vectors.
    pub fn l2_distance(&self, u: &[f64], v: &[f64]) -> Result<f64> {
        let d: Vec<f64> = u.iter().zip(v).map(|(a, b)| a - b).collect();
        mass_norm(&self.system.m, &d)
    }
}

/// Dense and/or compressed runs on one level.
pub struct Comparison {
    pub dense: Option<RunResult>,
    pub isvd: Option<RunResult>,
    /// `‖u_dense − u_isvd‖_{L²}` at the final time, when both ran.
    pub diff: Option<f64>,
}

pub fn compare(cfg: &RunConfig, level: &Level, which: HistorySelection) -> Result<Comparison> {
    let dense = which
        .dense()
        .then(|| level.run(HistoryMode::Dense, cfg.varpi_mode))
        .transpose()?;
    let isvd = which
        .isvd()
        .then(|| level.run(HistoryMode::Isvd { tol: cfg.tol }, cfg.varpi_mode))
        .transpose()?;
    let diff = match (&dense, &isvd) {
        (Some(d), Some(i)) => Some(level.l2_distance(&d.final_coeffs, &i.final_coeffs)?),
        _ => None,
    };
    Ok(Comparison { dense, isvd, diff })
}

#[derive(Clone, Debug, Serialize)]
pub struct RunSummary {
    pub history: &'static str,
    pub final_l2_error: Option<f64>,
    /// Absent for dense runs.
    pub final_rank: Option<usize>,
    #[serde(rename = "T_sv")]
    pub t_sv: usize,
    pub n_reorth: usize,
    pub peak_history_bytes: usize,
    pub timings: Timings,
}

impl RunSummary {
    pub fn new(r: &RunResult) -> Self {
        Self {
            history: r.history.label(),
            final_l2_error: r.final_l2_error,
            final_rank: r.store.is_compressed().then(|| r.final_rank()),
            t_sv: r.t_sv,
            n_reorth: r.n_reorth,
            peak_history_bytes: r.peak_history_bytes,
            timings: r.timings,
        }
    }
}

/// JSON document written by `solve`.
#[derive(Clone, Debug, Serialize)]
pub struct SolveSummary {
    pub problem: &'static str,
    pub scheme: &'static str,
    pub n_div: usize,
    pub n_steps: usize,
    pub t_final: f64,
    pub dofs: usize,
    pub tol: f64,
    pub varpi_mode: &'static str,
    pub runs: Vec<RunSummary>,
    pub diff_dense_isvd: Option<f64>,
}

pub fn cmd_solve(cfg: &RunConfig) -> Result<SolveSummary> {
    cfg.validate()?;
    let level = Level::new(cfg, cfg.n_div)?;
    let cmp = compare(cfg, &level, cfg.history)?;
    let runs = [&cmp.dense, &cmp.isvd]
        .into_iter()
        .flatten()
        .map(RunSummary::new)
        .collect();
    Ok(SolveSummary {
        problem: cfg.problem.as_str(),
        scheme: cfg.scheme()?.as_str(),
        n_div: cfg.n_div,
        n_steps: level.grid.steps(),
        t_final: cfg.t_final,
        dofs: level.system.dofs(),
        tol: cfg.tol,
        varpi_mode: cfg.varpi_mode.as_str(),
        runs,
        diff_dense_isvd: cmp.diff,
    })
}

/// One row of a convergence table.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct TableRow {
    pub n_div: usize,
    pub n_steps: usize,
    /// `h/√2 = 1/n_div`.
    pub h_over_sqrt2: f64,
    pub err_dense: Option<f64>,
    pub rate_dense: Option<f64>,
    pub err_isvd: Option<f64>,
    pub rate_isvd: Option<f64>,
    pub diff_dense_isvd: Option<f64>,
    pub rank_final: Option<usize>,
    pub t_sv: Option<usize>,
    pub time_dense_s: Option<f64>,
    pub time_isvd_s: Option<f64>,
    pub mem_dense_bytes: Option<usize>,
    pub mem_isvd_bytes: Option<usize>,
}

pub const TABLE_HEADER: &str = "n_div,n_steps,h_over_sqrt2,err_dense,rate_dense,err_isvd,rate_isvd,diff_dense_isvd,rank_final,T_sv,time_dense_s,time_isvd_s,mem_dense_bytes,mem_isvd_bytes";

impl TableRow {
    pub fn csv(&self) -> String {
        [
            self.n_div.to_string(),
            self.n_steps.to_string(),
            fmt_f64(self.h_over_sqrt2),
            fmt_opt(self.err_dense),
            fmt_opt(self.rate_dense),
            fmt_opt(self.err_isvd),
            fmt_opt(self.rate_isvd),
            fmt_opt(self.diff_dense_isvd),
            fmt_opt_usize(self.rank_final),
            fmt_opt_usize(self.t_sv),
            fmt_opt(self.time_dense_s),
            fmt_opt(self.time_isvd_s),
            fmt_opt_usize(self.mem_dense_bytes),
            fmt_opt_usize(self.mem_isvd_bytes),
        ]
        .join(",")
    }
}

/// `log₂(e_{k−1}/e_k)`; undefined when either error is zero or missing.
pub fn rate(prev: Option<f64>, cur: Option<f64>) -> Option<f64> {
    match (prev, cur) {
        (Some(a), Some(b)) if a > 0.0 && b > 0.0 => Some((a / b).log2()),
        _ => None,
    }
}

pub fn cmd_convergence(cfg: &RunConfig) -> Result<Vec<TableRow>> {
    cfg.validate()?;
    let levels = cfg.convergence_levels();
    if levels.len() < 2 {
        return Err(Error::Config("convergence needs at least two levels".into()));
    }
    let mut rows: Vec<TableRow> = Vec::with_capacity(levels.len());
    for &n_div in &levels {
        let level = Level::new(cfg, n_div)?;
        let cmp = compare(cfg, &level, cfg.history)?;
        let d = cmp.dense.as_ref();
        let i = cmp.isvd.as_ref();
        let mut row = TableRow {
            n_div,
            n_steps: level.grid.steps(),
            h_over_sqrt2: 1.0 / n_div as f64,
            err_dense: d.and_then(|r| r.final_l2_error),
            err_isvd: i.and_then(|r| r.final_l2_error),
            diff_dense_isvd: cmp.diff,
            rank_final: i.map(RunResult::final_rank),
            t_sv: i.map(|r| r.t_sv),
            time_dense_s: d.map(|r| r.timings.total),
            time_isvd_s: i.map(|r| r.timings.total),
            mem_dense_bytes: d.map(|r| r.peak_history_bytes),
            mem_isvd_bytes: i.map(|r| r.peak_history_bytes),
            ..TableRow::default()
        };
        if let Some(prev) = rows.last() {
            row.rate_dense = rate(prev.err_dense, row.err_dense);
            row.rate_isvd = rate(prev.err_isvd, row.err_isvd);
        }
        rows.push(row);
    }
    Ok(rows)
}

pub fn write_table<W: Write>(rows: &[TableRow], mut out: W) -> Result<()> {
    writeln!(out, "{TABLE_HEADER}")?;
    for r in rows {
        writeln!(out, "{}", r.csv())?;
    }
    Ok(())
}

/// Compressed run with its per-step rank record.
pub fn cmd_ranktrace(cfg: &RunConfig) -> Result<RunResult> {
    cfg.validate()?;
    if !cfg.history.isvd() {
        return Err(Error::Config("ranktrace needs history = isvd".into()));
    }
    let level = Level::new(cfg, cfg.n_div)?;
    let run = level.run(HistoryMode::Isvd { tol: cfg.tol }, cfg.varpi_mode)?;
    if let (Some(path), Some(state)) = (&cfg.checkpoint, run.store.isvd()) {
        let file = std::fs::File::create(path)?;
        state.write_checkpoint(std::io::BufWriter::new(file))?;
    }
    Ok(run)
}

pub fn write_rank_trace<W: Write>(trace: &[RankSample], mut out: W) -> Result<()> {
    writeln!(out, "step,rank,q,T_sv")?;
    for s in trace {
        writeln!(out, "{},{},{},{}", s.step, s.rank, s.q, s.t_sv)?;
    }
    Ok(())
}

/// One point of a dense-versus-compressed sweep.
#[derive(Clone, Debug, PartialEq)]
pub struct BenchRow {
    pub n_steps: usize,
    pub time_dense_s: f64,
    pub time_isvd_s: f64,
    pub mem_dense_bytes: usize,
    pub mem_isvd_bytes: usize,
    pub rank_final: usize,
    pub diff_dense_isvd: f64,
}

pub const BENCH_HEADER: &str = "n_steps,time_dense_s,time_isvd_s,mem_dense_bytes,mem_isvd_bytes,rank_final,diff_dense_isvd";

impl BenchRow {
    pub fn csv(&self) -> String {
        format!(
            "{},{},{},{},{},{},{}",
            self.n_steps,
            fmt_f64(self.time_dense_s),
            fmt_f64(self.time_isvd_s),
            self.mem_dense_bytes,
            self.mem_isvd_bytes,
            self.rank_final,
            fmt_f64(self.diff_dense_isvd)
        )
    }
}

/// Both histories at each `n_steps` of the sweep on the `n_div` mesh.
pub fn cmd_bench(cfg: &RunConfig) -> Result<Vec<BenchRow>> {
    cfg.validate()?;
    if cfg.history != HistorySelection::Both {
        return Err(Error::Config("bench needs history = both".into()));
    }
    let mut rows = Vec::new();
    for n_steps in cfg.bench_steps() {
        let mut c = cfg.clone();
        c.n_steps = Some(n_steps);
        let level = Level::new(&c, c.n_div)?;
        let cmp = compare(&c, &level, HistorySelection::Both)?;
        let (d, i) = (cmp.dense.expect("both"), cmp.isvd.expect("both"));
        rows.push(BenchRow {
            n_steps,
            time_dense_s: d.timings.total,
            time_isvd_s: i.timings.total,
            mem_dense_bytes: d.peak_history_bytes,
            mem_isvd_bytes: i.peak_history_bytes,
            rank_final: i.final_rank(),
            diff_dense_isvd: cmp.diff.unwrap_or(0.0),
        });
    }
    Ok(rows)
}

pub fn write_bench<W: Write>(rows: &[BenchRow], mut out: W) -> Result<()> {
    writeln!(out, "{BENCH_HEADER}")?;
    for r in rows {
        writeln!(out, "{}", r.csv())?;
    }
    Ok(())
}

/// Quadrature weights of the configured scheme at `N = n_steps`.
#[derive(Clone, Debug, PartialEq)]
pub enum WeightTable {
    /// Rows `n, tₙ, 𝒳ₙ, ϖₙ`.
    Cq(CqWeights, TimeGrid),
    /// `K(t̄_N − t̄ⱼ)Δtⱼ` for `j = 1..N−1`.
    Midpoint(Vec<f64>),
    /// `β_{N,j}` for `j = 1..N`.
    L1(Vec<f64>),
}

pub fn cmd_weights(cfg: &RunConfig) -> Result<WeightTable> {
    cfg.validate()?;
    let problem = cfg.problem()?;
    let grid = TimeGrid::uniform(cfg.t_final, cfg.steps_for(cfg.n_div))?;
    let n = grid.steps();
    Ok(match &problem.kernel {
        &KernelSpec::WeakSingular { alpha, lambda } => {
            WeightTable::Cq(CqWeights::with_mode(alpha, lambda, &grid, cfg.varpi_mode)?, grid)
        }
        KernelSpec::Smooth(k) => WeightTable::Midpoint(midpoint_memory_coeffs(k, &grid, n)),
        KernelSpec::VariableOrder(order) => WeightTable::L1(UniformL1::new(&grid)?.weights(order, n)),
    })
}

pub fn write_weights<W: Write>(table: &WeightTable, mut out: W) -> Result<()> {
    let mut s = String::new();
    match table {
        WeightTable::Cq(w, grid) => {
            s.push_str("n,t_n,chi_n,varpi_n\n");
            for (n, (c, v)) in w.chi().iter().zip(w.varpi()).enumerate() {
                let _ = writeln!(s, "{n},{},{},{}", fmt_f64(grid.t(n)), fmt_f64(*c), fmt_f64(*v));
            }
        }
        WeightTable::Midpoint(k) => {
            s.push_str("j,kappa_j\n");
            for (j, v) in k.iter().enumerate().take(k.len().saturating_sub(1)) {
                let _ = writeln!(s, "{},{}", j + 1, fmt_f64(*v));
            }
        }
        WeightTable::L1(b) => {
            s.push_str("j,beta_j\n");
            for (j, v) in b.iter().enumerate() {
                let _ = writeln!(s, "{},{}", j + 1, fmt_f64(*v));
            }
        }
    }
    out.write_all(s.as_bytes())?;
    Ok(())
}

/// Outcome of one `--check` criterion.
#[derive(Clone, Debug, PartialEq)]
pub struct CheckLine {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

impl CheckLine {
    pub fn new(name: impl Into<String>, pass: bool, detail: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            pass,
            detail: detail.into(),
        }
    }
}

impl std::fmt::Display for CheckLine {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let tag = if self.pass { "PASS" } else { "FAIL" };
        write!(f, "{tag} {}: {}", self.name, self.detail)
    }
}

fn reference_for(problem: ProblemKind) -> &'static [(usize, f64)] {
    match problem {
        ProblemKind::Example1 => &REFERENCE_EXAMPLE1,
        ProblemKind::Example2 => &REFERENCE_EXAMPLE2,
        ProblemKind::Example3 => &REFERENCE_EXAMPLE3,
        _ => &[],
    }
}

fn check_diff(name: &str, diff: Option<f64>) -> Option<CheckLine> {
    diff.map(|d| CheckLine::new(name, d <= DIFF_TOL, format!("dense/isvd difference {d:.3e} (limit {DIFF_TOL:e})")))
}

pub fn check_solve(s: &SolveSummary) -> Vec<CheckLine> {
    let mut out: Vec<CheckLine> = s
        .runs
        .iter()
        .map(|r| {
            let ok = r.final_l2_error.map_or(true, f64::is_finite);
            CheckLine::new(format!("{} finite", r.history), ok, format!("final error {:?}", r.final_l2_error))
        })
        .collect();
    out.extend(check_diff("dense vs isvd", s.diff_dense_isvd));
    out
}

/// Table tolerances: errors within 5% of the reference where one exists,
/// rates `2 ± 0.15` on the smooth-in-time examples, dense/ISVD agreement.
pub fn check_convergence(problem: ProblemKind, rows: &[TableRow]) -> Vec<CheckLine> {
    let reference = reference_for(problem);
    let mut out = Vec::new();
    for row in rows {
        let err = row.err_dense.or(row.err_isvd);
        if let (Some(&(_, r)), Some(e)) = (reference.iter().find(|(n, _)| *n == row.n_div), err) {
            let rel = (e - r).abs() / r;
            out.push(CheckLine::new(
                format!("error n_div={}", row.n_div),
                rel <= ERROR_RTOL,
                format!("{e:.4e} vs {r:.2e} ({:+.2}%)", 100.0 * (e - r) / r),
            ));
        }
        if matches!(problem, ProblemKind::Example1 | ProblemKind::Example2) {
            if let Some(rt) = row.rate_dense.or(row.rate_isvd) {
                out.push(CheckLine::new(
                    format!("rate n_div={}", row.n_div),
                    (rt - RATE_TARGET).abs() <= RATE_TOL,
                    format!("{rt:.3}"),
                ));
            }
        }
        out.extend(check_diff(&format!("diff n_div={}", row.n_div), row.diff_dense_isvd));
    }
    out
}

pub fn check_rank_trace(run: &RunResult) -> Vec<CheckLine> {
    let first = run.rank_trace.iter().find(|s| s.rank > 0);
    let last = run.rank_trace.last();
    vec![
        CheckLine::new(
            "first nonzero column has rank 1",
            first.map_or(true, |s| s.rank == 1),
            format!("{first:?}"),
        ),
        CheckLine::new(
            "rank below column count",
            last.map_or(true, |s| s.rank < s.step + 1 || s.step == 0),
            format!("{last:?}"),
        ),
    ]
}

/// Compressed memory never exceeds twice the dense figure, and is smaller
/// at the longest run.
pub fn check_bench(rows: &[BenchRow]) -> Vec<CheckLine> {
    let mut out: Vec<CheckLine> = rows
        .iter()
        .map(|r| {
            CheckLine::new(
                format!("memory n_steps={}", r.n_steps),
                r.mem_isvd_bytes <= 2 * r.mem_dense_bytes,
                format!("isvd {} B vs dense {} B", r.mem_isvd_bytes, r.mem_dense_bytes),
            )
        })
        .collect();
    if let Some(r) = rows.iter().max_by_key(|r| r.n_steps) {
        out.push(CheckLine::new(
            "compressed memory smaller at largest N",
            r.mem_isvd_bytes < r.mem_dense_bytes,
            format!("ratio {:.4}", r.mem_isvd_bytes as f64 / r.mem_dense_bytes as f64),
        ));
    }
    out
}

/// `𝒳₀ = (3/2)^{−α}` and, in the exact-constant mode, exactness on `φ ≡ 1`.
pub fn check_weights(table: &WeightTable) -> Result<Vec<CheckLine>> {
    let mut out = Vec::new();
    if let WeightTable::Cq(w, grid) = table {
        let chi0 = 1.5f64.powf(-w.alpha());
        out.push(CheckLine::new("chi_0", w.chi()[0] == chi0, format!("{:e}", w.chi()[0])));
        if w.mode() == VarpiMode::ExactConstant {
            let ones = vec![1.0; w.steps() + 1];
            let mut worst = 0.0f64;
            for n in 1..=w.steps() {
                let exact = crate::kernels::weighted_abel_integral(w.alpha(), w.lambda(), grid.t(n))?;
                worst = worst.max((w.apply(&ones, n) - exact).abs());
            }
            out.push(CheckLine::new("constant exactness", worst <= 1e-12, format!("max error {worst:.3e}")));
        }
    }
    Ok(out)
}

/// Process exit code for an error: 1 for configuration and I/O problems,
/// 3 for numerical failures.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config(_) | Error::Io(_) | Error::InvalidParameter(_) | Error::InvalidGrid(_) => 1,
        _ => 3,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rates_blank_on_zero_errors() {
        assert_eq!(rate(Some(4.0), Some(1.0)), Some(2.0));
        assert_eq!(rate(Some(0.0), Some(0.0)), None);
        assert_eq!(rate(None, Some(1.0)), None);
        let row = TableRow {
            n_div: 4,
            n_steps: 4,
            h_over_sqrt2: 0.25,
            err_dense: Some(0.0),
            ..TableRow::default()
        };
        assert_eq!(row.csv(), "4,4,2.5000000000000000e-1,0.0000000000000000e0,,,,,,,,,,");
        assert_eq!(row.csv().split(',').count(), TABLE_HEADER.split(',').count());
    }

    #[test]
    fn floats_round_trip() {
        for v in [0.1, 1.0 / 3.0, 6.02214076e23, -2.2e-308] {
            assert_eq!(fmt_f64(v).parse::<f64>().unwrap(), v);
        }
    }

    #[test]
    fn zero_problem_has_zero_error() {
        let cfg = RunConfig::parse_str("problem = zero\nhistory = dense\nn_div = 4").unwrap();
        let s = cmd_solve(&cfg).unwrap();
        assert_eq!(s.runs[0].final_l2_error, Some(0.0));
    }

    #[test]
    fn exit_codes() {
        assert_eq!(exit_code(&Error::Config("x".into())), 1);
        assert_eq!(exit_code(&Error::NonFinite("u")), 3);
    }
}
