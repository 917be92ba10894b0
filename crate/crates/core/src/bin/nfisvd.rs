use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use nonfickian_isvd::bench::{self, CheckLine, RunConfig};
use nonfickian_isvd::error::{Error, Result};

/// Dense versus ISVD-compressed history for integro-differential solves.
#[derive(Parser)]
#[command(name = "nfisvd", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// One solve; JSON summary.
    Solve(Flags),
    /// Error and rate table over mesh levels; CSV.
    Convergence(Flags),
    /// Per-step rank of the compressed history; CSV.
    Ranktrace(Flags),
    /// Dense vs ISVD wall time and memory over a step sweep; CSV.
    Bench(Flags),
    /// Memory quadrature weights; CSV.
    Weights(Flags),
}

#[derive(Args)]
struct Flags {
    /// key = value configuration file; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    problem: Option<String>,
    #[arg(long)]
    scheme: Option<String>,
    /// dense, isvd or both
    #[arg(long)]
    history: Option<String>,
    #[arg(long)]
    ndiv: Option<String>,
    #[arg(long)]
    nsteps: Option<String>,
    #[arg(long)]
    tol: Option<String>,
    #[arg(long)]
    alpha: Option<String>,
    #[arg(long)]
    lambda: Option<String>,
    /// exact-const or paper-printed
    #[arg(long = "varpi-mode")]
    varpi_mode: Option<String>,
    /// Comma-separated mesh levels (convergence).
    #[arg(long)]
    levels: Option<String>,
    /// Comma-separated step counts (bench).
    #[arg(long)]
    steps: Option<String>,
    /// Output path; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Verify the run against its tolerances; exit 2 on failure.
    #[arg(long)]
    check: bool,
}

impl Flags {
    fn config(&self) -> Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(p) => RunConfig::from_file(p)?,
            None => RunConfig::default(),
        };
        let pairs = [
            ("problem", &self.problem),
            ("scheme", &self.scheme),
            ("history", &self.history),
            ("n_div", &self.ndiv),
            ("n_steps", &self.nsteps),
            ("tol", &self.tol),
            ("alpha", &self.alpha),
            ("lambda", &self.lambda),
            ("varpi_mode", &self.varpi_mode),
            ("levels", &self.levels),
            ("steps", &self.steps),
        ];
        for (key, value) in pairs {
            if let Some(v) = value {
                cfg.set(key, v)?;
            }
        }
        if let Some(p) = &self.out {
            cfg.out = Some(p.clone());
        }
        Ok(cfg)
    }
}

fn emit(cfg: &RunConfig, text: &[u8]) -> Result<()> {
    match &cfg.out {
        Some(p) => std::fs::write(p, text).map_err(Error::from),
        None => std::io::stdout().write_all(text).map_err(Error::from),
    }
}

fn run(command: Command) -> Result<(bool, Vec<CheckLine>)> {
    let (flags, checks) = match command {
        Command::Solve(f) => {
            let cfg = f.config()?;
            let summary = bench::cmd_solve(&cfg)?;
            let mut json = serde_json::to_vec_pretty(&summary).map_err(|e| Error::Io(e.to_string()))?;
            json.push(b'\n');
            emit(&cfg, &json)?;
            let checks = bench::check_solve(&summary);
            (f, checks)
        }
        Command::Convergence(f) => {
            let cfg = f.config()?;
            let rows = bench::cmd_convergence(&cfg)?;
            let mut buf = Vec::new();
            bench::write_table(&rows, &mut buf)?;
            emit(&cfg, &buf)?;
            let checks = bench::check_convergence(cfg.problem, &rows);
            (f, checks)
        }
        Command::Ranktrace(f) => {
            let mut cfg = f.config()?;
            if f.history.is_none() {
                cfg.history = bench::HistorySelection::Isvd;
            }
            let run = bench::cmd_ranktrace(&cfg)?;
            let mut buf = Vec::new();
            bench::write_rank_trace(&run.rank_trace, &mut buf)?;
            emit(&cfg, &buf)?;
            let checks = bench::check_rank_trace(&run);
            (f, checks)
        }
        Command::Bench(f) => {
            let cfg = f.config()?;
            let rows = bench::cmd_bench(&cfg)?;
            let mut buf = Vec::new();
            bench::write_bench(&rows, &mut buf)?;
            emit(&cfg, &buf)?;
            let checks = bench::check_bench(&rows);
            (f, checks)
        }
        Command::Weights(f) => {
            let cfg = f.config()?;
            let table = bench::cmd_weights(&cfg)?;
            let mut buf = Vec::new();
            bench::write_weights(&table, &mut buf)?;
            emit(&cfg, &buf)?;
            let checks = bench::check_weights(&table)?;
            (f, checks)
        }
    };
    Ok((flags.check, checks))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok((false, _)) => ExitCode::SUCCESS,
        Ok((true, checks)) => {
            for c in &checks {
                eprintln!("{c}");
            }
            if checks.iter().all(|c| c.pass) {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(2)
            }
        }
        Err(e) => {
            eprintln!("nfisvd: {e}");
            ExitCode::from(bench::exit_code(&e) as u8)
        }
    }
}
