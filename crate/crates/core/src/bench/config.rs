//! Flat `key = value` run configuration.
//!
//! Blank lines and text after `#` are ignored. Keys:
//!
//! | key | value |
//! |---|---|
//! | `problem` | `example1`, `example2`, `example3`, `zero`, `custom` |
//! | `scheme` | `cn`, `bdf2cq`, `vo-l1` (defaults to the problem's kernel) |
//! | `history` | `dense`, `isvd`, `both` |
//! | `n_div` | cells per side |
//! | `n_steps` | time steps (default: `n_div`, or 4000 for `example3`) |
//! | `T` | final time |
//! | `tol` | ISVD tolerance |
//! | `alpha`, `lambda` | weakly singular kernel parameters |
//! | `varpi_mode` | `exact-const`, `paper-printed` |
//! | `levels` | comma-separated `n_div` list for `convergence` |
//! | `steps` | comma-separated `n_steps` list for `bench` |
//! | `checkpoint` | where `ranktrace` writes the final ISVD state |
//! | `out` | output path (default: stdout) |
//! | `seed` | seed for randomised checks |

use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::fem::ManufacturedProblem;
use crate::kernels::{KernelSpec, SmoothKernel, VariableOrder, VarpiMode};
use crate::solver::Scheme;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ProblemKind {
    Example1,
    Example2,
    Example3,
    /// `f = 0`, `u₀ = 0`; the kernel follows the scheme.
    Zero,
    /// Reserved for problems built through the library.
    Custom,
}

impl ProblemKind {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Example1 => "example1",
            Self::Example2 => "example2",
            Self::Example3 => "example3",
            Self::Zero => "zero",
            Self::Custom => "custom",
        }
    }
}

impl FromStr for ProblemKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "example1" => Ok(Self::Example1),
            "example2" => Ok(Self::Example2),
            "example3" => Ok(Self::Example3),
            "zero" => Ok(Self::Zero),
            "custom" => Ok(Self::Custom),
            other => Err(Error::Config(format!("unknown problem {other:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HistorySelection {
    Dense,
    Isvd,
    Both,
}

impl HistorySelection {
    pub fn dense(self) -> bool {
        matches!(self, Self::Dense | Self::Both)
    }

    pub fn isvd(self) -> bool {
        matches!(self, Self::Isvd | Self::Both)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Dense => "dense",
            Self::Isvd => "isvd",
            Self::Both => "both",
        }
    }
}

impl FromStr for HistorySelection {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dense" => Ok(Self::Dense),
            "isvd" => Ok(Self::Isvd),
            "both" => Ok(Self::Both),
            other => Err(Error::Config(format!("unknown history {other:?} (expected dense, isvd or both)"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub problem: ProblemKind,
    pub scheme: Option<Scheme>,
    pub history: HistorySelection,
    pub n_div: usize,
    pub n_steps: Option<usize>,
    pub t_final: f64,
    pub tol: f64,
    pub alpha: f64,
    pub lambda: f64,
    pub varpi_mode: VarpiMode,
    pub levels: Vec<usize>,
    pub steps: Vec<usize>,
    pub checkpoint: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            problem: ProblemKind::Example1,
            scheme: None,
            history: HistorySelection::Both,
            n_div: 8,
            n_steps: None,
            t_final: 1.0,
            tol: 1e-12,
            alpha: 0.8,
            lambda: 0.2,
            varpi_mode: VarpiMode::ExactConstant,
            levels: Vec::new(),
            steps: Vec::new(),
            checkpoint: None,
            out: None,
            seed: 0,
        }
    }
}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::Config(format!("cannot parse {key} = {value:?}")))
}

fn parse_list(key: &str, value: &str) -> Result<Vec<usize>> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| parse(key, s))
        .collect()
}

impl RunConfig {
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse_str(&text)
    }

    /// Defaults overridden by the `key = value` lines of `text`.
    pub fn parse_str(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key = value", lineno + 1)))?;
            cfg.set(key.trim(), value.trim())?;
        }
        Ok(cfg)
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "problem" => self.problem = value.parse()?,
            "scheme" => self.scheme = Some(value.parse()?),
            "history" => self.history = value.parse()?,
            "n_div" | "ndiv" => self.n_div = parse(key, value)?,
            "n_steps" | "nsteps" => self.n_steps = Some(parse(key, value)?),
            "T" | "t_final" => self.t_final = parse(key, value)?,
            "tol" => self.tol = parse(key, value)?,
            "alpha" => self.alpha = parse(key, value)?,
            "lambda" => self.lambda = parse(key, value)?,
            "varpi_mode" | "varpi-mode" => self.varpi_mode = value.parse()?,
            "levels" => self.levels = parse_list(key, value)?,
            "steps" => self.steps = parse_list(key, value)?,
            "checkpoint" => self.checkpoint = Some(PathBuf::from(value)),
            "out" => self.out = Some(PathBuf::from(value)),
            "seed" => self.seed = parse(key, value)?,
            other => return Err(Error::Config(format!("unknown key {other:?}"))),
        }
        Ok(())
    }

    /// Time steps for a level: explicit `n_steps`, else `Δt = 1/n_div`
    /// (4000 steps for `example3`).
    pub fn steps_for(&self, n_div: usize) -> usize {
        match (self.n_steps, self.problem) {
            (Some(n), _) => n,
            (None, ProblemKind::Example3) => 4000,
            (None, _) => n_div,
        }
    }

    /// Levels for `convergence`, falling back to the table layouts.
    pub fn convergence_levels(&self) -> Vec<usize> {
        if !self.levels.is_empty() {
            return self.levels.clone();
        }
        match self.problem {
            ProblemKind::Example3 => vec![4, 8, 16, 32],
            _ => vec![8, 16, 32, 64],
        }
    }

    /// Sweep for `bench`.
    pub fn bench_steps(&self) -> Vec<usize> {
        if self.steps.is_empty() {
            vec![100, 200, 400, 800, 1600]
        } else {
            self.steps.clone()
        }
    }

    /// Checks ranges and scheme/kernel compatibility.
    pub fn validate(&self) -> Result<()> {
        if self.n_div < 2 {
            return Err(Error::Config(format!("n_div must be >= 2, got {}", self.n_div)));
        }
        if self.n_steps == Some(0) || self.levels.iter().any(|&l| l < 2) || self.steps.contains(&0) {
            return Err(Error::Config("step counts must be >= 1 and levels >= 2".into()));
        }
        if !(self.t_final > 0.0 && self.t_final.is_finite()) {
            return Err(Error::Config(format!("T must be positive, got {}", self.t_final)));
        }
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(Error::Config(format!("tol must be positive, got {}", self.tol)));
        }
        let problem = self.problem()?;
        if let Some(s) = self.scheme {
            let needed = Scheme::for_kernel(&problem.kernel);
            if s != needed {
                return Err(Error::Config(format!(
                    "scheme {} does not match the {} kernel (use {})",
                    s.as_str(),
                    self.problem.as_str(),
                    needed.as_str()
                )));
            }
        }
        problem.kernel.validate(self.t_final).map_err(config_error)
    }

    pub fn scheme(&self) -> Result<Scheme> {
        Ok(Scheme::for_kernel(&self.problem()?.kernel))
    }

    pub fn problem(&self) -> Result<ManufacturedProblem> {
        let p = match self.problem {
            ProblemKind::Example1 => ManufacturedProblem::example1(),
            ProblemKind::Example2 => ManufacturedProblem::example2(self.alpha, self.lambda),
            ProblemKind::Example3 => ManufacturedProblem::example3(),
            ProblemKind::Zero => {
                let kernel = match self.scheme.unwrap_or(Scheme::Cn) {
                    Scheme::Cn => KernelSpec::Smooth(SmoothKernel::log1p()),
                    Scheme::Bdf2Cq => KernelSpec::weak_singular(self.alpha, self.lambda).map_err(config_error)?,
                    Scheme::VoL1 => KernelSpec::VariableOrder(VariableOrder::sine()),
                };
                ManufacturedProblem::zero(kernel)
            }
            ProblemKind::Custom => {
                return Err(Error::Config(
                    "problem = custom needs a ManufacturedProblem built in Rust; see the library API".into(),
                ))
            }
        };
        Ok(p.with_t_final(self.t_final))
    }
}

fn config_error(e: Error) -> Error {
    match e {
        Error::InvalidParameter(msg) => Error::Config(msg),
        other => other,
    }
}
