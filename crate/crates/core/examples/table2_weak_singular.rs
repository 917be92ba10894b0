//! Convergence table for `K(t) = e^{−0.2t} t^{−0.2}/Γ(0.8)` with BDF2 and
//! convolution quadrature.
//!
//! `cargo run --release --example table2_weak_singular`

use nonfickian_isvd::bench::{check_convergence, cmd_convergence, write_table, ProblemKind, RunConfig};

fn main() -> nonfickian_isvd::Result<()> {
    let cfg = RunConfig {
        problem: ProblemKind::Example2,
        alpha: 0.8,
        lambda: 0.2,
        levels: vec![8, 16, 32, 64],
        ..RunConfig::default()
    };
    let rows = cmd_convergence(&cfg)?;
    write_table(&rows, std::io::stdout().lock())?;
    for line in check_convergence(cfg.problem, &rows) {
        println!("{line}");
    }
    Ok(())
}
