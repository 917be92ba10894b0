//! Convergence table for the smooth kernel `K(t) = ln(1+t)` with
//! Crank–Nicolson, dense and compressed history side by side.
//!
//! `cargo run --release --example table1_log_kernel`

use nonfickian_isvd::bench::{check_convergence, cmd_convergence, write_table, ProblemKind, RunConfig};

fn main() -> nonfickian_isvd::Result<()> {
    let cfg = RunConfig {
        problem: ProblemKind::Example1,
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
