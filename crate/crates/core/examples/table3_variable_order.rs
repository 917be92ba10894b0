//! Variable-order Caputo problem, `α(t) = ½ + ¼ sin 5t`, with `Δt = 1/4000`
//! on every mesh. The last row shows the wall-time gap between dense and
//! compressed history.
//!
//! `cargo run --release --example table3_variable_order [max_n_div]`

use nonfickian_isvd::bench::{check_convergence, cmd_convergence, write_table, ProblemKind, RunConfig};

fn main() -> nonfickian_isvd::Result<()> {
    let max: usize = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(32);
    let levels: Vec<usize> = [4, 8, 16, 32, 64].into_iter().filter(|&l| l <= max).collect();
    let cfg = RunConfig {
        problem: ProblemKind::Example3,
        n_steps: Some(4000),
        levels,
        ..RunConfig::default()
    };
    let rows = cmd_convergence(&cfg)?;
    write_table(&rows, std::io::stdout().lock())?;
    for line in check_convergence(cfg.problem, &rows) {
        println!("{line}");
    }
    if let Some(r) = rows.last() {
        if let (Some(d), Some(i)) = (r.time_dense_s, r.time_isvd_s) {
            println!("n_div={}: dense {d:.2}s, isvd {i:.2}s, ratio {:.2}", r.n_div, d / i);
        }
    }
    Ok(())
}
