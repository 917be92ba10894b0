//! Rank of the compressed history after every step, for any of the three
//! examples. Prints `step,rank,q,T_sv` CSV.
//!
//! `cargo run --release --example rank_trace -- example3 16 1000`

use nonfickian_isvd::bench::{cmd_ranktrace, write_rank_trace, HistorySelection, RunConfig};

fn main() -> nonfickian_isvd::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let mut cfg = RunConfig {
        history: HistorySelection::Isvd,
        ..RunConfig::default()
    };
    cfg.set("problem", args.first().map_or("example1", String::as_str))?;
    cfg.set("n_div", args.get(1).map_or("16", String::as_str))?;
    if let Some(n) = args.get(2) {
        cfg.set("n_steps", n)?;
    }
    let run = cmd_ranktrace(&cfg)?;
    write_rank_trace(&run.rank_trace, std::io::stdout().lock())?;
    eprintln!(
        "{} columns of length {}: final rank {}, T_sv {}",
        run.steps + 1,
        run.dofs,
        run.final_rank(),
        run.t_sv
    );
    Ok(())
}
