//! Wall time and history memory of dense versus compressed storage as the
//! number of time steps grows on a fixed mesh (smooth kernel, CN).
//!
//! `cargo run --release --example memory_bench -- [n_div] [steps,...]`

use nonfickian_isvd::bench::{check_bench, cmd_bench, write_bench, RunConfig};

fn main() -> nonfickian_isvd::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let mut cfg = RunConfig::default();
    cfg.set("n_div", args.first().map_or("32", String::as_str))?;
    cfg.set("steps", args.get(1).map_or("1,100,200,400,800,1600", String::as_str))?;
    let rows = cmd_bench(&cfg)?;
    write_bench(&rows, std::io::stdout().lock())?;
    for line in check_bench(&rows) {
        println!("{line}");
    }
    Ok(())
}
