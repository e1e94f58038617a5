//! Searches for several solutions from random starts and lists the distinct
//! ones found, ordered by energy.

use std::path::Path;

use double_phase::cli::RunConfig;
use double_phase::solvers::{field_hash, multi_solution_sweep};
use double_phase::spaces::x_norm;

fn main() -> double_phase::Result<()> {
    let cfg = RunConfig::load(&Path::new(env!("CARGO_MANIFEST_DIR")).join("configs/mountain_pass_1d.toml"))?;
    let problem = cfg.problem()?;
    let n_starts = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(4);
    let found = multi_solution_sweep(&problem, n_starts, cfg.seed, &cfg.solver.options())?;
    println!("{} distinct solutions from {n_starts} starts and their mirrors", found.len());
    for s in &found {
        let v = s.solution.values();
        println!(
            "  {:?}  Φ {:+.8}  |r| {:.2e}  norm {:.3e}  mean {:+.3e}  hash {:016x}",
            s.classification,
            s.energy.total,
            s.residual_norm,
            x_norm(&s.solution, &problem)?,
            v.iter().sum::<f64>() / v.len() as f64,
            field_hash(&s.solution)
        );
    }
    Ok(())
}
