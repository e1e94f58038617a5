//! Mountain-pass solutions with a superlinear reaction, and how far the
//! sublinear term can be turned up before the geometry breaks.

use std::path::Path;

use double_phase::cli::RunConfig;
use double_phase::solvers::{default_seed, far_point, lambda_continuation, mountain_pass};

fn main() -> double_phase::Result<()> {
    let cfg = RunConfig::load(&Path::new(env!("CARGO_MANIFEST_DIR")).join("configs/mountain_pass_1d.toml"))?;
    let problem = cfg.problem()?;
    let opts = cfg.solver.options();

    let far = far_point(&problem, &default_seed(&problem)?, &opts)?;
    println!("far point: peak {:.3}", far.max_abs());
    let rep = mountain_pass(&problem, &far, opts.path_nodes, &opts)?;
    println!(
        "{:?} after {} iterations: Φ = {:.8}, residual {:.2e}, peak {:.5}",
        rep.status,
        rep.iterations,
        rep.energy.total,
        rep.residual_norm,
        rep.solution.max_abs()
    );
    for t in rep.trace.iter().step_by((rep.trace.len() / 5).max(1)) {
        println!("  it {:>4}  path max {:.8}  |r| {:.3e}", t.iteration, t.energy, t.residual_norm);
    }

    println!("continuation in λ:");
    for s in lambda_continuation(&problem, &[0.0, 1e-3, 1e-2, 0.1, 1.0], &opts)? {
        println!(
            "  λ = {:<6} {:?}  Φ {:.6}  |r| {:.2e}",
            s.lambda, s.status, s.energy, s.residual_norm
        );
    }
    Ok(())
}
