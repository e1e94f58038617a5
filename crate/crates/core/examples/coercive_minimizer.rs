//! Sublinear reaction without the superlinear term: the energy is coercive
//! and its minimum is negative.

use std::path::Path;

use double_phase::cli::RunConfig;
use double_phase::grid::cone_function;
use double_phase::solvers::{minimize, radius_sensitivity, refinement_check};

fn main() -> double_phase::Result<()> {
    let cfg = RunConfig::load(&Path::new(env!("CARGO_MANIFEST_DIR")).join("configs/coercive_1d.toml"))?;
    let problem = cfg.problem()?;
    let opts = cfg.solver.options();
    let solve = |p: &double_phase::functional::ProblemSpec| minimize(p, &cone_function(&[0.0], 2.0, p.grid())?.scale(0.1), &opts);

    let rep = solve(&problem)?;
    println!(
        "{:?} after {} iterations: Φ = {:.8}, residual {:.2e}, peak {:.5}",
        rep.status,
        rep.iterations,
        rep.energy.total,
        rep.residual_norm,
        rep.solution.max_abs()
    );
    for t in rep.trace.iter().step_by((rep.trace.len() / 6).max(1)) {
        println!("  it {:>5}  Φ {:+.8e}  |r| {:.3e}", t.iteration, t.energy, t.residual_norm);
    }

    let fine = refinement_check(&problem, solve)?;
    println!(
        "halved spacing: Φ {:.8} -> {:.8} ({:.2e} relative)",
        fine.base_energy, fine.modified_energy, fine.relative_change
    );
    let wide = radius_sensitivity(&problem, 1.5, solve)?;
    println!(
        "box 1.5x wider: Φ {:.8} -> {:.8} ({:.2e} relative)",
        wide.base_energy, wide.modified_energy, wide.relative_change
    );
    Ok(())
}
