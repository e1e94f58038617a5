//! Solutions of one sign from the truncated reaction: a mountain pass with
//! positive energy and a small solution with negative energy, per sign.

use std::path::Path;

use double_phase::cli::RunConfig;
use double_phase::solvers::{solve_sign_definite, Sign};

fn main() -> double_phase::Result<()> {
    let cfg = RunConfig::load(&Path::new(env!("CARGO_MANIFEST_DIR")).join("configs/mountain_pass_1d.toml"))?;
    let problem = cfg.problem()?;
    let opts = cfg.solver.options();
    for sign in [Sign::Positive, Sign::Negative] {
        let rep = solve_sign_definite(&problem, sign, &opts)?;
        println!("{sign:?}: ball radius {:.4}", rep.ball_radius);
        for (name, r) in [("mountain pass", &rep.mountain_pass), ("small ball", &rep.small_ball)] {
            let v = r.solution.values();
            let lo = v.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            println!(
                "  {name:<13} {:?}  Φ {:+.6e}  |r| {:.2e}  values in [{lo:+.3e}, {hi:+.3e}]",
                r.status, r.energy.total, r.residual_norm
            );
        }
        println!("  small solution norm {:.3e}", rep.small_norm);
    }
    Ok(())
}
