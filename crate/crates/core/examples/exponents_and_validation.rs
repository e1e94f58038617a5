//! Checks the standing hypotheses for a few configurations and prints what
//! fails and by how much.

use std::path::Path;

use double_phase::cli::RunConfig;
use double_phase::exponents::{sobolev_conjugate, strictly_less, ExponentField};
use double_phase::grid::{Grid, Layout};
use double_phase::profile::Profile;

fn main() -> double_phase::Result<()> {
    let configs = Path::new(env!("CARGO_MANIFEST_DIR")).join("configs");
    for name in ["reference.toml", "strict_2d.toml", "variable_1d.toml"] {
        let problem = RunConfig::load(&configs.join(name))?.problem()?;
        let rep = problem.validation();
        println!("{name}: overall {}", if rep.overall_pass { "pass" } else { "FAIL" });
        for c in &rep.checks {
            let mark = if c.holds {
                "ok"
            } else if c.waived {
                "waived"
            } else {
                "FAILS"
            };
            println!("  {:<24} {:>7} margin {:+.3e}  {}", c.id, mark, c.margin, c.statement);
        }
    }

    // a variable exponent and its critical exponent in three dimensions
    let g = Grid::new(1, 3.0, 13)?;
    let p = ExponentField::from_profile(g, Layout::Nodes, &Profile::sinusoidal(2.0, 0.5, 1.0))?;
    let ps = sobolev_conjugate(&p, 3)?;
    println!("\np = 2 + sin(x)/2 on [-3, 3], N = 3");
    for (i, x) in g.points(Layout::Nodes).enumerate().step_by(3) {
        println!("  x = {:+.2}  p = {:.4}  p* = {:.4}", x[0], p.values()[i], ps.values()[i]);
    }
    let (ok, gap) = strictly_less(&p, &ps)?;
    println!("  p << p*: {ok} (smallest gap {gap:.4})");
    Ok(())
}
