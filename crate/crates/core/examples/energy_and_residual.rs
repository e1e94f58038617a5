//! Evaluates the discrete energy, its parts and its gradient, and checks the
//! gradient against a finite difference.

use std::path::Path;

use double_phase::cli::RunConfig;
use double_phase::functional::{energy, monotonicity_pairing, ps_quantity, residual, residual_dual_proxy};
use double_phase::grid::{cone_function, GridFunction, Layout};

fn main() -> double_phase::Result<()> {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("configs/reference.toml");
    let problem = RunConfig::load(&path)?.problem()?;
    let grid = *problem.grid();
    let h0 = cone_function(&[0.0, 0.0], 2.0, &grid)?;

    println!("along t h0 (cone of height 2):");
    for t in [0.01, 0.1, 0.5, 1.0, 2.0] {
        let u = h0.scale(t);
        let e = energy(&u, &problem)?;
        let r = residual(&u, &problem)?;
        println!(
            "  t = {t:<4}  Φ = {:+.5e}  (𝒜 {:.3e}, α {:.3e}, F {:.3e})  |r| = {:.3e}  dual {:.3e}  PS {:+.3e}",
            e.total,
            e.phi_a,
            e.phi_alpha,
            e.phi_f,
            r.l2_norm(),
            residual_dual_proxy(&r, &problem)?,
            ps_quantity(&u, &problem)?
        );
    }

    let v = GridFunction::from_fn(grid, Layout::Interior, |x| {
        (x[0] - 0.5 * x[1]).sin() * (-0.2 * (x[0] * x[0] + x[1] * x[1])).exp()
    })?;
    let u = h0.scale(0.7);
    let eps = 1e-5;
    let fd = (energy(&u.axpby(1.0, &v, eps)?, &problem)?.total - energy(&u.axpby(1.0, &v, -eps)?, &problem)?.total) / (2.0 * eps);
    let exact = residual(&u, &problem)?.dot(&v)?;
    println!("directional derivative: exact {exact:.10e}, central difference {fd:.10e}");
    println!(
        "monotonicity pairing (u, 0): {:.5e}",
        monotonicity_pairing(&u, &GridFunction::zeros(grid), &problem)?
    );
    Ok(())
}
