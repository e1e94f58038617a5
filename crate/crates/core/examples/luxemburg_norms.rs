//! Luxemburg norms and modulars of a variable-exponent space, and the
//! inequality batteries run on them.

use double_phase::exponents::ExponentField;
use double_phase::grid::{Grid, GridFunction, Layout};
use double_phase::profile::Profile;
use double_phase::random::{fork, seeded};
use double_phase::spaces::{
    check_holder, check_interpolation, convergence_battery, holder_battery, luxemburg_norm, modular, norm_modular_battery,
    power_bounds_battery,
};

fn main() -> double_phase::Result<()> {
    let g = Grid::new(1, 4.0, 201)?;
    let p = ExponentField::from_profile(g, Layout::Interior, &Profile::sinusoidal(2.0, 1.0, 1.0))?;
    let u = GridFunction::from_fn(g, Layout::Interior, |x| 3.0 * (-x[0] * x[0]).exp())?;

    println!("p = 2 + sin x, u = 3 exp(-x²)");
    for c in [0.1, 0.5, 1.0, 2.0] {
        let v = u.scale(c);
        let n = luxemburg_norm(&v, &p, None)?;
        let rho = modular(&v, &p, None)?;
        println!(
            "  {c:>4} u: norm {n:.6}  modular {:.6} (above one {:.6}, below {:.6})",
            rho.value, rho.large_part, rho.small_part
        );
    }

    let v = GridFunction::from_fn(g, Layout::Interior, |x| x[0].cos())?;
    let h = check_holder(&u, &v, &p)?;
    println!("Hölder: |∫uv| = {:.5} <= {:.5}", h.lhs, h.rhs);

    let c = |v| ExponentField::constant(g, Layout::Interior, v);
    let i = check_interpolation(&u, &c(2.5)?, &c(2.0)?, &c(3.0)?)?;
    println!("interpolation (2, 2.5, 3): {:.5} <= {:.5}", i.lhs, i.rhs);

    let mut rng = seeded(7);
    for rep in [
        norm_modular_battery(&p, 500, &mut fork(&mut rng))?,
        power_bounds_battery(&p, 500, &mut fork(&mut rng))?,
        convergence_battery(&p, 200, &mut fork(&mut rng))?,
        holder_battery(&p, 500, &mut fork(&mut rng))?,
    ] {
        println!(
            "{:<28} {} trials, {} failures, worst slack {:.2e}",
            rep.inequality_name, rep.trials, rep.failures, rep.worst_slack
        );
    }
    Ok(())
}
