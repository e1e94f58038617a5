//! Bounds on the norm of `L^p + L^q` and the decomposition behind them.

use double_phase::exponents::ExponentField;
use double_phase::grid::{Grid, GridFunction, Layout};
use double_phase::spaces::{luxemburg_norm, sum_space_norm, SUM_SPACE_LOWER_C};

fn main() -> double_phase::Result<()> {
    let g = Grid::new(1, 4.0, 81)?;
    let p = ExponentField::constant(g, Layout::Cells, 2.0)?;
    let q = ExponentField::constant(g, Layout::Cells, 3.0)?;
    println!("p = 2, q = 3, lower-bound constant c = {SUM_SPACE_LOWER_C}");
    for amp in [0.5, 5.0, 50.0, 500.0] {
        // a narrow peak over a low tail: large values are cheaper in L^p,
        // small ones in L^q
        let u = GridFunction::from_fn(g, Layout::Cells, |x| amp * (-8.0 * x[0] * x[0]).exp() + 0.2)?;
        let r = sum_space_norm(&u, &p, &q)?;
        let (np, nq) = (luxemburg_norm(&u, &p, None)?, luxemburg_norm(&u, &q, None)?);
        println!(
            "amp {amp:>5}: lower {:.5}  upper {:.5}  (|u|_p {np:.5}, |u|_q {nq:.5})  split {:?} at t = {:.3}",
            r.lower, r.upper, r.best.kind, r.best.threshold
        );
        println!(
            "            |v|_p = {:.5}, |w|_q = {:.5}",
            luxemburg_norm(&r.best.v, &p, None)?,
            luxemburg_norm(&r.best.w, &q, None)?
        );
    }
    Ok(())
}
