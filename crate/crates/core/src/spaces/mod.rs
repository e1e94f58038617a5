//! Modulars and Luxemburg norms of variable-exponent, weighted, sum and
//! intersection spaces, with checkers for the norm inequalities they satisfy.

mod battery;
mod sum;

pub use battery::{
    convergence_battery, holder_battery, homogeneity_battery, interpolation_battery, norm_modular_battery, power_bounds_battery,
    sum_space_battery, BatteryReport,
};
pub use sum::{
    sum_space_lower_bound, sum_space_norm, sum_space_norm_with, SplitKind, SumSpaceDecomposition, SumSpaceNorm, SUM_SPACE_LOWER_C,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exponents::{holder_conjugate, ExponentField};
use crate::functional::ProblemSpec;
use crate::grid::{gradient, integrate, CompensatedSum, GridFunction};

/// Relative tolerance of the norm root-finding.
pub const NORM_RTOL: f64 = 1e-10;
/// Relative slack granted to inequality checks.
pub const CHECK_SLACK: f64 = 1e-9;
const NORM_MAX_ITER: usize = 400;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModularResult {
    pub value: f64,
    /// Contribution of the nodes where `|u| > 1`.
    pub large_part: f64,
    /// Contribution of the nodes where `|u| <= 1`.
    pub small_part: f64,
}

fn check_compatible(u: &GridFunction, p: &ExponentField, weight: Option<&GridFunction>) -> Result<()> {
    if u.grid() != p.grid() || u.layout() != p.layout() {
        return Err(Error::GridMismatch(format!(
            "field on {:?}/{:?}, exponent on {:?}/{:?}",
            u.grid(),
            u.layout(),
            p.grid(),
            p.layout()
        )));
    }
    if let Some(p) = p.values().iter().find(|v| !v.is_finite()) {
        return Err(Error::InvalidExponent(format!("modular needs finite exponents, got {p}")));
    }
    if let Some(w) = weight {
        if w.grid() != u.grid() || w.layout() != u.layout() || w.components() != 1 {
            return Err(Error::GridMismatch("weight must be a scalar field on the same layout".into()));
        }
        if let Some(i) = w.values().iter().position(|v| *v < 0.0) {
            return Err(Error::InvalidArgument(format!("negative weight at index {i}")));
        }
    }
    Ok(())
}

/// `∫ weight |u|^{p(x)}`; vector fields use the pointwise Euclidean length.
pub fn modular(u: &GridFunction, p: &ExponentField, weight: Option<&GridFunction>) -> Result<ModularResult> {
    check_compatible(u, p, weight)?;
    let m = u.magnitude();
    let vol = u.grid().cell_volume();
    let mut large = CompensatedSum::default();
    let mut small = CompensatedSum::default();
    for (i, (a, e)) in m.values().iter().zip(p.values()).enumerate() {
        let w = weight.map_or(1.0, |w| w.values()[i]);
        let t = if *a == 0.0 { 0.0 } else { w * a.powf(*e) };
        if *a > 1.0 {
            large.add(t);
        } else {
            small.add(t);
        }
    }
    let large_part = large.total() * vol;
    let small_part = small.total() * vol;
    Ok(ModularResult {
        value: large_part + small_part,
        large_part,
        small_part,
    })
}

/// Luxemburg norm of nonnegative samples `mags` with exponents `p` and
/// quadrature weights `weights` (already including the cell volume).
pub(crate) fn luxemburg_raw(mags: &[f64], p: &[f64], weights: &[f64]) -> Result<f64> {
    // (ln|u|, p, ln weight) per contributing node.
    let mut terms: Vec<(f64, f64, f64)> = Vec::with_capacity(mags.len());
    let mut peak: f64 = 0.0;
    let mut vol = 0.0;
    let (mut pmin, mut pmax) = (f64::INFINITY, f64::NEG_INFINITY);
    for i in 0..mags.len() {
        if mags[i] > 0.0 && weights[i] > 0.0 {
            terms.push((mags[i].ln(), p[i], weights[i].ln()));
            peak = peak.max(mags[i]);
            vol += weights[i];
            pmin = pmin.min(p[i]);
            pmax = pmax.max(p[i]);
        }
    }
    if terms.is_empty() {
        return Ok(0.0);
    }
    // ln ρ(u/λ) as a function of L = ln λ is a decreasing log-sum-exp of
    // affine maps, hence convex; returns it with its derivative.
    let log_rho = |l: f64| -> (f64, f64) {
        let shift = terms.iter().map(|(lu, e, lw)| lw + e * (lu - l)).fold(f64::NEG_INFINITY, f64::max);
        let mut s = CompensatedSum::default();
        let mut ds = CompensatedSum::default();
        for (lu, e, lw) in &terms {
            let t = (lw + e * (lu - l) - shift).exp();
            s.add(t);
            ds.add(e * t);
        }
        (shift + s.total().ln(), -ds.total() / s.total())
    };
    // in logs, so subnormal magnitudes do not underflow the bracket
    let mut lo = peak.ln() + vol.ln() / pmax - 6.0 * std::f64::consts::LN_10;
    let mut hi = peak.ln() + (1.0 + vol).ln() / pmin;
    let mut iter = 0;
    let step = 8.0 * std::f64::consts::LN_2;
    while log_rho(lo).0 <= 0.0 {
        lo -= step;
        iter += 1;
        if iter > NORM_MAX_ITER {
            return Err(Error::NormNotConverged(iter));
        }
    }
    while log_rho(hi).0 > 0.0 {
        hi += step;
        iter += 1;
        if iter > NORM_MAX_ITER {
            return Err(Error::NormNotConverged(iter));
        }
    }
    // Newton from the left end converges monotonically for a convex
    // decreasing function; bisection takes over if round-off pushes an
    // iterate out of the bracket.
    let mut l = lo;
    loop {
        let (f, df) = log_rho(l);
        if f > 0.0 {
            lo = l;
        } else {
            hi = l;
        }
        let mut next = l - f / df;
        if !(next > lo && next < hi) || !next.is_finite() {
            next = 0.5 * (lo + hi);
        }
        let done = (next - l).abs() <= NORM_RTOL * 1e-2 || hi - lo <= NORM_RTOL * 1e-2;
        l = next;
        iter += 1;
        if done {
            return Ok(l.exp());
        }
        if iter > NORM_MAX_ITER {
            return Err(Error::NormNotConverged(iter));
        }
    }
}

/// `inf { λ > 0 : ρ(u/λ) <= 1 }`, zero for the zero field.
pub fn luxemburg_norm(u: &GridFunction, p: &ExponentField, weight: Option<&GridFunction>) -> Result<f64> {
    check_compatible(u, p, weight)?;
    let m = u.magnitude();
    let vol = u.grid().cell_volume();
    let weights: Vec<f64> = match weight {
        Some(w) => w.values().iter().map(|v| v * vol).collect(),
        None => vec![vol; m.len()],
    };
    luxemburg_raw(m.values(), p.values(), &weights)
}

/// Norm restricted to the samples where `mask` is true.
pub fn luxemburg_norm_on(u: &GridFunction, p: &ExponentField, weight: Option<&GridFunction>, mask: &[bool]) -> Result<f64> {
    check_compatible(u, p, weight)?;
    if mask.len() != u.len() {
        return Err(Error::GridMismatch("mask length differs from the field".into()));
    }
    let m = u.magnitude();
    let vol = u.grid().cell_volume();
    let weights: Vec<f64> = (0..m.len())
        .map(|i| {
            if mask[i] {
                weight.map_or(1.0, |w| w.values()[i]) * vol
            } else {
                0.0
            }
        })
        .collect();
    luxemburg_raw(m.values(), p.values(), &weights)
}

/// `max(|u|_p, |u|_q)`.
pub fn intersection_norm(u: &GridFunction, p: &ExponentField, q: &ExponentField) -> Result<f64> {
    Ok(luxemburg_norm(u, p, None)?.max(luxemburg_norm(u, q, None)?))
}

/// `|u|_α + |∇u|_{p+q}` with the given exponents: `alpha` on the interior
/// nodes, `p` and `q` on the cells.
pub fn x_norm_with(u: &GridFunction, alpha: &ExponentField, p: &ExponentField, q: &ExponentField) -> Result<f64> {
    let a = luxemburg_norm(u, alpha, None)?;
    let g = gradient(u)?;
    Ok(a + sum_space_norm(&g, p, q)?.upper)
}

/// The energy-space norm of `u` for a problem.
pub fn x_norm(u: &GridFunction, problem: &ProblemSpec) -> Result<f64> {
    x_norm_with(u, problem.alpha(), problem.p_cells(), problem.q_cells())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InequalityCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

impl InequalityCheck {
    fn new(lhs: f64, rhs: f64) -> Self {
        InequalityCheck {
            lhs,
            rhs,
            holds: lhs <= rhs * (1.0 + CHECK_SLACK),
        }
    }

    /// `(rhs - lhs) / rhs`, or 0 when both sides vanish.
    pub fn relative_slack(&self) -> f64 {
        if self.rhs == 0.0 && self.lhs == 0.0 {
            0.0
        } else {
            (self.rhs - self.lhs) / self.rhs.abs().max(self.lhs.abs())
        }
    }
}

/// `|∫ u v| <= (1/p⁻ + 1/p'⁻) |u|_p |v|_{p'}`.
pub fn check_holder(u: &GridFunction, v: &GridFunction, p: &ExponentField) -> Result<InequalityCheck> {
    let pc = holder_conjugate(p)?;
    let lhs = integrate(&u.mul(v)?)?.abs();
    let factor = 1.0 / p.inf_val() + 1.0 / pc.inf_val();
    let rhs = factor * luxemburg_norm(u, p, None)? * luxemburg_norm(v, &pc, None)?;
    Ok(InequalityCheck::new(lhs, rhs))
}

/// The interpolation exponent `θ = p(q - α) / (α(q - p))`.
pub fn interpolation_exponent(alpha: &ExponentField, p: &ExponentField, q: &ExponentField) -> Result<ExponentField> {
    let qa = q.zip_with(alpha, |q, a| q - a)?;
    let num = p.zip_with(&qa, |p, d| p * d)?;
    let qp = q.zip_with(p, |q, p| q - p)?;
    let den = alpha.zip_with(&qp, |a, d| a * d)?;
    num.zip_with(&den, |n, d| n / d)
}

/// `|u|_α <= 2 |u|_p^θ |u|_q^{1-θ}` evaluated at both ends of the sampled
/// range of `θ`, keeping the larger right-hand side.
pub fn check_interpolation(u: &GridFunction, alpha: &ExponentField, p: &ExponentField, q: &ExponentField) -> Result<InequalityCheck> {
    let (lo, _) = crate::exponents::strictly_less(p, alpha)?;
    let (hi, _) = crate::exponents::strictly_less(alpha, q)?;
    if !(lo && hi) {
        return Err(Error::InvalidExponent("interpolation needs p << alpha << q".into()));
    }
    let theta = interpolation_exponent(alpha, p, q)?;
    let lhs = luxemburg_norm(u, alpha, None)?;
    let np = luxemburg_norm(u, p, None)?;
    let nq = luxemburg_norm(u, q, None)?;
    let rhs = [theta.inf_val(), theta.sup_val()]
        .iter()
        .map(|t| 2.0 * np.powf(*t) * nq.powf(1.0 - t))
        .fold(0.0, f64::max);
    Ok(InequalityCheck::new(lhs, rhs))
}

/// Norm of `w` outside the cube `|x|_∞ <= k` for each `k` in `radii`.
pub fn weighted_tail_profile(w: &GridFunction, r: &ExponentField, radii: &[f64]) -> Result<Vec<f64>> {
    let grid = *w.grid();
    if radii.windows(2).any(|p| p[1] <= p[0]) {
        return Err(Error::InvalidArgument("radii must be strictly increasing".into()));
    }
    if radii.iter().any(|k| *k < 0.0 || *k > grid.radius()) {
        return Err(Error::InvalidArgument("radii must lie in [0, R]".into()));
    }
    let dim = grid.dim();
    let layout = w.layout();
    radii
        .iter()
        .map(|k| {
            let mask: Vec<bool> = grid
                .points(layout)
                .map(|x| x[..dim].iter().fold(0.0f64, |m, v| m.max(v.abs())) > *k)
                .collect();
            luxemburg_norm_on(w, r, None, &mask)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn subnormal_magnitudes_have_a_norm() {
        let m = [1e-319, 3e-320];
        let n = luxemburg_raw(&m, &[2.0, 2.0], &[1.0, 1.0]).unwrap();
        let exact = 1e-319 * (1.0f64 + 0.3 * 0.3).sqrt();
        assert!(n > 0.0 && (n / exact - 1.0).abs() < 1e-3, "{n:e} vs {exact:e}");
    }
    use crate::grid::{cone_function, Grid, Layout};
    use crate::profile::Profile;

    fn unit_cells() -> Grid {
        // cells of [-0.5, 0.5] have total measure 1
        Grid::new(1, 0.5, 101).unwrap()
    }

    fn constant(g: Grid, layout: Layout, v: f64) -> GridFunction {
        GridFunction::from_fn(g, layout, |_| v).unwrap()
    }

    fn exp_const(g: Grid, layout: Layout, v: f64) -> ExponentField {
        ExponentField::constant(g, layout, v).unwrap()
    }

    #[test]
    fn modular_of_one_is_measure() {
        let g = Grid::new(1, 1.0, 41).unwrap();
        let p = ExponentField::from_profile(g, Layout::Interior, &Profile::sinusoidal(2.0, 1.0, 1.0)).unwrap();
        let m = modular(&constant(g, Layout::Interior, 1.0), &p, None).unwrap();
        assert!((m.value - 2.0).abs() <= g.spacing());
        assert_eq!(m.large_part, 0.0);
        assert_eq!(modular(&GridFunction::zeros(g), &p, None).unwrap().value, 0.0);
    }

    #[test]
    fn modular_variable_exponent_matches_closed_form() {
        // ∫_0^1 2^{2+x} dx = 4 / ln 2, exponent sampled at cell midpoints
        let g = unit_cells();
        let p = ExponentField::from_profile(g, Layout::Cells, &Profile::affine(2.5, &[1.0])).unwrap();
        let m = modular(&constant(g, Layout::Cells, 2.0), &p, None).unwrap();
        let exact = 4.0 / std::f64::consts::LN_2;
        assert!((m.value - exact).abs() < 1e-4 * exact, "{}", m.value);
        assert_eq!(m.small_part, 0.0);
    }

    #[test]
    fn negative_weight_is_rejected() {
        let g = unit_cells();
        let w = constant(g, Layout::Cells, -1.0);
        let p = exp_const(g, Layout::Cells, 2.0);
        assert!(modular(&constant(g, Layout::Cells, 1.0), &p, Some(&w)).is_err());
    }

    #[test]
    fn luxemburg_constant_cases() {
        let g = unit_cells();
        let p = exp_const(g, Layout::Cells, 2.0);
        assert_eq!(
            luxemburg_norm(&GridFunction::new(g, Layout::Cells, 1, vec![0.0; 100]).unwrap(), &p, None).unwrap(),
            0.0
        );
        let n = luxemburg_norm(&constant(g, Layout::Cells, 3.0), &p, None).unwrap();
        assert!((n - 3.0).abs() < 1e-9, "{n}");
    }

    #[test]
    fn luxemburg_variable_exponent_root() {
        // λ with ∫_0^1 (2/λ)^{2+x} dx = 1, i.e. (2/λ)^2 ((2/λ) - 1) / ln(2/λ) = 1
        let g = unit_cells();
        let p = ExponentField::from_profile(g, Layout::Cells, &Profile::affine(2.5, &[1.0])).unwrap();
        let n = luxemburg_norm(&constant(g, Layout::Cells, 2.0), &p, None).unwrap();
        let f = |lam: f64| {
            let b: f64 = 2.0 / lam;
            b * b * (b - 1.0) / b.ln() - 1.0
        };
        let (mut lo, mut hi) = (1.01, 4.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if f(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        assert!((n - lo).abs() < 1e-4 * lo, "{n} vs {lo}");
    }

    #[test]
    fn intersection_norm_constants() {
        let g = unit_cells();
        let p = exp_const(g, Layout::Cells, 2.0);
        let q = exp_const(g, Layout::Cells, 4.0);
        assert!((intersection_norm(&constant(g, Layout::Cells, 1.0), &p, &q).unwrap() - 1.0).abs() < 1e-9);
        assert!((intersection_norm(&constant(g, Layout::Cells, 2.0), &p, &q).unwrap() - 2.0).abs() < 1e-9);
    }

    #[test]
    fn holder_is_sharp_for_constant_two() {
        let g = Grid::new(1, 1.0, 21).unwrap();
        let u = GridFunction::from_fn(g, Layout::Interior, |x| 1.0 - x[0].abs()).unwrap();
        let p = exp_const(g, Layout::Interior, 2.0);
        let c = check_holder(&u, &u, &p).unwrap();
        assert!(c.holds);
        assert!((c.rhs / c.lhs - 1.0).abs() < 1e-8);
        let z = GridFunction::zeros(g);
        let c = check_holder(&u, &z, &p).unwrap();
        assert_eq!((c.lhs, c.rhs, c.holds), (0.0, 0.0, true));
    }

    #[test]
    fn interpolation_constant_field() {
        let g = unit_cells();
        let f = |v| exp_const(g, Layout::Cells, v);
        let theta = interpolation_exponent(&f(3.0), &f(2.0), &f(4.0)).unwrap();
        assert!((theta.inf_val() - 1.0 / 3.0).abs() < 1e-15);
        let c = check_interpolation(&constant(g, Layout::Cells, 5.0), &f(3.0), &f(2.0), &f(4.0)).unwrap();
        assert!(c.holds);
        assert!((c.lhs - 5.0).abs() < 1e-8 && (c.rhs - 10.0).abs() < 1e-7);
        assert!(check_interpolation(&constant(g, Layout::Cells, 5.0), &f(2.0), &f(2.0), &f(4.0)).is_err());
    }

    #[test]
    fn tail_profile_decreases_to_zero() {
        let g = Grid::new(1, 2.0, 161).unwrap();
        let w = GridFunction::from_fn(g, Layout::Nodes, |x| (-x[0] * x[0]).exp()).unwrap();
        let r = exp_const(g, Layout::Nodes, 2.0);
        let t = weighted_tail_profile(&w, &r, &[0.5, 1.0, 1.5, 2.0]).unwrap();
        assert!(t[0] > t[1] && t[1] > t[2] && t[2] > 0.0);
        assert_eq!(t[3], 0.0);
        let z = weighted_tail_profile(&constant(g, Layout::Nodes, 0.0), &r, &[0.5, 1.0]).unwrap();
        assert_eq!(z, vec![0.0, 0.0]);
    }

    #[test]
    fn cone_energy_norm_matches_triangle_profile() {
        // α = 2 part: sqrt(∫ h0²) = sqrt(2 ε³ / 3); gradient part: |∇h0| = 1 on a
        // set of measure 2ε = 1, whose sum-space norm is min(1^{1/2}, 1^{1/3}) = 1.
        let g = Grid::new(1, 2.0, 401).unwrap();
        let eps = 0.5;
        let u = cone_function(&[0.0], eps, &g).unwrap();
        let alpha = exp_const(g, Layout::Interior, 2.0);
        let p = exp_const(g, Layout::Cells, 2.0);
        let q = exp_const(g, Layout::Cells, 3.0);
        let n = x_norm_with(&u, &alpha, &p, &q).unwrap();
        let exact = (2.0 * eps * eps * eps / 3.0f64).sqrt() + 1.0;
        assert!((n - exact).abs() < 1e-3, "{n} vs {exact}");
        let two = x_norm_with(&u.scale(2.0), &alpha, &p, &q).unwrap();
        assert!((two - 2.0 * n).abs() < 1e-8 * n);
    }
}
