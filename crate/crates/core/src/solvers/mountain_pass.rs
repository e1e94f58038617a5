use super::{
    bb_step, check_start, finish, initial_step, projector, trace_entry, Classification, Finish, SolverOptions, SolverReport, Status,
    BACKTRACKS,
};
use crate::error::{Error, Result};
use crate::functional::{energy, energy_and_residual, EnergyReport, ProblemSpec};
use crate::grid::GridFunction;
use crate::operator::Truncation;

/// Doubles `t` from 1 until `Φ(t seed) <= 0`.
pub fn far_point(problem: &ProblemSpec, seed: &GridFunction, opts: &SolverOptions) -> Result<GridFunction> {
    if seed.is_zero() {
        return Err(Error::InvalidArgument("far point seed is zero".into()));
    }
    let mut t = 1.0;
    for _ in 0..=opts.far_doublings {
        let u = seed.scale(t);
        let e = energy(&u, problem)?.total;
        if !e.is_finite() {
            break;
        }
        if e <= 0.0 {
            return Ok(u);
        }
        t *= 2.0;
    }
    Err(Error::Geometry(format!(
        "energy stays positive along the seed ray up to t = 2^{}",
        opts.far_doublings
    )))
}

struct Peak {
    point: GridFunction,
    energy: EnergyReport,
    residual: GridFunction,
}

enum Ray {
    Peak(Peak),
    /// The energy never rises above its value at the origin.
    AtOrigin,
    AtFarEnd,
}

/// `d/dt Φ(t dir)`.
fn slope(problem: &ProblemSpec, dir: &GridFunction, t: f64) -> Result<f64> {
    let (_, r) = energy_and_residual(&dir.scale(t), problem)?;
    r.dot(dir)
}

/// Maximizer of `Φ(t dir)` over `t ∈ [0, t_max]`: a scan over `nodes`
/// samples, then a root of the slope (Illinois) in the bracket around the
/// best sample, with golden section as the fallback. The root search stops
/// once the slope is below `slope_tol`.
fn ray_peak(problem: &ProblemSpec, dir: &GridFunction, t_max: f64, nodes: usize, slope_tol: f64) -> Result<Ray> {
    let ts: Vec<f64> = (0..nodes).map(|k| t_max * k as f64 / (nodes - 1) as f64).collect();
    let es: Vec<f64> = ts
        .iter()
        .map(|t| energy(&dir.scale(*t), problem).map(|e| e.total))
        .collect::<Result<_>>()?;
    let mut k = 0;
    for (i, e) in es.iter().enumerate() {
        if *e > es[k] {
            k = i;
        }
    }
    if k == 0 {
        return Ok(Ray::AtOrigin);
    }
    if k == nodes - 1 {
        return Ok(Ray::AtFarEnd);
    }
    let (mut lo, mut hi) = (ts[k - 1], ts[k + 1]);
    let mut dlo = slope(problem, dir, lo)?;
    let mut dhi = slope(problem, dir, hi)?;
    let mut t = ts[k];
    if dlo > 0.0 && dhi < 0.0 {
        let mut side = 0;
        for _ in 0..200 {
            let mid = (lo * dhi - hi * dlo) / (dhi - dlo);
            let mid = if mid > lo && mid < hi { mid } else { 0.5 * (lo + hi) };
            let d = slope(problem, dir, mid)?;
            t = mid;
            if d.abs() <= slope_tol || hi - lo <= 4.0 * f64::EPSILON * hi {
                break;
            }
            if d > 0.0 {
                lo = mid;
                dlo = d;
                if side == 1 {
                    dhi *= 0.5;
                }
                side = 1;
            } else {
                hi = mid;
                dhi = d;
                if side == -1 {
                    dlo *= 0.5;
                }
                side = -1;
            }
        }
    } else {
        t = golden_max(|t| energy(&dir.scale(t), problem).map(|e| e.total), lo, hi)?;
    }
    let point = dir.scale(t);
    let (e, r) = energy_and_residual(&point, problem)?;
    if e.total < es[k] {
        let point = dir.scale(ts[k]);
        let (e, r) = energy_and_residual(&point, problem)?;
        return Ok(Ray::Peak(Peak {
            point,
            energy: e,
            residual: r,
        }));
    }
    Ok(Ray::Peak(Peak {
        point,
        energy: e,
        residual: r,
    }))
}

fn golden_max(f: impl Fn(f64) -> Result<f64>, mut a: f64, mut b: f64) -> Result<f64> {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = b - g * (b - a);
    let mut x2 = a + g * (b - a);
    let mut f1 = f(x1)?;
    let mut f2 = f(x2)?;
    for _ in 0..80 {
        if f1 >= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - g * (b - a);
            f1 = f(x1)?;
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + g * (b - a);
            f2 = f(x2)?;
        }
    }
    Ok(if f1 >= f2 { x1 } else { x2 })
}

/// The ray peak, widening the ray while the maximum sits at its far end.
fn locate(problem: &ProblemSpec, dir: &GridFunction, t_max: f64, opts: &SolverOptions) -> Result<Option<Peak>> {
    // keeps the radial part of the residual far below the tolerance
    let slope_tol = 1e-4 * opts.tol * dir.l2_norm();
    let mut t_max = t_max;
    for _ in 0..=opts.far_doublings {
        match ray_peak(problem, dir, t_max, opts.path_nodes, slope_tol)? {
            Ray::Peak(p) => return Ok(Some(p)),
            Ray::AtOrigin => return Ok(None),
            Ray::AtFarEnd => t_max *= 2.0,
        }
    }
    Ok(None)
}

/// Mountain-pass critical point between the origin and `far`.
///
/// Requires `far != 0` and `Φ(far) <= 0`. The trace records the path
/// maximum, which never increases. If the maximum along a ray collapses to
/// the origin the report carries [`Status::GeometryError`].
pub fn mountain_pass(problem: &ProblemSpec, far: &GridFunction, path_nodes: usize, opts: &SolverOptions) -> Result<SolverReport> {
    let opts = SolverOptions {
        path_nodes,
        ..opts.clone()
    };
    opts.check()?;
    check_start(problem, far)?;
    if far.is_zero() || energy(far, problem)?.total > 0.0 {
        return Err(Error::InvalidArgument(
            "mountain pass needs a nonzero end point with nonpositive energy".into(),
        ));
    }
    let classification = match problem.truncation() {
        Truncation::None => Classification::MountainPass,
        Truncation::Positive => Classification::SignPositive,
        Truncation::Negative => Classification::SignNegative,
    };
    let proj = projector(problem, &opts);
    let theta = problem.theta();
    let geometry = |reason: &str, solution: GridFunction, trace| -> Result<SolverReport> {
        let (energy, residual) = energy_and_residual(&solution, problem)?;
        finish(
            problem,
            Finish {
                solution,
                energy,
                residual,
                iterations: 0,
                status: Status::GeometryError,
                message: reason.into(),
                trace,
            },
            classification,
        )
    };
    let Some(mut peak) = locate(problem, far, 1.0, &opts)? else {
        return geometry("path maximum sits at the origin", far.clone(), Vec::new());
    };
    let mut trace = vec![trace_entry(0, &peak.point, &peak.energy, &peak.residual, theta)?];
    let mut step = initial_step(problem);
    let mut status = Status::IterationCap;
    let mut message = String::new();
    let mut iterations = 0;
    while iterations < opts.max_iter {
        let rn = peak.residual.l2_norm();
        if rn < opts.tol {
            status = Status::Converged;
            break;
        }
        let mut s = step;
        let mut accepted = None;
        let mut collapsed = false;
        for _ in 0..BACKTRACKS {
            let dir = proj(peak.point.axpby(1.0, &peak.residual, -s)?);
            let predicted = peak.residual.dot(&peak.point.sub(&dir)?)?;
            if dir.is_zero() || predicted <= 0.0 {
                s *= 0.5;
                continue;
            }
            match locate(problem, &dir, 2.5, &opts)? {
                Some(p) if p.energy.total <= peak.energy.total - opts.armijo_c1 * predicted => {
                    accepted = Some(p);
                    collapsed = false;
                    break;
                }
                Some(_) => collapsed = false,
                None => collapsed = true,
            }
            s *= 0.5;
        }
        let Some(next) = accepted else {
            if collapsed {
                return geometry("path maximum collapsed to the origin", peak.point, trace);
            }
            status = Status::Stalled;
            message = format!("line search on the path maximum failed at residual norm {rn:.3e}");
            break;
        };
        step = bb_step(&next.point.sub(&peak.point)?, &next.residual.sub(&peak.residual)?)?.unwrap_or(2.0 * s);
        peak = next;
        iterations += 1;
        trace.push(trace_entry(iterations, &peak.point, &peak.energy, &peak.residual, theta)?);
    }
    if status == Status::Converged && peak.energy.total <= 0.0 {
        status = Status::GeometryError;
        message = "converged to a critical point without positive energy".into();
    }
    finish(
        problem,
        Finish {
            solution: peak.point,
            energy: peak.energy,
            residual: peak.residual,
            iterations,
            status,
            message,
            trace,
        },
        classification,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functional::tests::definition;
    use crate::profile::Profile;
    use crate::solvers::default_seed;

    fn semilinear(n: usize) -> ProblemSpec {
        let mut d = definition(1, n, 0.0, 1.0);
        d.domain.radius = 8.0;
        d.potential.q = Profile::constant(2.0);
        d.waive.push("A1.iv.p_lt_q".into());
        ProblemSpec::new(d).unwrap()
    }

    #[test]
    fn semilinear_bump_and_its_mirror() {
        let pr = semilinear(161);
        let opts = SolverOptions::default();
        let far = far_point(&pr, &default_seed(&pr).unwrap(), &opts).unwrap();
        let rep = mountain_pass(&pr, &far, 33, &opts).unwrap();
        assert!(rep.converged(), "{:?} {} {}", rep.status, rep.residual_norm, rep.message);
        assert!(rep.energy.total > 0.0);
        assert!(rep.trace.windows(2).all(|w| w[1].energy <= w[0].energy));
        let neg = mountain_pass(&pr, &far.scale(-1.0), 33, &opts).unwrap();
        assert_eq!(neg.solution, rep.solution.scale(-1.0));
        assert_eq!(neg.energy.total, rep.energy.total);
    }

    #[test]
    fn no_far_point_without_reaction() {
        let pr = ProblemSpec::new(definition(1, 41, 0.0, 0.0)).unwrap();
        let err = far_point(&pr, &default_seed(&pr).unwrap(), &SolverOptions::default()).unwrap_err();
        assert!(matches!(err, Error::Geometry(_)));
    }
}
