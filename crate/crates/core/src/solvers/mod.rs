//! Discrete critical points of the energy.
//!
//! [`minimize`] is a projected gradient descent with Barzilai–Borwein steps
//! and an Armijo backtracking safeguard. [`mountain_pass`] minimizes the ray
//! maximum `J(v) = max_t Φ(t v)`: it maximizes along the ray through the
//! current point, steps against the residual at the maximizer, and
//! re-tensions the path to the straight ray through the result. Its critical
//! points are saddles of mountain-pass type.

mod diagnostics;
mod mountain_pass;
mod sweep;

pub use diagnostics::{lambda_continuation, radius_sensitivity, refinement_check, ContinuationStep, Sensitivity};
pub use mountain_pass::{far_point, mountain_pass};
pub use sweep::{field_hash, multi_solution_sweep, solve_sign_definite, Sign, SignDefiniteReport};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::functional::{energy_and_residual, residual_dual_proxy, EnergyReport, ProblemSpec};
use crate::grid::{GridFunction, Layout};
use crate::operator::Truncation;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Classification {
    Minimizer,
    MountainPass,
    SignPositive,
    SignNegative,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Converged,
    IterationCap,
    /// No step along the residual passed the line search.
    Stalled,
    GeometryError,
    /// Energy went below `-1e10` or the field above `1e8`.
    Diverged,
    SignViolation,
}

impl Status {
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Converged => 0,
            Status::IterationCap | Status::Stalled => 2,
            Status::GeometryError | Status::Diverged => 3,
            Status::SignViolation => 4,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceEntry {
    pub iteration: usize,
    pub energy: f64,
    pub residual_norm: f64,
    pub ps_quantity: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverReport {
    pub solution: GridFunction,
    pub energy: EnergyReport,
    /// `sqrt(h^N Σ r²)`.
    pub residual_norm: f64,
    /// Luxemburg norm of the residual with exponent `α'`.
    pub residual_dual: f64,
    pub iterations: usize,
    pub classification: Classification,
    pub status: Status,
    pub message: String,
    pub trace: Vec<TraceEntry>,
}

impl SolverReport {
    pub fn converged(&self) -> bool {
        self.status == Status::Converged
    }

    pub fn exit_code(&self) -> i32 {
        self.status.exit_code()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverOptions {
    /// Target for the discrete residual norm.
    pub tol: f64,
    pub max_iter: usize,
    /// Sufficient-decrease constant of the line search.
    pub armijo_c1: f64,
    /// Samples along each ray of the mountain-pass iteration.
    pub path_nodes: usize,
    /// Minimum energy-space distance between distinct sweep solutions.
    pub dedup_tol: f64,
    /// Keep iterates in the sign cone of a truncated problem.
    pub project_sign: bool,
    /// The far point search doubles `t` at most this many times.
    pub far_doublings: u32,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            tol: 1e-6,
            max_iter: 20_000,
            armijo_c1: 1e-4,
            path_nodes: 33,
            dedup_tol: 1e-3,
            project_sign: true,
            far_doublings: 40,
        }
    }
}

impl SolverOptions {
    pub fn check(&self) -> Result<()> {
        if !(self.tol > 0.0 && self.armijo_c1 > 0.0 && self.armijo_c1 < 1.0 && self.dedup_tol >= 0.0) {
            return Err(Error::InvalidArgument(format!("bad solver options {self:?}")));
        }
        if self.path_nodes < 3 || self.max_iter == 0 {
            return Err(Error::InvalidArgument("need path_nodes >= 3 and max_iter >= 1".into()));
        }
        Ok(())
    }
}

const BACKTRACKS: usize = 60;
const DIVERGED_ENERGY: f64 = -1e10;
const DIVERGED_VALUE: f64 = 1e8;

/// Projection onto the sign cone that a truncated problem lives in.
pub(crate) fn projector(problem: &ProblemSpec, opts: &SolverOptions) -> impl Fn(GridFunction) -> GridFunction {
    let t = if opts.project_sign {
        problem.truncation()
    } else {
        Truncation::None
    };
    move |u: GridFunction| match t {
        Truncation::None => u,
        Truncation::Positive => u.map(|x| if x < 0.0 { 0.0 } else { x }),
        Truncation::Negative => u.map(|x| if x > 0.0 { 0.0 } else { x }),
    }
}

pub(crate) fn check_start(problem: &ProblemSpec, u: &GridFunction) -> Result<()> {
    problem.validation().ensure_valid()?;
    if u.grid() != problem.grid() || u.layout() != Layout::Interior || u.components() != 1 {
        return Err(Error::GridMismatch(
            "starting field is not a scalar interior field of the problem grid".into(),
        ));
    }
    Ok(())
}

pub(crate) fn trace_entry(iteration: usize, u: &GridFunction, e: &EnergyReport, r: &GridFunction, theta: f64) -> Result<TraceEntry> {
    Ok(TraceEntry {
        iteration,
        energy: e.total,
        residual_norm: r.l2_norm(),
        ps_quantity: e.total - r.dot(u)? / theta,
    })
}

pub(crate) struct Finish {
    pub solution: GridFunction,
    pub energy: EnergyReport,
    pub residual: GridFunction,
    pub iterations: usize,
    pub status: Status,
    pub message: String,
    pub trace: Vec<TraceEntry>,
}

pub(crate) fn finish(problem: &ProblemSpec, f: Finish, classification: Classification) -> Result<SolverReport> {
    Ok(SolverReport {
        residual_norm: f.residual.l2_norm(),
        residual_dual: residual_dual_proxy(&f.residual, problem)?,
        solution: f.solution,
        energy: f.energy,
        iterations: f.iterations,
        classification,
        status: f.status,
        message: f.message,
        trace: f.trace,
    })
}

/// BB1 step `|Δu|² / ⟨Δu, Δr⟩`, or `None` without positive curvature.
pub(crate) fn bb_step(du: &GridFunction, dr: &GridFunction) -> Result<Option<f64>> {
    let sy = du.dot(dr)?;
    let ss = du.dot(du)?;
    Ok(if sy > 0.0 && ss > 0.0 { Some(ss / sy) } else { None })
}

pub(crate) fn initial_step(problem: &ProblemSpec) -> f64 {
    let h = problem.grid().spacing();
    0.5 * h * h / problem.grid().dim() as f64
}

/// Descent from `u0` until the residual norm drops below `opts.tol`.
///
/// The energy trace is non-increasing. For a truncated problem with
/// `opts.project_sign`, iterates are projected onto the sign cone.
pub fn minimize(problem: &ProblemSpec, u0: &GridFunction, opts: &SolverOptions) -> Result<SolverReport> {
    opts.check()?;
    check_start(problem, u0)?;
    let classification = match problem.truncation() {
        Truncation::None => Classification::Minimizer,
        Truncation::Positive => Classification::SignPositive,
        Truncation::Negative => Classification::SignNegative,
    };
    let proj = projector(problem, opts);
    let theta = problem.theta();
    let mut u = proj(u0.clone());
    let (mut e, mut r) = energy_and_residual(&u, problem)?;
    let mut trace = vec![trace_entry(0, &u, &e, &r, theta)?];
    let mut step = initial_step(problem);
    let mut status = Status::IterationCap;
    let mut message = String::new();
    let mut iterations = 0;
    while iterations < opts.max_iter {
        if r.l2_norm() < opts.tol {
            status = Status::Converged;
            break;
        }
        if !e.total.is_finite() || e.total < DIVERGED_ENERGY || u.max_abs() > DIVERGED_VALUE {
            status = Status::Diverged;
            message = "energy unbounded below along the descent".into();
            break;
        }
        let mut s = step;
        let mut accepted = None;
        for _ in 0..BACKTRACKS {
            let cand = proj(u.axpby(1.0, &r, -s)?);
            let predicted = r.dot(&u.sub(&cand)?)?;
            let (e2, r2) = energy_and_residual(&cand, problem)?;
            if e2.total <= e.total - opts.armijo_c1 * predicted && predicted > 0.0 {
                accepted = Some((cand, e2, r2));
                break;
            }
            s *= 0.5;
        }
        let Some((cand, e2, r2)) = accepted else {
            status = Status::Stalled;
            message = format!("line search failed at residual norm {:.3e}", r.l2_norm());
            break;
        };
        step = bb_step(&cand.sub(&u)?, &r2.sub(&r)?)?.unwrap_or(2.0 * s);
        u = cand;
        e = e2;
        r = r2;
        iterations += 1;
        trace.push(trace_entry(iterations, &u, &e, &r, theta)?);
    }
    if status == Status::IterationCap && r.l2_norm() < opts.tol {
        status = Status::Converged;
    }
    finish(
        problem,
        Finish {
            solution: u,
            energy: e,
            residual: r,
            iterations,
            status,
            message,
            trace,
        },
        classification,
    )
}

/// The default positive seed `exp(-|x|²)`.
pub fn default_seed(problem: &ProblemSpec) -> Result<GridFunction> {
    GridFunction::from_fn(*problem.grid(), Layout::Interior, |x| (-x.iter().map(|v| v * v).sum::<f64>()).exp())
}
