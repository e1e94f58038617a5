use serde::{Deserialize, Serialize};

use super::{default_seed, far_point, mountain_pass, SolverOptions, SolverReport, Status};
use crate::error::{Error, Result};
use crate::functional::ProblemSpec;

/// Energy of a solve on the base problem and on a modified copy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sensitivity {
    pub base_energy: f64,
    pub modified_energy: f64,
    /// `|modified - base| / |base|`.
    pub relative_change: f64,
    pub base_status: Status,
    pub modified_status: Status,
}

fn compare(a: &SolverReport, b: &SolverReport) -> Sensitivity {
    let (x, y) = (a.energy.total, b.energy.total);
    Sensitivity {
        base_energy: x,
        modified_energy: y,
        relative_change: (y - x).abs() / x.abs(),
        base_status: a.status,
        modified_status: b.status,
    }
}

/// Re-solves on the grid with halved spacing.
pub fn refinement_check(problem: &ProblemSpec, solve: impl Fn(&ProblemSpec) -> Result<SolverReport>) -> Result<Sensitivity> {
    let base = solve(problem)?;
    let fine = problem.with(|d| d.domain.nodes_per_axis = 2 * d.domain.nodes_per_axis - 1)?;
    Ok(compare(&base, &solve(&fine)?))
}

/// Re-solves on a box about `factor` times larger with the same spacing,
/// probing how much the truncation of the domain matters.
pub fn radius_sensitivity(problem: &ProblemSpec, factor: f64, solve: impl Fn(&ProblemSpec) -> Result<SolverReport>) -> Result<Sensitivity> {
    if !(factor > 1.0) {
        return Err(Error::InvalidArgument(format!("radius factor must exceed 1, got {factor}")));
    }
    let base = solve(problem)?;
    let h = problem.grid().spacing();
    let cells = ((problem.grid().nodes_per_axis() - 1) as f64 * factor).round() as usize;
    let cells = cells + cells % 2;
    let large = problem.with(|d| {
        d.domain.nodes_per_axis = cells + 1;
        d.domain.radius = 0.5 * h * cells as f64;
    })?;
    Ok(compare(&base, &solve(&large)?))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContinuationStep {
    pub lambda: f64,
    pub status: Status,
    pub energy: f64,
    pub residual_norm: f64,
}

/// Mountain-pass solves for increasing `λ`, stopping at the first geometry
/// failure. The last successful `λ` brackets where the geometry breaks down.
pub fn lambda_continuation(problem: &ProblemSpec, lambdas: &[f64], opts: &SolverOptions) -> Result<Vec<ContinuationStep>> {
    let mut out = Vec::new();
    for &lambda in lambdas {
        let pr = problem.with(|d| d.nonlinearity.lambda = lambda)?;
        let step = match far_point(&pr, &default_seed(&pr)?, opts) {
            Ok(far) => {
                let rep = mountain_pass(&pr, &far, opts.path_nodes, opts)?;
                ContinuationStep {
                    lambda,
                    status: rep.status,
                    energy: rep.energy.total,
                    residual_norm: rep.residual_norm,
                }
            }
            Err(Error::Geometry(_)) => ContinuationStep {
                lambda,
                status: Status::GeometryError,
                energy: f64::NAN,
                residual_norm: f64::NAN,
            },
            Err(e) => return Err(e),
        };
        let stop = step.status == Status::GeometryError;
        out.push(step);
        if stop {
            break;
        }
    }
    Ok(out)
}
