//! The discrete energy, its exact gradient, and the pairings built on it.
//!
//! With `u` on the interior nodes and `∇u` the forward difference on cells,
//!
//! ```text
//! Φ(u) = h^N Σ_cells 𝒜(x_c, ∇u) + h^N Σ_nodes (|u|^α / α - F(x, u))
//! ```
//!
//! and [`residual`] is `∂Φ/∂u_i / h^N`, a discretization of
//! `-div A(x, ∇u) + |u|^{α-2} u - f(x, u)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exponents::{validate_hypotheses, ExponentField, ExponentSet, ValidationReport};
use crate::grid::{gradient, CompensatedSum, Grid, GridFunction, Layout};
use crate::operator::{NodeNonlinearity, NonlinearitySpec, PointPotential, PotentialSpec, Truncation};
use crate::profile::Profile;
use crate::spaces::luxemburg_norm;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DomainSpec {
    pub dim: usize,
    pub radius: f64,
    pub nodes_per_axis: usize,
}

/// Everything needed to build a problem instance, in serializable form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemDefinition {
    pub domain: DomainSpec,
    /// Space dimension `N` used by the hypothesis checks; defaults to the
    /// grid dimension.
    #[serde(default)]
    pub space_dim: Option<usize>,
    pub potential: PotentialSpec,
    pub alpha: Profile,
    /// Structural exponent; defaults to `q`.
    #[serde(default)]
    pub s: Option<Profile>,
    pub r: Profile,
    pub r_star: Profile,
    pub nonlinearity: NonlinearitySpec,
    /// Hypothesis ids reported but not enforced.
    #[serde(default)]
    pub waive: Vec<String>,
}

/// A compiled problem: the definition sampled onto its grid.
#[derive(Debug, Clone)]
pub struct ProblemSpec {
    definition: ProblemDefinition,
    grid: Grid,
    cells: Vec<PointPotential>,
    nodes: Vec<NodeNonlinearity>,
    alpha: ExponentField,
    p_cells: ExponentField,
    q_cells: ExponentField,
    s_field: ExponentField,
    validation: ValidationReport,
}

impl ProblemSpec {
    pub fn new(definition: ProblemDefinition) -> Result<Self> {
        let d = &definition.domain;
        let grid = Grid::new(d.dim, d.radius, d.nodes_per_axis)?;
        let dim = grid.dim();
        definition.nonlinearity.check(dim)?;
        for prof in [&definition.alpha, &definition.r, &definition.r_star] {
            prof.check(dim)?;
        }
        let pot = &definition.potential;
        let cells: Vec<PointPotential> = grid.points(Layout::Cells).map(|x| pot.at(&x[..dim])).collect();
        for (i, c) in cells.iter().enumerate() {
            c.check()
                .map_err(|e| Error::InvalidArgument(format!("potential at {:?}: {e}", grid.point(Layout::Cells, i))))?;
        }
        let nl = &definition.nonlinearity;
        let nodes: Vec<NodeNonlinearity> = grid.points(Layout::Interior).map(|x| nl.at(&x[..dim])).collect();
        if let Some(n) = nodes.iter().find(|n| !(n.delta > 1.0 && n.gamma > 1.0)) {
            return Err(Error::InvalidExponent(format!(
                "delta and gamma must exceed 1, got {} and {}",
                n.delta, n.gamma
            )));
        }
        let alpha = ExponentField::from_profile(grid, Layout::Interior, &definition.alpha)?;
        alpha.require_above_one("alpha")?;
        let p_cells = ExponentField::from_profile(grid, Layout::Cells, &pot.p)?;
        let q_cells = ExponentField::from_profile(grid, Layout::Cells, &pot.q)?;
        let s_prof = definition.s.clone().unwrap_or_else(|| pot.q.clone());
        let s_field = ExponentField::from_profile(grid, Layout::Cells, &s_prof)?;

        let on_nodes = |p: &Profile| ExponentField::from_profile(grid, Layout::Nodes, p);
        let node_points: Vec<_> = grid.points(Layout::Nodes).collect();
        let min_over = |w: &crate::profile::Weight| node_points.iter().map(|x| w.eval(&x[..dim])).fold(f64::INFINITY, f64::min);
        let set = ExponentSet {
            dim: definition.space_dim.unwrap_or(dim),
            p: on_nodes(&pot.p)?,
            q: on_nodes(&pot.q)?,
            s: on_nodes(&s_prof)?,
            alpha: on_nodes(&definition.alpha)?,
            delta: on_nodes(&nl.delta)?,
            gamma: on_nodes(&nl.gamma)?,
            r: on_nodes(&definition.r)?,
            r_star: on_nodes(&definition.r_star)?,
            theta: nl.theta,
            a_min: min_over(&nl.a_weight),
            w_min: min_over(&nl.w_weight),
        };
        let validation = validate_hypotheses(&set, &definition.waive)?;
        Ok(ProblemSpec {
            definition,
            grid,
            cells,
            nodes,
            alpha,
            p_cells,
            q_cells,
            s_field,
            validation,
        })
    }

    pub fn definition(&self) -> &ProblemDefinition {
        &self.definition
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn alpha(&self) -> &ExponentField {
        &self.alpha
    }

    pub fn p_cells(&self) -> &ExponentField {
        &self.p_cells
    }

    pub fn q_cells(&self) -> &ExponentField {
        &self.q_cells
    }

    pub fn s_field(&self) -> &ExponentField {
        &self.s_field
    }

    pub fn validation(&self) -> &ValidationReport {
        &self.validation
    }

    pub fn theta(&self) -> f64 {
        self.definition.nonlinearity.theta
    }

    pub fn truncation(&self) -> Truncation {
        self.definition.nonlinearity.truncation
    }

    /// Same problem with a modified definition.
    pub fn with(&self, edit: impl FnOnce(&mut ProblemDefinition)) -> Result<Self> {
        let mut def = self.definition.clone();
        edit(&mut def);
        ProblemSpec::new(def)
    }

    pub fn with_truncation(&self, t: Truncation) -> Result<Self> {
        self.with(|d| d.nonlinearity.truncation = t)
    }

    fn check_field(&self, u: &GridFunction) -> Result<()> {
        if u.grid() != &self.grid || u.layout() != Layout::Interior || u.components() != 1 {
            return Err(Error::GridMismatch(format!(
                "expected a scalar interior field on {:?}, got {:?}/{:?}x{}",
                self.grid,
                u.grid(),
                u.layout(),
                u.components()
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyReport {
    /// `∫ 𝒜(x, ∇u)`
    #[serde(rename = "phi_A")]
    pub phi_a: f64,
    /// `∫ |u|^α / α`
    pub phi_alpha: f64,
    /// `∫ F(x, u)`
    pub phi_f: f64,
    pub total: f64,
}

fn alpha_term(u: f64, a: f64) -> (f64, f64) {
    if u == 0.0 {
        (0.0, 0.0)
    } else {
        let pa = crate::operator::pow(u.abs(), a);
        (pa / a, u.signum() * pa / u.abs())
    }
}

/// Energy and, if asked, the unscaled gradient `∂Φ/∂u_i`.
fn evaluate(u: &GridFunction, problem: &ProblemSpec, want_grad: bool) -> Result<(EnergyReport, Option<Vec<f64>>)> {
    problem.check_field(u)?;
    let grid = problem.grid;
    let dim = grid.dim();
    let h = grid.spacing();
    let vol = grid.cell_volume();
    let du = gradient(u)?;
    let g = du.values();
    let mut grad = if want_grad { Some(vec![0.0; u.len()]) } else { None };
    let last = grid.nodes_per_axis() - 1;
    let interior_index = |node: [usize; 2]| -> Option<usize> {
        for k in 0..dim {
            if node[k] == 0 || node[k] == last {
                return None;
            }
        }
        Some(grid.flat_index(Layout::Interior, [node[0].saturating_sub(1), node[1].saturating_sub(1)]))
    };

    let mut phi_a = CompensatedSum::default();
    for (c, pot) in problem.cells.iter().enumerate() {
        let gc = &g[c * dim..(c + 1) * dim];
        let r = gc.iter().map(|v| v * v).sum::<f64>().sqrt();
        if r == 0.0 {
            continue;
        }
        phi_a.add(pot.value(r));
        if let Some(gr) = grad.as_mut() {
            let coeff = pot.flux_coeff(r) * vol / h;
            let anchor = grid.multi_index(Layout::Cells, c);
            let base = interior_index(anchor);
            for k in 0..dim {
                let a = coeff * gc[k];
                let mut next = anchor;
                next[k] += 1;
                if let Some(i) = interior_index(next) {
                    gr[i] += a;
                }
                if let Some(i) = base {
                    gr[i] -= a;
                }
            }
        }
    }

    let mut phi_alpha = CompensatedSum::default();
    let mut phi_f = CompensatedSum::default();
    for (i, (ui, nl)) in u.values().iter().zip(&problem.nodes).enumerate() {
        let (pa, da) = alpha_term(*ui, problem.alpha.values()[i]);
        let (f, big_f) = nl.value(*ui);
        phi_alpha.add(pa);
        phi_f.add(big_f);
        if let Some(gr) = grad.as_mut() {
            gr[i] += vol * (da - f);
        }
    }
    let phi_a = phi_a.total() * vol;
    let phi_alpha = phi_alpha.total() * vol;
    let phi_f = phi_f.total() * vol;
    Ok((
        EnergyReport {
            phi_a,
            phi_alpha,
            phi_f,
            total: phi_a + phi_alpha - phi_f,
        },
        grad,
    ))
}

/// `Φ(u)` and its three parts.
pub fn energy(u: &GridFunction, problem: &ProblemSpec) -> Result<EnergyReport> {
    Ok(evaluate(u, problem, false)?.0)
}

/// Exact gradient of the discrete energy divided by `h^N`.
pub fn residual(u: &GridFunction, problem: &ProblemSpec) -> Result<GridFunction> {
    Ok(energy_and_residual(u, problem)?.1)
}

/// Both at once, sharing the gradient evaluation.
pub fn energy_and_residual(u: &GridFunction, problem: &ProblemSpec) -> Result<(EnergyReport, GridFunction)> {
    let (e, g) = evaluate(u, problem, true)?;
    let vol = problem.grid.cell_volume();
    let values = g.expect("gradient requested").into_iter().map(|v| v / vol).collect();
    Ok((e, GridFunction::from_parts_unchecked(problem.grid, Layout::Interior, 1, values)))
}

/// `sqrt(h^N Σ r_i²)`, the discrete `L²` norm of the residual.
pub fn residual_norm(r: &GridFunction) -> f64 {
    r.l2_norm()
}

/// Luxemburg norm of the residual with the conjugate exponent `α'`, a
/// computable stand-in for its dual norm.
pub fn residual_dual_proxy(r: &GridFunction, problem: &ProblemSpec) -> Result<f64> {
    let ap = problem.alpha.map(|a| a / (a - 1.0))?;
    luxemburg_norm(r, &ap, None)
}

/// `(L(u) - L(v), u - v)` for `(L(u), φ) = ∫ A(x, ∇u)·∇φ + ∫ |u|^{α-2} u φ`.
/// Every summand is nonnegative by monotonicity of the flux and of the power.
pub fn monotonicity_pairing(u: &GridFunction, v: &GridFunction, problem: &ProblemSpec) -> Result<f64> {
    problem.check_field(u)?;
    problem.check_field(v)?;
    if u == v {
        return Err(Error::InvalidArgument("monotonicity pairing needs u != v".into()));
    }
    let dim = problem.grid.dim();
    let gu = gradient(u)?;
    let gv = gradient(v)?;
    let mut acc = CompensatedSum::default();
    for (c, pot) in problem.cells.iter().enumerate() {
        let a = &gu.values()[c * dim..(c + 1) * dim];
        let b = &gv.values()[c * dim..(c + 1) * dim];
        let ra = a.iter().map(|x| x * x).sum::<f64>().sqrt();
        let rb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
        let ca = if ra == 0.0 { 0.0 } else { pot.flux_coeff(ra) };
        let cb = if rb == 0.0 { 0.0 } else { pot.flux_coeff(rb) };
        let term: f64 = (0..dim).map(|k| (ca * a[k] - cb * b[k]) * (a[k] - b[k])).sum();
        acc.add(term);
    }
    for (i, (x, y)) in u.values().iter().zip(v.values()).enumerate() {
        let a = problem.alpha.values()[i];
        acc.add((alpha_term(*x, a).1 - alpha_term(*y, a).1) * (x - y));
    }
    Ok(acc.total() * problem.grid.cell_volume())
}

/// `Φ(u) - ⟨Φ'(u), u⟩ / θ`.
pub fn ps_quantity(u: &GridFunction, problem: &ProblemSpec) -> Result<f64> {
    let (e, r) = energy_and_residual(u, problem)?;
    Ok(e.total - r.dot(u)? / problem.theta())
}
