//! Variable exponents sampled on a grid, derived exponents, and the
//! exponent-ordering hypotheses of the problem.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Grid, Layout};
use crate::profile::Profile;

/// Margin above which a strict ordering `v1 << v2` is certified.
pub const STRICT_EPS: f64 = 1e-9;
/// Round-off allowance for non-strict orderings `v1 <= v2`.
pub const NONSTRICT_EPS: f64 = 1e-12;

/// A variable exponent sampled on one layout of a grid.
///
/// Values are finite or `+inf`; the latter is the sentinel produced by
/// [`sobolev_conjugate`] where the exponent reaches the dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct ExponentField {
    grid: Grid,
    layout: Layout,
    values: Vec<f64>,
    inf_val: f64,
    sup_val: f64,
    lipschitz_estimate: f64,
}

impl ExponentField {
    pub fn new(grid: Grid, layout: Layout, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len(layout) {
            return Err(Error::GridMismatch(format!(
                "expected {} exponent samples, got {}",
                grid.len(layout),
                values.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| v.is_nan() || *v == f64::NEG_INFINITY) {
            return Err(Error::InvalidExponent(format!("undefined value at index {i}")));
        }
        let inf_val = values.iter().copied().fold(f64::INFINITY, f64::min);
        let sup_val = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let lipschitz_estimate = lipschitz(&grid, layout, &values);
        Ok(ExponentField {
            grid,
            layout,
            values,
            inf_val,
            sup_val,
            lipschitz_estimate,
        })
    }

    pub fn constant(grid: Grid, layout: Layout, value: f64) -> Result<Self> {
        Self::new(grid, layout, vec![value; grid.len(layout)])
    }

    pub fn from_profile(grid: Grid, layout: Layout, profile: &Profile) -> Result<Self> {
        profile.check(grid.dim())?;
        let dim = grid.dim();
        let values = grid.points(layout).map(|x| profile.eval(&x[..dim])).collect();
        Self::new(grid, layout, values)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn layout(&self) -> Layout {
        self.layout
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Sampled essential infimum `v⁻`.
    pub fn inf_val(&self) -> f64 {
        self.inf_val
    }

    /// Sampled essential supremum `v⁺`.
    pub fn sup_val(&self) -> f64 {
        self.sup_val
    }

    /// Largest difference quotient over grid edges between finite samples.
    pub fn lipschitz_estimate(&self) -> f64 {
        self.lipschitz_estimate
    }

    pub fn is_constant(&self) -> bool {
        self.inf_val == self.sup_val
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(self.grid, self.layout, self.values.iter().map(|v| f(*v)).collect())
    }

    pub fn zip_with(&self, other: &ExponentField, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        self.check_same_grid(other)?;
        Self::new(
            self.grid,
            self.layout,
            self.values.iter().zip(&other.values).map(|(a, b)| f(*a, *b)).collect(),
        )
    }

    pub fn check_same_grid(&self, other: &ExponentField) -> Result<()> {
        if self.grid != other.grid || self.layout != other.layout {
            return Err(Error::GridMismatch(format!(
                "exponent fields on {:?}/{:?} and {:?}/{:?}",
                self.grid, self.layout, other.grid, other.layout
            )));
        }
        Ok(())
    }

    /// Rejects fields with a sample `<= 1`, as required of `p, q, α, γ, r, r*`.
    pub fn require_above_one(&self, name: &str) -> Result<()> {
        if self.inf_val <= 1.0 {
            return Err(Error::InvalidExponent(format!(
                "{name} must exceed 1 everywhere, minimum is {}",
                self.inf_val
            )));
        }
        Ok(())
    }
}

fn lipschitz(grid: &Grid, layout: Layout, values: &[f64]) -> f64 {
    let h = grid.spacing();
    let m = grid.axis_len(layout);
    let mut best: f64 = 0.0;
    for (i, v) in values.iter().enumerate() {
        let mi = grid.multi_index(layout, i);
        for k in 0..grid.dim() {
            if mi[k] + 1 < m {
                let mut nb = mi;
                nb[k] += 1;
                let w = values[grid.flat_index(layout, nb)];
                if v.is_finite() && w.is_finite() {
                    best = best.max((w - v).abs() / h);
                }
            }
        }
    }
    best
}

/// `p*(x) = N p(x) / (N - p(x))` where `p(x) < N`, `+inf` elsewhere.
pub fn sobolev_conjugate(p: &ExponentField, n: usize) -> Result<ExponentField> {
    if n == 0 {
        return Err(Error::InvalidArgument("dimension must be at least 1".into()));
    }
    let nf = n as f64;
    p.map(|v| if v < nf { nf * v / (nf - v) } else { f64::INFINITY })
}

/// `p'(x) = p(x) / (p(x) - 1)`.
pub fn holder_conjugate(p: &ExponentField) -> Result<ExponentField> {
    if let Some(i) = p.values.iter().position(|v| *v <= 1.0) {
        return Err(Error::InvalidExponent(format!(
            "Hölder conjugate needs p > 1, got {} at index {i}",
            p.values[i]
        )));
    }
    p.map(|v| if v.is_infinite() { 1.0 } else { v / (v - 1.0) })
}

/// `v2 - v1` with the convention `inf - inf = 0`.
fn gap(v1: f64, v2: f64) -> f64 {
    if v1 == v2 {
        0.0
    } else {
        v2 - v1
    }
}

/// Whether `v1 << v2`: the minimum of `v2 - v1` over the samples exceeds
/// [`STRICT_EPS`]. Returns the holding flag and that minimum.
pub fn strictly_less(v1: &ExponentField, v2: &ExponentField) -> Result<(bool, f64)> {
    v1.check_same_grid(v2)?;
    let margin = min_gap(&v1.values, &v2.values);
    Ok((margin > STRICT_EPS, margin))
}

fn min_gap(lo: &[f64], hi: &[f64]) -> f64 {
    lo.iter().zip(hi).map(|(a, b)| gap(*a, *b)).fold(f64::INFINITY, f64::min)
}

/// The exponents and scalar data entering the hypothesis checks, all sampled
/// on one grid layout. `dim` is the space dimension `N`, which need not equal
/// the grid dimension.
#[derive(Debug, Clone)]
pub struct ExponentSet {
    pub dim: usize,
    pub p: ExponentField,
    pub q: ExponentField,
    pub s: ExponentField,
    pub alpha: ExponentField,
    pub delta: ExponentField,
    pub gamma: ExponentField,
    pub r: ExponentField,
    pub r_star: ExponentField,
    pub theta: f64,
    /// Smallest sampled value of the weight `a`.
    pub a_min: f64,
    /// Smallest sampled value of the weight `w`.
    pub w_min: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HypothesisCheck {
    pub id: String,
    pub label: String,
    pub statement: String,
    pub strict: bool,
    #[serde(with = "crate::serde_f64")]
    pub margin: f64,
    pub holds: bool,
    /// Not required by the source hypotheses; added so the built-in
    /// nonlinearity can satisfy them all at once.
    pub implementation_added: bool,
    pub waived: bool,
}

impl HypothesisCheck {
    pub fn ok(&self) -> bool {
        self.holds || self.waived
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub checks: Vec<HypothesisCheck>,
    pub overall_pass: bool,
}

impl ValidationReport {
    pub fn failures(&self) -> impl Iterator<Item = &HypothesisCheck> {
        self.checks.iter().filter(|c| !c.ok())
    }

    pub fn get(&self, id: &str) -> Option<&HypothesisCheck> {
        self.checks.iter().find(|c| c.id == id)
    }

    /// Checks whose id starts with `prefix` (for example `"A1.iv"`).
    pub fn block(&self, prefix: &str) -> impl Iterator<Item = &HypothesisCheck> {
        let prefix = prefix.to_string();
        self.checks.iter().filter(move |c| c.id.starts_with(&prefix))
    }

    pub fn ensure_valid(&self) -> Result<()> {
        let failed: Vec<String> = self
            .failures()
            .map(|c| format!("{} {} (margin {})", c.label, c.id, c.margin))
            .collect();
        if failed.is_empty() {
            Ok(())
        } else {
            Err(Error::Validation(failed.join("; ")))
        }
    }

    /// Recomputes `overall_pass` after waivers were toggled.
    pub fn refresh(&mut self) {
        self.overall_pass = self.checks.iter().all(HypothesisCheck::ok);
    }
}

struct Builder<'w> {
    checks: Vec<HypothesisCheck>,
    waive: &'w [String],
}

impl Builder<'_> {
    fn push(&mut self, id: &str, label: &str, statement: &str, strict: bool, margin: f64, added: bool) {
        let holds = if strict { margin > STRICT_EPS } else { margin >= -NONSTRICT_EPS };
        self.checks.push(HypothesisCheck {
            id: id.into(),
            label: label.into(),
            statement: statement.into(),
            strict,
            margin,
            holds,
            implementation_added: added,
            waived: self.waive.iter().any(|w| w == id),
        });
    }

    fn order(&mut self, id: &str, label: &str, statement: &str, strict: bool, lo: &[f64], hi: &[f64]) {
        self.push(id, label, statement, strict, min_gap(lo, hi), false);
    }
}

/// Product that treats `inf · 0` as `inf`: an unbounded critical exponent
/// stays unbounded after scaling.
fn scale_exponent(v: f64, c: f64) -> f64 {
    if v.is_infinite() {
        f64::INFINITY
    } else {
        v * c
    }
}

/// Evaluates every exponent-ordering hypothesis. Failures are entries of the
/// report; ids listed in `waive` are reported but do not fail the run.
pub fn validate_hypotheses(set: &ExponentSet, waive: &[String]) -> Result<ValidationReport> {
    let fields = [&set.q, &set.s, &set.alpha, &set.delta, &set.gamma, &set.r, &set.r_star];
    for f in fields {
        set.p.check_same_grid(f)?;
    }
    let n = set.dim as f64;
    let pstar = sobolev_conjugate(&set.p, set.dim)?;
    let ps = pstar.values();
    let p = set.p.values();
    let q = set.q.values();
    let s = set.s.values();
    let alpha = set.alpha.values();
    let delta = set.delta.values();
    let gamma = set.gamma.values();
    let r = set.r.values();
    let rs = set.r_star.values();
    let ones = vec![1.0; p.len()];
    let conj = |v: &[f64]| -> Vec<f64> { v.iter().map(|x| if *x > 1.0 { x / (x - 1.0) } else { f64::INFINITY }).collect() };
    let qp = conj(q);
    let pp = conj(p);
    let rp = conj(r);
    let rsp = conj(rs);

    let mut b = Builder { checks: Vec::new(), waive };
    let a1iv = "(A1)(iv)";
    b.order("A1.iv.p_gt_1", a1iv, "1 << p", true, &ones, p);
    b.order("A1.iv.p_lt_q", a1iv, "p << q", true, p, q);
    b.order("A1.iv.q_lt_N", a1iv, "q << N", true, q, &vec![n; p.len()]);
    b.order("A1.iv.q_lt_pstar", a1iv, "q << p*", true, q, ps);
    let lip_margin = |f: &ExponentField| -> f64 {
        if f.lipschitz_estimate().is_finite() {
            1.0
        } else {
            -1.0
        }
    };
    b.push(
        "A1.iv.lipschitz",
        a1iv,
        "p, q Lipschitz",
        true,
        lip_margin(&set.p).min(lip_margin(&set.q)),
        false,
    );
    let a1v = "(A1)(v)";
    b.order("A1.v.q_le_s", a1v, "q <= s", false, q, s);
    b.order("A1.v.s_lt_pstar", a1v, "s << p*", true, s, ps);
    b.push("A1.v.lipschitz", a1v, "s Lipschitz", true, lip_margin(&set.s), false);

    let range = "(alpha range)";
    b.order("alpha.gt_1", range, "1 << alpha", true, &ones, alpha);
    b.order("alpha.le_p", range, "alpha <= p", false, alpha, p);
    let bound: Vec<f64> = (0..p.len()).map(|i| scale_exponent(ps[i], qp[i] / pp[i])).collect();
    b.order("alpha.lt_pstar_qp", range, "alpha << p* q'/p'", true, alpha, &bound);
    let bound: Vec<f64> = ps.iter().map(|v| scale_exponent(*v, (n - 1.0) / n)).collect();
    b.order("alpha.lt_pstar_n", "(embedding)", "alpha << p* (N-1)/N", true, alpha, &bound);

    let hf1 = "(Hf1)";
    b.order("Hf1.alpha_le_gamma", hf1, "alpha <= gamma", false, alpha, gamma);
    b.order("Hf1.gamma_lt_pstar", hf1, "gamma << p*", true, gamma, ps);
    let hf2 = "(Hf2)";
    let s_sup = set.s.sup_val();
    let g_inf = set.gamma.inf_val();
    b.push("Hf2.theta_gt_s", hf2, "theta > s+", true, set.theta - s_sup, false);
    b.push("Hf2.theta_le_gamma", hf2, "theta <= gamma-", false, g_inf - set.theta, true);
    b.push("Hf2.gamma_gt_s", hf2, "gamma- > s+", true, g_inf - s_sup, true);

    let hw = "(Hw)";
    b.order("Hw.r_gt_1", hw, "1 << r", true, &ones, r);
    b.push(
        "Hw.r_finite",
        hw,
        "r << inf",
        true,
        if set.r.sup_val().is_finite() { 1.0 } else { -1.0 },
        false,
    );
    let bound: Vec<f64> = (0..p.len()).map(|i| scale_exponent(ps[i], 1.0 / gamma[i])).collect();
    b.order("Hw.rprime_le_pstar_gamma", hw, "r' <= p*/gamma", false, &rp, &bound);
    b.push("Hw.w_positive", hw, "w > 0", false, set.w_min, false);
    if let Some(c) = b.checks.last_mut() {
        c.holds = set.w_min > 0.0;
    }

    let ha = "(Ha)";
    b.order("Ha.delta_gt_1", ha, "1 << delta", true, &ones, delta);
    b.push(
        "Ha.delta_lt_alpha",
        ha,
        "delta+ < alpha-",
        true,
        set.alpha.inf_val() - set.delta.sup_val(),
        false,
    );
    b.order("Ha.rstar_gt_1", ha, "1 << r*", true, &ones, rs);
    b.push(
        "Ha.rstar_finite",
        ha,
        "r* << inf",
        true,
        if set.r_star.sup_val().is_finite() { 1.0 } else { -1.0 },
        false,
    );
    let rsd: Vec<f64> = (0..p.len()).map(|i| rsp[i] * delta[i]).collect();
    b.order("Ha.alpha_le_rstar_delta", ha, "alpha <= r*' delta", false, alpha, &rsd);
    b.order("Ha.rstar_delta_le_pstar", ha, "r*' delta <= p*", false, &rsd, ps);
    b.push("Ha.a_positive", ha, "a > 0", false, set.a_min, false);
    if let Some(c) = b.checks.last_mut() {
        c.holds = set.a_min > 0.0;
    }

    let mut report = ValidationReport {
        checks: b.checks,
        overall_pass: false,
    };
    report.refresh();
    Ok(report)
}
