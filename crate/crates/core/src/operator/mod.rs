//! Double-phase potentials `𝒜(x, ξ)`, their fluxes `A = ∂_ξ 𝒜`, the
//! reaction term `f(x, u)`, and numerical checks of their structure.

mod checks;
mod nonlinearity;

pub use checks::{
    check_ar_condition, check_flux_consistency, check_growth_sandwich, check_origin_decay, check_structural_s, check_uniform_convexity,
    ArReport, ConvexityReport, GrowthReport, StructuralReport,
};
pub use nonlinearity::{nonlinearity_value, truncate_minus, truncate_plus, NodeNonlinearity, NonlinearitySpec, Truncation};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::profile::{Profile, Weight};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PotentialKind {
    /// `|ξ|^q / q` for `|ξ| <= 1`, `|ξ|^p / p + 1/q - 1/p` beyond.
    TypicalDoublePhase,
    /// `a/p |ξ|^p + b/q |ξ|^q`.
    WeightedDoublePhase,
    /// `|ξ|^p + a |ξ|^q` for `|ξ| <= 1`, `|ξ|^{p1} + a |ξ|^{q1}` beyond.
    BcmDoublePhase,
}

/// A built-in potential with its exponent and coefficient formulas.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PotentialSpec {
    pub kind: PotentialKind,
    pub p: Profile,
    pub q: Profile,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a_coef: Option<Weight>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b_coef: Option<Weight>,
    /// Outer exponents of the two-branch weighted form; default to `p`, `q`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p1: Option<Profile>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q1: Option<Profile>,
}

impl PotentialSpec {
    pub fn typical(p: Profile, q: Profile) -> Self {
        PotentialSpec {
            kind: PotentialKind::TypicalDoublePhase,
            p,
            q,
            a_coef: None,
            b_coef: None,
            p1: None,
            q1: None,
        }
    }

    pub fn weighted(p: Profile, q: Profile, a: Weight, b: Weight) -> Self {
        PotentialSpec {
            kind: PotentialKind::WeightedDoublePhase,
            a_coef: Some(a),
            b_coef: Some(b),
            ..Self::typical(p, q)
        }
    }

    pub fn bcm(p: Profile, q: Profile, p1: Profile, q1: Profile, a: Weight) -> Self {
        PotentialSpec {
            kind: PotentialKind::BcmDoublePhase,
            a_coef: Some(a),
            p1: Some(p1),
            q1: Some(q1),
            ..Self::typical(p, q)
        }
    }

    /// The potential frozen at the point `x`.
    pub fn at(&self, x: &[f64]) -> PointPotential {
        let p = self.p.eval(x);
        let q = self.q.eval(x);
        let coef = |w: &Option<Weight>| w.as_ref().map_or(1.0, |w| w.eval(x));
        match self.kind {
            PotentialKind::TypicalDoublePhase => PointPotential::Typical { p, q },
            PotentialKind::WeightedDoublePhase => PointPotential::Weighted {
                p,
                q,
                a: coef(&self.a_coef),
                b: coef(&self.b_coef),
            },
            PotentialKind::BcmDoublePhase => PointPotential::Bcm {
                p,
                q,
                p1: self.p1.as_ref().map_or(p, |f| f.eval(x)),
                q1: self.q1.as_ref().map_or(q, |f| f.eval(x)),
                a: coef(&self.a_coef),
            },
        }
    }

    /// Checks the parameters at the given sample points.
    pub fn check_at<'a>(&self, points: impl IntoIterator<Item = &'a [f64]>) -> Result<()> {
        for x in points {
            self.at(x)
                .check()
                .map_err(|e| Error::InvalidArgument(format!("potential at {x:?}: {e}")))?;
        }
        Ok(())
    }
}

/// A potential at one point; radial in `ξ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PointPotential {
    Typical { p: f64, q: f64 },
    Weighted { p: f64, q: f64, a: f64, b: f64 },
    Bcm { p: f64, q: f64, p1: f64, q1: f64, a: f64 },
}

impl PointPotential {
    pub fn check(&self) -> Result<(), String> {
        let gt1 = |v: f64| v.is_finite() && v > 1.0;
        match *self {
            PointPotential::Typical { p, q } => {
                if !(gt1(p) && gt1(q)) {
                    return Err(format!("exponents must exceed 1 (p = {p}, q = {q})"));
                }
            }
            PointPotential::Weighted { p, q, a, b } => {
                if !(gt1(p) && gt1(q)) {
                    return Err(format!("exponents must exceed 1 (p = {p}, q = {q})"));
                }
                if !(a >= 0.0 && b >= 0.0 && a + b > 0.0) {
                    return Err(format!("coefficients must be nonnegative, not both zero (a = {a}, b = {b})"));
                }
            }
            PointPotential::Bcm { p, q, p1, q1, a } => {
                if ![p, q, p1, q1].iter().all(|v| gt1(*v)) {
                    return Err("exponents must exceed 1".into());
                }
                if a.is_nan() || a < 0.0 {
                    return Err(format!("coefficient must be nonnegative (a = {a})"));
                }
                // the radial profile stays convex across |ξ| = 1 only if the
                // slope does not drop there
                if p1 + a * q1 < p + a * q {
                    return Err(format!("slope drops across |ξ| = 1: {} < {}", p1 + a * q1, p + a * q));
                }
            }
        }
        Ok(())
    }

    /// `𝒜` as a function of `r = |ξ|`.
    pub fn value(&self, r: f64) -> f64 {
        if r == 0.0 {
            return 0.0;
        }
        match *self {
            PointPotential::Typical { p, q } => {
                if r <= 1.0 {
                    pow(r, q) / q
                } else {
                    pow(r, p) / p + 1.0 / q - 1.0 / p
                }
            }
            PointPotential::Weighted { p, q, a, b } => a / p * pow(r, p) + b / q * pow(r, q),
            PointPotential::Bcm { p, q, p1, q1, a } => {
                if r <= 1.0 {
                    pow(r, p) + a * pow(r, q)
                } else {
                    pow(r, p1) + a * pow(r, q1)
                }
            }
        }
    }

    /// `c(r)` with `A(ξ) = c(|ξ|) ξ`; only meaningful for `r > 0`.
    pub fn flux_coeff(&self, r: f64) -> f64 {
        match *self {
            PointPotential::Typical { p, q } => {
                if r <= 1.0 {
                    pow(r, q - 2.0)
                } else {
                    pow(r, p - 2.0)
                }
            }
            PointPotential::Weighted { p, q, a, b } => a * pow(r, p - 2.0) + b * pow(r, q - 2.0),
            PointPotential::Bcm { p, q, p1, q1, a } => {
                if r <= 1.0 {
                    p * pow(r, p - 2.0) + a * q * pow(r, q - 2.0)
                } else {
                    p1 * pow(r, p1 - 2.0) + a * q1 * pow(r, q1 - 2.0)
                }
            }
        }
    }

    /// `A(ξ)·ξ` as a function of `r = |ξ|`.
    pub fn flux_dot(&self, r: f64) -> f64 {
        if r == 0.0 {
            0.0
        } else {
            self.flux_coeff(r) * r * r
        }
    }

    /// Exponents governing the growth for `|ξ| > 1` and `|ξ| <= 1`.
    pub fn growth_exponents(&self) -> (f64, f64) {
        match *self {
            PointPotential::Typical { p, q } => (p, q),
            PointPotential::Weighted { p, q, a, b } => (if b > 0.0 { q } else { p }, if a > 0.0 { p } else { q }),
            PointPotential::Bcm { p, p1, q1, a, .. } => (if a > 0.0 { q1.max(p1) } else { p1 }, p),
        }
    }

    /// `|ξ|^{large}` above 1, `|ξ|^{small}` below.
    pub fn growth_reference(&self, r: f64) -> f64 {
        let (large, small) = self.growth_exponents();
        if r > 1.0 {
            pow(r, large)
        } else {
            pow(r, small)
        }
    }
}

/// `x^e` for `x >= 0`, through `powi` when `e` is a small integer.
#[inline]
pub(crate) fn pow(x: f64, e: f64) -> f64 {
    if e == e.trunc() && e.abs() <= 32.0 {
        x.powi(e as i32)
    } else {
        x.powf(e)
    }
}

fn norm(xi: &[f64]) -> f64 {
    xi.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// `𝒜(x, ξ)`.
pub fn potential_value(spec: &PotentialSpec, x: &[f64], xi: &[f64]) -> f64 {
    spec.at(x).value(norm(xi))
}

/// `A(x, ξ) = ∂_ξ 𝒜(x, ξ)`, zero at `ξ = 0`.
pub fn flux(spec: &PotentialSpec, x: &[f64], xi: &[f64]) -> Vec<f64> {
    let r = norm(xi);
    if r == 0.0 {
        return vec![0.0; xi.len()];
    }
    let c = spec.at(x).flux_coeff(r);
    xi.iter().map(|v| c * v).collect()
}
