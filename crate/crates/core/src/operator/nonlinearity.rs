use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::profile::{Profile, Weight};

/// Which sign of `u` the reaction term is kept on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Truncation {
    #[default]
    None,
    /// `f⁺ = max(f, 0)`, with primitive `F⁺(u) = ∫_0^u f⁺`.
    Positive,
    /// `f⁻ = min(f, 0)`, the mirror image.
    Negative,
}

/// `f(x, u) = λ a(x) |u|^{δ(x)-2} u + μ w(x) |u|^{γ(x)-2} u`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NonlinearitySpec {
    pub lambda: f64,
    pub mu: f64,
    pub a_weight: Weight,
    pub w_weight: Weight,
    pub delta: Profile,
    pub gamma: Profile,
    /// Exponent of the superlinearity condition `θ G <= t g(t)`.
    pub theta: f64,
    #[serde(default)]
    pub truncation: Truncation,
}

impl NonlinearitySpec {
    pub fn check(&self, dim: usize) -> Result<()> {
        if !(self.lambda.is_finite() && self.lambda >= 0.0 && self.mu.is_finite() && self.mu >= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "lambda and mu must be nonnegative (lambda = {}, mu = {})",
                self.lambda, self.mu
            )));
        }
        if !(self.theta.is_finite() && self.theta > 0.0) {
            return Err(Error::InvalidArgument(format!("theta must be positive, got {}", self.theta)));
        }
        self.a_weight.check()?;
        self.w_weight.check()?;
        self.delta.check(dim)?;
        self.gamma.check(dim)
    }

    /// The coefficients frozen at `x`.
    pub fn at(&self, x: &[f64]) -> NodeNonlinearity {
        NodeNonlinearity {
            la: self.lambda * self.a_weight.eval(x),
            mw: self.mu * self.w_weight.eval(x),
            delta: self.delta.eval(x),
            gamma: self.gamma.eval(x),
            truncation: self.truncation,
        }
    }
}

/// The reaction term at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NodeNonlinearity {
    /// `λ a(x)`
    pub la: f64,
    /// `μ w(x)`
    pub mw: f64,
    pub delta: f64,
    pub gamma: f64,
    pub truncation: Truncation,
}

impl NodeNonlinearity {
    /// `(f(u), F(u))`; both vanish at `u = 0`.
    pub fn value(&self, u: f64) -> (f64, f64) {
        let kept = match self.truncation {
            Truncation::None => u != 0.0,
            Truncation::Positive => u > 0.0,
            Truncation::Negative => u < 0.0,
        };
        if !kept {
            return (0.0, 0.0);
        }
        let a = u.abs();
        let s = u.signum();
        let pd = super::pow(a, self.delta);
        let pg = super::pow(a, self.gamma);
        let f = s * (self.la * pd + self.mw * pg) / a;
        let big_f = self.la * pd / self.delta + self.mw * pg / self.gamma;
        (f, big_f)
    }

    /// The superlinear part `g(u) = |u|^{γ-2} u` and its primitive.
    pub fn g(&self, u: f64) -> (f64, f64) {
        if u == 0.0 {
            return (0.0, 0.0);
        }
        let pg = super::pow(u.abs(), self.gamma);
        (u.signum() * pg / u.abs(), pg / self.gamma)
    }
}

/// `(f(x, u), F(x, u))`.
pub fn nonlinearity_value(nl: &NonlinearitySpec, x: &[f64], u: f64) -> (f64, f64) {
    nl.at(x).value(u)
}

/// The reaction term clamped below at zero.
pub fn truncate_plus(nl: &NonlinearitySpec) -> NonlinearitySpec {
    NonlinearitySpec {
        truncation: Truncation::Positive,
        ..nl.clone()
    }
}

/// The reaction term clamped above at zero.
pub fn truncate_minus(nl: &NonlinearitySpec) -> NonlinearitySpec {
    NonlinearitySpec {
        truncation: Truncation::Negative,
        ..nl.clone()
    }
}
