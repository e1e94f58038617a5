//! Analytic formulas for exponents and weights.
//!
//! Every field that enters a problem is described by one of these closed
//! forms and sampled onto a grid layout when the problem is compiled. Keeping
//! the formulas around (instead of only the samples) lets pointwise checks
//! evaluate at arbitrary points of the box.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A scalar formula `x ↦ v(x)` used for variable exponents.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Profile {
    Constant {
        value: f64,
    },
    /// `base + slope · x`
    Affine {
        base: f64,
        slope: Vec<f64>,
    },
    /// `base + amplitude · mean_k sin(frequency · x_k)`
    Sinusoidal {
        base: f64,
        amplitude: f64,
        frequency: f64,
    },
}

impl Profile {
    pub fn constant(value: f64) -> Self {
        Profile::Constant { value }
    }

    pub fn affine(base: f64, slope: &[f64]) -> Self {
        Profile::Affine {
            base,
            slope: slope.to_vec(),
        }
    }

    pub fn sinusoidal(base: f64, amplitude: f64, frequency: f64) -> Self {
        Profile::Sinusoidal {
            base,
            amplitude,
            frequency,
        }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        match self {
            Profile::Constant { value } => *value,
            Profile::Affine { base, slope } => base + slope.iter().zip(x).map(|(s, xi)| s * xi).sum::<f64>(),
            Profile::Sinusoidal {
                base,
                amplitude,
                frequency,
            } => {
                if x.is_empty() {
                    return *base;
                }
                let mean = x.iter().map(|xi| (frequency * xi).sin()).sum::<f64>() / x.len() as f64;
                base + amplitude * mean
            }
        }
    }

    pub fn as_constant(&self) -> Option<f64> {
        match self {
            Profile::Constant { value } => Some(*value),
            _ => None,
        }
    }

    pub fn check(&self, dim: usize) -> Result<()> {
        let finite = match self {
            Profile::Constant { value } => value.is_finite(),
            Profile::Affine { base, slope } => {
                if slope.len() > dim {
                    return Err(Error::InvalidArgument(format!(
                        "affine slope has {} components for a {}-dimensional domain",
                        slope.len(),
                        dim
                    )));
                }
                base.is_finite() && slope.iter().all(|s| s.is_finite())
            }
            Profile::Sinusoidal {
                base,
                amplitude,
                frequency,
            } => base.is_finite() && amplitude.is_finite() && frequency.is_finite(),
        };
        if finite {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!("non-finite profile parameters: {self:?}")))
        }
    }
}

/// A non-negative coefficient field such as the weights `a`, `w` or the
/// double-phase coefficients.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Weight {
    Constant {
        value: f64,
    },
    /// `scale · exp(-|x|² / width²)`
    Gaussian {
        scale: f64,
        width: f64,
    },
}

impl Default for Weight {
    fn default() -> Self {
        Weight::Gaussian { scale: 1.0, width: 1.0 }
    }
}

impl Weight {
    pub fn gaussian(scale: f64, width: f64) -> Self {
        Weight::Gaussian { scale, width }
    }

    pub fn constant(value: f64) -> Self {
        Weight::Constant { value }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        match self {
            Weight::Constant { value } => *value,
            Weight::Gaussian { scale, width } => {
                let r2: f64 = x.iter().map(|v| v * v).sum();
                scale * (-r2 / (width * width)).exp()
            }
        }
    }

    pub fn check(&self) -> Result<()> {
        let ok = match self {
            Weight::Constant { value } => value.is_finite() && *value >= 0.0,
            Weight::Gaussian { scale, width } => scale.is_finite() && *scale >= 0.0 && width.is_finite() && *width > 0.0,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!("weights must be finite and non-negative: {self:?}")))
        }
    }
}
