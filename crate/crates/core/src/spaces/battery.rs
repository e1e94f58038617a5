//! Randomized batteries for the norm inequalities.
//!
//! Each battery draws random fields on the layout of the exponent it is given
//! and reports how many trials violated the inequality. The slack of a trial
//! is the relative margin by which it held (negative when violated).

use serde::{Deserialize, Serialize};

use super::{check_holder, check_interpolation, luxemburg_norm, modular, sum_space_norm, CHECK_SLACK};
use crate::error::Result;
use crate::exponents::ExponentField;
use crate::random::{log_uniform, random_field, Rng};
use rand::Rng as _;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatteryReport {
    pub inequality_name: String,
    pub trials: usize,
    pub failures: usize,
    /// Smallest relative margin over the trials; `+inf` when nothing ran.
    #[serde(with = "crate::serde_f64")]
    pub worst_slack: f64,
    pub note: String,
}

impl BatteryReport {
    fn new(name: &str, trials: usize) -> Self {
        BatteryReport {
            inequality_name: name.into(),
            trials,
            failures: 0,
            worst_slack: f64::INFINITY,
            note: if trials == 0 {
                "no trials run; vacuous pass".into()
            } else {
                String::new()
            },
        }
    }

    fn record(&mut self, slack: f64, failed: bool) {
        self.worst_slack = self.worst_slack.min(slack);
        if failed {
            self.failures += 1;
        }
    }

    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

/// `(b - a) / max(|a|, |b|)`, zero when both vanish.
fn rel_margin(a: f64, b: f64) -> f64 {
    let s = a.abs().max(b.abs());
    if s == 0.0 {
        0.0
    } else {
        (b - a) / s
    }
}

/// Norm below, at, or above one exactly when the modular is.
pub fn norm_modular_battery(p: &ExponentField, trials: usize, rng: &mut Rng) -> Result<BatteryReport> {
    let mut rep = BatteryReport::new("norm_modular_equivalence", trials);
    for _ in 0..trials {
        let u = random_field(rng, p.grid(), p.layout());
        let n = luxemburg_norm(&u, p, None)?;
        let rho = modular(&u, p, None)?.value;
        // Near |u| = 1 the sign of (n - 1) is below the root-finding tolerance.
        let slack = if (n - 1.0).abs() <= CHECK_SLACK {
            0.0
        } else {
            (n - 1.0).signum() * (rho - 1.0)
        };
        rep.record(slack, slack < -CHECK_SLACK);
    }
    Ok(rep)
}

/// `|u|^{p+} <= ρ(u) <= |u|^{p-}` below one, reversed above one.
pub fn power_bounds_battery(p: &ExponentField, trials: usize, rng: &mut Rng) -> Result<BatteryReport> {
    let mut rep = BatteryReport::new("norm_modular_power_bounds", trials);
    let (lo_e, hi_e) = (p.inf_val(), p.sup_val());
    for _ in 0..trials {
        let u = random_field(rng, p.grid(), p.layout());
        let n = luxemburg_norm(&u, p, None)?;
        let rho = modular(&u, p, None)?.value;
        let (a, b) = if n > 1.0 {
            (n.powf(lo_e), n.powf(hi_e))
        } else {
            (n.powf(hi_e), n.powf(lo_e))
        };
        let slack = rel_margin(a, rho).min(rel_margin(rho, b));
        rep.record(slack, slack < -CHECK_SLACK);
    }
    Ok(rep)
}

/// Along `u / 2^k` and `u 2^k` the norm scales exactly, the modular is
/// monotone, and the modular goes to 0 (to infinity) with the norm.
pub fn convergence_battery(p: &ExponentField, trials: usize, rng: &mut Rng) -> Result<BatteryReport> {
    const STEPS: i32 = 30;
    let mut rep = BatteryReport::new("modular_convergence", trials);
    let lo_e = p.inf_val();
    for _ in 0..trials {
        let u = random_field(rng, p.grid(), p.layout());
        let n0 = luxemburg_norm(&u, p, None)?;
        let mut slack = f64::INFINITY;
        for dir in [-1.0, 1.0] {
            let mut prev = modular(&u, p, None)?.value;
            for k in 1..=STEPS {
                let c = 2f64.powf(dir * k as f64);
                let uk = u.scale(c);
                let nk = luxemburg_norm(&uk, p, None)?;
                let rk = modular(&uk, p, None)?.value;
                slack = slack.min(-((nk - c * n0).abs() / (c * n0)) + CHECK_SLACK);
                // shrinking decreases the modular, growing increases it
                slack = slack.min(if dir < 0.0 { rel_margin(rk, prev) } else { rel_margin(prev, rk) });
                if nk < 1.0 {
                    slack = slack.min(rel_margin(rk, nk.powf(lo_e)));
                } else if nk > 1.0 {
                    slack = slack.min(rel_margin(nk.powf(lo_e), rk));
                }
                prev = rk;
            }
        }
        rep.record(slack, slack < -CHECK_SLACK);
    }
    Ok(rep)
}

/// `|c u| = |c| |u|` for random factors `c`.
pub fn homogeneity_battery(p: &ExponentField, trials: usize, rng: &mut Rng) -> Result<BatteryReport> {
    let mut rep = BatteryReport::new("norm_homogeneity", trials);
    for _ in 0..trials {
        let u = random_field(rng, p.grid(), p.layout());
        let c = log_uniform(rng, -3.0, 3.0) * if rng.gen_bool(0.5) { -1.0 } else { 1.0 };
        let a = luxemburg_norm(&u.scale(c), p, None)?;
        let b = c.abs() * luxemburg_norm(&u, p, None)?;
        let err = (a - b).abs() / b;
        rep.record(1e-8 - err, err > 1e-8);
    }
    Ok(rep)
}

/// Hölder's inequality with the variable-exponent constant.
pub fn holder_battery(p: &ExponentField, trials: usize, rng: &mut Rng) -> Result<BatteryReport> {
    let mut rep = BatteryReport::new("holder", trials);
    for _ in 0..trials {
        let u = random_field(rng, p.grid(), p.layout());
        let v = random_field(rng, p.grid(), p.layout());
        let c = check_holder(&u, &v, p)?;
        rep.record(c.relative_slack(), !c.holds);
    }
    Ok(rep)
}

/// The interpolation inequality between `L^p`, `L^α` and `L^q`.
pub fn interpolation_battery(
    alpha: &ExponentField,
    p: &ExponentField,
    q: &ExponentField,
    trials: usize,
    rng: &mut Rng,
) -> Result<BatteryReport> {
    let mut rep = BatteryReport::new("interpolation", trials);
    for _ in 0..trials {
        let u = random_field(rng, p.grid(), p.layout());
        let c = check_interpolation(&u, alpha, p, q)?;
        rep.record(c.relative_slack(), !c.holds);
    }
    Ok(rep)
}

/// Lower bound below upper bound, and the reported decomposition sums to `u`.
pub fn sum_space_battery(p: &ExponentField, q: &ExponentField, trials: usize, rng: &mut Rng) -> Result<BatteryReport> {
    let mut rep = BatteryReport::new("sum_space_sandwich", trials);
    for _ in 0..trials {
        let u = random_field(rng, p.grid(), p.layout());
        let r = sum_space_norm(&u, p, q)?;
        let exact = r
            .best
            .v
            .values()
            .iter()
            .zip(r.best.w.values())
            .zip(u.values())
            .all(|((a, b), x)| a + b == *x);
        let slack = rel_margin(r.lower, r.upper);
        rep.record(slack, slack < -CHECK_SLACK || !exact);
    }
    Ok(rep)
}
