//! Randomized verification of the structure of potentials and reaction terms.
//!
//! Points `x` are drawn uniformly from the box of the given grid; gradients
//! `ξ` get a uniform direction and a length drawn half log-uniformly from
//! `[1e-3, 1e3]` and half uniformly near the phase transition `|ξ| = 1`.

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use super::{NonlinearitySpec, PotentialSpec};
use crate::grid::{Grid, Point};
use crate::profile::Profile;
use crate::random::{log_uniform, normal, Rng};

const REL_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthReport {
    pub condition: String,
    pub samples: usize,
    /// Samples with `𝒜 > A·ξ`.
    pub violations: usize,
    /// Largest `𝒜 / (A·ξ)`.
    #[serde(with = "crate::serde_f64")]
    pub extremal_ratio: f64,
    /// Smallest `𝒜 / |ξ|^{p or q}`: the best lower growth constant.
    pub c1: f64,
    /// Largest `A·ξ / |ξ|^{p or q}`: the best upper growth constant.
    pub c2: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StructuralReport {
    pub condition: String,
    pub samples: usize,
    pub violations: usize,
    #[serde(with = "crate::serde_f64")]
    pub extremal_ratio: f64,
    /// Largest ratio over samples with `|ξ| <= 1`, where applicable.
    #[serde(with = "crate::serde_f64")]
    pub extremal_ratio_small: f64,
    /// Largest ratio over samples with `|ξ| > 1`, where applicable.
    #[serde(with = "crate::serde_f64")]
    pub extremal_ratio_large: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvexityEntry {
    pub eps: f64,
    pub samples: usize,
    /// `min 1 - 2𝒜((u+v)/2) / (𝒜(u) + 𝒜(v))` over admissible samples.
    pub delta_hat: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvexityReport {
    pub condition: String,
    pub entries: Vec<ConvexityEntry>,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArReport {
    pub condition: String,
    pub samples: usize,
    /// Violations of `0 < θ G(u) <= u g(u)`.
    pub violations_superlinear: usize,
    /// Violations of `G(tu) >= t^θ G(u)` for `t >= 1`.
    pub violations_scaling_up: usize,
    /// Violations of `G(tu) <= t^θ G(u)` for `0 < t <= 1`.
    pub violations_scaling_down: usize,
    /// Smallest `u g(u) / (θ G(u))`.
    #[serde(with = "crate::serde_f64")]
    pub extremal_ratio: f64,
    pub passed: bool,
}

fn random_point(rng: &mut Rng, grid: &Grid) -> Point {
    let r = grid.radius();
    let mut x = [0.0; 2];
    for xk in x.iter_mut().take(grid.dim()) {
        *xk = rng.gen_range(-r..=r);
    }
    x
}

fn random_direction(rng: &mut Rng, dim: usize) -> Point {
    loop {
        let mut d = [0.0; 2];
        for dk in d.iter_mut().take(dim) {
            *dk = normal(rng);
        }
        let n = d.iter().map(|v| v * v).sum::<f64>().sqrt();
        if n > 1e-8 {
            return [d[0] / n, d[1] / n];
        }
    }
}

fn random_length(rng: &mut Rng) -> f64 {
    if rng.gen_bool(0.5) {
        log_uniform(rng, -3.0, 3.0)
    } else {
        rng.gen_range(0.5..1.5)
    }
}

/// `𝒜 <= A·ξ` and the growth constants `c1 |ξ|^{·} <= 𝒜`, `A·ξ <= c2 |ξ|^{·}`.
pub fn check_growth_sandwich(spec: &PotentialSpec, grid: &Grid, samples: usize, rng: &mut Rng) -> GrowthReport {
    let mut rep = GrowthReport {
        condition: "growth_sandwich".into(),
        samples,
        violations: 0,
        extremal_ratio: 0.0,
        c1: f64::INFINITY,
        c2: 0.0,
    };
    let dim = grid.dim();
    for _ in 0..samples {
        let x = random_point(rng, grid);
        let at = spec.at(&x[..dim]);
        let r = random_length(rng);
        let a = at.value(r);
        let ad = at.flux_dot(r);
        let reference = at.growth_reference(r);
        rep.c1 = rep.c1.min(a / reference);
        rep.c2 = rep.c2.max(ad / reference);
        rep.extremal_ratio = rep.extremal_ratio.max(a / ad);
        if a > ad * (1.0 + REL_SLACK) {
            rep.violations += 1;
        }
    }
    rep
}

/// `A(x, ξ)·ξ <= s(x) 𝒜(x, ξ)`. Ratios reported are `A·ξ / 𝒜`.
pub fn check_structural_s(spec: &PotentialSpec, s: &Profile, grid: &Grid, samples: usize, rng: &mut Rng) -> StructuralReport {
    let mut rep = StructuralReport {
        condition: "flux_dot_le_s_potential".into(),
        samples,
        violations: 0,
        extremal_ratio: 0.0,
        extremal_ratio_small: 0.0,
        extremal_ratio_large: 0.0,
    };
    let dim = grid.dim();
    for _ in 0..samples {
        let x = random_point(rng, grid);
        let at = spec.at(&x[..dim]);
        let r = random_length(rng);
        let ratio = at.flux_dot(r) / at.value(r);
        if r <= 1.0 {
            rep.extremal_ratio_small = rep.extremal_ratio_small.max(ratio);
        } else {
            rep.extremal_ratio_large = rep.extremal_ratio_large.max(ratio);
        }
        let sx = s.eval(&x[..dim]);
        rep.extremal_ratio = rep.extremal_ratio.max(ratio / sx);
        if ratio > sx * (1.0 + 1e-9) {
            rep.violations += 1;
        }
    }
    rep
}

/// Flux against a central difference of the potential with step
/// `1e-5 |ξ|`, skipping a band of half-width `band` around `|ξ| = 1`.
/// Violations are relative errors above `1e-6`.
pub fn check_flux_consistency(spec: &PotentialSpec, grid: &Grid, band: f64, samples: usize, rng: &mut Rng) -> StructuralReport {
    let mut rep = StructuralReport {
        condition: "flux_matches_potential_derivative".into(),
        samples: 0,
        violations: 0,
        extremal_ratio: 0.0,
        extremal_ratio_small: 0.0,
        extremal_ratio_large: 0.0,
    };
    let dim = grid.dim();
    let mut drawn = 0;
    while drawn < samples {
        let x = random_point(rng, grid);
        let r = random_length(rng);
        if (r - 1.0).abs() < band {
            continue;
        }
        drawn += 1;
        let d = random_direction(rng, dim);
        let xi: Vec<f64> = d[..dim].iter().map(|v| v * r).collect();
        let exact = super::flux(spec, &x[..dim], &xi);
        let step = 1e-5 * r;
        let mut err2 = 0.0;
        for k in 0..dim {
            let mut a = xi.clone();
            let mut b = xi.clone();
            a[k] += step;
            b[k] -= step;
            let fd = (super::potential_value(spec, &x[..dim], &a) - super::potential_value(spec, &x[..dim], &b)) / (2.0 * step);
            err2 += (fd - exact[k]).powi(2);
        }
        let scale = exact.iter().map(|v| v * v).sum::<f64>().sqrt();
        let rel = err2.sqrt() / scale;
        if r <= 1.0 {
            rep.extremal_ratio_small = rep.extremal_ratio_small.max(rel);
        } else {
            rep.extremal_ratio_large = rep.extremal_ratio_large.max(rel);
        }
        rep.extremal_ratio = rep.extremal_ratio.max(rel);
        if rel >= 1e-6 {
            rep.violations += 1;
        }
    }
    rep.samples = drawn;
    rep
}

/// Empirical modulus of uniform convexity. For each `ε`, pairs `u, v` with
/// `|u - v| > ε max(|u|, |v|)` are drawn with a bias toward the boundary of
/// that set, where the modulus is smallest.
pub fn check_uniform_convexity(spec: &PotentialSpec, eps_list: &[f64], grid: &Grid, samples: usize, rng: &mut Rng) -> ConvexityReport {
    let dim = grid.dim();
    let mut entries = Vec::with_capacity(eps_list.len());
    for &eps in eps_list {
        let mut delta_hat = f64::INFINITY;
        let mut used = 0;
        for _ in 0..samples {
            let x = random_point(rng, grid);
            let at = spec.at(&x[..dim]);
            let r = if rng.gen_bool(0.5) {
                log_uniform(rng, -2.0, 2.0)
            } else {
                rng.gen_range(0.5..1.5)
            };
            let ratio = eps + (2.0 - eps) * rng.gen::<f64>().powi(3);
            let (u, v) = if dim == 1 {
                let s = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
                let u = [s * r, 0.0];
                let v = if ratio <= 1.0 {
                    [u[0] * (1.0 - ratio), 0.0]
                } else {
                    [-u[0] * (ratio - 1.0), 0.0]
                };
                (u, v)
            } else {
                let kappa = ratio.min(2.0 - ratio) * rng.gen::<f64>().powi(3);
                let shrink = 1.0 - kappa;
                let cos = ((1.0 + shrink * shrink - ratio * ratio) / (2.0 * shrink)).clamp(-1.0, 1.0);
                let phi = cos.acos() * if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
                let t0 = rng.gen_range(0.0..std::f64::consts::TAU);
                let u = [r * t0.cos(), r * t0.sin()];
                let v = [r * shrink * (t0 + phi).cos(), r * shrink * (t0 + phi).sin()];
                (u, v)
            };
            let len = |a: &[f64; 2]| (a[0] * a[0] + a[1] * a[1]).sqrt();
            let diff = [u[0] - v[0], u[1] - v[1]];
            if len(&diff) <= eps * len(&u).max(len(&v)) {
                continue;
            }
            used += 1;
            let mid = [0.5 * (u[0] + v[0]), 0.5 * (u[1] + v[1])];
            let d = 1.0 - 2.0 * at.value(len(&mid)) / (at.value(len(&u)) + at.value(len(&v)));
            delta_hat = delta_hat.min(d);
        }
        entries.push(ConvexityEntry {
            eps,
            samples: used,
            delta_hat,
        });
    }
    let passed = entries.iter().all(|e| e.samples > 0 && e.delta_hat > 0.0);
    ConvexityReport {
        condition: "uniform_convexity".into(),
        entries,
        passed,
    }
}

/// `0 < θ G(x, u) <= u g(x, u)` and the scaling laws of `G` it implies,
/// for the superlinear part `g(x, u) = |u|^{γ(x)-2} u`.
pub fn check_ar_condition(nl: &NonlinearitySpec, grid: &Grid, samples: usize, rng: &mut Rng) -> ArReport {
    let dim = grid.dim();
    let theta = nl.theta;
    let mut rep = ArReport {
        condition: "superlinearity".into(),
        samples,
        violations_superlinear: 0,
        violations_scaling_up: 0,
        violations_scaling_down: 0,
        extremal_ratio: f64::INFINITY,
        passed: false,
    };
    for _ in 0..samples {
        let x = random_point(rng, grid);
        let at = nl.at(&x[..dim]);
        let u = log_uniform(rng, -3.0, 2.0) * if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
        let (g, big_g) = at.g(u);
        rep.extremal_ratio = rep.extremal_ratio.min(u * g / (theta * big_g));
        if !(big_g > 0.0) || theta * big_g > u * g * (1.0 + REL_SLACK) {
            rep.violations_superlinear += 1;
        }
        let t_up = log_uniform(rng, 0.0, 2.0);
        if at.g(t_up * u).1 < t_up.powf(theta) * big_g * (1.0 - REL_SLACK) {
            rep.violations_scaling_up += 1;
        }
        let t_down = log_uniform(rng, -2.0, 0.0);
        if at.g(t_down * u).1 > t_down.powf(theta) * big_g * (1.0 + REL_SLACK) {
            rep.violations_scaling_down += 1;
        }
    }
    rep.passed = rep.violations_superlinear == 0 && rep.violations_scaling_up == 0 && rep.violations_scaling_down == 0;
    rep
}

/// `g(x, u) u / |u|^{α(x)} -> 0` along `u = 2^{-k}`: the ratio must decrease
/// strictly and its fitted decay rate (in powers of 2) must be positive.
/// `extremal_ratio` is the smallest fitted rate.
pub fn check_origin_decay(nl: &NonlinearitySpec, alpha: &Profile, grid: &Grid, samples: usize, rng: &mut Rng) -> StructuralReport {
    const STEPS: i32 = 60;
    let dim = grid.dim();
    let mut rep = StructuralReport {
        condition: "superlinear_at_origin".into(),
        samples,
        violations: 0,
        extremal_ratio: f64::INFINITY,
        extremal_ratio_small: f64::INFINITY,
        extremal_ratio_large: f64::INFINITY,
    };
    for _ in 0..samples {
        let x = random_point(rng, grid);
        let at = nl.at(&x[..dim]);
        let a = alpha.eval(&x[..dim]);
        let ratio = |k: i32| {
            let u = 2f64.powi(-k);
            at.g(u).0 * u / u.powf(a)
        };
        let mut ok = true;
        for k in 1..STEPS {
            if ratio(k + 1) >= ratio(k) {
                ok = false;
            }
        }
        let rate = (ratio(1).ln() - ratio(STEPS).ln()) / ((STEPS - 1) as f64 * std::f64::consts::LN_2);
        rep.extremal_ratio = rep.extremal_ratio.min(rate);
        if !ok || rate <= 1e-9 {
            rep.violations += 1;
        }
    }
    rep
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::Truncation;
    use crate::profile::Weight;
    use crate::random::seeded;

    fn typical(p: f64, q: f64) -> PotentialSpec {
        PotentialSpec::typical(Profile::constant(p), Profile::constant(q))
    }

    #[test]
    fn typical_sandwich_and_structure() {
        let g = Grid::new(1, 2.0, 11).unwrap();
        let mut rng = seeded(1);
        let rep = check_growth_sandwich(&typical(2.0, 3.0), &g, 2000, &mut rng);
        assert_eq!(rep.violations, 0);
        assert!(rep.c1 <= 1.0 / 3.0 + 1e-12);
        let rep = check_structural_s(&typical(2.0, 3.0), &Profile::constant(3.0), &g, 2000, &mut rng);
        assert_eq!(rep.violations, 0);
        assert!((rep.extremal_ratio_small - 3.0).abs() < 1e-9);
        let rep = check_structural_s(&typical(2.0, 3.0), &Profile::constant(2.0), &g, 2000, &mut rng);
        assert!(rep.violations > 0);
    }

    #[test]
    fn quadratic_modulus_is_eps_squared_over_four() {
        let g = Grid::new(2, 1.0, 5).unwrap();
        let rep = check_uniform_convexity(&typical(2.0, 2.0), &[0.5], &g, 5000, &mut seeded(2));
        let d = rep.entries[0].delta_hat;
        assert!((d - 0.0625).abs() < 0.1 * 0.0625, "{d}");
    }

    #[test]
    fn superlinearity_for_quartic_power() {
        let nl = NonlinearitySpec {
            lambda: 0.0,
            mu: 1.0,
            a_weight: Weight::constant(1.0),
            w_weight: Weight::constant(1.0),
            delta: Profile::constant(1.5),
            gamma: Profile::constant(4.0),
            theta: 3.0,
            truncation: Truncation::None,
        };
        let g = Grid::new(1, 2.0, 11).unwrap();
        let rep = check_ar_condition(&nl, &g, 1000, &mut seeded(4));
        assert!(rep.passed);
        assert!((rep.extremal_ratio - 4.0 / 3.0).abs() < 1e-9);
        let dec = check_origin_decay(&nl, &Profile::constant(2.0), &g, 10, &mut seeded(5));
        assert_eq!(dec.violations, 0);
        assert!((dec.extremal_ratio - 2.0).abs() < 1e-9);
    }
}
