//! Seeded random grid functions for the inequality batteries and solver seeds.
//!
//! Every random quantity in the library is drawn from a [`Rng`] created by
//! [`seeded`], so a run is reproducible from one `u64`.

use rand::Rng as _;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::grid::{Grid, GridFunction, Layout};

pub type Rng = ChaCha8Rng;

pub fn seeded(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Independent stream for a sub-task, so adding draws in one consumer does not
/// shift the others.
pub fn fork(rng: &mut Rng) -> Rng {
    ChaCha8Rng::seed_from_u64(rng.gen())
}

pub fn normal(rng: &mut Rng) -> f64 {
    StandardNormal.sample(rng)
}

/// `10^U(lo, hi)`.
pub fn log_uniform(rng: &mut Rng, lo_exp: f64, hi_exp: f64) -> f64 {
    10f64.powf(rng.gen_range(lo_exp..hi_exp))
}

/// A sum of Gaussian bumps `Σ c_j exp(-|x - x_j|² / w_j²)` placed inside the
/// inner 60% of the box.
pub fn bumps(rng: &mut Rng, grid: &Grid, layout: Layout, count: usize) -> GridFunction {
    let dim = grid.dim();
    let r = grid.radius();
    let h = grid.spacing();
    let params: Vec<([f64; 2], f64, f64)> = (0..count)
        .map(|_| {
            let mut c = [0.0; 2];
            for ck in c.iter_mut().take(dim) {
                *ck = rng.gen_range(-0.6 * r..0.6 * r);
            }
            let width = rng.gen_range((2.0 * h).max(0.05 * r).min(0.25 * r)..0.5 * r);
            (c, width, normal(rng))
        })
        .collect();
    let values = grid
        .points(layout)
        .map(|x| {
            params
                .iter()
                .map(|(c, w, a)| {
                    let d2: f64 = (0..dim).map(|k| (x[k] - c[k]).powi(2)).sum();
                    a * (-d2 / (w * w)).exp()
                })
                .sum()
        })
        .collect();
    GridFunction::from_parts_unchecked(*grid, layout, 1, values)
}

/// A random scalar field mixing white noise, smooth bumps, sparse spikes and
/// exact zeros, rescaled to a peak drawn log-uniformly from `[1e-3, 1e3]`.
pub fn random_field(rng: &mut Rng, grid: &Grid, layout: Layout) -> GridFunction {
    let n = grid.len(layout);
    let kind = rng.gen_range(0..4u8);
    let mut values: Vec<f64> = match kind {
        0 => (0..n).map(|_| normal(rng)).collect(),
        1 => {
            let count = rng.gen_range(1..4);
            bumps(rng, grid, layout, count).into_values()
        }
        2 => {
            let mut v = vec![0.0; n];
            let spikes = rng.gen_range(1..=n.clamp(1, 8));
            for _ in 0..spikes {
                v[rng.gen_range(0..n)] = normal(rng) * log_uniform(rng, 0.0, 2.0);
            }
            v
        }
        _ => {
            let count = rng.gen_range(1..3);
            let smooth = bumps(rng, grid, layout, count).into_values();
            smooth.into_iter().map(|s| s + 0.2 * normal(rng)).collect()
        }
    };
    if rng.gen_bool(0.3) {
        for v in values.iter_mut() {
            if rng.gen_bool(0.3) {
                *v = 0.0;
            }
        }
    }
    let peak = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if peak == 0.0 {
        values[rng.gen_range(0..n)] = 1.0;
    }
    let peak = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let scale = log_uniform(rng, -3.0, 3.0) / peak;
    let values = values.into_iter().map(|v| v * scale).collect();
    GridFunction::from_parts_unchecked(*grid, layout, 1, values)
}
