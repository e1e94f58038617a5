//! Norm of the sum space `L^{p(·)} + L^{q(·)}`.
//!
//! The norm is an infimum over decompositions `u = v + w`. Writing
//! `v = s u`, `w = (1 - s) u` with `s ∈ [0, 1]` per node, the cost
//! `|s m|_p + |(1 - s) m|_q` is convex in `s`. We scan a family of threshold
//! splits and then descend from the best one using the stationarity
//! condition of the cost. Whatever decomposition we end with gives a valid
//! upper bound.

use serde::{Deserialize, Serialize};

use super::luxemburg_raw;
use crate::error::{Error, Result};
use crate::exponents::ExponentField;
use crate::grid::{CompensatedSum, GridFunction};

/// Constant of the lower bound's small-value branch, calibrated on random
/// fields against the computed upper bound and brute-force minima, with a
/// safety factor, then frozen.
pub const SUM_SPACE_LOWER_C: f64 = 0.5;

const LOG_SWEEP: usize = 16;
const LEVELS: usize = 16;
const REFINE_ITERS: usize = 40;
const GOLDEN_EVALS: usize = 30;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SplitKind {
    /// `v = u` where `|u| > t`, `w = u` elsewhere.
    Hard,
    /// `w` is `u` clamped to `[-t, t]`, `v = u - w`.
    Soft,
    /// Refined from a threshold split by the stationarity iteration.
    Balanced,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SumSpaceDecomposition {
    /// The `L^{p(·)}` part.
    pub v: GridFunction,
    /// The `L^{q(·)}` part.
    pub w: GridFunction,
    /// Threshold of the split (of the starting split for `Balanced`).
    pub threshold: f64,
    pub kind: SplitKind,
    /// `|v|_p + |w|_q`.
    pub norm_value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SumSpaceNorm {
    pub upper: f64,
    pub lower: f64,
    pub best: SumSpaceDecomposition,
}

struct Cost<'a> {
    m: &'a [f64],
    p: &'a [f64],
    q: &'a [f64],
    weights: Vec<f64>,
    vbuf: std::cell::RefCell<(Vec<f64>, Vec<f64>)>,
}

impl Cost<'_> {
    /// `(|s m|_p, |(1-s) m|_q)`.
    fn parts(&self, s: &[f64]) -> Result<(f64, f64)> {
        let mut b = self.vbuf.borrow_mut();
        let (vm, wm) = &mut *b;
        vm.clear();
        wm.clear();
        for (si, mi) in s.iter().zip(self.m) {
            vm.push(si * mi);
            wm.push((1.0 - si) * mi);
        }
        Ok((luxemburg_raw(vm, self.p, &self.weights)?, luxemburg_raw(wm, self.q, &self.weights)?))
    }

    fn total(&self, s: &[f64]) -> Result<f64> {
        let (a, b) = self.parts(s)?;
        Ok(a + b)
    }

    /// `Σ ω p (x/N)^p`, the normalizer of the norm's derivative.
    fn normalizer(&self, x: &[f64], e: &[f64], n: f64) -> f64 {
        let mut acc = CompensatedSum::default();
        for i in 0..x.len() {
            if x[i] > 0.0 {
                acc.add(self.weights[i] * e[i] * (x[i] / n).powf(e[i]));
            }
        }
        acc.total()
    }

    /// Fractions that equalize the marginal costs of both parts at every
    /// node, for the norms and normalizers of the current split.
    fn stationary_fractions(&self, s: &[f64], np: f64, nq: f64) -> Vec<f64> {
        let vm: Vec<f64> = s.iter().zip(self.m).map(|(a, b)| a * b).collect();
        let wm: Vec<f64> = s.iter().zip(self.m).map(|(a, b)| (1.0 - a) * b).collect();
        let dp = self.normalizer(&vm, self.p, np);
        let dq = self.normalizer(&wm, self.q, nq);
        (0..s.len())
            .map(|i| {
                let m = self.m[i];
                if m == 0.0 {
                    return s[i];
                }
                let (p, q) = (self.p[i], self.q[i]);
                // p (v/Np)^{p-1} / Dp = q (w/Nq)^{q-1} / Dq, in logs, with
                // v = m σ(y) and w = m σ(-y).
                let c = p.ln() - (p - 1.0) * np.ln() - dp.ln() - q.ln() + (q - 1.0) * nq.ln() + dq.ln() + (p - q) * m.ln();
                let h = |y: f64| c - (p - 1.0) * softplus(-y) + (q - 1.0) * softplus(y);
                let dh = |y: f64| (p - 1.0) * sigmoid(-y) + (q - 1.0) * sigmoid(y);
                sigmoid(solve_increasing(h, dh))
            })
            .collect()
    }
}

fn softplus(z: f64) -> f64 {
    z.max(0.0) + (-z.abs()).exp().ln_1p()
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Root of an increasing function on the real line by safeguarded Newton.
fn solve_increasing(h: impl Fn(f64) -> f64, dh: impl Fn(f64) -> f64) -> f64 {
    let (mut lo, mut hi) = (-1.0, 1.0);
    while h(lo) > 0.0 && lo > -1e6 {
        lo *= 2.0;
    }
    while h(hi) < 0.0 && hi < 1e6 {
        hi *= 2.0;
    }
    let mut y = 0.5 * (lo + hi);
    for _ in 0..100 {
        let f = h(y);
        if f > 0.0 {
            hi = y;
        } else {
            lo = y;
        }
        let mut next = y - f / dh(y);
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        if (next - y).abs() < 1e-13 * (1.0 + y.abs()) {
            return next;
        }
        y = next;
    }
    y
}

fn hard_fractions(m: &[f64], t: f64) -> Vec<f64> {
    m.iter().map(|x| if *x > t { 1.0 } else { 0.0 }).collect()
}

fn soft_fractions(m: &[f64], t: f64) -> Vec<f64> {
    m.iter().map(|x| if *x > t { 1.0 - t / x } else { 0.0 }).collect()
}

/// Threshold family: 0, 1, +inf, a logarithmic sweep across the range of
/// `|u|`, and up to [`LEVELS`] of the distinct levels of `|u|`.
fn thresholds(m: &[f64]) -> Vec<f64> {
    let mut t = vec![0.0, 1.0, f64::INFINITY];
    let mut nz: Vec<f64> = m.iter().copied().filter(|x| *x > 0.0).collect();
    nz.sort_by(f64::total_cmp);
    nz.dedup();
    if let (Some(lo), Some(hi)) = (nz.first(), nz.last()) {
        let (a, b) = (lo.ln(), hi.ln());
        for k in 0..LOG_SWEEP {
            t.push((a + (b - a) * k as f64 / (LOG_SWEEP - 1) as f64).exp());
        }
        if nz.len() <= LEVELS {
            t.extend_from_slice(&nz);
        } else {
            for k in 0..LEVELS {
                t.push(nz[k * (nz.len() - 1) / (LEVELS - 1)]);
            }
        }
    }
    t
}

fn golden_min(f: impl Fn(f64) -> Result<f64>) -> Result<(f64, f64)> {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let (mut a, mut b) = (0.0, 1.0);
    let mut x1 = b - g * (b - a);
    let mut x2 = a + g * (b - a);
    let mut f1 = f(x1)?;
    let mut f2 = f(x2)?;
    for _ in 0..GOLDEN_EVALS {
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - g * (b - a);
            f1 = f(x1)?;
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + g * (b - a);
            f2 = f(x2)?;
        }
    }
    Ok(if f1 <= f2 { (x1, f1) } else { (x2, f2) })
}

fn check_inputs(u: &GridFunction, p: &ExponentField, q: &ExponentField) -> Result<()> {
    p.check_same_grid(q)?;
    if u.grid() != p.grid() || u.layout() != p.layout() {
        return Err(Error::GridMismatch(
            "sum-space field and exponents live on different layouts".into(),
        ));
    }
    if p.inf_val() <= 1.0 || !q.sup_val().is_finite() || q.inf_val() <= 1.0 {
        return Err(Error::InvalidExponent("sum-space exponents must be finite and exceed 1".into()));
    }
    Ok(())
}

/// Splits `u` into `v = s u` and `w = u - v`, adjusting `v` by rounding so
/// that `v + w == u` holds bit for bit. A node where that fails goes wholly
/// to the nearer side.
fn decompose(u: &GridFunction, s: &[f64]) -> (GridFunction, GridFunction) {
    let c = u.components();
    let mut v = Vec::with_capacity(u.values().len());
    let mut w = Vec::with_capacity(u.values().len());
    for (i, chunk) in u.values().chunks(c).enumerate() {
        let mut vi: Vec<f64> = chunk.iter().map(|x| s[i] * x).collect();
        let wi: Vec<f64> = chunk.iter().zip(&vi).map(|(x, a)| x - a).collect();
        for ((a, b), x) in vi.iter_mut().zip(&wi).zip(chunk) {
            if *a + b != *x {
                *a = x - b;
            }
        }
        if chunk.iter().zip(vi.iter().zip(&wi)).all(|(x, (a, b))| a + b == *x) {
            v.extend(vi);
            w.extend(wi);
        } else if s[i] >= 0.5 {
            v.extend_from_slice(chunk);
            w.extend(std::iter::repeat(0.0).take(c));
        } else {
            v.extend(std::iter::repeat(0.0).take(c));
            w.extend_from_slice(chunk);
        }
    }
    (
        GridFunction::from_parts_unchecked(*u.grid(), u.layout(), c, v),
        GridFunction::from_parts_unchecked(*u.grid(), u.layout(), c, w),
    )
}

/// Sum-space bounds with the default lower-bound constant.
pub fn sum_space_norm(u: &GridFunction, p: &ExponentField, q: &ExponentField) -> Result<SumSpaceNorm> {
    sum_space_norm_with(u, p, q, SUM_SPACE_LOWER_C)
}

/// Sum-space upper bound, best decomposition, and the lower bound with
/// constant `c`. Vector fields are split along their pointwise magnitude.
pub fn sum_space_norm_with(u: &GridFunction, p: &ExponentField, q: &ExponentField, c: f64) -> Result<SumSpaceNorm> {
    check_inputs(u, p, q)?;
    let mag = u.magnitude();
    let m = mag.values();
    let vol = u.grid().cell_volume();
    let cost = Cost {
        m,
        p: p.values(),
        q: q.values(),
        weights: vec![vol; m.len()],
        vbuf: Default::default(),
    };
    if m.iter().all(|x| *x == 0.0) {
        let zero = GridFunction::from_parts_unchecked(*u.grid(), u.layout(), u.components(), vec![0.0; u.values().len()]);
        return Ok(SumSpaceNorm {
            upper: 0.0,
            lower: 0.0,
            best: SumSpaceDecomposition {
                v: zero.clone(),
                w: zero,
                threshold: 1.0,
                kind: SplitKind::Hard,
                norm_value: 0.0,
            },
        });
    }

    // (cost, fractions, threshold, kind)
    let mut best: Option<(f64, Vec<f64>, f64, SplitKind)> = None;
    let mut best_mixed: Option<(f64, Vec<f64>, f64)> = None;
    for t in thresholds(m) {
        for (kind, s) in [(SplitKind::Hard, hard_fractions(m, t)), (SplitKind::Soft, soft_fractions(m, t))] {
            let (a, b) = cost.parts(&s)?;
            let val = a + b;
            if best.as_ref().is_none_or(|(bv, ..)| val < *bv) {
                best = Some((val, s.clone(), t, kind));
            }
            if a > 0.0 && b > 0.0 && best_mixed.as_ref().is_none_or(|(bv, ..)| val < *bv) {
                best_mixed = Some((val, s, t));
            }
        }
    }
    let (mut best_val, mut best_s, mut best_t, mut best_kind) = best.expect("threshold family is never empty");

    if let Some((mut val, mut s, t0)) = best_mixed {
        for _ in 0..REFINE_ITERS {
            let (np, nq) = cost.parts(&s)?;
            if np == 0.0 || nq == 0.0 {
                break;
            }
            let target = cost.stationary_fractions(&s, np, nq);
            let along = |tau: f64| -> Vec<f64> { s.iter().zip(&target).map(|(a, b)| (a + tau * (b - a)).clamp(0.0, 1.0)).collect() };
            let full = cost.total(&target)?;
            let (tau, new_val) = if full < val {
                (1.0, full)
            } else {
                golden_min(|tau| cost.total(&along(tau)))?
            };
            if !(new_val < val) {
                break;
            }
            let gain = (val - new_val) / val;
            s = along(tau);
            val = new_val;
            if gain < 1e-13 {
                break;
            }
        }
        if val < best_val {
            best_val = val;
            best_s = s;
            best_t = t0;
            best_kind = SplitKind::Balanced;
        }
    }
    let _ = best_val;

    let (v, w) = decompose(u, &best_s);
    let norm_value = luxemburg_raw(v.magnitude().values(), p.values(), &cost.weights)?
        + luxemburg_raw(w.magnitude().values(), q.values(), &cost.weights)?;
    let lower = lower_bound(m, p, q, vol, c)?;
    Ok(SumSpaceNorm {
        upper: norm_value,
        lower,
        best: SumSpaceDecomposition {
            v,
            w,
            threshold: best_t,
            kind: best_kind,
            norm_value,
        },
    })
}

/// Two-sided bound's left-hand side:
/// `max{ |u|_{p,Λ} / (1 + 2|Λ|^{1/p - 1/q}), c min{m, m^{q/p}} }` with
/// `Λ = {|u| > 1}` and `m = |u|_{q,Λᶜ}`. The exponents inside are evaluated
/// at whichever sample makes the bound smallest.
pub fn sum_space_lower_bound(u: &GridFunction, p: &ExponentField, q: &ExponentField, c: f64) -> Result<f64> {
    check_inputs(u, p, q)?;
    let mag = u.magnitude();
    lower_bound(mag.values(), p, q, u.grid().cell_volume(), c)
}

fn lower_bound(m: &[f64], p: &ExponentField, q: &ExponentField, vol: f64, c: f64) -> Result<f64> {
    let inside: Vec<f64> = m.iter().map(|x| if *x > 1.0 { vol } else { 0.0 }).collect();
    let outside: Vec<f64> = m.iter().map(|x| if *x > 1.0 { 0.0 } else { vol }).collect();
    let measure: f64 = inside.iter().sum();
    let first = if measure > 0.0 {
        let gaps = p.values().iter().zip(q.values()).map(|(a, b)| 1.0 / a - 1.0 / b);
        let (gmin, gmax) = gaps.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), g| (lo.min(g), hi.max(g)));
        let e = if measure >= 1.0 { gmax } else { gmin };
        luxemburg_raw(m, p.values(), &inside)? / (1.0 + 2.0 * measure.powf(e))
    } else {
        0.0
    };
    let small = luxemburg_raw(m, q.values(), &outside)?;
    let ratio_max = p.values().iter().zip(q.values()).map(|(a, b)| b / a).fold(0.0, f64::max);
    let second = if small >= 1.0 { small } else { small.powf(ratio_max) };
    Ok(first.max(c * second))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{Grid, Layout};

    fn setup(values: Vec<f64>) -> (GridFunction, ExponentField, ExponentField) {
        let g = Grid::new(1, 1.0, values.len() + 1).unwrap();
        let u = GridFunction::new(g, Layout::Cells, 1, values).unwrap();
        let p = ExponentField::constant(g, Layout::Cells, 2.0).unwrap();
        let q = ExponentField::constant(g, Layout::Cells, 3.0).unwrap();
        (u, p, q)
    }

    #[test]
    fn zero_field() {
        let (u, p, q) = setup(vec![0.0; 5]);
        let r = sum_space_norm(&u, &p, &q).unwrap();
        assert_eq!((r.upper, r.lower), (0.0, 0.0));
        assert!(r.best.v.is_zero() && r.best.w.is_zero());
    }

    #[test]
    fn small_fields_are_bounded_by_q_norm() {
        let (u, p, q) = setup(vec![0.3, -0.9, 0.5, 0.0, 1.0]);
        let r = sum_space_norm(&u, &p, &q).unwrap();
        let nq = crate::spaces::luxemburg_norm(&u, &q, None).unwrap();
        assert!(r.upper <= nq * (1.0 + 1e-12), "{} vs {nq}", r.upper);
        assert!(r.lower <= r.upper);
    }

    #[test]
    fn decomposition_is_exact() {
        let (u, p, q) = setup(vec![3.7, -0.1, 1e-300, 2e17, -5.5]);
        let r = sum_space_norm(&u, &p, &q).unwrap();
        for ((a, b), x) in r.best.v.values().iter().zip(r.best.w.values()).zip(u.values()) {
            assert_eq!(a + b, *x);
        }
        assert!(r.lower <= r.upper);
    }

    #[test]
    fn stationary_split_is_scale_covariant() {
        let (u, p, q) = setup(vec![0.4, 2.5, -1.3, 0.8, 6.0]);
        let a = sum_space_norm(&u, &p, &q).unwrap().upper;
        let b = sum_space_norm(&u.scale(3.0), &p, &q).unwrap().upper;
        assert!((b - 3.0 * a).abs() < 1e-8 * b, "{a} {b}");
    }
}
