//! Reference computations shared by the integration tests. They avoid the
//! library's numerics on purpose: plain bisection, plain sums, brute force.

#![allow(dead_code)]

/// `inf{λ > 0 : Σ w_i (m_i/λ)^{p_i} <= 1}`: closed form for a constant
/// exponent, bisection in `ln λ` otherwise.
pub fn luxemburg_bisect(m: &[f64], p: &[f64], w: &[f64]) -> f64 {
    if m.iter().all(|x| *x == 0.0) {
        return 0.0;
    }
    if p.iter().all(|e| *e == p[0]) {
        let s: f64 = m.iter().zip(w).map(|(x, wi)| wi * x.powf(p[0])).sum();
        return s.powf(1.0 / p[0]);
    }
    let rho = |lam: f64| -> f64 { m.iter().zip(p).zip(w).map(|((x, e), wi)| wi * (x / lam).powf(*e)).sum() };
    let (mut lo, mut hi) = (1e-300f64.ln(), 1e300f64.ln());
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if rho(mid.exp()) > 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-15 {
            break;
        }
    }
    (0.5 * (lo + hi)).exp()
}

fn split_cost(s: &[f64], m: &[f64], p: &[f64], q: &[f64], w: &[f64]) -> f64 {
    let v: Vec<f64> = s.iter().zip(m).map(|(a, b)| a * b).collect();
    let r: Vec<f64> = s.iter().zip(m).map(|(a, b)| (1.0 - a) * b).collect();
    luxemburg_bisect(&v, p, w) + luxemburg_bisect(&r, q, w)
}

/// Golden-section minimum of `f` on `[a, b]`, also trying both ends.
fn golden_min(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> (f64, f64) {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let (a0, b0) = (a, b);
    let mut x1 = b - g * (b - a);
    let mut x2 = a + g * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    for _ in 0..60 {
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - g * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + g * (b - a);
            f2 = f(x2);
        }
    }
    let mut best = if f1 <= f2 { (x1, f1) } else { (x2, f2) };
    for t in [a0, b0] {
        let c = f(t);
        if c < best.1 {
            best = (t, c);
        }
    }
    best
}

/// Line search from `s` along `d`, kept inside `[0, 1]^n`.
fn search(s: &mut [f64], d: &[f64], cur: &mut f64, cost: &impl Fn(&[f64]) -> f64) {
    let (mut lo, mut hi) = (f64::NEG_INFINITY, f64::INFINITY);
    for (si, di) in s.iter().zip(d) {
        if *di > 0.0 {
            lo = lo.max(-si / di);
            hi = hi.min((1.0 - si) / di);
        } else if *di < 0.0 {
            lo = lo.max((1.0 - si) / di);
            hi = hi.min(-si / di);
        }
    }
    if !(hi > lo) {
        return;
    }
    let at = |t: f64| -> Vec<f64> { s.iter().zip(d).map(|(a, b)| (a + t * b).clamp(0.0, 1.0)).collect() };
    let (t, c) = golden_min(|t| cost(&at(t)), lo, hi);
    if c < *cur {
        *cur = c;
        s.copy_from_slice(&at(t));
    }
}

/// `inf |v|_p + |u - v|_q` over `v = s u`, `s ∈ [0, 1]^n`. The cost is
/// convex in `s` but has kinks where `v` or `u - v` vanishes, so coordinate
/// sweeps alternate with line searches along random directions, from several
/// starts, until a full round gains nothing.
pub fn sum_space_brute(m: &[f64], p: &[f64], q: &[f64], w: &[f64]) -> f64 {
    let n = m.len();
    let cost = |s: &[f64]| split_cost(s, m, p, q, w);
    // a fixed small LCG keeps the search directions reproducible
    let mut state: u64 = 0x9e37_79b9_7f4a_7c15;
    let mut uniform = move || {
        state = state
            .wrapping_mul(6_364_136_223_846_793_005)
            .wrapping_add(1_442_695_040_888_963_407);
        (state >> 11) as f64 / (1u64 << 53) as f64 * 2.0 - 1.0
    };
    let mut best = f64::INFINITY;
    let starts: Vec<Vec<f64>> = vec![
        vec![0.0; n],
        vec![1.0; n],
        vec![0.5; n],
        (0..n).map(|i| if m[i] > 1.0 { 1.0 } else { 0.0 }).collect(),
    ];
    for mut s in starts {
        let mut cur = cost(&s);
        for _ in 0..100 {
            let before = cur;
            for i in 0..n {
                let mut d = vec![0.0; n];
                d[i] = 1.0;
                search(&mut s, &d, &mut cur, &cost);
            }
            for _ in 0..4 * n {
                let d: Vec<f64> = (0..n).map(|_| uniform()).collect();
                search(&mut s, &d, &mut cur, &cost);
            }
            if before - cur <= 1e-15 * before {
                break;
            }
        }
        best = best.min(cur);
    }
    best
}
