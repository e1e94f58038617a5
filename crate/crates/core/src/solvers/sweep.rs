use rand::Rng as _;
use serde::{Deserialize, Serialize};

use super::{default_seed, far_point, minimize, mountain_pass, SolverOptions, SolverReport, Status};
use crate::error::{Error, Result};
use crate::functional::{energy, residual, ProblemSpec};
use crate::grid::{GridFunction, Layout};
use crate::operator::Truncation;
use crate::random::{bumps, seeded};
use crate::spaces::{luxemburg_norm, x_norm};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sign {
    Positive,
    Negative,
}

impl Sign {
    fn factor(self) -> f64 {
        match self {
            Sign::Positive => 1.0,
            Sign::Negative => -1.0,
        }
    }

    fn truncation(self) -> Truncation {
        match self {
            Sign::Positive => Truncation::Positive,
            Sign::Negative => Truncation::Negative,
        }
    }
}

const SIGN_TOL: f64 = 1e-12;

/// Positive- and negative-energy solutions of the truncated problem.
#[derive(Debug, Clone, PartialEq)]
pub struct SignDefiniteReport {
    pub sign: Sign,
    pub mountain_pass: SolverReport,
    pub small_ball: SolverReport,
    /// Radius of the energy-space ball the small solution must stay in.
    pub ball_radius: f64,
    /// Energy-space norm of the small solution.
    pub small_norm: f64,
}

fn sign_ok(u: &GridFunction, sign: Sign) -> bool {
    match sign {
        Sign::Positive => u.values().iter().all(|x| *x >= -SIGN_TOL),
        Sign::Negative => u.values().iter().all(|x| *x <= SIGN_TOL),
    }
}

fn enforce_sign(rep: &mut SolverReport, sign: Sign) {
    if rep.converged() && !sign_ok(&rep.solution, sign) {
        rep.status = Status::SignViolation;
        rep.message = format!("solution has nodes of the wrong sign beyond {SIGN_TOL:e}");
    }
}

/// Solves with the reaction term truncated to one sign: a mountain-pass
/// solution with positive energy and a minimizer inside a small ball around
/// the origin, both checked for sign.
///
/// The ball radius is half the energy-space norm of the mountain-pass
/// solution (or of the far point when that solve fails). Descent starts from
/// the most negative of `Φ(2^{-k} seed)` and is monotone, so it cannot cross
/// the sphere where `Φ > 0`; whether it stayed inside is verified afterwards.
pub fn solve_sign_definite(problem: &ProblemSpec, sign: Sign, opts: &SolverOptions) -> Result<SignDefiniteReport> {
    let tp = problem.with_truncation(sign.truncation())?;
    let seed = default_seed(&tp)?.scale(sign.factor());
    let far = far_point(&tp, &seed, opts)?;
    let mut mp = mountain_pass(&tp, &far, opts.path_nodes, opts)?;
    enforce_sign(&mut mp, sign);
    let ball_radius = 0.5 * x_norm(if mp.converged() { &mp.solution } else { &far }, &tp)?;

    let mut start = seed.scale(0.5);
    let mut best = energy(&start, &tp)?.total;
    for k in 2..=40 {
        let cand = seed.scale(0.5f64.powi(k));
        let e = energy(&cand, &tp)?.total;
        if e < best {
            best = e;
            start = cand;
        }
    }
    // the small solution can sit below the absolute tolerance from the
    // start, so ask for three orders of magnitude below where it begins
    let start_residual = residual(&start, &tp)?.l2_norm();
    let small_opts = SolverOptions {
        tol: opts.tol.min(1e-3 * start_residual).max(f64::MIN_POSITIVE),
        ..opts.clone()
    };
    let mut small = minimize(&tp, &start, &small_opts)?;
    enforce_sign(&mut small, sign);
    let small_norm = x_norm(&small.solution, &tp)?;
    if small.converged() && small_norm >= ball_radius {
        small.status = Status::GeometryError;
        small.message = format!("descent left the ball of radius {ball_radius:.4e}");
    }
    Ok(SignDefiniteReport {
        sign,
        mountain_pass: mp,
        small_ball: small,
        ball_radius,
        small_norm,
    })
}

/// 64-bit FNV-1a over the bit patterns of the values.
pub fn field_hash(u: &GridFunction) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for v in u.values() {
        for b in v.to_bits().to_le_bytes() {
            h ^= b as u64;
            h = h.wrapping_mul(0x0000_0100_0000_01b3);
        }
    }
    h
}

fn same_solution(a: &GridFunction, b: &GridFunction, problem: &ProblemSpec, tol: f64) -> Result<bool> {
    let d = a.sub(b)?;
    if d.is_zero() {
        return Ok(true);
    }
    // |d|_α is one of the two terms of the energy-space norm, so it already
    // separates most pairs without the sum-space part
    if luxemburg_norm(&d, problem.alpha(), None)? > tol {
        return Ok(false);
    }
    Ok(x_norm(&d, problem)? <= tol)
}

/// Descent and mountain-pass solves from `n_starts` random seeds and their
/// negatives. Converged results are deduplicated by energy-space distance
/// and ordered by energy, ties broken by [`field_hash`].
///
/// This is a finite search: it finds what its seeds lead to and nothing
/// guarantees it finds every solution.
pub fn multi_solution_sweep(problem: &ProblemSpec, n_starts: usize, seed: u64, opts: &SolverOptions) -> Result<Vec<SolverReport>> {
    if n_starts < 2 {
        return Err(Error::InvalidArgument(format!("sweep needs n_starts >= 2, got {n_starts}")));
    }
    problem.validation().ensure_valid()?;
    let mut rng = seeded(seed);
    let mut starts = Vec::with_capacity(2 * n_starts);
    for _ in 0..n_starts {
        let count = rng.gen_range(1..=3);
        let raw = bumps(&mut rng, problem.grid(), Layout::Interior, count);
        let amp = rng.gen_range(0.5..2.0);
        let peak = raw.max_abs();
        if peak > 0.0 {
            let s = raw.scale(amp / peak);
            let m = s.scale(-1.0);
            starts.push(s);
            starts.push(m);
        }
    }
    let solve = |start: &GridFunction| -> Result<Vec<SolverReport>> {
        let mut out = vec![minimize(problem, start, opts)?];
        match far_point(problem, start, opts) {
            Ok(far) => out.push(mountain_pass(problem, &far, opts.path_nodes, opts)?),
            Err(Error::Geometry(_)) => {}
            Err(e) => return Err(e),
        }
        Ok(out)
    };
    // independent solves in parallel; merged in start order, so the result
    // does not depend on the thread count
    let threads = std::thread::available_parallelism().map_or(1, |n| n.get()).min(starts.len()).max(1);
    let chunk = starts.len().div_ceil(threads);
    let results: Vec<Result<Vec<SolverReport>>> = std::thread::scope(|scope| {
        let handles: Vec<_> = starts
            .chunks(chunk)
            .map(|part| scope.spawn(move || part.iter().map(solve).collect::<Vec<_>>()))
            .collect();
        handles.into_iter().flat_map(|h| h.join().expect("sweep worker panicked")).collect()
    });
    let mut found: Vec<SolverReport> = Vec::new();
    for reports in results {
        for c in reports?.into_iter().filter(SolverReport::converged) {
            let mut dup = false;
            for f in &found {
                if same_solution(&c.solution, &f.solution, problem, opts.dedup_tol)? {
                    dup = true;
                    break;
                }
            }
            if !dup {
                found.push(c);
            }
        }
    }
    found.sort_by(|a, b| {
        a.energy
            .total
            .total_cmp(&b.energy.total)
            .then(field_hash(&a.solution).cmp(&field_hash(&b.solution)))
    });
    Ok(found)
}
