use std::time::Instant;

use super::{check_problem, RecoveryResult};
use crate::error::{invalid, Result};
use crate::linalg::{least_squares, norm2, Matrix};

pub const ORACLE_MAX_N: usize = 24;
pub const ORACLE_MAX_K: usize = 4;

/// A support is feasible when its least-squares residual is at most this fraction of `‖y‖₂`.
const FEASIBLE_REL: f64 = 1e-8;

struct Candidate {
    support: Vec<usize>,
    coef: Vec<f64>,
    residual: f64,
}

/// Lexicographic `r`-subsets of `0..n`.
fn for_each_subset(n: usize, r: usize, mut f: impl FnMut(&[usize])) {
    if r > n {
        return;
    }
    let mut idx: Vec<usize> = (0..r).collect();
    loop {
        f(&idx);
        let Some(i) = (0..r).rev().find(|&i| idx[i] != i + n - r) else { return };
        idx[i] += 1;
        for j in i + 1..r {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

fn guard(a: &Matrix, y: &[f64], k: usize) -> Result<()> {
    check_problem(a, y, "l0_oracle")?;
    if a.cols() > ORACLE_MAX_N || k > ORACLE_MAX_K {
        return Err(invalid(format!(
            "l0 oracle limited to N ≤ {ORACLE_MAX_N}, k ≤ {ORACLE_MAX_K} (got N={}, k={k})",
            a.cols()
        )));
    }
    Ok(())
}

fn candidates(a: &Matrix, y: &[f64], size: usize) -> Vec<Candidate> {
    let mut out = Vec::new();
    for_each_subset(a.cols(), size, |s| {
        if let Some(coef) = least_squares(&a.select_columns(s), y) {
            let fit = a.select_columns(s).mul_vec(&coef);
            let r: Vec<f64> = y.iter().zip(fit).map(|(p, q)| p - q).collect();
            out.push(Candidate { support: s.to_vec(), coef, residual: norm2(&r) });
        }
    });
    out
}

/// Every feasible support of the smallest feasible size `≤ k`, in lexicographic order.
pub fn l0_feasible_supports(a: &Matrix, y: &[f64], k: usize) -> Result<Vec<Vec<usize>>> {
    guard(a, y, k)?;
    let tol = FEASIBLE_REL * norm2(y);
    if norm2(y) == 0.0 {
        return Ok(vec![Vec::new()]);
    }
    for size in 1..=k {
        let feasible: Vec<Vec<usize>> = candidates(a, y, size)
            .into_iter()
            .filter(|c| c.residual <= tol)
            .map(|c| c.support)
            .collect();
        if !feasible.is_empty() {
            return Ok(feasible);
        }
    }
    Ok(Vec::new())
}

/// Exhaustive `min ‖f‖₀ s.t. A f = y` over supports of size `≤ k`.
///
/// Ties in size go to the smaller residual, then the lexicographically first
/// support. With no feasible support the best size-`k` fit is returned with
/// `converged = false`.
pub fn l0_oracle(a: &Matrix, y: &[f64], k: usize) -> Result<RecoveryResult> {
    let start = Instant::now();
    guard(a, y, k)?;
    let n = a.cols();
    let ynorm = norm2(y);
    if ynorm == 0.0 {
        return Ok(RecoveryResult { wall_time: start.elapsed(), ..RecoveryResult::zero(n, 0.0) });
    }
    let tol = FEASIBLE_REL * ynorm;
    let pick = |cands: Vec<Candidate>| {
        cands.into_iter().fold(None::<Candidate>, |best, c| match best {
            Some(b) if b.residual <= c.residual => Some(b),
            _ => Some(c),
        })
    };
    let mut last = None;
    let mut evaluated = 0;
    for size in 1..=k {
        let cands = candidates(a, y, size);
        evaluated += cands.len();
        let (feasible, rest): (Vec<_>, Vec<_>) = cands.into_iter().partition(|c| c.residual <= tol);
        if let Some(best) = pick(feasible) {
            return Ok(build(n, best, evaluated, true, start));
        }
        last = pick(rest);
    }
    match last {
        Some(best) => Ok(build(n, best, evaluated, false, start)),
        None => Ok(RecoveryResult { converged: false, ..RecoveryResult::zero(n, ynorm) }),
    }
}

fn build(n: usize, c: Candidate, evaluated: usize, feasible: bool, start: Instant) -> RecoveryResult {
    let mut f_hat = vec![0.0; n];
    for (&i, &v) in c.support.iter().zip(&c.coef) {
        f_hat[i] = v;
    }
    RecoveryResult {
        f_hat,
        support: c.support,
        iterations: evaluated,
        residual_norm: c.residual,
        wall_time: start.elapsed(),
        converged: feasible,
        residual_history: vec![c.residual],
        skipped_columns: Vec::new(),
    }
}
