use std::collections::VecDeque;
use std::time::Instant;

use super::{check_problem, RecoveryConfig, RecoveryResult};
use crate::error::{invalid, Result};
use crate::linalg::{least_squares, norm1, norm2, Cholesky, Matrix};

/// Entries below this fraction of the largest magnitude are dropped before debiasing.
const DEBIAS_THRESHOLD: f64 = 1e-6;

/// Basis pursuit `min ‖f‖₁ s.t. A f = y` by ADMM.
///
/// The `x`-update is the exact projection onto `{A f = y}` through a
/// Cholesky factor of `A Aᵀ`; the `z`-update is soft thresholding. The
/// penalty is rebalanced whenever primal and dual residuals drift apart by
/// more than 10×. `z` is returned, least-squares debiased on its support when
/// that does not hurt feasibility.
pub fn basis_pursuit(a: &Matrix, y: &[f64], cfg: &RecoveryConfig) -> Result<RecoveryResult> {
    let start = Instant::now();
    check_problem(a, y, "basis_pursuit")?;
    let (m, n) = (a.rows(), a.cols());
    let ynorm = norm2(y);
    if ynorm == 0.0 {
        return Ok(RecoveryResult { wall_time: start.elapsed(), ..RecoveryResult::zero(n, 0.0) });
    }
    let feas_target = cfg.bp_feas_tol * ynorm;

    if m >= n {
        // Equality constraint pins f when A has full column rank.
        if let Some(f) = least_squares(a, y) {
            return Ok(finish(a, y, f, 0, true, start));
        }
    }

    let chol = Cholesky::new(&a.gram_rows())
        .map_err(|_| invalid("basis pursuit needs A with full row rank"))?;
    let project = |v: &[f64]| -> Vec<f64> {
        let mut w = a.mul_vec(v);
        w.iter_mut().zip(y).for_each(|(wi, yi)| *wi -= yi);
        chol.solve_in_place(&mut w);
        let back = a.tr_mul_vec(&w);
        v.iter().zip(back).map(|(vi, bi)| vi - bi).collect()
    };

    let x0 = project(&vec![0.0; n]);
    let peak = x0.iter().fold(0.0f64, |s, v| s.max(v.abs()));
    let mut rho = 1.0 / (0.1 * peak.max(f64::MIN_POSITIVE));
    let mut z = x0;
    let mut u = vec![0.0; n];
    let mut objectives: VecDeque<f64> = VecDeque::with_capacity(cfg.bp_stagnation_window + 1);
    let mut best = (f64::INFINITY, z.clone());
    let mut converged = false;
    let mut iterations = 0;

    while iterations < cfg.bp_max_iter {
        iterations += 1;
        let v: Vec<f64> = z.iter().zip(&u).map(|(zi, ui)| zi - ui).collect();
        let x = project(&v);
        let thresh = 1.0 / rho;
        let mut dual_sq = 0.0;
        let mut primal_sq = 0.0;
        for i in 0..n {
            let s = x[i] + u[i];
            let zi = s.signum() * (s.abs() - thresh).max(0.0);
            dual_sq += (zi - z[i]) * (zi - z[i]);
            z[i] = zi;
            u[i] = s - zi;
            primal_sq += (x[i] - zi) * (x[i] - zi);
        }

        objectives.push_back(norm1(&z));
        if objectives.len() > cfg.bp_stagnation_window + 1 {
            objectives.pop_front();
        }

        if iterations % 10 == 0 {
            let (primal, dual) = (primal_sq.sqrt(), rho * dual_sq.sqrt());
            if primal > 10.0 * dual {
                rho *= 2.0;
                u.iter_mut().for_each(|v| *v *= 0.5);
            } else if dual > 10.0 * primal {
                rho *= 0.5;
                u.iter_mut().for_each(|v| *v *= 2.0);
            }

            let feas = residual_norm(a, y, &z);
            if feas < best.0 {
                best = (feas, z.clone());
            }
            let stagnant = objectives.len() > cfg.bp_stagnation_window && {
                let (old, new) = (objectives[0], *objectives.back().unwrap());
                (old - new).abs() <= cfg.bp_stagnation_tol * new.max(f64::MIN_POSITIVE)
            };
            if feas <= feas_target && stagnant {
                converged = true;
                break;
            }
        }
    }

    let z = if converged { z } else { best.1 };
    let peak = z.iter().fold(0.0f64, |s, v| s.max(v.abs()));
    let support: Vec<usize> = (0..n).filter(|&i| z[i].abs() > DEBIAS_THRESHOLD * peak).collect();
    let current = residual_norm(a, y, &z);
    let mut f = z;
    if !support.is_empty() && support.len() <= m {
        if let Some(coef) = least_squares(&a.select_columns(&support), y) {
            let mut cand = vec![0.0; n];
            for (&i, c) in support.iter().zip(coef) {
                cand[i] = c;
            }
            if residual_norm(a, y, &cand) <= current.max(feas_target) {
                f = cand;
            }
        }
    }
    if !converged {
        log::debug!("basis pursuit stopped at the {iterations}-iteration cap");
    }
    Ok(finish(a, y, f, iterations, converged, start))
}

fn residual_norm(a: &Matrix, y: &[f64], f: &[f64]) -> f64 {
    let r: Vec<f64> = a.mul_vec(f).iter().zip(y).map(|(p, q)| p - q).collect();
    norm2(&r)
}

fn finish(a: &Matrix, y: &[f64], f: Vec<f64>, iterations: usize, converged: bool, start: Instant) -> RecoveryResult {
    let residual = residual_norm(a, y, &f);
    let support = (0..f.len()).filter(|&i| f[i] != 0.0).collect();
    RecoveryResult {
        f_hat: f,
        support,
        iterations,
        residual_norm: residual,
        wall_time: start.elapsed(),
        converged,
        residual_history: vec![residual],
        skipped_columns: Vec::new(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_measurements() {
        let a = Matrix::from_fn(3, 6, |r, c| ((r * 7 + c) as f64).cos());
        let res = basis_pursuit(&a, &[0.0; 3], &RecoveryConfig::default()).unwrap();
        assert_eq!(res.f_hat, vec![0.0; 6]);
        assert!(res.converged);
    }

    #[test]
    fn identity_pins_solution() {
        let y = [0.5, -1.0, 2.0, 0.0];
        let res = basis_pursuit(&Matrix::identity(4), &y, &RecoveryConfig::default()).unwrap();
        for (a, b) in res.f_hat.iter().zip(y) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn iteration_cap_flags_non_convergence() {
        let mut g = crate::rng::GaussianStream::new(3);
        let a = Matrix::from_fn(8, 32, |_, _| g.next_gaussian());
        let y: Vec<f64> = (0..8).map(|i| (i as f64).cos()).collect();
        let cfg = RecoveryConfig { bp_max_iter: 20, ..RecoveryConfig::default() };
        let res = basis_pursuit(&a, &y, &cfg).unwrap();
        assert!(!res.converged);
        assert_eq!(res.iterations, 20);
    }
}
