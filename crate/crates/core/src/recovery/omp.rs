use std::time::Instant;

use super::{check_problem, RecoveryConfig, RecoveryResult};
use crate::error::{invalid, Result};
use crate::linalg::{axpy, dot, norm2, Matrix};

/// Orthogonal matching pursuit.
///
/// Columns are compared after normalization to unit norm; the returned
/// coefficients are in the caller's original column scaling. The selected
/// columns are kept as an orthonormal basis `Q` with triangular `R`,
/// extended by one Gram–Schmidt step (with one reorthogonalization pass) per
/// iteration, so iteration `t` costs `O(tM)` beyond the `O(MN)` correlation.
pub fn omp(a: &Matrix, y: &[f64], cfg: &RecoveryConfig) -> Result<RecoveryResult> {
    let start = Instant::now();
    check_problem(a, y, "omp")?;
    let (m, n) = (a.rows(), a.cols());
    let k = cfg.sparsity_k;
    if k == 0 {
        return Err(invalid("sparsity K must be at least 1"));
    }
    if k > m {
        return Err(invalid(format!("sparsity K={k} exceeds measurement count M={m}")));
    }
    let k = k.min(n);

    let norms = a.column_norms();
    let scale = norms.iter().fold(0.0f64, |s, &v| s.max(v));
    let mut available: Vec<bool> = norms.iter().map(|&c| c > 1e-14 * scale.max(f64::MIN_POSITIVE)).collect();
    let skipped: Vec<usize> = (0..n).filter(|&j| !available[j]).collect();
    if !skipped.is_empty() {
        log::debug!("omp: skipping {} zero columns", skipped.len());
    }

    let mut residual = y.to_vec();
    let mut rnorm = norm2(&residual);
    let mut history = vec![rnorm];
    let mut support: Vec<usize> = Vec::with_capacity(k);
    let mut q_cols: Vec<Vec<f64>> = Vec::with_capacity(k);
    // Column j of R holds j+1 entries.
    let mut r_cols: Vec<Vec<f64>> = Vec::with_capacity(k);
    let mut qty: Vec<f64> = Vec::with_capacity(k);

    while support.len() < k && support.len() < cfg.max_iter && rnorm > cfg.residual_tol {
        let corr = a.tr_mul_vec(&residual);
        let mut best: Option<(usize, f64)> = None;
        for j in 0..n {
            if !available[j] {
                continue;
            }
            let c = corr[j].abs() / norms[j];
            // strict comparison: lowest index wins ties
            if best.is_none_or(|(_, b)| c > b) {
                best = Some((j, c));
            }
        }
        let Some((j, c)) = best else { break };
        if c == 0.0 {
            break;
        }

        let mut w: Vec<f64> = a.column(j).iter().map(|v| v / norms[j]).collect();
        let mut coeffs = vec![0.0; q_cols.len()];
        for _ in 0..2 {
            for (i, q) in q_cols.iter().enumerate() {
                let p = dot(q, &w);
                coeffs[i] += p;
                axpy(-p, q, &mut w);
            }
        }
        let rjj = norm2(&w);
        available[j] = false;
        if rjj <= 1e-10 {
            // numerically inside span(Q); contributes nothing new
            continue;
        }
        w.iter_mut().for_each(|v| *v /= rjj);
        let proj = dot(&w, &residual);
        axpy(-proj, &w, &mut residual);
        qty.push(dot(&w, y));
        coeffs.push(rjj);
        r_cols.push(coeffs);
        q_cols.push(w);
        support.push(j);
        rnorm = norm2(&residual);
        history.push(rnorm);
    }

    // Back-substitution R z = Qᵀ y.
    let t = support.len();
    let mut z = vec![0.0; t];
    for i in (0..t).rev() {
        let mut s = qty[i];
        for c in i + 1..t {
            s -= r_cols[c][i] * z[c];
        }
        z[i] = s / r_cols[i][i];
    }
    let mut f_hat = vec![0.0; n];
    for (&j, &zi) in support.iter().zip(&z) {
        f_hat[j] = zi / norms[j];
    }

    Ok(RecoveryResult {
        f_hat,
        iterations: t,
        support,
        residual_norm: rnorm,
        wall_time: start.elapsed(),
        converged: true,
        residual_history: history,
        skipped_columns: skipped,
    })
}
