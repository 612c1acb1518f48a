//! Sparse recovery of `f` from `y = A f`: orthogonal matching pursuit, basis
//! pursuit, and an exhaustive `ℓ0` oracle for small instances.

mod bp;
mod omp;
mod oracle;

use std::fmt;
use std::str::FromStr;
use std::time::Duration;

use crate::audio::Frame;
use crate::cs::{gen_measurement_matrix, sensing_operator_with, CsEncodedFrame};
use crate::error::{invalid, Error, Result};
use crate::linalg::Matrix;
use crate::transforms::Transform;

pub use bp::basis_pursuit;
pub use omp::omp;
pub use oracle::{l0_feasible_supports, l0_oracle, ORACLE_MAX_K, ORACLE_MAX_N};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RecoveryConfig {
    /// Target sparsity `K` (OMP iteration cap).
    pub sparsity_k: usize,
    /// OMP stops once `‖r‖₂` falls to this absolute value.
    pub residual_tol: f64,
    pub max_iter: usize,
    /// BP stops once `‖A f − y‖₂ ≤ bp_feas_tol · ‖y‖₂` and the objective stagnates.
    pub bp_feas_tol: f64,
    pub bp_max_iter: usize,
    /// Relative `‖f‖₁` change regarded as stagnation.
    pub bp_stagnation_tol: f64,
    /// Iterations over which stagnation is measured.
    pub bp_stagnation_window: usize,
}

impl Default for RecoveryConfig {
    fn default() -> Self {
        Self {
            sparsity_k: 1,
            residual_tol: 1e-10,
            max_iter: 100_000,
            bp_feas_tol: 1e-6,
            bp_max_iter: 20_000,
            bp_stagnation_tol: 1e-8,
            bp_stagnation_window: 50,
        }
    }
}

impl RecoveryConfig {
    pub fn with_sparsity(k: usize) -> Self {
        Self { sparsity_k: k, ..Self::default() }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RecoveryResult {
    pub f_hat: Vec<f64>,
    /// Chosen indices in selection order (OMP) or ascending (BP, oracle).
    pub support: Vec<usize>,
    pub iterations: usize,
    pub residual_norm: f64,
    pub wall_time: Duration,
    /// False when BP hit its iteration cap or the oracle found no feasible support.
    pub converged: bool,
    /// `‖r‖₂` after each OMP iteration, starting with `‖y‖₂`.
    pub residual_history: Vec<f64>,
    /// All-zero columns excluded from selection.
    pub skipped_columns: Vec<usize>,
}

impl RecoveryResult {
    pub(crate) fn zero(n: usize, residual: f64) -> Self {
        Self {
            f_hat: vec![0.0; n],
            support: Vec::new(),
            iterations: 0,
            residual_norm: residual,
            wall_time: Duration::ZERO,
            converged: true,
            residual_history: vec![residual],
            skipped_columns: Vec::new(),
        }
    }

    pub fn sorted_support(&self) -> Vec<usize> {
        let mut s = self.support.clone();
        s.sort_unstable();
        s
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Solver {
    Omp,
    Bp,
}

impl fmt::Display for Solver {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Solver::Omp => "OMP",
            Solver::Bp => "BP",
        })
    }
}

impl FromStr for Solver {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "omp" => Ok(Solver::Omp),
            "bp" | "cvx" => Ok(Solver::Bp),
            _ => Err(invalid(format!("unknown solver {s:?}"))),
        }
    }
}

pub(crate) fn check_problem(a: &Matrix, y: &[f64], who: &'static str) -> Result<()> {
    if y.len() != a.rows() {
        return Err(Error::DimensionMismatch { expected: a.rows(), actual: y.len() });
    }
    if !a.is_finite() || y.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite(who));
    }
    Ok(())
}

pub fn solve(solver: Solver, a: &Matrix, y: &[f64], cfg: &RecoveryConfig) -> Result<RecoveryResult> {
    match solver {
        Solver::Omp => omp(a, y, cfg),
        Solver::Bp => basis_pursuit(a, y, cfg),
    }
}

/// OMP sparsity target for `M` measurements: `K = max(1, M/4)`.
pub fn four_to_one_sparsity(m: usize) -> usize {
    (m / 4).max(1)
}

/// Regenerates `Φ`, builds `A = Φ Ψ`, recovers `f`, and synthesizes the frame.
pub fn cs_decode(enc: &CsEncodedFrame, solver: Solver, cfg: &RecoveryConfig) -> Result<Frame> {
    let t = Transform::new(enc.basis, enc.n)?;
    cs_decode_with(enc, &t, solver, cfg).map(|(frame, _)| frame)
}

/// [`cs_decode`] with a pre-planned transform, also returning the solver result.
pub fn cs_decode_with(
    enc: &CsEncodedFrame,
    t: &Transform,
    solver: Solver,
    cfg: &RecoveryConfig,
) -> Result<(Frame, RecoveryResult)> {
    if t.basis() != enc.basis || t.len() != enc.n {
        return Err(invalid("transform plan does not match encoded frame"));
    }
    let a = sensing_operator_with(&gen_measurement_matrix(enc.seed, enc.m(), enc.n)?, t)?;
    let y = enc.decoder_measurements();
    let result = solve(solver, &a, &y, cfg)?;
    let samples = t.inverse_stacked(&result.f_hat)?;
    Ok((Frame::new(enc.frame_index, samples), result))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cs::{cs_encode, CsEncoder};
    use crate::metrics::similarity;
    use crate::transforms::BasisKind;

    #[test]
    fn solver_names() {
        assert_eq!("omp".parse::<Solver>().unwrap(), Solver::Omp);
        assert_eq!("BP".parse::<Solver>().unwrap(), Solver::Bp);
        assert!("cosamp".parse::<Solver>().is_err());
    }

    #[test]
    fn decode_zero_frame() {
        let enc = CsEncoder { basis: BasisKind::Dct, n: 64, m: 32, master_seed: 4, quant_bits: Some(16) }
            .encode(&Frame::new(0, vec![0.0; 64]))
            .unwrap();
        for solver in [Solver::Omp, Solver::Bp] {
            let f = cs_decode(&enc, solver, &RecoveryConfig::with_sparsity(8)).unwrap();
            assert!(f.samples.iter().all(|&v| v == 0.0));
        }
    }

    #[test]
    fn decode_nearly_square_one_sparse() {
        let n = 64;
        for basis in [BasisKind::Dct, BasisKind::haar(), BasisKind::Dft] {
            let t = Transform::new(basis, n).unwrap();
            let mut f = vec![0.0; basis.stacked_len(n)];
            f[5] = 0.7;
            let x = t.inverse_stacked(&f).unwrap();
            let phi = gen_measurement_matrix(77, n - 1, n).unwrap();
            let enc = cs_encode(&Frame::new(0, x.clone()), &phi, basis).unwrap();
            let out = cs_decode(&enc, Solver::Omp, &RecoveryConfig::with_sparsity(4)).unwrap();
            let err = x.iter().zip(&out.samples).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            assert!(err < 1e-6, "{basis}: {err}");
        }
    }

    #[test]
    fn decode_exactly_sparse_dct_frame() {
        let (n, m, k) = (1024, 512, 32);
        let t = Transform::new(BasisKind::Dct, n).unwrap();
        let mut g = crate::rng::GaussianStream::new(99);
        let mut f = vec![0.0; n];
        let mut placed = 0;
        while placed < k {
            let i = (g.next_u64() % n as u64) as usize;
            if f[i] == 0.0 {
                f[i] = g.next_gaussian() * 0.05;
                placed += 1;
            }
        }
        let x = t.inverse(&crate::transforms::Coefficients::Real(f)).unwrap();
        let enc = CsEncoder { basis: BasisKind::Dct, n, m, master_seed: 1, quant_bits: None }
            .encode(&Frame::new(0, x.clone()))
            .unwrap();
        let out = cs_decode(&enc, Solver::Omp, &RecoveryConfig::with_sparsity(four_to_one_sparsity(m))).unwrap();
        assert!(similarity(&x, &out.samples).unwrap() < 1e-8);
    }
}
