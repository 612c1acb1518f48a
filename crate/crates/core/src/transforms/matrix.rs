//! Dense basis matrices `Ψ` built from closed forms, independently of the
//! fast transforms.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::BasisKind;
use crate::error::{invalid, Result};
use crate::linalg::Matrix;

/// Largest `N` for which a dense `N × N` basis is materialized.
pub const MAX_DENSE_BASIS: usize = 8192;

#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn get(&self, r: usize, c: usize) -> Complex64 {
        self.data[r * self.cols + c]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum BasisMatrix {
    Real(Matrix),
    Complex(ComplexMatrix),
}

impl BasisMatrix {
    /// `max |Ψᴴ Ψ − I|`.
    pub fn orthonormality_error(&self) -> f64 {
        match self {
            BasisMatrix::Real(m) => {
                let g = m.transpose().mul(m);
                g.max_abs_diff(&Matrix::identity(m.cols()))
            }
            BasisMatrix::Complex(m) => {
                let n = m.cols;
                let mut worst: f64 = 0.0;
                for i in 0..n {
                    for j in 0..n {
                        let mut s = Complex64::new(0.0, 0.0);
                        for r in 0..m.rows {
                            s += m.get(r, i).conj() * m.get(r, j);
                        }
                        let target = if i == j { 1.0 } else { 0.0 };
                        worst = worst.max((s - target).norm());
                    }
                }
                worst
            }
        }
    }
}

/// Explicit `Ψ` whose columns are the synthesis basis functions.
pub fn basis_matrix(basis: BasisKind, n: usize) -> Result<BasisMatrix> {
    if n < 2 || !n.is_power_of_two() {
        return Err(invalid(format!("basis size {n} must be a power of two ≥ 2")));
    }
    if n > MAX_DENSE_BASIS {
        return Err(invalid(format!("basis size {n} exceeds dense limit {MAX_DENSE_BASIS}")));
    }
    Ok(match basis {
        BasisKind::Dct => BasisMatrix::Real(Matrix::from_fn(n, n, |row, k| {
            let s = if k == 0 { (1.0 / n as f64).sqrt() } else { (2.0 / n as f64).sqrt() };
            s * (PI * (2 * row + 1) as f64 * k as f64 / (2 * n) as f64).cos()
        })),
        BasisKind::Dft => {
            let s = 1.0 / (n as f64).sqrt();
            let data = (0..n * n)
                .map(|idx| {
                    let (row, k) = (idx / n, idx % n);
                    // reduce the phase index first to keep the angle small
                    let p = (row * k) % n;
                    Complex64::from_polar(s, 2.0 * PI * p as f64 / n as f64)
                })
                .collect();
            BasisMatrix::Complex(ComplexMatrix { rows: n, cols: n, data })
        }
        BasisKind::Dwt { family, .. } => {
            let levels = basis.dwt_levels(n)?.expect("dwt levels");
            let h = family.lowpass();
            let g = family.highpass();
            // Analysis W = W_J ⋯ W_1, then Ψ = Wᵀ.
            let mut w = Matrix::identity(n);
            let mut len = n;
            for _ in 0..levels {
                let half = len / 2;
                let mut level = Matrix::identity(n);
                for i in 0..len {
                    level.row_mut(i).iter_mut().for_each(|v| *v = 0.0);
                }
                for i in 0..half {
                    for k in 0..h.len() {
                        let col = (2 * i + k) % len;
                        level[(i, col)] += h[k];
                        level[(half + i, col)] += g[k];
                    }
                }
                w = level.mul(&w);
                len = half;
            }
            BasisMatrix::Real(w.transpose())
        }
    })
}

/// Real `N × stacked_len` synthesis matrix: `Ψ` itself for real bases, and
/// `[Re Ψ, −Im Ψ]` for the DFT so that `x = Ψ_s s` on stacked coefficients.
pub fn stacked_basis_matrix(basis: BasisKind, n: usize) -> Result<Matrix> {
    Ok(match basis_matrix(basis, n)? {
        BasisMatrix::Real(m) => m,
        BasisMatrix::Complex(c) => Matrix::from_fn(n, 2 * n, |r, k| {
            if k < n {
                c.get(r, k).re
            } else {
                -c.get(r, k - n).im
            }
        }),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_point_dct_and_haar_agree() {
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let expect = Matrix::from_row_major(2, 2, vec![r, r, r, -r]).unwrap();
        let BasisMatrix::Real(dct) = basis_matrix(BasisKind::Dct, 2).unwrap() else { panic!() };
        let BasisMatrix::Real(haar) = basis_matrix(BasisKind::haar(), 2).unwrap() else { panic!() };
        assert!(dct.max_abs_diff(&expect) < 1e-15);
        assert!(haar.max_abs_diff(&expect) < 1e-15);
    }

    #[test]
    fn matrices_are_orthonormal() {
        for b in [BasisKind::Dct, BasisKind::Dft, BasisKind::haar(), BasisKind::db4()] {
            for n in [2, 8, 64] {
                let err = basis_matrix(b, n).unwrap().orthonormality_error();
                assert!(err < 1e-9, "{b} n={n} err={err}");
            }
        }
    }

    #[test]
    fn dense_guard() {
        assert!(basis_matrix(BasisKind::Dct, 16384).is_err());
        assert!(basis_matrix(BasisKind::Dct, 12).is_err());
    }
}
