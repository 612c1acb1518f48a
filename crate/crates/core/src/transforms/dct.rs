//! Orthonormal DCT-II / DCT-III through one complex FFT of length N
//! (Makhoul's even/odd reordering).

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

#[derive(Clone)]
pub(super) struct Dct {
    n: usize,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
    /// `e^{-iπk/(2N)}`
    twiddle: Vec<Complex64>,
}

impl Dct {
    pub(super) fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        let twiddle = (0..n)
            .map(|k| Complex64::from_polar(1.0, -PI * k as f64 / (2 * n) as f64))
            .collect();
        Self { n, fwd: planner.plan_fft_forward(n), inv: planner.plan_fft_inverse(n), twiddle }
    }

    fn scale(&self, k: usize) -> f64 {
        let n = self.n as f64;
        if k == 0 {
            (1.0 / n).sqrt()
        } else {
            (2.0 / n).sqrt()
        }
    }

    pub(super) fn forward(&self, x: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut v = vec![Complex64::new(0.0, 0.0); n];
        for k in 0..n / 2 {
            v[k].re = x[2 * k];
            v[n - 1 - k].re = x[2 * k + 1];
        }
        self.fwd.process(&mut v);
        (0..n).map(|k| (self.twiddle[k] * v[k]).re * self.scale(k)).collect()
    }

    pub(super) fn inverse(&self, c: &[f64]) -> Vec<f64> {
        let n = self.n;
        let unscaled: Vec<f64> = (0..n).map(|k| c[k] / self.scale(k)).collect();
        let mut v: Vec<Complex64> = (0..n)
            .map(|k| {
                let mirror = if k == 0 { 0.0 } else { unscaled[n - k] };
                self.twiddle[k].conj() * Complex64::new(unscaled[k], -mirror)
            })
            .collect();
        self.inv.process(&mut v);
        let inv_n = 1.0 / n as f64;
        let mut x = vec![0.0; n];
        for k in 0..n / 2 {
            x[2 * k] = v[k].re * inv_n;
            x[2 * k + 1] = v[n - 1 - k].re * inv_n;
        }
        x
    }
}
