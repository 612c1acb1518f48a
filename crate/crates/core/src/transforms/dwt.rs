//! Periodized orthonormal wavelet filter bank.
//!
//! Coefficient layout after `J` levels: `[a_J | d_J | d_{J-1} | … | d_1]`.
//! Periodization keeps each level orthonormal for every even length, so a
//! full `log2 N` decomposition is exact for any filter length.

use std::fmt;

use crate::error::{invalid, Error};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum WaveletFamily {
    Haar,
    /// Daubechies with two vanishing moments (4 taps).
    Daubechies4,
}

impl WaveletFamily {
    /// Orthonormal low-pass analysis taps `h`.
    pub fn lowpass(&self) -> Vec<f64> {
        match self {
            WaveletFamily::Haar => vec![std::f64::consts::FRAC_1_SQRT_2; 2],
            WaveletFamily::Daubechies4 => {
                let s3 = 3f64.sqrt();
                let d = 4.0 * 2f64.sqrt();
                vec![(1.0 + s3) / d, (3.0 + s3) / d, (3.0 - s3) / d, (1.0 - s3) / d]
            }
        }
    }

    /// Quadrature-mirror high-pass taps `g_k = (−1)^k h_{L−1−k}`.
    pub fn highpass(&self) -> Vec<f64> {
        let h = self.lowpass();
        let l = h.len();
        (0..l).map(|k| if k % 2 == 0 { h[l - 1 - k] } else { -h[l - 1 - k] }).collect()
    }
}

impl fmt::Display for WaveletFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            WaveletFamily::Haar => "haar",
            WaveletFamily::Daubechies4 => "db4",
        })
    }
}

impl std::str::FromStr for WaveletFamily {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self, Error> {
        match s {
            "haar" => Ok(WaveletFamily::Haar),
            "db4" => Ok(WaveletFamily::Daubechies4),
            _ => Err(invalid(format!("unknown wavelet family {s:?}"))),
        }
    }
}

#[derive(Debug, Clone)]
pub(super) struct Dwt {
    n: usize,
    levels: u32,
    h: Vec<f64>,
    g: Vec<f64>,
}

impl Dwt {
    pub(super) fn new(family: WaveletFamily, n: usize, levels: u32) -> Self {
        Self { n, levels, h: family.lowpass(), g: family.highpass() }
    }

    pub(super) fn forward(&self, x: &[f64]) -> Vec<f64> {
        let mut out = x.to_vec();
        let mut scratch = vec![0.0; self.n];
        let mut len = self.n;
        for _ in 0..self.levels {
            let half = len / 2;
            for i in 0..half {
                let (mut a, mut d) = (0.0, 0.0);
                for (k, (&hk, &gk)) in self.h.iter().zip(&self.g).enumerate() {
                    let s = out[(2 * i + k) % len];
                    a += hk * s;
                    d += gk * s;
                }
                scratch[i] = a;
                scratch[half + i] = d;
            }
            out[..len].copy_from_slice(&scratch[..len]);
            len = half;
        }
        out
    }

    pub(super) fn inverse(&self, c: &[f64]) -> Vec<f64> {
        let mut out = c.to_vec();
        let mut scratch = vec![0.0; self.n];
        let mut len = self.n >> (self.levels - 1);
        for _ in 0..self.levels {
            let half = len / 2;
            scratch[..len].iter_mut().for_each(|v| *v = 0.0);
            for i in 0..half {
                let (a, d) = (out[i], out[half + i]);
                for (k, (&hk, &gk)) in self.h.iter().zip(&self.g).enumerate() {
                    scratch[(2 * i + k) % len] += hk * a + gk * d;
                }
            }
            out[..len].copy_from_slice(&scratch[..len]);
            len *= 2;
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn filters_are_orthonormal() {
        for fam in [WaveletFamily::Haar, WaveletFamily::Daubechies4] {
            let h = fam.lowpass();
            let g = fam.highpass();
            let hh: f64 = h.iter().map(|v| v * v).sum();
            let hg: f64 = h.iter().zip(&g).map(|(a, b)| a * b).sum();
            assert!((hh - 1.0).abs() < 1e-15);
            assert!(hg.abs() < 1e-15);
            assert!((h.iter().sum::<f64>() - 2f64.sqrt()).abs() < 1e-15);
        }
    }

    #[test]
    fn haar_two_point_butterfly() {
        let d = Dwt::new(WaveletFamily::Haar, 2, 1);
        let c = d.forward(&[1.0, 3.0]);
        let r = std::f64::consts::FRAC_1_SQRT_2;
        assert!((c[0] - 4.0 * r).abs() < 1e-15 && (c[1] + 2.0 * r).abs() < 1e-15);
    }
}
