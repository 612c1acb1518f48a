//! Compressed-sensing encoder: seeded Gaussian measurement matrices,
//! `y = Φ x`, the combined operator `A = Φ Ψ`, and measurement quantization.

use crate::audio::Frame;
use crate::error::{invalid, Error, Result};
use crate::linalg::Matrix;
use crate::rng::GaussianStream;
use crate::transforms::{stacked_basis_matrix, BasisKind, Transform};

/// Bits per quantized measurement used for bit-budget accounting.
pub const DEFAULT_MEASUREMENT_BITS: u8 = 16;

/// `Φ ∈ ℝ^{M×N}` with i.i.d. `N(0, 1/M)` entries, regenerable from its seed.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementMatrix {
    seed: u64,
    entries: Matrix,
}

impl MeasurementMatrix {
    /// Wraps an explicit matrix (fixtures and experiments); the seed is recorded as given.
    pub fn from_entries(seed: u64, entries: Matrix) -> Self {
        Self { seed, entries }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn m(&self) -> usize {
        self.entries.rows()
    }

    pub fn n(&self) -> usize {
        self.entries.cols()
    }

    pub fn entries(&self) -> &Matrix {
        &self.entries
    }
}

/// Entries are drawn row-major from one Gaussian stream, so the matrix for
/// `m` rows is a prefix of the matrix for any larger `m'` up to the `1/√m` scale.
pub fn gen_measurement_matrix(seed: u64, m: usize, n: usize) -> Result<MeasurementMatrix> {
    if m == 0 {
        return Err(invalid("measurement count must be positive"));
    }
    if m >= n {
        return Err(invalid(format!("measurement count {m} must be below frame length {n}")));
    }
    let mut g = GaussianStream::new(seed);
    let s = 1.0 / (m as f64).sqrt();
    let entries = Matrix::from_fn(m, n, |_, _| g.next_gaussian() * s);
    Ok(MeasurementMatrix { seed, entries })
}

/// Per-frame seed; frames decode independently.
pub fn frame_seed(master: u64, frame_index: usize) -> u64 {
    master ^ frame_index as u64
}

/// `M = round((1 − C/R) · N)` with C/R the fraction of samples removed.
pub fn measurement_count(cr: f64, n: usize) -> Result<usize> {
    if !(cr > 0.0 && cr < 1.0) {
        return Err(invalid(format!("compression ratio {cr} must lie in (0, 1)")));
    }
    let m = ((1.0 - cr) * n as f64).round() as usize;
    if m == 0 || m >= n {
        return Err(invalid(format!("C/R {cr} gives M={m} for N={n}")));
    }
    Ok(m)
}

/// Uniform mid-rise quantizer output for one frame.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantizedMeasurements {
    pub bits: u8,
    /// `max |y|`; zero marks an all-zero vector.
    pub scale: f64,
    pub codes: Vec<i32>,
}

impl QuantizedMeasurements {
    pub fn step(&self) -> f64 {
        2.0 * self.scale / 2f64.powi(self.bits as i32)
    }

    pub fn dequantize(&self) -> Vec<f64> {
        if self.scale == 0.0 {
            return vec![0.0; self.codes.len()];
        }
        let step = self.step();
        self.codes.iter().map(|&q| (q as f64 + 0.5) * step).collect()
    }

    /// Bytes per serialized code word.
    pub fn word_bytes(&self) -> usize {
        (self.bits as usize).div_ceil(8)
    }
}

pub fn quantize_measurements(y: &[f64], bits: u8) -> Result<QuantizedMeasurements> {
    if !(8..=32).contains(&bits) {
        return Err(invalid(format!("quantizer bits {bits} outside [8, 32]")));
    }
    if y.is_empty() {
        return Err(invalid("cannot quantize an empty measurement vector"));
    }
    if y.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("quantize_measurements"));
    }
    let scale = y.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if scale == 0.0 {
        return Ok(QuantizedMeasurements { bits, scale, codes: vec![0; y.len()] });
    }
    let levels = 2f64.powi(bits as i32);
    let step = 2.0 * scale / levels;
    let (lo, hi) = (-levels / 2.0, levels / 2.0 - 1.0);
    let codes = y.iter().map(|&v| (v / step).floor().clamp(lo, hi) as i32).collect();
    Ok(QuantizedMeasurements { bits, scale, codes })
}

/// One frame's measurements and the metadata needed to rebuild `A`.
#[derive(Debug, Clone, PartialEq)]
pub struct CsEncodedFrame {
    pub frame_index: usize,
    pub n: usize,
    pub basis: BasisKind,
    pub seed: u64,
    /// Full-precision `y = Φ x`; after deserialization this holds the dequantized values.
    pub measurements: Vec<f64>,
    pub quant: Option<QuantizedMeasurements>,
}

impl CsEncodedFrame {
    pub fn m(&self) -> usize {
        self.measurements.len()
    }

    /// What a decoder sees: dequantized codes when quantized.
    pub fn decoder_measurements(&self) -> Vec<f64> {
        match &self.quant {
            Some(q) => q.dequantize(),
            None => self.measurements.clone(),
        }
    }

    pub fn quantize(&mut self, bits: u8) -> Result<()> {
        self.quant = Some(quantize_measurements(&self.measurements, bits)?);
        Ok(())
    }
}

/// `y = Φ x`.
pub fn cs_encode(frame: &Frame, phi: &MeasurementMatrix, basis: BasisKind) -> Result<CsEncodedFrame> {
    if phi.n() != frame.len() {
        return Err(Error::DimensionMismatch { expected: phi.n(), actual: frame.len() });
    }
    if frame.samples.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("cs_encode"));
    }
    Ok(CsEncodedFrame {
        frame_index: frame.index,
        n: frame.len(),
        basis,
        seed: phi.seed(),
        measurements: phi.entries().mul_vec(&frame.samples),
        quant: None,
    })
}

/// `A = Φ Ψ` in the stacked real layout (`M × 2N` for the DFT).
///
/// Computed row by row as one fast transform per row of `Φ`, which costs
/// `O(M N log N)` instead of the dense `O(M N²)` product.
pub fn sensing_operator(phi: &MeasurementMatrix, basis: BasisKind) -> Result<Matrix> {
    let t = Transform::new(basis, phi.n())?;
    sensing_operator_with(phi, &t)
}

pub fn sensing_operator_with(phi: &MeasurementMatrix, t: &Transform) -> Result<Matrix> {
    if t.len() != phi.n() {
        return Err(Error::DimensionMismatch { expected: t.len(), actual: phi.n() });
    }
    let cols = t.basis().stacked_len(phi.n());
    let mut data = Vec::with_capacity(phi.m() * cols);
    for r in 0..phi.m() {
        data.extend(t.sensing_row(phi.entries().row(r))?);
    }
    Matrix::from_row_major(phi.m(), cols, data)
}

/// `Φ · Ψ` by explicit dense product with a caller-supplied synthesis matrix.
pub fn sensing_operator_dense(phi: &MeasurementMatrix, psi: &Matrix) -> Result<Matrix> {
    if psi.rows() != phi.n() {
        return Err(Error::DimensionMismatch { expected: phi.n(), actual: psi.rows() });
    }
    Ok(phi.entries().mul(psi))
}

/// Dense reference for [`sensing_operator`] through the closed-form basis matrix.
pub fn sensing_operator_reference(phi: &MeasurementMatrix, basis: BasisKind) -> Result<Matrix> {
    sensing_operator_dense(phi, &stacked_basis_matrix(basis, phi.n())?)
}

/// Encoder configuration shared by every frame of a signal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CsEncoder {
    pub basis: BasisKind,
    pub n: usize,
    pub m: usize,
    pub master_seed: u64,
    pub quant_bits: Option<u8>,
}

impl CsEncoder {
    pub fn encode(&self, frame: &Frame) -> Result<CsEncodedFrame> {
        let phi = gen_measurement_matrix(frame_seed(self.master_seed, frame.index), self.m, self.n)?;
        let mut enc = cs_encode(frame, &phi, self.basis)?;
        if let Some(bits) = self.quant_bits {
            enc.quantize(bits)?;
        }
        Ok(enc)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matrix_is_deterministic_and_seed_sensitive() {
        let a = gen_measurement_matrix(11, 16, 64).unwrap();
        let b = gen_measurement_matrix(11, 16, 64).unwrap();
        let c = gen_measurement_matrix(12, 16, 64).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.entries(), c.entries());
    }

    #[test]
    fn matrix_shape_errors() {
        assert!(gen_measurement_matrix(0, 64, 64).is_err());
        assert!(gen_measurement_matrix(0, 0, 64).is_err());
    }

    #[test]
    fn smaller_matrices_are_scaled_prefixes() {
        let big = gen_measurement_matrix(3, 32, 64).unwrap();
        let small = gen_measurement_matrix(3, 16, 64).unwrap();
        let ratio = (32f64 / 16.0).sqrt();
        for c in 0..64 {
            assert!((small.entries()[(5, c)] - big.entries()[(5, c)] * ratio).abs() < 1e-12);
        }
    }

    #[test]
    fn measurement_count_rule() {
        assert_eq!(measurement_count(0.5, 1024).unwrap(), 512);
        assert_eq!(measurement_count(0.2, 1024).unwrap(), 819);
        assert_eq!(measurement_count(0.83, 1024).unwrap(), 174);
        assert!(measurement_count(0.0, 1024).is_err());
        assert!(measurement_count(1.0, 1024).is_err());
    }

    #[test]
    fn zero_frame_zero_measurements() {
        let phi = gen_measurement_matrix(1, 8, 32).unwrap();
        let enc = cs_encode(&Frame::new(0, vec![0.0; 32]), &phi, BasisKind::Dct).unwrap();
        assert!(enc.measurements.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn all_ones_matrix_on_unit_vector() {
        let phi = MeasurementMatrix::from_entries(0, Matrix::from_fn(4, 8, |_, _| 1.0));
        let mut x = vec![0.0; 8];
        x[0] = 1.0;
        let enc = cs_encode(&Frame::new(0, x), &phi, BasisKind::Dct).unwrap();
        assert_eq!(enc.measurements, vec![1.0; 4]);
    }

    #[test]
    fn encode_dimension_mismatch() {
        let phi = gen_measurement_matrix(1, 8, 32).unwrap();
        assert!(matches!(
            cs_encode(&Frame::new(0, vec![0.0; 16]), &phi, BasisKind::Dct),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn identity_basis_gives_phi() {
        let phi = gen_measurement_matrix(5, 6, 16).unwrap();
        let a = sensing_operator_dense(&phi, &Matrix::identity(16)).unwrap();
        assert_eq!(&a, phi.entries());
    }

    #[test]
    fn fast_operator_matches_dense_product() {
        for basis in [BasisKind::Dct, BasisKind::Dft, BasisKind::haar(), BasisKind::db4()] {
            let phi = gen_measurement_matrix(9, 12, 64).unwrap();
            let fast = sensing_operator(&phi, basis).unwrap();
            let dense = sensing_operator_reference(&phi, basis).unwrap();
            assert!(fast.max_abs_diff(&dense) < 1e-12, "{basis}");
        }
    }

    #[test]
    fn quantizer_edge_cases() {
        let q = quantize_measurements(&[0.0; 5], 16).unwrap();
        assert!(q.codes.iter().all(|&c| c == 0));
        assert_eq!(q.dequantize(), vec![0.0; 5]);
        assert!(quantize_measurements(&[], 16).is_err());
        assert!(quantize_measurements(&[1.0], 7).is_err());
        assert!(quantize_measurements(&[1.0], 33).is_err());
    }

    #[test]
    fn quantizer_step_bound() {
        let y: Vec<f64> = (0..=200).map(|i| -1.0 + i as f64 / 100.0).collect();
        for bits in [8u8, 12, 16, 24, 32] {
            let q = quantize_measurements(&y, bits).unwrap();
            let back = q.dequantize();
            let err = y.iter().zip(&back).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            assert!(err <= q.step() / 2.0 + 1e-15, "bits={bits}");
            if bits == 16 {
                assert!(err <= 2.0 / 65536.0);
            }
            let lim = 2f64.powi(bits as i32 - 1);
            assert!(q.codes.iter().all(|&c| (c as f64) >= -lim && (c as f64) < lim));
        }
    }
}
