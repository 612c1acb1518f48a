//! Sparse-FFT codec: keep the `K` largest unitary-FFT coefficients of a frame
//! and pack each as two 16-bit words whose low bits carry the bin index.

pub mod sublinear;

use num_complex::Complex64;

use crate::audio::Frame;
use crate::error::{invalid, Error, Result};
use crate::transforms::{BasisKind, Coefficients, Transform};

pub use sublinear::{SublinearParams, SublinearPlan};

/// Index bits embedded per coefficient; both halves together address `2^10` bins.
pub const INDEX_BITS: u32 = 10;
pub const HALF_INDEX_BITS: u32 = INDEX_BITS / 2;
/// Largest frame length the packed layout can address.
pub const MAX_PACKED_N: usize = 1 << INDEX_BITS;
/// Fraction bits that survive the embedded index.
pub const VALUE_FRACTION_BITS: u32 = 5;
/// Largest magnitude field: 5 integer bits and 5 surviving fraction bits.
pub const MAX_MAGNITUDE_CODE: u16 = (1 << 10) - 1;
/// Largest representable `|component| / scale`.
pub const MAX_SCALED_VALUE: f64 = MAX_MAGNITUDE_CODE as f64 / (1 << VALUE_FRACTION_BITS) as f64;
/// Serialized frame header: method(8) + frame_index(32) + N(16) + K(16) + scale(64).
pub const FRAME_HEADER_BITS: usize = 136;
pub const BITS_PER_COEFFICIENT: usize = 32;

const SIGN_BIT: u16 = 0x8000;
const LOW_MASK: u16 = (1 << HALF_INDEX_BITS) - 1;

/// `K` spectral entries of an `N`-bin spectrum, indices unique and ascending.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseSpectrum {
    pub n: usize,
    pub entries: Vec<(usize, Complex64)>,
}

impl SparseSpectrum {
    pub fn k(&self) -> usize {
        self.entries.len()
    }

    pub fn indices(&self) -> Vec<usize> {
        self.entries.iter().map(|e| e.0).collect()
    }

    pub fn to_dense(&self) -> Vec<Complex64> {
        let mut out = vec![Complex64::new(0.0, 0.0); self.n];
        for &(i, v) in &self.entries {
            out[i] = v;
        }
        out
    }
}

/// The `k` bins of largest magnitude, ties to the lower bin, sorted by bin.
pub fn top_k_spectrum(spectrum: &[Complex64], k: usize) -> Result<SparseSpectrum> {
    let n = spectrum.len();
    if k == 0 || k > n {
        return Err(invalid(format!("top-K needs 1 ≤ k ≤ N (k={k}, N={n})")));
    }
    if spectrum.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
        return Err(Error::NonFinite("top_k_spectrum"));
    }
    let mut order: Vec<usize> = (0..n).collect();
    let rank = |&a: &usize, &b: &usize| {
        spectrum[b].norm_sqr().total_cmp(&spectrum[a].norm_sqr()).then(a.cmp(&b))
    };
    if k < n {
        order.select_nth_unstable_by(k - 1, rank);
        order.truncate(k);
    }
    order.sort_unstable();
    Ok(SparseSpectrum { n, entries: order.into_iter().map(|i| (i, spectrum[i])).collect() })
}

/// Two 16-bit words, each `sign(1) | magnitude(10) | index half(5)`.
///
/// The magnitude field is the fixed-point `|v| / scale` with 5 integer and 5
/// fraction bits. The real word's low field holds index bits 9..5, the
/// imaginary word's low field holds bits 4..0.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PackedCoefficient {
    pub real_word: u16,
    pub imag_word: u16,
}

impl PackedCoefficient {
    pub fn index(&self) -> usize {
        (((self.real_word & LOW_MASK) as usize) << HALF_INDEX_BITS) | (self.imag_word & LOW_MASK) as usize
    }
}

fn encode_component(u: f64, index_half: u16) -> (u16, bool) {
    let q = (u.abs() * (1 << VALUE_FRACTION_BITS) as f64).round();
    let saturated = q > MAX_MAGNITUDE_CODE as f64;
    let q = q.min(MAX_MAGNITUDE_CODE as f64) as u16;
    let sign = if u < 0.0 && q > 0 { SIGN_BIT } else { 0 };
    (sign | (q << HALF_INDEX_BITS) | index_half, saturated)
}

fn decode_component(w: u16) -> f64 {
    let q = (w & !SIGN_BIT) >> HALF_INDEX_BITS;
    let v = q as f64 / (1 << VALUE_FRACTION_BITS) as f64;
    if w & SIGN_BIT != 0 {
        -v
    } else {
        v
    }
}

/// Packs `value / scale` with `bin_index` embedded. The flag reports saturation
/// of either component beyond [`MAX_SCALED_VALUE`].
pub fn pack_coefficient(value: Complex64, bin_index: usize, scale: f64) -> Result<(PackedCoefficient, bool)> {
    if bin_index >= MAX_PACKED_N {
        return Err(invalid(format!("bin index {bin_index} does not fit in {INDEX_BITS} bits")));
    }
    if !(scale.is_finite() && scale > 0.0) {
        return Err(invalid(format!("pack scale must be positive and finite, got {scale}")));
    }
    if !value.re.is_finite() || !value.im.is_finite() {
        return Err(Error::NonFinite("pack_coefficient"));
    }
    let hi = (bin_index >> HALF_INDEX_BITS) as u16;
    let lo = (bin_index as u16) & LOW_MASK;
    let (real_word, sr) = encode_component(value.re / scale, hi);
    let (imag_word, si) = encode_component(value.im / scale, lo);
    Ok((PackedCoefficient { real_word, imag_word }, sr || si))
}

/// Any bit pattern decodes; index bits are masked off before conversion.
pub fn unpack_coefficient(pc: PackedCoefficient, scale: f64) -> (Complex64, usize) {
    let v = Complex64::new(decode_component(pc.real_word), decode_component(pc.imag_word));
    (v * scale, pc.index())
}

/// Scale that maps the largest component onto the top of the magnitude range.
/// An all-zero spectrum gets scale 1.
pub fn spectrum_scale(s: &SparseSpectrum) -> f64 {
    let peak = s.entries.iter().fold(0.0f64, |m, (_, v)| m.max(v.re.abs()).max(v.im.abs()));
    if peak > 0.0 {
        peak / MAX_SCALED_VALUE
    } else {
        1.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SfftEncodedFrame {
    pub frame_index: usize,
    pub n: usize,
    pub scale: f64,
    pub packed: Vec<PackedCoefficient>,
    /// Coefficients whose magnitude was clipped while packing.
    pub saturated: usize,
}

impl SfftEncodedFrame {
    pub fn k(&self) -> usize {
        self.packed.len()
    }

    /// Serialized size: header plus 32 bits per coefficient.
    pub fn bits(&self) -> usize {
        FRAME_HEADER_BITS + BITS_PER_COEFFICIENT * self.k()
    }
}

/// Which bins a decoder dropped.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DecodeIssues {
    /// Repeated indices; the first occurrence was kept.
    pub duplicates: Vec<usize>,
    /// Indices at or beyond `N`; skipped.
    pub out_of_range: Vec<usize>,
}

impl DecodeIssues {
    pub fn is_clean(&self) -> bool {
        self.duplicates.is_empty() && self.out_of_range.is_empty()
    }
}

/// How the `K` largest bins are found.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum Selection {
    #[default]
    Exact,
    Sublinear(SublinearParams),
}

/// Frame-length-specific encoder/decoder holding the FFT plans.
#[derive(Debug, Clone)]
pub struct SfftCodec {
    n: usize,
    dft: Transform,
}

impl SfftCodec {
    pub fn new(n: usize) -> Result<Self> {
        if n > MAX_PACKED_N {
            return Err(invalid(format!("frame length {n} exceeds the {MAX_PACKED_N}-bin packing limit")));
        }
        Ok(Self { n, dft: Transform::new(BasisKind::Dft, n)? })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Unitary spectrum of a frame.
    pub fn spectrum(&self, frame: &Frame) -> Result<Vec<Complex64>> {
        match self.dft.forward(&frame.samples)? {
            Coefficients::Complex(c) => Ok(c),
            Coefficients::Real(_) => unreachable!("dft yields complex coefficients"),
        }
    }

    pub fn encode(&self, frame: &Frame, k: usize) -> Result<SfftEncodedFrame> {
        let spec = self.spectrum(frame)?;
        encode_spectrum(frame.index, &top_k_spectrum(&spec, k)?)
    }

    /// Decodes, reporting dropped bins instead of failing on them.
    pub fn decode_checked(&self, enc: &SfftEncodedFrame) -> Result<(Frame, DecodeIssues)> {
        if enc.n != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, actual: enc.n });
        }
        let (spec, issues) = unpack_spectrum(enc);
        let samples = self.dft.inverse(&Coefficients::Complex(spec))?;
        Ok((Frame::new(enc.frame_index, samples), issues))
    }

    pub fn decode(&self, enc: &SfftEncodedFrame) -> Result<Frame> {
        let (frame, issues) = self.decode_checked(enc)?;
        if !issues.is_clean() {
            log::warn!("frame {}: dropped corrupt bins {issues:?}", enc.frame_index);
        }
        Ok(frame)
    }
}

/// Packs an already selected spectrum.
pub fn encode_spectrum(frame_index: usize, s: &SparseSpectrum) -> Result<SfftEncodedFrame> {
    if s.n > MAX_PACKED_N {
        return Err(invalid(format!("frame length {} exceeds the {MAX_PACKED_N}-bin packing limit", s.n)));
    }
    let scale = spectrum_scale(s);
    let mut packed = Vec::with_capacity(s.k());
    let mut saturated = 0;
    for &(i, v) in &s.entries {
        let (pc, sat) = pack_coefficient(v, i, scale)?;
        saturated += sat as usize;
        packed.push(pc);
    }
    Ok(SfftEncodedFrame { frame_index, n: s.n, scale, packed, saturated })
}

/// Dense spectrum from packed words: the first occurrence of an index wins.
pub fn unpack_spectrum(enc: &SfftEncodedFrame) -> (Vec<Complex64>, DecodeIssues) {
    let mut spec = vec![Complex64::new(0.0, 0.0); enc.n];
    let mut seen = vec![false; enc.n];
    let mut issues = DecodeIssues::default();
    for &pc in &enc.packed {
        let (v, i) = unpack_coefficient(pc, enc.scale);
        if i >= enc.n {
            issues.out_of_range.push(i);
        } else if seen[i] {
            issues.duplicates.push(i);
        } else {
            seen[i] = true;
            spec[i] = v;
        }
    }
    (spec, issues)
}

/// Unitary FFT, top-K, and packing.
pub fn sfft_encode(frame: &Frame, k: usize) -> Result<SfftEncodedFrame> {
    SfftCodec::new(frame.len())?.encode(frame, k)
}

/// [`sfft_encode`] with the bins chosen by `selection`.
pub fn sfft_encode_with(frame: &Frame, k: usize, selection: Selection) -> Result<SfftEncodedFrame> {
    match selection {
        Selection::Exact => sfft_encode(frame, k),
        Selection::Sublinear(params) => {
            SfftCodec::new(frame.len())?;
            let est = SublinearPlan::new(frame.len(), k, params)?.top_k(frame)?;
            if !est.complete {
                log::debug!("frame {}: sublinear search found {} of {k} bins", frame.index, est.spectrum.k());
            }
            encode_spectrum(frame.index, &est.spectrum)
        }
    }
}

/// Zero-fills the unpacked bins and takes the real part of the inverse FFT.
pub fn sfft_decode(enc: &SfftEncodedFrame) -> Result<Frame> {
    SfftCodec::new(enc.n)?.decode(enc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::similarity;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn top_k_delta_and_ties() {
        let mut s = vec![c(0.0, 0.0); 16];
        s[7] = c(0.0, -2.0);
        assert_eq!(top_k_spectrum(&s, 1).unwrap().entries, vec![(7, c(0.0, -2.0))]);
        let flat = vec![c(1.0, 0.0); 8];
        assert_eq!(top_k_spectrum(&flat, 3).unwrap().indices(), vec![0, 1, 2]);
        assert!(top_k_spectrum(&flat, 0).is_err());
        assert!(top_k_spectrum(&flat, 9).is_err());
        assert_eq!(top_k_spectrum(&flat, 8).unwrap().k(), 8);
    }

    #[test]
    fn zero_value_words() {
        let (pc, sat) = pack_coefficient(c(0.0, 0.0), 0, 1.0).unwrap();
        assert_eq!((pc.real_word, pc.imag_word, sat), (0, 0, false));
        let (pc, _) = pack_coefficient(c(0.0, 0.0), 1023, 1.0).unwrap();
        assert_eq!((pc.real_word, pc.imag_word), (0b11111, 0b11111));
        assert_eq!(unpack_coefficient(pc, 1.0), (c(0.0, 0.0), 1023));
    }

    #[test]
    fn all_ones_is_most_negative() {
        let pc = PackedCoefficient { real_word: u16::MAX, imag_word: u16::MAX };
        let (v, i) = unpack_coefficient(pc, 2.0);
        assert_eq!(i, 1023);
        assert_eq!(v, c(-2.0 * MAX_SCALED_VALUE, -2.0 * MAX_SCALED_VALUE));
    }

    #[test]
    fn saturation_is_flagged() {
        let (pc, sat) = pack_coefficient(c(40.0, -1.0), 3, 1.0).unwrap();
        assert!(sat);
        assert_eq!(unpack_coefficient(pc, 1.0).0, c(MAX_SCALED_VALUE, -1.0));
        assert!(pack_coefficient(c(1.0, 0.0), 1024, 1.0).is_err());
        assert!(pack_coefficient(c(1.0, 0.0), 5, 0.0).is_err());
    }

    #[test]
    fn tone_keeps_conjugate_pair() {
        let n = 1024;
        let x: Vec<f64> = (0..n).map(|t| (2.0 * std::f64::consts::PI * 100.0 * t as f64 / n as f64).cos()).collect();
        let frame = Frame::new(0, x.clone());
        let enc = sfft_encode(&frame, 2).unwrap();
        let idx: Vec<usize> = enc.packed.iter().map(|p| p.index()).collect();
        assert_eq!(idx, vec![100, n - 100]);
        let out = sfft_decode(&enc).unwrap();
        assert!(similarity(&x, &out.samples).unwrap() < 1e-3);
        assert_eq!(enc.bits(), 136 + 64);
    }

    #[test]
    fn silent_frame() {
        let enc = sfft_encode(&Frame::new(0, vec![0.0; 64]), 4).unwrap();
        assert_eq!(enc.scale, 1.0);
        let idx: Vec<usize> = enc.packed.iter().map(|p| p.index()).collect();
        assert_eq!(idx, vec![0, 1, 2, 3]);
        assert!(sfft_decode(&enc).unwrap().samples.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn duplicates_keep_first() {
        let (a, _) = pack_coefficient(c(1.0, 0.0), 3, 1.0).unwrap();
        let (b, _) = pack_coefficient(c(-1.0, 0.0), 3, 1.0).unwrap();
        let (d, _) = pack_coefficient(c(1.0, 0.0), 40, 1.0).unwrap();
        let enc = SfftEncodedFrame { frame_index: 0, n: 16, scale: 1.0, packed: vec![a, b, d], saturated: 0 };
        let (spec, issues) = unpack_spectrum(&enc);
        assert_eq!(spec[3], c(1.0, 0.0));
        assert_eq!(issues, DecodeIssues { duplicates: vec![3], out_of_range: vec![40] });
    }

    #[test]
    fn frame_length_limit() {
        assert!(SfftCodec::new(2048).is_err());
        assert!(SfftCodec::new(1024).is_ok());
    }
}
